#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "biaseval/embedding.hpp"

namespace biaseval {

// A labelled group of words, e.g. "masculine" or "career". Words are
// NFC-normalized and must be unique.
class WordSet {
 public:
  WordSet(std::string name, std::vector<std::string> words);

  const std::string& name() const { return name_; }
  const std::vector<std::string>& words() const { return words_; }

  friend bool operator==(const WordSet&, const WordSet&) = default;

 private:
  std::string name_;
  std::vector<std::string> words_;
};

// Target sets and attribute sets measured against each other. At least one
// target set is required; attribute sets may be empty for (t, 0) templates.
class Query {
 public:
  Query(std::string label, std::vector<WordSet> targets, std::vector<WordSet> attributes);

  const std::string& label() const { return label_; }
  const std::vector<WordSet>& targets() const { return targets_; }
  const std::vector<WordSet>& attributes() const { return attributes_; }

  friend bool operator==(const Query&, const Query&) = default;

 private:
  std::string label_;
  std::vector<WordSet> targets_;
  std::vector<WordSet> attributes_;
};

// Number of target and attribute sets a metric consumes.
struct QueryTemplate {
  std::size_t targets = 1;
  std::size_t attributes = 0;

  friend bool operator==(const QueryTemplate&, const QueryTemplate&) = default;
};

struct TemplateCheck {
  bool ok = true;
  std::string violation;

  explicit operator bool() const { return ok; }
};

TemplateCheck validate_query(const Query& query, const QueryTemplate& tmpl);

struct ExpansionWarning {
  std::string query_label;
  std::string message;
};

struct Expansion {
  std::vector<Query> subqueries;
  std::vector<ExpansionWarning> warnings;
};

/// Every combination of `tmpl.targets` target sets and `tmpl.attributes`
/// attribute sets of every query, in input order. Subqueries whose sorted
/// target names and sorted attribute names repeat an earlier one are dropped.
/// Queries too small for the template are skipped with a warning.
Expansion expand_subqueries(const std::vector<Query>& queries, const QueryTemplate& tmpl);

// Vectors of one resolved word set; tokens[i] owns rows[i].
struct NamedMatrix {
  std::string name;
  std::vector<std::string> tokens;
  std::vector<Vector> rows;

  std::size_t size() const { return rows.size(); }
};

struct ResolvedQuery {
  std::string label;
  std::vector<NamedMatrix> targets;
  std::vector<NamedMatrix> attributes;
  // One entry per word set: targets first, then attributes.
  std::vector<std::pair<std::string, WordResolution>> provenance;
};

/// Resolves each word set independently. A VocabularyLossError names the
/// offending set.
ResolvedQuery resolve_query(const Query& query, const EmbeddingTable& table,
                            double lost_threshold = kDefaultLostThreshold);

/// Reads queries from UTF-8 JSON: either one object
/// {"label", "targets": [{"name", "words"}], "attributes": [...]} or an array
/// of such objects.
std::vector<Query> load_queries(const std::filesystem::path& path);
std::vector<Query> parse_queries(std::string_view json_text);

}  // namespace biaseval

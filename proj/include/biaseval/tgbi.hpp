#pragma once

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biaseval/eec.hpp"
#include "biaseval/translation.hpp"
#include "json.hpp"

namespace biaseval {

// Lowercase tokens that mark a translation as she-, he- or they-associated.
// The three sets are pairwise disjoint and non-empty.
class GenderLexicon {
 public:
  GenderLexicon(std::set<std::string> she, std::set<std::string> he,
                std::set<std::string> they);

  const std::set<std::string>& she() const { return she_; }
  const std::set<std::string>& he() const { return he_; }
  const std::set<std::string>& they() const { return they_; }

  /// Canonical text form; also what the report hashes.
  std::string serialize() const;

 private:
  std::set<std::string> she_, he_, they_;
};

GenderLexicon default_gender_lexicon();
/// Sections "[she]", "[he]", "[they]", one token per line, '#' comments.
GenderLexicon load_gender_lexicon(const std::filesystem::path& path);
GenderLexicon parse_gender_lexicon(std::string_view text);

enum class Bucket { kShe, kHe, kThey, kUnresolved };

std::string_view bucket_name(Bucket bucket);

// What to do with a sentence that contains both she- and he-words.
enum class AmbiguityPolicy { kUnresolved, kFirstToken };

/// Lowercases, splits on whitespace and punctuation and matches tokens
/// against the lexicon. A unique she/he hit wins over they-hits.
Bucket classify_sentence(std::string_view text, const GenderLexicon& lex,
                         AmbiguityPolicy policy = AmbiguityPolicy::kUnresolved);

/// Lowercased word tokens of `text`.
std::vector<std::string> tokenize_words(std::string_view text);

struct BucketCounts {
  std::size_t n_she = 0;
  std::size_t n_he = 0;
  std::size_t n_they = 0;
  std::size_t n_unresolved = 0;
  std::size_t total = 0;

  std::size_t resolved() const { return n_she + n_he + n_they; }
  void add(Bucket bucket);
};

/// Failed translations count as unresolved. Throws InputError on empty input.
BucketCounts count_buckets(const std::vector<std::pair<Utterance, TranslationRecord>>& pairs,
                           const GenderLexicon& lex,
                           AmbiguityPolicy policy = AmbiguityPolicy::kUnresolved);

struct Proportions {
  double p_he = 0.0;
  double p_she = 0.0;
  double p_they = 0.0;
};

/// Shares over resolved sentences only. Throws ComputationError if none.
Proportions proportions(const BucketCounts& counts);

enum class IndexVariant {
  kEq8Sqrt,       // sqrt(p_he * p_she + p_they)
  kTable2Linear,  // p_he * p_she + p_they
};

std::string_view variant_name(IndexVariant variant);
IndexVariant parse_variant(std::string_view name);

/// Per-set index. Throws ComputationError if the inputs are off the simplex
/// by more than 1e-9 or negative.
double p_index(double p_he, double p_she, double p_they,
               IndexVariant variant = IndexVariant::kTable2Linear);

struct SetScore {
  ViewName view = ViewName::kInformal;
  std::size_t size = 0;
  BucketCounts counts;
  double p_he = 0.0;
  double p_she = 0.0;
  double p_they = 0.0;
  double p_index = 0.0;
  IndexVariant variant = IndexVariant::kTable2Linear;
};

struct TgbiReport {
  std::vector<SetScore> scores;
  double tgbi = 0.0;
  std::string backend;
  IndexVariant variant = IndexVariant::kTable2Linear;
};

struct TgbiOptions {
  IndexVariant variant = IndexVariant::kTable2Linear;
  AmbiguityPolicy policy = AmbiguityPolicy::kUnresolved;
  std::string backend;
};

/// Counts, proportions and index for each of the seven views, then their
/// mean. View members without a translation count as unresolved. Throws
/// ComputationError if a view is empty or fully unresolved.
TgbiReport score_views(const std::vector<EvaluationSet>& views,
                       const std::vector<std::pair<Utterance, TranslationRecord>>& pairs,
                       const GenderLexicon& lex, const TgbiOptions& options = {});

nlohmann::ordered_json tgbi_report_json(const TgbiReport& report);

/// Rows "View | Size | P_i (p_she, p_they)" then an "Average:" row.
std::string render_tgbi_table(const TgbiReport& report);

}  // namespace biaseval

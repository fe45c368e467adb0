#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "biaseval/error.hpp"

namespace biaseval {

using Vector = std::vector<double>;
using VectorView = std::span<const double>;

// Immutable token -> vector map. Vectors are stored raw; nothing is
// pre-normalized. Tokens are NFC-normalized on insertion.
class EmbeddingTable {
 public:
  // Builds a table from (token, vector) rows. Rows with a token already
  // present are skipped and counted in duplicate_count(). Throws InputError
  // if dim == 0, a row has the wrong arity or a non-finite component, or
  // no rows survive.
  EmbeddingTable(std::string name, std::size_t dim,
                 std::vector<std::pair<std::string, Vector>> rows);

  const std::string& name() const { return name_; }
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return tokens_.size(); }
  std::size_t duplicate_count() const { return duplicates_; }

  // Case folding is on by default for tables whose vocabulary is mostly
  // Latin script and off for anything else (e.g. Devanagari).
  bool default_fold_case() const { return fold_case_default_; }

  // Returns the stored vector, or std::nullopt on a miss. With fold_case the
  // lowercased token is tried first and the token as given second.
  std::optional<VectorView> lookup(std::string_view token, bool fold_case) const;
  std::optional<VectorView> lookup(std::string_view token) const {
    return lookup(token, fold_case_default_);
  }

  // Tokens in load order.
  const std::vector<std::string>& tokens() const { return tokens_; }
  VectorView row(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

 private:
  std::optional<VectorView> find_exact(const std::string& token) const;

  std::string name_;
  std::size_t dim_;
  std::vector<std::string> tokens_;
  std::vector<double> data_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t duplicates_ = 0;
  bool fold_case_default_ = false;
};

/// Parses the word2vec text format: a "<vocab_count> <dim>" header followed
/// by "<token> <dim floats>" rows. The number of rows must equal vocab_count.
EmbeddingTable load_word2vec_text(const std::filesystem::path& path, std::string name);
EmbeddingTable parse_word2vec_text(std::string_view text, std::string name);

/// Writes a table in the same format, components printed round-trip exact.
void write_word2vec_text(const EmbeddingTable& table, const std::filesystem::path& path);

struct WordResolution {
  std::vector<std::pair<std::string, Vector>> found;
  std::vector<std::string> dropped;
  double loss_fraction = 0.0;
};

inline constexpr double kDefaultLostThreshold = 0.2;

// Raised when a word list and an embedding do not fit together: either too
// many words are out of vocabulary, or none are left.
class VocabularyLossError : public ComputationError {
 public:
  enum class Kind { kExcessiveLoss, kEmptyResult };

  VocabularyLossError(Kind kind, std::string set_name, double loss_fraction,
                      std::vector<std::string> dropped);

  Kind kind() const { return kind_; }
  const std::string& set_name() const { return set_name_; }
  double loss_fraction() const { return loss_fraction_; }
  const std::vector<std::string>& dropped() const { return dropped_; }

 private:
  Kind kind_;
  std::string set_name_;
  double loss_fraction_;
  std::vector<std::string> dropped_;
};

/// Looks every word up (table default case folding) and keeps the hits in
/// input order. Throws VocabularyLossError when loss_fraction exceeds
/// lost_threshold or nothing was found. `set_name` only labels the error.
WordResolution resolve_word_set(const EmbeddingTable& table,
                                const std::vector<std::string>& words,
                                double lost_threshold = kDefaultLostThreshold,
                                std::string_view set_name = {});

/// dot(u,v) / (|u| |v|), clamped to [-1, 1]. Throws ComputationError on a
/// zero-norm input or a dimension mismatch.
double cosine(VectorView u, VectorView v);

double dot(VectorView u, VectorView v);
double l2_norm(VectorView v);

}  // namespace biaseval

#pragma once

// Random embedding + query pairs for oracle comparisons: every set holds
// 1..5 words (2..5 for ECT attributes), vectors live in 1..4 dimensions.

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "biaseval/embedding.hpp"
#include "biaseval/query.hpp"
#include "oracle.hpp"
#include "support.hpp"

namespace testing_support {

struct RandomCase {
  biaseval::EmbeddingTable table;
  biaseval::Query query;
  // Raw vectors per set, in word order, straight from the generator.
  std::vector<std::vector<std::pair<std::string, oracle::Vec>>> targets;
  std::vector<std::vector<std::pair<std::string, oracle::Vec>>> attributes;

  oracle::Mat target(std::size_t i) const { return strip(targets[i]); }
  oracle::Mat attribute(std::size_t i) const { return strip(attributes[i]); }

  static oracle::Mat strip(const std::vector<std::pair<std::string, oracle::Vec>>& set) {
    oracle::Mat m;
    for (const auto& [w, v] : set) m.push_back(v);
    return m;
  }
};

// Target sets may share words with each other (RNSB dedups them); word sets
// never repeat a word internally.
inline RandomCase random_case(Gen& g, std::size_t n_targets, std::size_t n_attributes,
                              std::size_t min_attribute_words = 1) {
  const std::size_t dim = static_cast<std::size_t>(g.integer(1, 4));
  const int vocab = 14;
  std::vector<std::pair<std::string, biaseval::Vector>> rows;
  for (int i = 0; i < vocab; ++i) rows.emplace_back("w" + std::to_string(i), g.vector(dim));

  auto draw = [&](std::size_t min_words) {
    int n = g.integer(static_cast<int>(min_words), 5);
    std::vector<int> ids(vocab);
    for (int i = 0; i < vocab; ++i) ids[i] = i;
    std::shuffle(ids.begin(), ids.end(), g.engine());
    std::vector<std::pair<std::string, oracle::Vec>> set;
    for (int k = 0; k < n; ++k) set.push_back(rows[static_cast<std::size_t>(ids[k])]);
    return set;
  };

  std::vector<biaseval::WordSet> ts, as;
  RandomCase rc{biaseval::EmbeddingTable("rand", dim, rows),
                biaseval::Query("tmp", {biaseval::WordSet("t", {"w0"})}, {}),
                {},
                {}};
  auto words_of = [](const auto& set) {
    std::vector<std::string> w;
    for (const auto& [tok, v] : set) w.push_back(tok);
    return w;
  };
  for (std::size_t i = 0; i < n_targets; ++i) {
    rc.targets.push_back(draw(1));
    ts.emplace_back("T" + std::to_string(i + 1), words_of(rc.targets.back()));
  }
  for (std::size_t i = 0; i < n_attributes; ++i) {
    rc.attributes.push_back(draw(min_attribute_words));
    as.emplace_back("A" + std::to_string(i + 1), words_of(rc.attributes.back()));
  }
  rc.query = biaseval::Query("random", std::move(ts), std::move(as));
  return rc;
}

}  // namespace testing_support

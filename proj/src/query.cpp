#include "biaseval/query.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <set>
#include <unordered_set>

#include "biaseval/unicode.hpp"
#include "json.hpp"

namespace biaseval {
namespace {

// Calls visit(indices) for every size-k subset of {0..n-1} in lexicographic
// order.
template <typename Visit>
void for_each_combination(std::size_t n, std::size_t k, Visit&& visit) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    visit(static_cast<const std::vector<std::size_t>&>(idx));
    if (k == 0) return;
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

std::vector<WordSet> pick(const std::vector<WordSet>& sets, const std::vector<std::size_t>& idx) {
  std::vector<WordSet> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(sets[i]);
  return out;
}

std::string join_names(const std::vector<WordSet>& sets) {
  std::string out;
  for (const auto& s : sets) {
    if (!out.empty()) out += ", ";
    out += s.name();
  }
  return out;
}

std::vector<std::string> sorted_names(const std::vector<WordSet>& sets) {
  std::vector<std::string> names;
  for (const auto& s : sets) names.push_back(s.name());
  std::sort(names.begin(), names.end());
  return names;
}

NamedMatrix to_matrix(const std::string& name, const WordResolution& res) {
  NamedMatrix m;
  m.name = name;
  for (const auto& [token, vec] : res.found) {
    m.tokens.push_back(token);
    m.rows.push_back(vec);
  }
  return m;
}

std::vector<WordSet> parse_sets(const nlohmann::json& node, const std::string& label,
                                const char* key) {
  std::vector<WordSet> sets;
  if (!node.contains(key)) return sets;
  const auto& arr = node.at(key);
  if (!arr.is_array()) throw InputError("query '" + label + "': \"" + key + "\" must be an array");
  for (const auto& s : arr) {
    if (!s.is_object() || !s.contains("name") || !s.contains("words")) {
      throw InputError("query '" + label + "': every set needs \"name\" and \"words\"");
    }
    sets.emplace_back(s.at("name").get<std::string>(),
                      s.at("words").get<std::vector<std::string>>());
  }
  return sets;
}

}  // namespace

WordSet::WordSet(std::string name, std::vector<std::string> words) : name_(std::move(name)) {
  if (name_.empty()) throw InputError("word set name must be non-empty");
  if (words.empty()) throw InputError("word set '" + name_ + "' is empty");
  std::unordered_set<std::string> seen;
  for (auto& w : words) {
    std::string norm = unicode::nfc(w);
    if (norm.empty()) throw InputError("word set '" + name_ + "' contains an empty word");
    if (!seen.insert(norm).second) {
      throw InputError("word set '" + name_ + "' repeats the word '" + norm + "'");
    }
    words_.push_back(std::move(norm));
  }
}

Query::Query(std::string label, std::vector<WordSet> targets, std::vector<WordSet> attributes)
    : label_(std::move(label)), targets_(std::move(targets)), attributes_(std::move(attributes)) {
  if (targets_.empty()) throw InputError("query '" + label_ + "' has no target set");
  std::set<std::string> names;
  for (const auto* group : {&targets_, &attributes_}) {
    for (const auto& s : *group) {
      if (!names.insert(s.name()).second) {
        throw InputError("query '" + label_ + "' uses the set name '" + s.name() + "' twice");
      }
    }
  }
}

TemplateCheck validate_query(const Query& query, const QueryTemplate& tmpl) {
  if (query.targets().size() == tmpl.targets && query.attributes().size() == tmpl.attributes) {
    return {};
  }
  return {false, "query '" + query.label() + "' has " + std::to_string(query.targets().size()) +
                     " target and " + std::to_string(query.attributes().size()) +
                     " attribute sets, template requires (" + std::to_string(tmpl.targets) +
                     ", " + std::to_string(tmpl.attributes) + ")"};
}

Expansion expand_subqueries(const std::vector<Query>& queries, const QueryTemplate& tmpl) {
  Expansion out;
  std::set<std::pair<std::vector<std::string>, std::vector<std::string>>> seen;
  for (const auto& q : queries) {
    if (q.targets().size() < tmpl.targets || q.attributes().size() < tmpl.attributes) {
      out.warnings.push_back({q.label(), validate_query(q, tmpl).violation});
      continue;
    }
    if (validate_query(q, tmpl)) {
      if (seen.emplace(sorted_names(q.targets()), sorted_names(q.attributes())).second) {
        out.subqueries.push_back(q);
      }
      continue;
    }
    for_each_combination(q.targets().size(), tmpl.targets, [&](const auto& ti) {
      for_each_combination(q.attributes().size(), tmpl.attributes, [&](const auto& ai) {
        auto targets = pick(q.targets(), ti);
        auto attributes = pick(q.attributes(), ai);
        if (!seen.emplace(sorted_names(targets), sorted_names(attributes)).second) return;
        std::string label = q.label() + ": " + join_names(targets);
        if (!attributes.empty()) label += " | " + join_names(attributes);
        out.subqueries.emplace_back(std::move(label), std::move(targets), std::move(attributes));
      });
    });
  }
  return out;
}

ResolvedQuery resolve_query(const Query& query, const EmbeddingTable& table,
                            double lost_threshold) {
  ResolvedQuery rq;
  rq.label = query.label();
  for (const auto& s : query.targets()) {
    auto res = resolve_word_set(table, s.words(), lost_threshold, s.name());
    rq.targets.push_back(to_matrix(s.name(), res));
    rq.provenance.emplace_back(s.name(), std::move(res));
  }
  for (const auto& s : query.attributes()) {
    auto res = resolve_word_set(table, s.words(), lost_threshold, s.name());
    rq.attributes.push_back(to_matrix(s.name(), res));
    rq.provenance.emplace_back(s.name(), std::move(res));
  }
  return rq;
}

std::vector<Query> parse_queries(std::string_view json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("query file is not valid JSON: ") + e.what());
  }
  std::vector<nlohmann::json> nodes;
  if (doc.is_array()) {
    nodes.assign(doc.begin(), doc.end());
  } else if (doc.is_object() && doc.contains("queries")) {
    nodes.assign(doc.at("queries").begin(), doc.at("queries").end());
  } else {
    nodes.push_back(doc);
  }
  std::vector<Query> queries;
  try {
    for (const auto& node : nodes) {
      if (!node.is_object()) throw InputError("each query must be a JSON object");
      std::string label = node.value("label", std::string());
      if (label.empty()) label = "query" + std::to_string(queries.size() + 1);
      queries.emplace_back(label, parse_sets(node, label, "targets"),
                           parse_sets(node, label, "attributes"));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed query: ") + e.what());
  }
  if (queries.empty()) throw InputError("query file holds no query");
  return queries;
}

std::vector<Query> load_queries(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open query file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_queries(text);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace biaseval

#include "biaseval/tgbi.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_map>

#include "biaseval/error.hpp"
#include "biaseval/unicode.hpp"

namespace biaseval {
namespace {

std::set<std::string> lowered(const std::set<std::string>& words) {
  std::set<std::string> out;
  for (const auto& w : words) out.insert(unicode::lower(unicode::nfc(w)));
  return out;
}

std::string fixed4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

std::string title_case(std::string_view s) {
  std::string out(s);
  if (!out.empty()) out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  return out;
}

}  // namespace

GenderLexicon::GenderLexicon(std::set<std::string> she, std::set<std::string> he,
                             std::set<std::string> they)
    : she_(lowered(she)), he_(lowered(he)), they_(lowered(they)) {
  if (she_.empty() || he_.empty() || they_.empty()) {
    throw InputError("gender lexicon needs non-empty [she], [he] and [they] sets");
  }
  auto check = [](const std::set<std::string>& a, const std::set<std::string>& b,
                  const char* an, const char* bn) {
    for (const auto& w : a) {
      if (b.count(w)) {
        throw InputError("gender lexicon lists '" + w + "' under both [" + an + "] and [" + bn + "]");
      }
    }
  };
  check(she_, he_, "she", "he");
  check(she_, they_, "she", "they");
  check(he_, they_, "he", "they");
}

std::string GenderLexicon::serialize() const {
  std::string out;
  for (const auto& [name, set] : {std::pair{"she", &she_}, {"he", &he_}, {"they", &they_}}) {
    out += "[" + std::string(name) + "]\n";
    for (const auto& w : *set) out += w + "\n";
  }
  return out;
}

GenderLexicon default_gender_lexicon() {
  return GenderLexicon({"she", "her", "hers", "herself", "woman", "women", "girl", "girls", "female"},
                       {"he", "him", "his", "himself", "man", "men", "boy", "boys", "male"},
                       {"they", "them", "their", "theirs", "themselves", "person", "people"});
}

GenderLexicon parse_gender_lexicon(std::string_view text) {
  std::set<std::string> she, he, they;
  std::set<std::string>* current = nullptr;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    std::string entry = line.substr(b, e - b + 1);
    if (entry.front() == '#') continue;
    if (entry == "[she]") {
      current = &she;
    } else if (entry == "[he]") {
      current = &he;
    } else if (entry == "[they]") {
      current = &they;
    } else if (entry.front() == '[') {
      throw InputError("gender lexicon line " + std::to_string(line_no) + ": unknown section " +
                       entry);
    } else if (current == nullptr) {
      throw InputError("gender lexicon line " + std::to_string(line_no) +
                       ": token before any section header");
    } else {
      current->insert(entry);
    }
  }
  return GenderLexicon(std::move(she), std::move(he), std::move(they));
}

GenderLexicon load_gender_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open gender lexicon " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_gender_lexicon(text);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string_view bucket_name(Bucket bucket) {
  switch (bucket) {
    case Bucket::kShe: return "she";
    case Bucket::kHe: return "he";
    case Bucket::kThey: return "they";
    case Bucket::kUnresolved: return "unresolved";
  }
  return "?";
}

std::vector<std::string> tokenize_words(std::string_view text) {
  return unicode::words(unicode::lower(text));
}

Bucket classify_sentence(std::string_view text, const GenderLexicon& lex, AmbiguityPolicy policy) {
  bool she = false, he = false, they = false;
  Bucket first_gendered = Bucket::kUnresolved;
  for (const auto& tok : tokenize_words(text)) {
    if (lex.she().count(tok)) {
      she = true;
      if (first_gendered == Bucket::kUnresolved) first_gendered = Bucket::kShe;
    } else if (lex.he().count(tok)) {
      he = true;
      if (first_gendered == Bucket::kUnresolved) first_gendered = Bucket::kHe;
    } else if (lex.they().count(tok)) {
      they = true;
    }
  }
  if (she && he) {
    return policy == AmbiguityPolicy::kFirstToken ? first_gendered : Bucket::kUnresolved;
  }
  if (she) return Bucket::kShe;
  if (he) return Bucket::kHe;
  if (they) return Bucket::kThey;
  return Bucket::kUnresolved;
}

void BucketCounts::add(Bucket bucket) {
  switch (bucket) {
    case Bucket::kShe: ++n_she; break;
    case Bucket::kHe: ++n_he; break;
    case Bucket::kThey: ++n_they; break;
    case Bucket::kUnresolved: ++n_unresolved; break;
  }
  ++total;
}

BucketCounts count_buckets(const std::vector<std::pair<Utterance, TranslationRecord>>& pairs,
                           const GenderLexicon& lex, AmbiguityPolicy policy) {
  if (pairs.empty()) throw InputError("no translated sentences to count");
  BucketCounts counts;
  for (const auto& [u, r] : pairs) {
    counts.add(r.failed ? Bucket::kUnresolved : classify_sentence(r.output, lex, policy));
  }
  return counts;
}

Proportions proportions(const BucketCounts& counts) {
  const std::size_t resolved = counts.resolved();
  if (resolved == 0) {
    throw ComputationError("no sentence resolved to a she, he or they bucket (" +
                           std::to_string(counts.n_unresolved) + " unresolved)");
  }
  const double n = static_cast<double>(resolved);
  return {static_cast<double>(counts.n_he) / n, static_cast<double>(counts.n_she) / n,
          static_cast<double>(counts.n_they) / n};
}

std::string_view variant_name(IndexVariant variant) {
  return variant == IndexVariant::kEq8Sqrt ? "eq8_sqrt" : "table2_linear";
}

IndexVariant parse_variant(std::string_view name) {
  if (name == "eq8_sqrt") return IndexVariant::kEq8Sqrt;
  if (name == "table2_linear") return IndexVariant::kTable2Linear;
  throw InputError("unknown index variant '" + std::string(name) +
                   "' (expected table2_linear or eq8_sqrt)");
}

double p_index(double p_he, double p_she, double p_they, IndexVariant variant) {
  constexpr double kTol = 1e-9;
  for (double p : {p_he, p_she, p_they}) {
    if (!std::isfinite(p) || p < -kTol || p > 1.0 + kTol) {
      throw ComputationError("proportions must lie in [0, 1]");
    }
  }
  if (std::abs(p_he + p_she + p_they - 1.0) > kTol) {
    throw ComputationError("proportions must sum to 1");
  }
  double linear = std::clamp(p_he * p_she + p_they, 0.0, 1.0);
  return variant == IndexVariant::kEq8Sqrt ? std::sqrt(linear) : linear;
}

TgbiReport score_views(const std::vector<EvaluationSet>& views,
                       const std::vector<std::pair<Utterance, TranslationRecord>>& pairs,
                       const GenderLexicon& lex, const TgbiOptions& options) {
  if (views.size() != std::size(kAllViews)) {
    throw InputError("TGBI needs the seven evaluation views, got " + std::to_string(views.size()));
  }
  std::unordered_map<std::int64_t, Bucket> bucket_of;
  for (const auto& [u, r] : pairs) {
    bucket_of.emplace(u.id, r.failed ? Bucket::kUnresolved
                                     : classify_sentence(r.output, lex, options.policy));
  }

  TgbiReport report;
  report.backend = options.backend;
  report.variant = options.variant;
  double sum = 0.0;
  for (const auto& view : views) {
    if (view.utterance_ids.empty()) {
      throw ComputationError("evaluation view '" + std::string(view_name(view.name)) + "' is empty");
    }
    SetScore s;
    s.view = view.name;
    s.size = view.utterance_ids.size();
    s.variant = options.variant;
    for (auto id : view.utterance_ids) {
      auto it = bucket_of.find(id);
      s.counts.add(it == bucket_of.end() ? Bucket::kUnresolved : it->second);
    }
    Proportions p;
    try {
      p = proportions(s.counts);
    } catch (const ComputationError& e) {
      throw ComputationError("evaluation view '" + std::string(view_name(view.name)) +
                             "': " + e.what());
    }
    s.p_he = p.p_he;
    s.p_she = p.p_she;
    s.p_they = p.p_they;
    s.p_index = p_index(p.p_he, p.p_she, p.p_they, options.variant);
    sum += s.p_index;
    report.scores.push_back(s);
  }
  report.tgbi = sum / static_cast<double>(report.scores.size());
  return report;
}

nlohmann::ordered_json tgbi_report_json(const TgbiReport& report) {
  nlohmann::ordered_json j;
  j["backend"] = report.backend;
  j["variant"] = variant_name(report.variant);
  j["tgbi"] = report.tgbi;
  auto& views = j["views"] = nlohmann::ordered_json::array();
  for (const auto& s : report.scores) {
    nlohmann::ordered_json v;
    v["view"] = view_name(s.view);
    v["size"] = s.size;
    v["n_she"] = s.counts.n_she;
    v["n_he"] = s.counts.n_he;
    v["n_they"] = s.counts.n_they;
    v["n_unresolved"] = s.counts.n_unresolved;
    v["p_he"] = s.p_he;
    v["p_she"] = s.p_she;
    v["p_they"] = s.p_they;
    v["p_index"] = s.p_index;
    views.push_back(std::move(v));
  }
  return j;
}

std::string render_tgbi_table(const TgbiReport& report) {
  std::vector<std::array<std::string, 3>> rows;
  rows.push_back({"Sentence", "Size", "P_i (p_she, p_they)"});
  for (const auto& s : report.scores) {
    rows.push_back({title_case(view_name(s.view)), std::to_string(s.size),
                    fixed4(s.p_index) + " (" + fixed4(s.p_she) + ", " + fixed4(s.p_they) + ")"});
  }
  rows.push_back({"Average:", "", fixed4(report.tgbi)});

  std::array<std::size_t, 3> width{};
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < 3; ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string rule = "+";
  for (auto w : width) rule += std::string(w + 2, '-') + "+";
  rule += "\n";
  std::string out = rule;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i + 1 == rows.size()) out += rule;
    out += "|";
    for (std::size_t c = 0; c < 3; ++c) {
      out += " " + rows[i][c] + std::string(width[c] - rows[i][c].size(), ' ') + " |";
    }
    out += "\n";
    if (i == 0) out += rule;
  }
  out += rule;
  return out;
}

}  // namespace biaseval

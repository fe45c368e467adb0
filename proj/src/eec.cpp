#include "biaseval/eec.hpp"

#include <charconv>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include "biaseval/error.hpp"
#include "biaseval/unicode.hpp"

namespace biaseval {
namespace {

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string read_file(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(std::string("cannot open ") + what + " " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    auto next = s.find(sep, pos);
    if (next == std::string_view::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

void replace_all(std::string& s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
}

}  // namespace

std::string_view category_name(LexiconCategory category) {
  switch (category) {
    case LexiconCategory::kOccupation: return "occupation";
    case LexiconCategory::kPositive: return "positive";
    case LexiconCategory::kNegative: return "negative";
  }
  return "?";
}

LexiconCategory parse_category(std::string_view name) {
  if (name == "occupation") return LexiconCategory::kOccupation;
  if (name == "positive") return LexiconCategory::kPositive;
  if (name == "negative") return LexiconCategory::kNegative;
  throw InputError("unknown lexicon category '" + std::string(name) + "'");
}

std::string_view register_name(Register reg) {
  switch (reg) {
    case Register::kFormalImpolite: return "formal_impolite";
    case Register::kFormalPolite: return "formal_polite";
    case Register::kInformal: return "informal";
  }
  return "?";
}

Register parse_register(std::string_view name) {
  if (name == "formal_impolite") return Register::kFormalImpolite;
  if (name == "formal_polite") return Register::kFormalPolite;
  if (name == "informal") return Register::kInformal;
  throw InputError("unknown pronoun register '" + std::string(name) + "'");
}

Lexicon make_lexicon(LexiconCategory category, const std::vector<std::string>& lines) {
  Lexicon lex;
  lex.category = category;
  std::unordered_set<std::string> seen;
  for (const auto& raw : lines) {
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.find('\t') != std::string_view::npos) {
      throw InputError("lexicon entry contains a tab: \"" + std::string(line) + "\"");
    }
    std::string entry = unicode::nfc(line);
    if (seen.insert(entry).second) lex.entries.push_back(std::move(entry));
  }
  if (lex.entries.empty()) {
    throw InputError(std::string(category_name(category)) + " lexicon is empty");
  }
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path, LexiconCategory category) {
  std::string text = read_file(path, "lexicon");
  std::vector<std::string> lines;
  for (auto l : split(text, '\n')) lines.emplace_back(l);
  try {
    return make_lexicon(category, lines);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::vector<PronounSpec> default_pronouns() {
  return {
      {"वह", Register::kFormalImpolite, "है"},
      {"वे", Register::kFormalPolite, "हैं"},
      {"वो", Register::kInformal, "है"},
  };
}

const std::string& TemplateSet::for_category(LexiconCategory category) const {
  switch (category) {
    case LexiconCategory::kOccupation: return occupation;
    case LexiconCategory::kPositive: return positive;
    case LexiconCategory::kNegative: return negative;
  }
  return occupation;
}

TemplateSet load_templates(const std::filesystem::path& path) {
  TemplateSet t;
  try {
    auto j = nlohmann::json::parse(read_file(path, "template file"));
    if (j.contains("occupation")) t.occupation = j.at("occupation").get<std::string>();
    if (j.contains("positive")) t.positive = j.at("positive").get<std::string>();
    if (j.contains("negative")) t.negative = j.at("negative").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
  for (const auto* p : {&t.occupation, &t.positive, &t.negative}) {
    if (p->find("{lexeme}") == std::string::npos) {
      throw InputError(path.string() + ": template \"" + *p + "\" lacks {lexeme}");
    }
  }
  return t;
}

std::string apply_template(std::string_view pattern, const PronounSpec& pronoun,
                           std::string_view lexeme) {
  std::string out(pattern);
  replace_all(out, "{pronoun}", pronoun.surface);
  replace_all(out, "{copula}", pronoun.copula);
  replace_all(out, "{lexeme}", lexeme);
  return unicode::nfc(out);
}

Corpus generate_utterances(const std::vector<Lexicon>& lexicons,
                           const std::vector<PronounSpec>& pronouns, const TemplateSet& templates,
                           const GenerateOptions& options) {
  Corpus corpus;
  std::unordered_set<std::string> texts;
  std::int64_t next_id = options.first_id;
  for (const auto& lex : lexicons) {
    const std::string& pattern = templates.for_category(lex.category);
    for (const auto& entry : lex.entries) {
      for (const auto& p : pronouns) {
        ++corpus.generated;
        std::string text = apply_template(pattern, p, entry);
        if (options.dedup && !texts.insert(text).second) {
          ++corpus.duplicates_removed;
          continue;
        }
        corpus.utterances.push_back({next_id++, std::move(text), p.reg, lex.category, entry});
      }
    }
  }
  return corpus;
}

std::string_view view_name(ViewName view) {
  switch (view) {
    case ViewName::kInformal: return "informal";
    case ViewName::kFormal: return "formal";
    case ViewName::kImpolite: return "impolite";
    case ViewName::kPolite: return "polite";
    case ViewName::kPositive: return "positive";
    case ViewName::kNegative: return "negative";
    case ViewName::kOccupation: return "occupation";
  }
  return "?";
}

ViewName parse_view(std::string_view name) {
  for (auto v : kAllViews) {
    if (view_name(v) == name) return v;
  }
  throw InputError("unknown evaluation view '" + std::string(name) + "'");
}

std::vector<EvaluationSet> build_views(const std::vector<Utterance>& utterances) {
  std::vector<EvaluationSet> views;
  for (auto v : kAllViews) views.push_back({v, {}});
  auto add = [&](ViewName v, std::int64_t id) {
    views[static_cast<std::size_t>(v)].utterance_ids.push_back(id);
  };
  for (const auto& u : utterances) {
    switch (u.reg) {
      case Register::kInformal: add(ViewName::kInformal, u.id); break;
      case Register::kFormalImpolite:
        add(ViewName::kFormal, u.id);
        add(ViewName::kImpolite, u.id);
        break;
      case Register::kFormalPolite:
        add(ViewName::kFormal, u.id);
        add(ViewName::kPolite, u.id);
        break;
    }
    switch (u.category) {
      case LexiconCategory::kPositive: add(ViewName::kPositive, u.id); break;
      case LexiconCategory::kNegative: add(ViewName::kNegative, u.id); break;
      case LexiconCategory::kOccupation: add(ViewName::kOccupation, u.id); break;
    }
  }
  return views;
}

void write_corpus_tsv(const std::vector<Utterance>& utterances, std::ostream& out) {
  out << "id\ttext\tregister\tlexicon_category\tlexeme\n";
  for (const auto& u : utterances) {
    out << u.id << '\t' << u.text << '\t' << register_name(u.reg) << '\t'
        << category_name(u.category) << '\t' << u.lexeme << '\n';
  }
}

void write_corpus_tsv(const std::vector<Utterance>& utterances, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_corpus_tsv(utterances, out);
}

std::vector<Utterance> read_corpus_tsv(const std::filesystem::path& path) {
  std::string text = read_file(path, "corpus");
  auto lines = split(text, '\n');
  auto header = lines.empty() ? std::string_view() : lines.front();
  if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
  if (header != "id\ttext\tregister\tlexicon_category\tlexeme") {
    throw InputError(path.string() + ": not a corpus TSV (bad header)");
  }
  std::vector<Utterance> out;
  std::unordered_set<std::int64_t> ids;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    auto line = lines[i];
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto f = split(line, '\t');
    std::string where = path.string() + " line " + std::to_string(i + 1);
    if (f.size() != 5) throw InputError(where + ": expected 5 fields");
    Utterance u;
    auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), u.id);
    if (ec != std::errc() || ptr != f[0].data() + f[0].size()) {
      throw InputError(where + ": bad id");
    }
    if (!ids.insert(u.id).second) throw InputError(where + ": duplicate id");
    u.text = std::string(f[1]);
    u.reg = parse_register(f[2]);
    u.category = parse_category(f[3]);
    u.lexeme = std::string(f[4]);
    out.push_back(std::move(u));
  }
  return out;
}

nlohmann::ordered_json views_manifest(const std::vector<EvaluationSet>& views) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& v : views) j[std::string(view_name(v.name))] = v.utterance_ids;
  return j;
}

std::vector<EvaluationSet> parse_views_manifest(const nlohmann::ordered_json& manifest) {
  if (!manifest.is_object()) throw InputError("views manifest must be a JSON object");
  std::vector<EvaluationSet> views;
  try {
    for (auto v : kAllViews) {
      std::string key(view_name(v));
      if (!manifest.contains(key)) throw InputError("views manifest lacks \"" + key + "\"");
      views.push_back({v, manifest.at(key).get<std::vector<std::int64_t>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed views manifest: ") + e.what());
  }
  return views;
}

std::vector<EvaluationSet> read_views_manifest(const std::filesystem::path& path) {
  try {
    return parse_views_manifest(nlohmann::ordered_json::parse(read_file(path, "views manifest")));
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

}  // namespace biaseval

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace biaseval {

enum class LexiconCategory { kOccupation, kPositive, kNegative };
enum class Register { kFormalImpolite, kFormalPolite, kInformal };

std::string_view category_name(LexiconCategory category);
LexiconCategory parse_category(std::string_view name);
std::string_view register_name(Register reg);
Register parse_register(std::string_view name);

struct Lexicon {
  LexiconCategory category = LexiconCategory::kOccupation;
  std::vector<std::string> entries;  // NFC, unique, file order
};

/// One entry per line; blank lines and lines starting with '#' are skipped.
/// Throws InputError if nothing remains.
Lexicon load_lexicon(const std::filesystem::path& path, LexiconCategory category);
Lexicon make_lexicon(LexiconCategory category, const std::vector<std::string>& lines);

struct PronounSpec {
  std::string surface;
  Register reg = Register::kInformal;
  std::string copula;
};

/// वह (formal impolite), वे (formal polite, plural copula हैं), वो (informal).
std::vector<PronounSpec> default_pronouns();

// Sentence patterns with {pronoun}, {lexeme} and {copula} placeholders.
struct TemplateSet {
  std::string occupation = "{pronoun} {lexeme} {copula}";
  std::string positive = "{pronoun} {lexeme} {copula}";
  std::string negative = "{pronoun} {lexeme} {copula}";

  const std::string& for_category(LexiconCategory category) const;
};

/// Reads {"occupation": ..., "positive": ..., "negative": ...}; missing keys
/// keep the defaults.
TemplateSet load_templates(const std::filesystem::path& path);

std::string apply_template(std::string_view pattern, const PronounSpec& pronoun,
                           std::string_view lexeme);

struct Utterance {
  std::int64_t id = 0;
  std::string text;
  Register reg = Register::kInformal;
  LexiconCategory category = LexiconCategory::kOccupation;
  std::string lexeme;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct GenerateOptions {
  bool dedup = true;
  std::int64_t first_id = 1;
};

struct Corpus {
  std::vector<Utterance> utterances;
  std::size_t generated = 0;          // lexicon entries x registers
  std::size_t duplicates_removed = 0;
};

/// Lexicon order outer, pronoun order inner; ids sequential after dedup.
Corpus generate_utterances(const std::vector<Lexicon>& lexicons,
                           const std::vector<PronounSpec>& pronouns,
                           const TemplateSet& templates = {},
                           const GenerateOptions& options = {});

enum class ViewName { kInformal, kFormal, kImpolite, kPolite, kPositive, kNegative, kOccupation };

inline constexpr ViewName kAllViews[] = {ViewName::kInformal, ViewName::kFormal,
                                         ViewName::kImpolite, ViewName::kPolite,
                                         ViewName::kPositive, ViewName::kNegative,
                                         ViewName::kOccupation};

std::string_view view_name(ViewName view);
ViewName parse_view(std::string_view name);

struct EvaluationSet {
  ViewName name = ViewName::kInformal;
  std::vector<std::int64_t> utterance_ids;
};

/// The seven views in the order informal, formal, impolite, polite,
/// positive, negative, occupation.
std::vector<EvaluationSet> build_views(const std::vector<Utterance>& utterances);

/// TSV with header "id\ttext\tregister\tlexicon_category\tlexeme".
void write_corpus_tsv(const std::vector<Utterance>& utterances, std::ostream& out);
void write_corpus_tsv(const std::vector<Utterance>& utterances, const std::filesystem::path& path);
std::vector<Utterance> read_corpus_tsv(const std::filesystem::path& path);

/// {view name -> [ids]} in view order.
nlohmann::ordered_json views_manifest(const std::vector<EvaluationSet>& views);
std::vector<EvaluationSet> parse_views_manifest(const nlohmann::ordered_json& manifest);
std::vector<EvaluationSet> read_views_manifest(const std::filesystem::path& path);

}  // namespace biaseval

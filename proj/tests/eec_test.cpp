#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "biaseval/eec.hpp"
#include "biaseval/error.hpp"
#include "support.hpp"

using namespace biaseval;
using testing_support::Gen;
using testing_support::TempDir;

namespace {

std::vector<std::string> numbered(const std::string& prefix, int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

std::size_t view_size(const std::vector<EvaluationSet>& views, ViewName v) {
  return views[static_cast<std::size_t>(v)].utterance_ids.size();
}

std::set<std::int64_t> ids(const std::vector<EvaluationSet>& views, ViewName v) {
  const auto& x = views[static_cast<std::size_t>(v)].utterance_ids;
  return {x.begin(), x.end()};
}

}  // namespace

TEST(Lexicon, LoadFiltersAndDedups) {
  TempDir dir;
  testing_support::write_file(dir / "occ.txt", "# header\nडॉक्टर\n\n  वकील  \nडॉक्टर\n");
  auto lex = load_lexicon(dir / "occ.txt", LexiconCategory::kOccupation);
  EXPECT_EQ(lex.entries, (std::vector<std::string>{"डॉक्टर", "वकील"}));
}

TEST(Lexicon, FullSizedFile) {
  TempDir dir;
  std::string text;
  for (const auto& e : numbered("पेशा", 1100)) text += e + "\n";
  testing_support::write_file(dir / "occ.txt", text);
  EXPECT_EQ(load_lexicon(dir / "occ.txt", LexiconCategory::kOccupation).entries.size(), 1100u);
}

TEST(Lexicon, Errors) {
  TempDir dir;
  testing_support::write_file(dir / "c.txt", "# only\n# comments\n\n");
  EXPECT_THROW(load_lexicon(dir / "c.txt", LexiconCategory::kPositive), InputError);
  EXPECT_THROW(load_lexicon(dir / "missing.txt", LexiconCategory::kPositive), InputError);
  EXPECT_THROW(make_lexicon(LexiconCategory::kPositive, {"a\tb"}), InputError);
}

TEST(Lexicon, NfcEquivalentEntriesCollapse) {
  // Devanagari QA (U+0958) decomposes to KA + NUKTA under NFC.
  auto lex = make_lexicon(LexiconCategory::kOccupation, {"\xE0\xA5\x98", "\xE0\xA4\x95\xE0\xA4\xBC"});
  EXPECT_EQ(lex.entries.size(), 1u);
  Corpus c = generate_utterances({lex}, default_pronouns());
  EXPECT_EQ(c.utterances.size(), 3u);
}

TEST(Generate, PoliteTemplateText) {
  auto lex = make_lexicon(LexiconCategory::kOccupation, {"डॉक्टर"});
  Corpus c = generate_utterances({lex}, default_pronouns());
  ASSERT_EQ(c.utterances.size(), 3u);
  EXPECT_EQ(c.utterances[0].text, "वह डॉक्टर है");
  EXPECT_EQ(c.utterances[1].text, "वे डॉक्टर हैं");
  EXPECT_EQ(c.utterances[1].reg, Register::kFormalPolite);
  EXPECT_EQ(c.utterances[2].text, "वो डॉक्टर है");
  EXPECT_EQ(c.utterances[2].id, 3);
}

TEST(Generate, OccupationCrossProduct) {
  auto lex = make_lexicon(LexiconCategory::kOccupation, numbered("o", 1100));
  Corpus c = generate_utterances({lex}, default_pronouns());
  EXPECT_EQ(c.generated, 3300u);
  EXPECT_EQ(c.utterances.size(), 3300u);
}

TEST(Generate, DedupRemovesExactTextRepeats) {
  auto pos = make_lexicon(LexiconCategory::kPositive, {"अच्छा"});
  auto occ = make_lexicon(LexiconCategory::kOccupation, {"अच्छा", "नर्स"});
  Corpus on = generate_utterances({pos, occ}, default_pronouns());
  EXPECT_EQ(on.generated, 9u);
  EXPECT_EQ(on.duplicates_removed, 3u);
  EXPECT_EQ(on.utterances.size(), 6u);
  for (std::size_t i = 0; i < on.utterances.size(); ++i) EXPECT_EQ(on.utterances[i].id, i + 1);
  Corpus off = generate_utterances({pos, occ}, default_pronouns(), {}, {false, 1});
  EXPECT_EQ(off.utterances.size(), 9u);
}

TEST(Templates, LoadAndApply) {
  TempDir dir;
  testing_support::write_file(dir / "t.json", R"({"positive": "{pronoun} बहुत {lexeme} {copula}"})");
  auto t = load_templates(dir / "t.json");
  EXPECT_EQ(t.occupation, "{pronoun} {lexeme} {copula}");
  auto lex = make_lexicon(LexiconCategory::kPositive, {"खुश"});
  Corpus c = generate_utterances({lex}, default_pronouns(), t);
  EXPECT_EQ(c.utterances[1].text, "वे बहुत खुश हैं");
  testing_support::write_file(dir / "bad.json", R"({"negative": "{pronoun} {copula}"})");
  EXPECT_THROW(load_templates(dir / "bad.json"), InputError);
  testing_support::write_file(dir / "broken.json", "{");
  EXPECT_THROW(load_templates(dir / "broken.json"), InputError);
}

TEST(Views, FullSizedStructure) {
  auto occ = make_lexicon(LexiconCategory::kOccupation, numbered("o", 1100));
  auto pos = make_lexicon(LexiconCategory::kPositive, numbered("p", 820));
  auto neg = make_lexicon(LexiconCategory::kNegative, numbered("n", 738));
  Corpus c = generate_utterances({occ, pos, neg}, default_pronouns(), {}, {false, 1});
  auto v = build_views(c.utterances);
  EXPECT_EQ(c.utterances.size(), 7974u);
  EXPECT_EQ(view_size(v, ViewName::kOccupation), 3300u);
  EXPECT_EQ(view_size(v, ViewName::kPositive), 2460u);
  EXPECT_EQ(view_size(v, ViewName::kNegative), 2214u);
  EXPECT_EQ(view_size(v, ViewName::kPolite), 2658u);
  EXPECT_EQ(view_size(v, ViewName::kImpolite), 2658u);
  EXPECT_EQ(view_size(v, ViewName::kInformal), 2658u);
  EXPECT_EQ(view_size(v, ViewName::kFormal), 5316u);
}

TEST(Views, EmptyInput) {
  auto v = build_views({});
  ASSERT_EQ(v.size(), 7u);
  for (const auto& s : v) EXPECT_TRUE(s.utterance_ids.empty());
}

TEST(ViewsProperty, PartitionsAndFormalUnion) {
  Gen g(31);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Lexicon> lexicons;
    // Shared stems across categories make dedup actually remove rows.
    std::vector<std::string> stems{"क", "ख", "ग", "घ", "च", "छ"};
    for (auto cat : {LexiconCategory::kOccupation, LexiconCategory::kPositive,
                     LexiconCategory::kNegative}) {
      std::vector<std::string> lines;
      int n = g.integer(1, 6);
      for (int i = 0; i < n; ++i) lines.push_back(stems[static_cast<std::size_t>(g.integer(0, 5))]);
      lexicons.push_back(make_lexicon(cat, lines));
    }
    bool dedup = g.integer(0, 1) == 1;
    Corpus c = generate_utterances(lexicons, default_pronouns(), {}, {dedup, 1});
    auto v = build_views(c.utterances);
    std::size_t n = c.utterances.size();
    EXPECT_EQ(c.generated, c.utterances.size() + c.duplicates_removed);

    auto formal = ids(v, ViewName::kFormal);
    auto polite = ids(v, ViewName::kPolite);
    auto impolite = ids(v, ViewName::kImpolite);
    std::set<std::int64_t> both;
    std::set_union(polite.begin(), polite.end(), impolite.begin(), impolite.end(),
                   std::inserter(both, both.end()));
    EXPECT_EQ(formal, both);
    EXPECT_EQ(formal.size(), polite.size() + impolite.size());

    std::set<std::int64_t> all;
    for (auto vn : {ViewName::kInformal, ViewName::kImpolite, ViewName::kPolite}) {
      auto s = ids(v, vn);
      for (auto id : s) EXPECT_TRUE(all.insert(id).second);
    }
    EXPECT_EQ(all.size(), n);
    all.clear();
    for (auto vn : {ViewName::kPositive, ViewName::kNegative, ViewName::kOccupation}) {
      auto s = ids(v, vn);
      for (auto id : s) EXPECT_TRUE(all.insert(id).second);
    }
    EXPECT_EQ(all.size(), n);

    Corpus again = generate_utterances(lexicons, default_pronouns(), {}, {dedup, 1});
    EXPECT_EQ(again.utterances, c.utterances);
  }
}

TEST(CorpusTsv, RoundTrip) {
  TempDir dir;
  auto occ = make_lexicon(LexiconCategory::kOccupation, {"डॉक्टर", "नर्स"});
  auto neg = make_lexicon(LexiconCategory::kNegative, {"आलसी"});
  Corpus c = generate_utterances({occ, neg}, default_pronouns());
  write_corpus_tsv(c.utterances, dir / "c.tsv");
  EXPECT_EQ(read_corpus_tsv(dir / "c.tsv"), c.utterances);
  std::ostringstream s;
  write_corpus_tsv(c.utterances, s);
  EXPECT_EQ(s.str(), testing_support::read_file(dir / "c.tsv"));
}

TEST(CorpusTsv, Errors) {
  TempDir dir;
  testing_support::write_file(dir / "h.tsv", "bad header\n");
  EXPECT_THROW(read_corpus_tsv(dir / "h.tsv"), InputError);
  testing_support::write_file(dir / "f.tsv", "id\ttext\tregister\tlexicon_category\tlexeme\n1\tx\n");
  EXPECT_THROW(read_corpus_tsv(dir / "f.tsv"), InputError);
  testing_support::write_file(
      dir / "d.tsv",
      "id\ttext\tregister\tlexicon_category\tlexeme\n1\tx\tinformal\tpositive\tx\n1\ty\tinformal\tpositive\ty\n");
  EXPECT_THROW(read_corpus_tsv(dir / "d.tsv"), InputError);
  testing_support::write_file(
      dir / "r.tsv", "id\ttext\tregister\tlexicon_category\tlexeme\n1\tx\tcasual\tpositive\tx\n");
  EXPECT_THROW(read_corpus_tsv(dir / "r.tsv"), InputError);
}

TEST(Manifest, RoundTripAndErrors) {
  auto lex = make_lexicon(LexiconCategory::kPositive, {"खुश", "दयालु"});
  auto views = build_views(generate_utterances({lex}, default_pronouns()).utterances);
  auto j = views_manifest(views);
  auto back = parse_views_manifest(j);
  ASSERT_EQ(back.size(), 7u);
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(back[i].utterance_ids, views[i].utterance_ids);
  auto keys = std::vector<std::string>{};
  for (auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"informal", "formal", "impolite", "polite", "positive",
                                            "negative", "occupation"}));
  j.erase("polite");
  EXPECT_THROW(parse_views_manifest(j), InputError);
  EXPECT_THROW(parse_views_manifest(nlohmann::ordered_json::array()), InputError);
}

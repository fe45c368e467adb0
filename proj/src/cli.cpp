#include "biaseval/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "biaseval/eec.hpp"
#include "biaseval/embedding.hpp"
#include "biaseval/error.hpp"
#include "biaseval/hash.hpp"
#include "biaseval/metrics.hpp"
#include "biaseval/query.hpp"
#include "biaseval/tgbi.hpp"
#include "biaseval/translation.hpp"
#include "biaseval/wefe.hpp"
#include "json.hpp"

namespace biaseval::cli {
namespace {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

constexpr const char* kVersion = "0.1.0";
constexpr const char* kAuthEnv = "BIASEVAL_HTTP_AUTH";

// Provenance block shared by every report: input hashes keyed by file name,
// the seed, and whatever flags shaped the numbers.
class Provenance {
 public:
  explicit Provenance(std::string command) { j_["command"] = std::move(command); }

  void input(const std::string& role, const fs::path& path) {
    j_["inputs"][role] = {{"file", path.filename().string()}, {"sha256", sha256_file(path)}};
  }
  void set(const std::string& key, ojson value) { j_["settings"][key] = std::move(value); }

  // Commands without randomness record a null seed.
  ojson json(std::optional<std::uint64_t> seed = std::nullopt) const {
    ojson out;
    out["tool"] = "biaseval";
    out["version"] = kVersion;
    out["seed"] = seed ? ojson(*seed) : ojson(nullptr);
    for (const auto& [k, v] : j_.items()) out[k] = v;
    return out;
  }

 private:
  ojson j_ = ojson::object();
};

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

void require_file(const fs::path& path, const char* what) {
  if (!fs::is_regular_file(path)) {
    throw InputError(std::string(what) + " not found: " + path.string());
  }
}

// ---- eec -----------------------------------------------------------------

struct EecArgs {
  std::string occupations, positive, negative, templates;
  std::string out_dir = ".";
  bool no_dedup = false;
};

int cmd_eec(const EecArgs& a, std::ostream& out) {
  Provenance prov("eec");
  std::vector<Lexicon> lexicons;
  for (auto [path, cat] : {std::pair{&a.occupations, LexiconCategory::kOccupation},
                           {&a.positive, LexiconCategory::kPositive},
                           {&a.negative, LexiconCategory::kNegative}}) {
    if (path->empty()) continue;
    require_file(*path, "lexicon file");
    lexicons.push_back(load_lexicon(*path, cat));
    prov.input(std::string(category_name(cat)) + "_lexicon", *path);
  }
  if (lexicons.empty()) throw InputError("eec needs at least one lexicon file");
  TemplateSet templates;
  if (!a.templates.empty()) {
    require_file(a.templates, "template file");
    templates = load_templates(a.templates);
    prov.input("templates", a.templates);
  }
  prov.set("dedup", !a.no_dedup);

  Corpus corpus = generate_utterances(lexicons, default_pronouns(), templates, {!a.no_dedup, 1});
  auto views = build_views(corpus.utterances);

  fs::path dir(a.out_dir);
  fs::create_directories(dir);
  write_corpus_tsv(corpus.utterances, dir / "corpus.tsv");
  write_json(dir / "views.json", views_manifest(views));

  ojson summary;
  summary["provenance"] = prov.json();
  summary["lexicon_sizes"] = ojson::object();
  for (const auto& l : lexicons) {
    summary["lexicon_sizes"][std::string(category_name(l.category))] = l.entries.size();
  }
  summary["generated"] = corpus.generated;
  summary["duplicates_removed"] = corpus.duplicates_removed;
  summary["corpus_size"] = corpus.utterances.size();
  std::size_t by_register = 0, by_lexicon = 0;
  for (const auto& v : views) {
    if (v.name == ViewName::kInformal || v.name == ViewName::kImpolite || v.name == ViewName::kPolite) {
      by_register += v.utterance_ids.size();
    } else if (v.name != ViewName::kFormal) {
      by_lexicon += v.utterance_ids.size();
    }
  }
  summary["partition_totals"] = {{"by_register", by_register}, {"by_lexicon", by_lexicon}};
  summary["view_sizes"] = ojson::object();
  for (const auto& v : views) {
    summary["view_sizes"][std::string(view_name(v.name))] = v.utterance_ids.size();
  }
  write_json(dir / "eec_summary.json", summary);

  out << "generated " << corpus.generated << " utterances, " << corpus.duplicates_removed
      << " duplicates removed, corpus size " << corpus.utterances.size() << "\n";
  for (const auto& v : views) {
    out << "  " << view_name(v.name) << ": " << v.utterance_ids.size() << "\n";
  }
  return kExitOk;
}

// ---- translate ------------------------------------------------------------

struct TranslateArgs {
  std::string corpus, backend = "file", input, endpoint, label, out;
  int timeout_ms = 10000;
  int retries = 2;
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  std::vector<std::string> headers;
  double min_coverage = kDefaultMinCoverage;
  bool resume = false;
};

int cmd_translate(const TranslateArgs& a, std::ostream& out, std::ostream& err) {
  require_file(a.corpus, "corpus");
  auto corpus = read_corpus_tsv(a.corpus);
  std::vector<TranslationRecord> records;

  if (a.backend == "file") {
    if (a.input.empty()) throw InputError("the file backend needs --input");
    require_file(a.input, "translations file");
    records = load_translations_tsv(a.input, a.label.empty() ? "file" : a.label);
  } else if (a.backend == "http") {
    BackendConfig cfg;
    cfg.kind = BackendKind::kHttp;
    cfg.location = a.endpoint;
    cfg.timeout = std::chrono::milliseconds(a.timeout_ms);
    cfg.retry_count = a.retries;
    cfg.batch_size = a.batch_size;
    cfg.max_in_flight = a.max_in_flight;
    cfg.label = a.label;
    for (const auto& h : a.headers) {
      auto colon = h.find(':');
      if (colon == std::string::npos) throw InputError("header must look like 'Name: value'");
      std::string value = h.substr(colon + 1);
      value.erase(0, value.find_first_not_of(' '));
      cfg.headers.emplace_back(h.substr(0, colon), value);
    }
    if (const char* auth = std::getenv(kAuthEnv); auth != nullptr && *auth != '\0') {
      cfg.headers.emplace_back("Authorization", auth);
    }
    cfg.validate();

    std::vector<TranslationRecord> previous;
    std::set<std::int64_t> done;
    if (a.resume && fs::exists(a.out)) {
      previous = load_translations_tsv(a.out, cfg.label.empty() ? cfg.location : cfg.label);
      for (const auto& r : previous) {
        if (!r.failed) done.insert(r.id);
      }
    }
    std::vector<Utterance> todo;
    for (const auto& u : corpus) {
      if (!done.count(u.id)) todo.push_back(u);
    }
    auto merge = [&](std::vector<TranslationRecord> fresh) {
      std::map<std::int64_t, TranslationRecord> by_id;
      for (auto& r : previous) {
        if (!r.failed) by_id.emplace(r.id, std::move(r));
      }
      for (auto& r : fresh) by_id.insert_or_assign(r.id, std::move(r));
      std::vector<TranslationRecord> merged;
      for (auto& [id, r] : by_id) merged.push_back(std::move(r));
      return merged;
    };
    try {
      records = merge(fetch_translations_http(cfg, todo));
    } catch (const BackendUnreachableError& e) {
      auto partial = merge(e.completed());
      write_translations_tsv(partial, fs::path(a.out));
      err << "error: " << e.what() << "\n";
      err << "wrote " << partial.size() << " completed translations to " << a.out
          << "; rerun with --resume to continue\ncompleted ids:";
      for (const auto& r : partial) err << ' ' << r.id;
      err << "\n";
      return kExitComputation;
    }
  } else {
    throw InputError("unknown backend '" + a.backend + "' (expected file or http)");
  }

  JoinResult joined = join(corpus, records, a.min_coverage);
  if (!joined.orphan_ids.empty()) {
    err << "warning: " << joined.orphan_ids.size() << " translations match no corpus id\n";
  }
  std::size_t failed = 0;
  for (const auto& r : records) failed += r.failed;
  write_translations_tsv(records, fs::path(a.out));
  out << "wrote " << records.size() << " translations (" << failed << " failed, coverage "
      << joined.coverage << ") to " << a.out << "\n";
  return kExitOk;
}

// ---- tgbi -----------------------------------------------------------------

struct TgbiArgs {
  std::string corpus, views, translations, gender_lexicon, backend_label;
  std::string variant = "table2_linear";
  std::string ambiguity = "unresolved";
  std::string out_dir = ".";
  double min_coverage = kDefaultMinCoverage;
};

int cmd_tgbi(const TgbiArgs& a, std::ostream& out) {
  Provenance prov("tgbi");
  require_file(a.corpus, "corpus");
  require_file(a.views, "views manifest");
  require_file(a.translations, "translations file");
  prov.input("corpus", a.corpus);
  prov.input("views", a.views);
  prov.input("translations", a.translations);

  GenderLexicon lex = default_gender_lexicon();
  if (!a.gender_lexicon.empty()) {
    require_file(a.gender_lexicon, "gender lexicon");
    lex = load_gender_lexicon(a.gender_lexicon);
  }
  prov.set("gender_lexicon_sha256", sha256_hex(lex.serialize()));
  TgbiOptions opts;
  opts.variant = parse_variant(a.variant);
  if (a.ambiguity == "unresolved") {
    opts.policy = AmbiguityPolicy::kUnresolved;
  } else if (a.ambiguity == "first_token") {
    opts.policy = AmbiguityPolicy::kFirstToken;
  } else {
    throw InputError("unknown ambiguity policy '" + a.ambiguity + "'");
  }
  opts.backend = a.backend_label.empty() ? fs::path(a.translations).stem().string()
                                         : a.backend_label;
  prov.set("variant", a.variant);
  prov.set("ambiguity", a.ambiguity);
  prov.set("min_coverage", a.min_coverage);

  auto corpus = read_corpus_tsv(a.corpus);
  auto views = read_views_manifest(a.views);
  auto records = load_translations_tsv(a.translations, opts.backend);
  JoinResult joined = join(corpus, records, a.min_coverage);
  TgbiReport report = score_views(views, joined.pairs, lex, opts);

  ojson j = tgbi_report_json(report);
  j["missing_translations"] = joined.missing_ids.size();
  j["orphan_translations"] = joined.orphan_ids.size();
  j["provenance"] = prov.json();

  fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::string table = render_tgbi_table(report);
  write_json(dir / "tgbi.json", j);
  write_text(dir / "tgbi.txt", table);
  out << table << "TGBI (" << variant_name(report.variant) << ") = " << report.tgbi << "\n";
  return kExitOk;
}

// ---- metrics / rank -------------------------------------------------------

struct EmbeddingArg {
  std::string name;
  fs::path path;
};

EmbeddingArg parse_embedding_arg(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq != std::string::npos && eq > 0) return {spec.substr(0, eq), spec.substr(eq + 1)};
  return {fs::path(spec).stem().string(), spec};
}

struct ModelArgs {
  std::vector<std::string> embeddings;
  std::vector<std::string> queries;
  double lost_threshold = kDefaultLostThreshold;
  std::uint64_t seed = 42;
  double lr = 0.1;
  int epochs = 500;
};

struct LoadedInputs {
  std::vector<EmbeddingTable> tables;
  std::vector<Query> queries;
};

LoadedInputs load_inputs(const ModelArgs& a, Provenance& prov) {
  LoadedInputs in;
  if (a.embeddings.empty()) throw InputError("at least one --embedding is required");
  if (a.queries.empty()) throw InputError("at least one --queries file is required");
  for (const auto& spec : a.embeddings) {
    auto e = parse_embedding_arg(spec);
    require_file(e.path, "embedding file");
    in.tables.push_back(load_word2vec_text(e.path, e.name));
    prov.input("embedding:" + e.name, e.path);
  }
  for (std::size_t i = 0; i < a.queries.size(); ++i) {
    require_file(a.queries[i], "query file");
    auto qs = load_queries(a.queries[i]);
    in.queries.insert(in.queries.end(), qs.begin(), qs.end());
    prov.input("queries:" + fs::path(a.queries[i]).filename().string(), a.queries[i]);
  }
  prov.set("lost_threshold", a.lost_threshold);
  prov.set("rnsb", {{"lr", a.lr}, {"epochs", a.epochs}});
  return in;
}

ScoreOptions score_options(const ModelArgs& a) {
  ScoreOptions o;
  o.lost_threshold = a.lost_threshold;
  o.hyper = {a.lr, a.epochs, a.seed};
  return o;
}

void require_expandable(const std::vector<Query>& queries, const QueryTemplate& tmpl,
                        Metric metric) {
  for (const auto& q : queries) {
    if (q.targets().size() < tmpl.targets || q.attributes().size() < tmpl.attributes) {
      throw InputError(std::string(metric_name(metric)) + ": " + validate_query(q, tmpl).violation);
    }
  }
}

struct MetricsArgs {
  ModelArgs model;
  std::string metric = "WEAT";
  std::string out;
};

int cmd_metrics(const MetricsArgs& a, std::ostream& out) {
  Provenance prov("metrics");
  Metric metric = parse_metric(a.metric);
  auto in = load_inputs(a.model, prov);
  QueryTemplate tmpl = metric_template(metric);
  require_expandable(in.queries, tmpl, metric);
  auto subqueries = expand_subqueries(in.queries, tmpl).subqueries;
  ScoreMatrix matrix = build_score_matrix(metric, in.tables, subqueries, score_options(a.model));

  ojson j = score_matrix_json(matrix);
  j["provenance"] = prov.json(a.model.seed);
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    for (std::size_t c = 0; c < matrix.cols.size(); ++c) {
      const auto& cell = matrix.at(r, c);
      out << matrix.rows[r] << "\t" << matrix.cols[c] << "\t"
          << (cell.value ? format_value(*cell.value) : "missing (" + cell.error + ")") << "\n";
    }
  }
  if (!a.out.empty()) write_json(a.out, j);
  return kExitOk;
}

struct RankArgs {
  ModelArgs model;
  std::vector<std::string> metrics{"WEAT", "RNSB", "RND", "ECT"};
  std::string aggregation = "default";
  std::string mode = "ranks";
  std::string out_dir = ".";
};

int cmd_rank(const RankArgs& a, std::ostream& out, std::ostream& err) {
  Provenance prov("rank");
  std::vector<MetricSpec> specs;
  for (const auto& m : a.metrics) {
    MetricSpec spec = default_metric_spec(parse_metric(m));
    if (a.aggregation != "default") spec.agg = parse_aggregation(a.aggregation);
    specs.push_back(spec);
  }
  RankCellMode mode;
  if (a.mode == "ranks") {
    mode = RankCellMode::kRanks;
  } else if (a.mode == "values") {
    mode = RankCellMode::kValues;
  } else if (a.mode == "both") {
    mode = RankCellMode::kValuesAndRanks;
  } else {
    throw InputError("unknown table mode '" + a.mode + "' (expected ranks, values or both)");
  }
  auto in = load_inputs(a.model, prov);
  for (const auto& s : specs) require_expandable(in.queries, s.tmpl, s.metric);
  prov.set("aggregation", a.aggregation);

  RankTable table = build_rank_table(specs, in.tables, in.queries, score_options(a.model));
  for (const auto& w : table.warnings) err << "warning: " << w.message << "\n";

  ojson j = rank_table_json(table);
  j["provenance"] = prov.json(a.model.seed);
  fs::path dir(a.out_dir);
  fs::create_directories(dir);
  std::string rendered = render_rank_table(table, mode);
  write_json(dir / "rank.json", j);
  write_text(dir / "rank.csv", rank_table_csv(table));
  write_text(dir / "rank.txt", rendered);
  out << rendered;
  return kExitOk;
}

void add_model_options(CLI::App* sub, ModelArgs& m) {
  sub->add_option("-e,--embedding", m.embeddings,
                  "Embedding in word2vec text format, as PATH or NAME=PATH (repeatable)")
      ->required();
  sub->add_option("-q,--queries", m.queries, "Query JSON file (repeatable)")->required();
  sub->add_option("--lost-threshold", m.lost_threshold,
                  "Largest tolerated out-of-vocabulary fraction per word set")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_option("--seed", m.seed, "Seed for the RNSB classifier");
  sub->add_option("--lr", m.lr, "RNSB classifier learning rate");
  sub->add_option("--epochs", m.epochs, "RNSB classifier epochs");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gender-bias evaluation for word embeddings and Hindi-English translation",
               "biaseval"};
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "TOML/INI file with option values; flags take precedence");
  app.require_subcommand(1);

  EecArgs eec;
  auto* eec_cmd = app.add_subcommand("eec", "Build the gender-neutral Hindi evaluation corpus");
  eec_cmd->add_option("--occupations", eec.occupations, "Occupation lexicon file");
  eec_cmd->add_option("--positive", eec.positive, "Positive sentiment lexicon file");
  eec_cmd->add_option("--negative", eec.negative, "Negative sentiment lexicon file");
  eec_cmd->add_option("--templates", eec.templates, "JSON sentence templates per category");
  eec_cmd->add_flag("--no-dedup", eec.no_dedup, "Keep exact-duplicate sentences");
  eec_cmd->add_option("-o,--out-dir", eec.out_dir, "Output directory");

  TranslateArgs tr;
  auto* tr_cmd = app.add_subcommand("translate", "Collect translations for a corpus");
  tr_cmd->add_option("--corpus", tr.corpus, "Corpus TSV")->required();
  tr_cmd->add_option("--backend", tr.backend, "file or http");
  tr_cmd->add_option("--input", tr.input, "Pre-translated TSV (file backend)");
  tr_cmd->add_option("--endpoint", tr.endpoint, "Translation service URL (http backend)");
  tr_cmd->add_option("--label", tr.label, "Backend label stored with each record");
  tr_cmd->add_option("--timeout-ms", tr.timeout_ms, "Per-request timeout");
  tr_cmd->add_option("--retries", tr.retries, "Retries per batch (0-5)");
  tr_cmd->add_option("--batch-size", tr.batch_size, "Utterances per request (1-64)");
  tr_cmd->add_option("--max-in-flight", tr.max_in_flight, "Concurrent requests");
  tr_cmd->add_option("-H,--header", tr.headers, "Extra request header 'Name: value'");
  tr_cmd->add_option("--min-coverage", tr.min_coverage, "Minimum fraction of corpus translated");
  tr_cmd->add_flag("--resume", tr.resume, "Keep successful rows of an existing --out file");
  tr_cmd->add_option("-o,--out", tr.out, "Output translations TSV")->required();

  TgbiArgs tg;
  auto* tg_cmd = app.add_subcommand("tgbi", "Score translations with the gender bias index");
  tg_cmd->add_option("--corpus", tg.corpus, "Corpus TSV")->required();
  tg_cmd->add_option("--views", tg.views, "Views manifest JSON")->required();
  tg_cmd->add_option("--translations", tg.translations, "Translations TSV")->required();
  tg_cmd->add_option("--gender-lexicon", tg.gender_lexicon, "Lexicon with [she]/[he]/[they]");
  tg_cmd->add_option("--variant", tg.variant, "table2_linear or eq8_sqrt");
  tg_cmd->add_option("--ambiguity", tg.ambiguity, "unresolved or first_token");
  tg_cmd->add_option("--backend-label", tg.backend_label, "Name of the translation system");
  tg_cmd->add_option("--min-coverage", tg.min_coverage, "Minimum fraction of corpus translated");
  tg_cmd->add_option("-o,--out-dir", tg.out_dir, "Output directory");

  MetricsArgs me;
  auto* me_cmd = app.add_subcommand("metrics", "Score one metric on every subquery");
  add_model_options(me_cmd, me.model);
  me_cmd->add_option("-m,--metric", me.metric, "WEAT, RND, RNSB or ECT");
  me_cmd->add_option("-o,--out", me.out, "Output JSON file");

  RankArgs rk;
  auto* rk_cmd = app.add_subcommand("rank", "Rank embeddings across fairness metrics");
  add_model_options(rk_cmd, rk.model);
  rk_cmd->add_option("-m,--metrics", rk.metrics, "Metric columns in order")->delimiter(',');
  rk_cmd->add_option("--aggregation", rk.aggregation, "default, abs_mean or mean");
  rk_cmd->add_option("--mode", rk.mode, "Rendered cells: ranks, values or both");
  rk_cmd->add_option("-o,--out-dir", rk.out_dir, "Output directory");

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*eec_cmd) return cmd_eec(eec, out);
    if (*tr_cmd) return cmd_translate(tr, out, err);
    if (*tg_cmd) return cmd_tgbi(tg, out);
    if (*me_cmd) return cmd_metrics(me, out);
    if (*rk_cmd) return cmd_rank(rk, out, err);
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitComputation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitComputation;
  }
  return kExitUsage;
}

}  // namespace biaseval::cli

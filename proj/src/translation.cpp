#include "biaseval/translation.hpp"

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <future>
#include <iterator>
#include <map>
#include <regex>
#include <span>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace biaseval {
namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, re)) {
    throw InputError("translation endpoint must be an http(s) URL, got '" + url + "'");
  }
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

std::string sanitize(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

enum class BatchOutcome { kOk, kRejected, kUnreachable };

struct BatchResult {
  BatchOutcome outcome = BatchOutcome::kOk;
  std::vector<TranslationRecord> records;
  std::string error;
};

BatchResult run_batch(const BackendConfig& cfg, const Endpoint& endpoint,
                      std::span<const Utterance> batch) {
  nlohmann::json request;
  auto& texts = request["texts"] = nlohmann::json::array();
  for (const auto& u : batch) texts.push_back({{"id", u.id}, {"text", u.text}});
  const std::string body = request.dump();

  httplib::Headers headers;
  for (const auto& [k, v] : cfg.headers) headers.emplace(k, v);

  const std::string label = cfg.label.empty() ? cfg.location : cfg.label;
  auto make_records = [&](const std::unordered_map<std::int64_t, std::string>& got, int retries) {
    std::vector<TranslationRecord> out;
    for (const auto& u : batch) {
      auto it = got.find(u.id);
      bool ok = it != got.end() && !it->second.empty();
      out.push_back({u.id, ok ? sanitize(it->second) : std::string(), label, !ok, retries});
    }
    return out;
  };

  BatchResult result;
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(cfg.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(cfg.timeout - secs);
  bool transport_failure = false;
  for (int attempt = 0; attempt <= cfg.retry_count; ++attempt) {
    httplib::Client cli(endpoint.base);
    cli.set_connection_timeout(secs.count(), usecs.count());
    cli.set_read_timeout(secs.count(), usecs.count());
    cli.set_write_timeout(secs.count(), usecs.count());
    auto res = cli.Post(endpoint.path, headers, body, "application/json");
    if (!res) {
      transport_failure = true;
      result.error = "request failed: " + httplib::to_string(res.error());
      continue;
    }
    transport_failure = false;
    if (res->status >= 500) {
      result.error = "server error " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      result.error = "request rejected with status " + std::to_string(res->status);
      break;
    }
    try {
      auto reply = nlohmann::json::parse(res->body);
      std::unordered_map<std::int64_t, std::string> got;
      for (const auto& t : reply.at("translations")) {
        got.emplace(t.at("id").get<std::int64_t>(), t.at("text").get<std::string>());
      }
      result.outcome = BatchOutcome::kOk;
      result.records = make_records(got, attempt);
      result.error.clear();
      return result;
    } catch (const nlohmann::json::exception& e) {
      result.error = std::string("malformed response: ") + e.what();
    }
  }
  result.outcome = transport_failure ? BatchOutcome::kUnreachable : BatchOutcome::kRejected;
  if (result.outcome == BatchOutcome::kRejected) result.records = make_records({}, cfg.retry_count);
  return result;
}

}  // namespace

void BackendConfig::validate() const {
  if (timeout.count() <= 0) throw InputError("backend timeout must be positive");
  if (retry_count < 0 || retry_count > 5) throw InputError("retry count must lie in [0, 5]");
  if (batch_size == 0 || batch_size > 64) throw InputError("batch size must lie in [1, 64]");
  if (max_in_flight == 0) throw InputError("at least one request must be allowed in flight");
  if (location.empty()) throw InputError("backend location is empty");
}

std::vector<TranslationRecord> parse_translations_tsv(std::string_view text,
                                                      const std::string& backend) {
  std::vector<TranslationRecord> out;
  std::unordered_set<std::int64_t> ids;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != "id\ttranslation") {
        throw InputError("translations TSV must start with the header \"id\\ttranslation\"");
      }
      continue;
    }
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string_view::npos) {
      throw InputError("translations TSV line " + std::to_string(line_no) + ": missing tab");
    }
    TranslationRecord r;
    auto id = line.substr(0, tab);
    auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), r.id);
    if (ec != std::errc() || ptr != id.data() + id.size()) {
      throw InputError("translations TSV line " + std::to_string(line_no) + ": bad id \"" +
                       std::string(id) + "\"");
    }
    if (!ids.insert(r.id).second) {
      throw InputError("translations TSV: duplicate id " + std::to_string(r.id));
    }
    r.output = std::string(line.substr(tab + 1));
    r.failed = r.output.empty();
    r.backend = backend;
    out.push_back(std::move(r));
  }
  if (line_no == 0) throw InputError("translations TSV is empty (no header)");
  return out;
}

std::vector<TranslationRecord> load_translations_tsv(const std::filesystem::path& path,
                                                     const std::string& backend) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open translations file " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_translations_tsv(text, backend);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_translations_tsv(const std::vector<TranslationRecord>& records, std::ostream& out) {
  out << "id\ttranslation\n";
  for (const auto& r : records) out << r.id << '\t' << sanitize(r.output) << '\n';
}

void write_translations_tsv(const std::vector<TranslationRecord>& records,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  write_translations_tsv(records, out);
}

BackendUnreachableError::BackendUnreachableError(std::string message,
                                                 std::vector<TranslationRecord> completed)
    : ComputationError(std::move(message)), completed_(std::move(completed)) {}

std::vector<std::int64_t> BackendUnreachableError::completed_ids() const {
  std::vector<std::int64_t> ids;
  for (const auto& r : completed_) ids.push_back(r.id);
  return ids;
}

std::vector<TranslationRecord> fetch_translations_http(const BackendConfig& cfg,
                                                       const std::vector<Utterance>& utterances) {
  cfg.validate();
  if (cfg.kind != BackendKind::kHttp) throw InputError("backend is not an HTTP backend");
  const Endpoint endpoint = parse_endpoint(cfg.location);

  std::vector<std::span<const Utterance>> batches;
  for (std::size_t i = 0; i < utterances.size(); i += cfg.batch_size) {
    batches.emplace_back(utterances.data() + i, std::min(cfg.batch_size, utterances.size() - i));
  }

  std::vector<BatchResult> results(batches.size());
  for (std::size_t wave = 0; wave < batches.size(); wave += cfg.max_in_flight) {
    std::vector<std::future<BatchResult>> inflight;
    std::size_t end = std::min(batches.size(), wave + cfg.max_in_flight);
    for (std::size_t b = wave; b < end; ++b) {
      inflight.push_back(std::async(std::launch::async, run_batch, std::cref(cfg),
                                    std::cref(endpoint), batches[b]));
    }
    for (std::size_t b = wave; b < end; ++b) results[b] = inflight[b - wave].get();
  }

  std::vector<TranslationRecord> records;
  std::size_t unreachable = 0;
  std::string first_error;
  for (auto& r : results) {
    if (r.outcome == BatchOutcome::kUnreachable) {
      ++unreachable;
      if (first_error.empty()) first_error = r.error;
      continue;
    }
    std::move(r.records.begin(), r.records.end(), std::back_inserter(records));
  }
  std::sort(records.begin(), records.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  if (unreachable > 0) {
    throw BackendUnreachableError("translation endpoint " + cfg.location + " unreachable for " +
                                      std::to_string(unreachable) + " of " +
                                      std::to_string(batches.size()) + " batches (" +
                                      first_error + ")",
                                  std::move(records));
  }
  return records;
}

JoinResult join(const std::vector<Utterance>& utterances,
                const std::vector<TranslationRecord>& records, double min_coverage) {
  JoinResult out;
  std::unordered_map<std::int64_t, const TranslationRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);
  std::unordered_set<std::int64_t> corpus_ids;
  for (const auto& u : utterances) {
    corpus_ids.insert(u.id);
    auto it = by_id.find(u.id);
    if (it == by_id.end()) {
      out.missing_ids.push_back(u.id);
    } else {
      out.pairs.emplace_back(u, *it->second);
    }
  }
  for (const auto& r : records) {
    if (!corpus_ids.count(r.id)) out.orphan_ids.push_back(r.id);
  }
  out.coverage = utterances.empty()
                     ? 1.0
                     : static_cast<double>(out.pairs.size()) / static_cast<double>(utterances.size());
  if (out.coverage < min_coverage) {
    throw ComputationError("translation coverage " + std::to_string(out.coverage) +
                           " is below the minimum " + std::to_string(min_coverage) + " (" +
                           std::to_string(out.missing_ids.size()) + " corpus rows untranslated)");
  }
  return out;
}

}  // namespace biaseval

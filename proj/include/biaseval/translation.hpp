#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "biaseval/eec.hpp"
#include "biaseval/error.hpp"

namespace biaseval {

struct TranslationRecord {
  std::int64_t id = 0;
  std::string output;
  std::string backend;
  bool failed = false;
  int retries = 0;  // extra attempts spent on this record's batch

  friend bool operator==(const TranslationRecord&, const TranslationRecord&) = default;
};

enum class BackendKind { kFile, kHttp };

struct BackendConfig {
  BackendKind kind = BackendKind::kFile;
  std::string location;  // path or URL
  std::chrono::milliseconds timeout{10000};
  int retry_count = 2;
  std::size_t batch_size = 64;
  std::size_t max_in_flight = 4;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string label;  // recorded on every record; defaults to the location

  /// Throws InputError unless timeout > 0, 0 <= retry_count <= 5 and
  /// 1 <= batch_size <= 64.
  void validate() const;
};

/// Header "id\ttranslation". An empty translation marks the record failed.
std::vector<TranslationRecord> load_translations_tsv(const std::filesystem::path& path,
                                                     const std::string& backend = "file");
std::vector<TranslationRecord> parse_translations_tsv(std::string_view text,
                                                      const std::string& backend = "file");
/// Tabs and line breaks inside a translation are written as spaces.
void write_translations_tsv(const std::vector<TranslationRecord>& records, std::ostream& out);
void write_translations_tsv(const std::vector<TranslationRecord>& records,
                            const std::filesystem::path& path);

// The endpoint could not be reached for some batch even after retries. The
// records of every batch that did complete are kept so a run can resume.
class BackendUnreachableError : public ComputationError {
 public:
  BackendUnreachableError(std::string message, std::vector<TranslationRecord> completed);

  const std::vector<TranslationRecord>& completed() const { return completed_; }
  std::vector<std::int64_t> completed_ids() const;

 private:
  std::vector<TranslationRecord> completed_;
};

/// POSTs {"texts": [{"id", "text"}]} per batch and reads
/// {"translations": [{"id", "text"}]}. Ids absent from a response, or a batch
/// the server keeps rejecting, become failed records. Output is sorted by id.
std::vector<TranslationRecord> fetch_translations_http(const BackendConfig& cfg,
                                                       const std::vector<Utterance>& utterances);

inline constexpr double kDefaultMinCoverage = 0.95;

struct JoinResult {
  std::vector<std::pair<Utterance, TranslationRecord>> pairs;  // corpus order
  std::vector<std::int64_t> missing_ids;                       // corpus rows without a record
  std::vector<std::int64_t> orphan_ids;                        // records without a corpus row
  double coverage = 1.0;
};

/// Inner join on id. Throws ComputationError when coverage < min_coverage.
JoinResult join(const std::vector<Utterance>& utterances,
                const std::vector<TranslationRecord>& records,
                double min_coverage = kDefaultMinCoverage);

}  // namespace biaseval

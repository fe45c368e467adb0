#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "biaseval/embedding.hpp"
#include "biaseval/metrics.hpp"
#include "biaseval/query.hpp"
#include "json.hpp"

namespace biaseval {

enum class Aggregation { kAbsMean, kMean };

std::string_view aggregation_name(Aggregation agg);
Aggregation parse_aggregation(std::string_view name);

// Which direction of a metric's aggregate means "fairer". WEAT, RND and RNSB
// measure bias magnitude; ECT measures coherence, where 1 is unbiased.
enum class Orientation { kLowerIsFairer, kHigherIsFairer };

Orientation metric_orientation(Metric metric);
/// abs_mean for the magnitude metrics, mean for ECT.
Aggregation default_aggregation(Metric metric);

struct ScoreCell {
  std::optional<double> value;  // empty = missing cell
  std::string error;            // why the cell is missing
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
};

struct ScoreMatrix {
  Metric metric = Metric::kWeat;
  std::vector<std::string> rows;  // embedding names
  std::vector<std::string> cols;  // subquery labels
  std::vector<std::vector<ScoreCell>> cells;

  const ScoreCell& at(std::size_t row, std::size_t col) const { return cells[row][col]; }
};

struct ScoreOptions {
  double lost_threshold = kDefaultLostThreshold;
  ClassifierHyper hyper;
};

/// Cell (i, j) is metric(embedding i, subquery j). Any per-cell failure
/// becomes a missing cell. Throws InputError with no tables or no subqueries.
ScoreMatrix build_score_matrix(Metric metric, const std::vector<EmbeddingTable>& tables,
                               const std::vector<Query>& subqueries,
                               const ScoreOptions& options = {});

/// One aggregate per row over its present cells. Throws ComputationError on a
/// fully missing row.
std::vector<std::pair<std::string, double>> aggregate_rows(const ScoreMatrix& matrix,
                                                           Aggregation agg);

/// 1-based ranks, best first; ties keep registration order. Output is in the
/// order of the ranking.
std::vector<std::pair<std::string, int>> rank_embeddings(
    const std::vector<std::pair<std::string, double>>& aggregates,
    Orientation orientation = Orientation::kLowerIsFairer);

struct MetricSpec {
  Metric metric = Metric::kWeat;
  QueryTemplate tmpl;
  Aggregation agg = Aggregation::kAbsMean;
};

/// Template and aggregation defaults for `metric`.
MetricSpec default_metric_spec(Metric metric);

struct RankTable {
  std::vector<std::string> rows;  // embeddings, registration order
  std::vector<std::string> cols;  // metrics
  std::vector<std::vector<double>> aggregate_values;
  std::vector<std::vector<int>> ranks;
  std::vector<ScoreMatrix> matrices;  // one per column
  std::vector<Aggregation> aggregations;
  std::vector<ExpansionWarning> warnings;
};

/// expand -> score -> aggregate -> rank for every metric. Rows are
/// embeddings, columns metrics.
RankTable build_rank_table(const std::vector<MetricSpec>& metrics,
                           const std::vector<EmbeddingTable>& tables,
                           const std::vector<Query>& queries,
                           const ScoreOptions& options = {});

enum class RankCellMode { kRanks, kValues, kValuesAndRanks };

/// Bordered text grid laid out like a results table: first column
/// "Embedding", one column per metric.
std::string render_rank_table(const RankTable& table, RankCellMode mode);

std::string rank_table_csv(const RankTable& table);
nlohmann::ordered_json rank_table_json(const RankTable& table);
nlohmann::ordered_json score_matrix_json(const ScoreMatrix& matrix);

/// "%g"-style shortest form with up to six significant digits.
std::string format_value(double value);

}  // namespace biaseval

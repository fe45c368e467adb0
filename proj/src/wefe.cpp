#include "biaseval/wefe.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace biaseval {
namespace {

std::size_t display_width(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  out.append(width - std::min(width, display_width(s)), ' ');
  return out;
}

std::string shortest(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// Registration indices from best to worst; stable, so ties keep their order.
std::vector<std::size_t> ranking_order(const std::vector<std::pair<std::string, double>>& aggregates,
                                       Orientation orientation) {
  std::vector<std::size_t> order(aggregates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return orientation == Orientation::kLowerIsFairer
               ? aggregates[a].second < aggregates[b].second
               : aggregates[a].second > aggregates[b].second;
  });
  return order;
}

}  // namespace

std::string_view aggregation_name(Aggregation agg) {
  return agg == Aggregation::kAbsMean ? "abs_mean" : "mean";
}

Aggregation parse_aggregation(std::string_view name) {
  if (name == "abs_mean") return Aggregation::kAbsMean;
  if (name == "mean") return Aggregation::kMean;
  throw InputError("unknown aggregation '" + std::string(name) + "' (expected abs_mean or mean)");
}

Orientation metric_orientation(Metric metric) {
  return metric == Metric::kEct ? Orientation::kHigherIsFairer : Orientation::kLowerIsFairer;
}

Aggregation default_aggregation(Metric metric) {
  return metric == Metric::kEct ? Aggregation::kMean : Aggregation::kAbsMean;
}

MetricSpec default_metric_spec(Metric metric) {
  return {metric, metric_template(metric), default_aggregation(metric)};
}

ScoreMatrix build_score_matrix(Metric metric, const std::vector<EmbeddingTable>& tables,
                               const std::vector<Query>& subqueries, const ScoreOptions& options) {
  if (tables.empty()) throw InputError("score matrix needs at least one embedding");
  if (subqueries.empty()) throw InputError("score matrix needs at least one subquery");
  ScoreMatrix m;
  m.metric = metric;
  for (const auto& t : tables) m.rows.push_back(t.name());
  for (const auto& q : subqueries) m.cols.push_back(q.label());
  m.cells.resize(tables.size(), std::vector<ScoreCell>(subqueries.size()));

  for (std::size_t i = 0; i < tables.size(); ++i) {
    for (std::size_t j = 0; j < subqueries.size(); ++j) {
      ScoreCell& cell = m.cells[i][j];
      try {
        ResolvedQuery rq = resolve_query(subqueries[j], tables[i], options.lost_threshold);
        nlohmann::ordered_json dropped = nlohmann::ordered_json::object();
        for (const auto& [set, res] : rq.provenance) {
          if (!res.dropped.empty()) dropped[set] = res.dropped;
        }
        MetricResult r = evaluate_metric(metric, rq, options.hyper);
        cell.value = r.value;
        cell.diagnostics = std::move(r.diagnostics);
        cell.diagnostics["dropped"] = std::move(dropped);
      } catch (const VocabularyLossError& e) {
        cell.error = e.what();
        cell.diagnostics["dropped"] = {{e.set_name(), e.dropped()}};
      } catch (const Error& e) {
        cell.error = e.what();
      }
    }
  }
  return m;
}

std::vector<std::pair<std::string, double>> aggregate_rows(const ScoreMatrix& matrix,
                                                           Aggregation agg) {
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    double sum = 0.0;
    std::size_t present = 0;
    for (const auto& cell : matrix.cells[i]) {
      if (!cell.value) continue;
      sum += agg == Aggregation::kAbsMean ? std::abs(*cell.value) : *cell.value;
      ++present;
    }
    if (present == 0) {
      throw ComputationError("embedding '" + matrix.rows[i] + "' has no " +
                             std::string(metric_name(matrix.metric)) +
                             " score on any subquery");
    }
    out.emplace_back(matrix.rows[i], sum / static_cast<double>(present));
  }
  return out;
}

std::vector<std::pair<std::string, int>> rank_embeddings(
    const std::vector<std::pair<std::string, double>>& aggregates, Orientation orientation) {
  std::vector<std::pair<std::string, int>> out;
  auto order = ranking_order(aggregates, orientation);
  for (std::size_t r = 0; r < order.size(); ++r) {
    out.emplace_back(aggregates[order[r]].first, static_cast<int>(r + 1));
  }
  return out;
}

RankTable build_rank_table(const std::vector<MetricSpec>& metrics,
                           const std::vector<EmbeddingTable>& tables,
                           const std::vector<Query>& queries, const ScoreOptions& options) {
  if (metrics.empty()) throw InputError("rank table needs at least one metric");
  if (tables.empty()) throw InputError("rank table needs at least one embedding");
  RankTable table;
  for (const auto& t : tables) table.rows.push_back(t.name());
  table.aggregate_values.assign(tables.size(), std::vector<double>(metrics.size()));
  table.ranks.assign(tables.size(), std::vector<int>(metrics.size()));

  for (std::size_t c = 0; c < metrics.size(); ++c) {
    const MetricSpec& spec = metrics[c];
    table.cols.emplace_back(metric_name(spec.metric));
    table.aggregations.push_back(spec.agg);
    Expansion ex = expand_subqueries(queries, spec.tmpl);
    for (auto& w : ex.warnings) {
      w.message = std::string(metric_name(spec.metric)) + ": " + w.message;
      table.warnings.push_back(std::move(w));
    }
    if (ex.subqueries.empty()) {
      throw InputError("no query satisfies the " + std::string(metric_name(spec.metric)) +
                       " template");
    }
    ScoreMatrix matrix = build_score_matrix(spec.metric, tables, ex.subqueries, options);
    auto aggregates = aggregate_rows(matrix, spec.agg);
    for (std::size_t r = 0; r < aggregates.size(); ++r) {
      table.aggregate_values[r][c] = aggregates[r].second;
    }
    // Names may repeat, so ranks go back through registration positions.
    auto order = ranking_order(aggregates, metric_orientation(spec.metric));
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
      table.ranks[order[pos]][c] = static_cast<int>(pos + 1);
    }
    table.matrices.push_back(std::move(matrix));
  }
  return table;
}

std::string format_value(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

std::string render_rank_table(const RankTable& table, RankCellMode mode) {
  std::vector<std::vector<std::string>> grid;
  grid.push_back({"Embedding"});
  for (const auto& c : table.cols) grid.back().push_back(c);
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    std::vector<std::string> line{table.rows[r]};
    for (std::size_t c = 0; c < table.cols.size(); ++c) {
      std::string value = format_value(table.aggregate_values[r][c]);
      std::string rank = std::to_string(table.ranks[r][c]);
      switch (mode) {
        case RankCellMode::kRanks: line.push_back(rank); break;
        case RankCellMode::kValues: line.push_back(value); break;
        case RankCellMode::kValuesAndRanks: line.push_back(value + " (" + rank + ")"); break;
      }
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> widths(grid.front().size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      widths[c] = std::max(widths[c], display_width(line[c]));
    }
  }
  std::string rule = "+";
  for (auto w : widths) rule += std::string(w + 2, '-') + "+";
  rule += "\n";

  std::ostringstream out;
  out << rule;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    out << "|";
    for (std::size_t c = 0; c < grid[r].size(); ++c) out << " " << pad(grid[r][c], widths[c]) << " |";
    out << "\n";
    if (r == 0) out << rule;
  }
  out << rule;
  return out.str();
}

std::string rank_table_csv(const RankTable& table) {
  std::ostringstream out;
  out << "embedding";
  for (const auto& c : table.cols) out << "," << c << "_aggregate," << c << "_rank";
  out << "\n";
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << csv_field(table.rows[r]);
    for (std::size_t c = 0; c < table.cols.size(); ++c) {
      out << "," << shortest(table.aggregate_values[r][c]) << "," << table.ranks[r][c];
    }
    out << "\n";
  }
  return out.str();
}

nlohmann::ordered_json score_matrix_json(const ScoreMatrix& matrix) {
  nlohmann::ordered_json j;
  j["metric"] = metric_name(matrix.metric);
  j["rows"] = matrix.rows;
  j["cols"] = matrix.cols;
  auto& cells = j["cells"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < matrix.rows.size(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (const auto& cell : matrix.cells[r]) {
      nlohmann::ordered_json c;
      c["value"] = cell.value ? nlohmann::ordered_json(*cell.value) : nlohmann::ordered_json();
      if (!cell.error.empty()) c["error"] = cell.error;
      c["diagnostics"] = cell.diagnostics;
      row.push_back(std::move(c));
    }
    cells.push_back(std::move(row));
  }
  return j;
}

nlohmann::ordered_json rank_table_json(const RankTable& table) {
  nlohmann::ordered_json j;
  j["rows"] = table.rows;
  j["cols"] = table.cols;
  auto& aggs = j["aggregation"] = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < table.cols.size(); ++c) {
    aggs[table.cols[c]] = aggregation_name(table.aggregations[c]);
  }
  auto& rows = j["table"] = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    nlohmann::ordered_json row;
    row["embedding"] = table.rows[r];
    for (std::size_t c = 0; c < table.cols.size(); ++c) {
      row[table.cols[c]] = {{"aggregate", table.aggregate_values[r][c]},
                            {"rank", table.ranks[r][c]}};
    }
    rows.push_back(std::move(row));
  }
  auto& matrices = j["score_matrices"] = nlohmann::ordered_json::array();
  for (const auto& m : table.matrices) matrices.push_back(score_matrix_json(m));
  auto& warnings = j["warnings"] = nlohmann::ordered_json::array();
  for (const auto& w : table.warnings) {
    warnings.push_back({{"query", w.query_label}, {"message", w.message}});
  }
  return j;
}

}  // namespace biaseval

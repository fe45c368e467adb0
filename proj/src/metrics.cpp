#include "biaseval/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>


namespace biaseval {
namespace {

void require_shape(const ResolvedQuery& rq, Metric metric, std::size_t min_targets,
                   std::size_t max_targets, std::size_t attributes) {
  std::size_t t = rq.targets.size();
  if (t < min_targets || t > max_targets || rq.attributes.size() != attributes) {
    throw InputError(std::string(metric_name(metric)) + " template mismatch on query '" +
                     rq.label + "': got " + std::to_string(t) + " target and " +
                     std::to_string(rq.attributes.size()) + " attribute sets");
  }
  for (const auto* group : {&rq.targets, &rq.attributes}) {
    for (const auto& m : *group) {
      if (m.rows.empty()) throw ComputationError("set '" + m.name + "' has no vectors");
    }
  }
}

Vector centroid(const std::vector<Vector>& rows) {
  Vector c(rows.front().size(), 0.0);
  for (const auto& r : rows) {
    if (r.size() != c.size()) throw ComputationError("dimension mismatch inside a word set");
    for (std::size_t i = 0; i < c.size(); ++i) c[i] += r[i];
  }
  for (double& x : c) x /= static_cast<double>(rows.size());
  return c;
}

double distance(VectorView a, VectorView b) {
  if (a.size() != b.size()) throw ComputationError("dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double mean_cosine(VectorView w, const std::vector<Vector>& rows) {
  double s = 0.0;
  for (const auto& x : rows) s += cosine(w, x);
  return s / static_cast<double>(rows.size());
}

nlohmann::ordered_json set_sizes(const std::vector<NamedMatrix>& sets) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& m : sets) out[m.name] = m.size();
  return out;
}

MetricResult make_result(Metric metric, double value, const ResolvedQuery& rq) {
  if (!std::isfinite(value)) {
    throw ComputationError(std::string(metric_name(metric)) + " produced a non-finite value");
  }
  MetricResult r;
  r.metric = metric;
  r.value = value;
  r.query_label = rq.label;
  r.diagnostics["target_sizes"] = set_sizes(rq.targets);
  r.diagnostics["attribute_sizes"] = set_sizes(rq.attributes);
  return r;
}

// Numerically stable per-sample cross-entropy for label y given logit z.
double logistic_loss(double z, double y) {
  return std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

std::string_view metric_name(Metric metric) {
  switch (metric) {
    case Metric::kWeat: return "WEAT";
    case Metric::kRnd: return "RND";
    case Metric::kRnsb: return "RNSB";
    case Metric::kEct: return "ECT";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  std::string up(name);
  for (char& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (up == "WEAT") return Metric::kWeat;
  if (up == "RND") return Metric::kRnd;
  if (up == "RNSB") return Metric::kRnsb;
  if (up == "ECT") return Metric::kEct;
  throw InputError("unknown metric '" + std::string(name) + "' (expected WEAT, RND, RNSB or ECT)");
}

QueryTemplate metric_template(Metric metric) {
  switch (metric) {
    case Metric::kWeat: return {2, 2};
    case Metric::kRnd: return {2, 1};
    case Metric::kRnsb: return {2, 2};
    case Metric::kEct: return {2, 1};
  }
  return {};
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

double ClassifierModel::probability(VectorView x) const { return sigmoid(dot(weights, x) + bias); }

Vector classifier_initial_weights(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Vector w(dim);
  for (double& x : w) {
    double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    x = (2.0 * u - 1.0) * 0.01;
  }
  return w;
}

double weat_association(VectorView w, const std::vector<Vector>& a1,
                        const std::vector<Vector>& a2) {
  if (a1.empty() || a2.empty()) throw ComputationError("WEAT association needs two non-empty sets");
  return mean_cosine(w, a1) - mean_cosine(w, a2);
}

MetricResult weat(const ResolvedQuery& rq) {
  require_shape(rq, Metric::kWeat, 2, 2, 2);
  const auto& a1 = rq.attributes[0].rows;
  const auto& a2 = rq.attributes[1].rows;
  double sum1 = 0.0;
  for (const auto& w : rq.targets[0].rows) sum1 += weat_association(w, a1, a2);
  double sum2 = 0.0;
  for (const auto& w : rq.targets[1].rows) sum2 += weat_association(w, a1, a2);
  auto r = make_result(Metric::kWeat, sum1 - sum2, rq);
  r.diagnostics["target_association_sums"] = {sum1, sum2};
  return r;
}

MetricResult rnd(const ResolvedQuery& rq) {
  require_shape(rq, Metric::kRnd, 2, 2, 1);
  Vector c1 = centroid(rq.targets[0].rows);
  Vector c2 = centroid(rq.targets[1].rows);
  double total = 0.0;
  for (const auto& x : rq.attributes[0].rows) total += distance(c1, x) - distance(c2, x);
  auto r = make_result(Metric::kRnd, total, rq);
  r.diagnostics["centroid_norms"] = {l2_norm(c1), l2_norm(c2)};
  return r;
}

ClassifierModel train_attribute_classifier(const std::vector<Vector>& a1,
                                           const std::vector<Vector>& a2,
                                           const ClassifierHyper& hyper) {
  if (a1.empty() || a2.empty()) throw ComputationError("classifier needs two non-empty classes");
  if (!(hyper.learning_rate > 0.0) || hyper.epochs < 0) {
    throw InputError("classifier needs lr > 0 and epochs >= 0");
  }
  const std::size_t dim = a1.front().size();
  std::vector<std::pair<const Vector*, double>> samples;
  for (const auto& x : a1) samples.emplace_back(&x, 1.0);
  for (const auto& x : a2) samples.emplace_back(&x, 0.0);
  for (const auto& [x, y] : samples) {
    if (x->size() != dim) throw ComputationError("classifier inputs differ in dimension");
  }
  const double n = static_cast<double>(samples.size());

  ClassifierModel model;
  model.weights = classifier_initial_weights(dim, hyper.seed);
  Vector grad(dim);
  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    std::fill(grad.begin(), grad.end(), 0.0);
    double grad_bias = 0.0;
    for (const auto& [x, y] : samples) {
      double err = model.probability(*x) - y;
      for (std::size_t i = 0; i < dim; ++i) grad[i] += err * (*x)[i];
      grad_bias += err;
    }
    for (std::size_t i = 0; i < dim; ++i) model.weights[i] -= hyper.learning_rate * grad[i] / n;
    model.bias -= hyper.learning_rate * grad_bias / n;
  }

  double loss = 0.0;
  for (const auto& [x, y] : samples) loss += logistic_loss(dot(model.weights, *x) + model.bias, y);
  model.training_loss = loss / n;
  bool finite = std::isfinite(model.training_loss) && std::isfinite(model.bias) &&
                std::all_of(model.weights.begin(), model.weights.end(),
                            [](double w) { return std::isfinite(w); });
  if (!finite) {
    throw ComputationError("attribute classifier diverged; try a smaller learning rate");
  }
  return model;
}

double kl_from_uniform(std::span<const double> weights) {
  if (weights.empty()) throw ComputationError("KL divergence of an empty distribution");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw ComputationError("distribution weights must be finite and non-negative");
    }
    total += w;
  }
  if (total == 0.0) throw ComputationError("all classifier outputs are zero; cannot normalize");
  const double n = static_cast<double>(weights.size());
  double kl = 0.0;
  for (double w : weights) {
    double p = w / total;
    if (p > 0.0) kl += p * std::log(p * n);
  }
  // Rounding can leave a tiny negative residue for a uniform input.
  return std::max(kl, 0.0);
}

MetricResult rnsb(const ResolvedQuery& rq, const ClassifierHyper& hyper) {
  require_shape(rq, Metric::kRnsb, 2, static_cast<std::size_t>(-1), 2);
  ClassifierModel model =
      train_attribute_classifier(rq.attributes[0].rows, rq.attributes[1].rows, hyper);

  std::vector<double> all_scores;
  std::vector<double> support_scores;
  std::unordered_set<std::string> seen;
  for (const auto& set : rq.targets) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      double p = model.probability(set.rows[i]);
      all_scores.push_back(p);
      if (seen.insert(set.tokens[i]).second) support_scores.push_back(p);
    }
  }
  double value = kl_from_uniform(support_scores);
  auto r = make_result(Metric::kRnsb, value, rq);
  r.diagnostics["normalization"] = "union_dedup";
  r.diagnostics["support_size"] = support_scores.size();
  r.diagnostics["kl_without_dedup"] = kl_from_uniform(all_scores);
  r.diagnostics["classifier_loss"] = model.training_loss;
  r.diagnostics["seed"] = hyper.seed;
  return r;
}

std::vector<double> fractional_ranks(std::span<const double> values, double tie_tolerance) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] - values[order[i]] <= tie_tolerance) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1.
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> s1, std::span<const double> s2, double tie_tolerance) {
  if (s1.size() != s2.size()) throw ComputationError("spearman inputs differ in length");
  if (s1.size() < 2) throw ComputationError("spearman needs at least two values");
  auto r1 = fractional_ranks(s1, tie_tolerance);
  auto r2 = fractional_ranks(s2, tie_tolerance);
  const double n = static_cast<double>(r1.size());
  double m1 = std::accumulate(r1.begin(), r1.end(), 0.0) / n;
  double m2 = std::accumulate(r2.begin(), r2.end(), 0.0) / n;
  double cov = 0.0, v1 = 0.0, v2 = 0.0;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    double d1 = r1[i] - m1;
    double d2 = r2[i] - m2;
    cov += d1 * d2;
    v1 += d1 * d1;
    v2 += d2 * d2;
  }
  if (v1 == 0.0 || v2 == 0.0) {
    throw ComputationError("spearman correlation undefined for a constant input");
  }
  return std::clamp(cov / std::sqrt(v1 * v2), -1.0, 1.0);
}

MetricResult ect(const ResolvedQuery& rq) {
  require_shape(rq, Metric::kEct, 2, 2, 1);
  const auto& attrs = rq.attributes[0].rows;
  if (attrs.size() < 2) {
    throw ComputationError("ECT needs at least two attribute words, set '" +
                           rq.attributes[0].name + "' has " + std::to_string(attrs.size()));
  }
  Vector mu1 = centroid(rq.targets[0].rows);
  Vector mu2 = centroid(rq.targets[1].rows);
  std::vector<double> s1, s2;
  s1.reserve(attrs.size());
  s2.reserve(attrs.size());
  for (const auto& a : attrs) {
    s1.push_back(cosine(mu1, a));
    s2.push_back(cosine(mu2, a));
  }
  return make_result(Metric::kEct, spearman(s1, s2, kEctTieTolerance), rq);
}

MetricResult evaluate_metric(Metric metric, const ResolvedQuery& rq, const ClassifierHyper& hyper) {
  switch (metric) {
    case Metric::kWeat: return weat(rq);
    case Metric::kRnd: return rnd(rq);
    case Metric::kRnsb: return rnsb(rq, hyper);
    case Metric::kEct: return ect(rq);
  }
  throw InputError("unknown metric");
}

}  // namespace biaseval

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biaseval/embedding.hpp"
#include "biaseval/query.hpp"
#include "json.hpp"

namespace biaseval {

enum class Metric { kWeat, kRnd, kRnsb, kEct };

std::string_view metric_name(Metric metric);
/// Parses "WEAT", "RND", "RNSB" or "ECT" (case-insensitive).
Metric parse_metric(std::string_view name);
/// The (targets, attributes) shape each metric consumes.
QueryTemplate metric_template(Metric metric);

struct MetricResult {
  Metric metric = Metric::kWeat;
  double value = 0.0;
  std::string query_label;
  std::string embedding_name;
  nlohmann::ordered_json diagnostics = nlohmann::ordered_json::object();
};

struct ClassifierHyper {
  double learning_rate = 0.1;
  int epochs = 500;
  std::uint64_t seed = 42;
};

// Logistic regression p(class 1 | x) = sigmoid(weights . x + bias).
struct ClassifierModel {
  Vector weights;
  double bias = 0.0;
  double training_loss = 0.0;

  double probability(VectorView x) const;
};

double sigmoid(double z);

/// Initial weights for the attribute classifier: `dim` values uniform in
/// [-0.01, 0.01) drawn from mt19937_64(seed), 53-bit mantissa conversion.
Vector classifier_initial_weights(std::size_t dim, std::uint64_t seed);

/// Mean cos(w, x) over A1 minus mean cos(w, x) over A2.
double weat_association(VectorView w, const std::vector<Vector>& a1,
                        const std::vector<Vector>& a2);

/// Sum of associations over T1 minus sum over T2 (no division by set size).
MetricResult weat(const ResolvedQuery& rq);

/// Sum over attributes of |mean(T1) - x| - |mean(T2) - x|.
MetricResult rnd(const ResolvedQuery& rq);

/// Full-batch gradient descent on mean cross-entropy, A1 labelled 1 and A2
/// labelled 0. Deterministic for a fixed seed.
ClassifierModel train_attribute_classifier(const std::vector<Vector>& a1,
                                           const std::vector<Vector>& a2,
                                           const ClassifierHyper& hyper = {});

/// KL(P || U) in nats, 0 ln 0 = 0. Throws ComputationError if the weights
/// sum to zero or any weight is negative or non-finite.
double kl_from_uniform(std::span<const double> weights);

/// Trains on the two attribute sets, scores every distinct word of the target
/// sets and returns KL of the normalized scores from uniform.
MetricResult rnsb(const ResolvedQuery& rq, const ClassifierHyper& hyper = {});

/// Average ranks (1-based) with ties sharing their mean rank. Values within
/// `tie_tolerance` of the smallest member of a run count as tied.
std::vector<double> fractional_ranks(std::span<const double> values, double tie_tolerance = 0.0);

/// Pearson correlation of the fractional ranks. Throws ComputationError for
/// fewer than two values, unequal lengths or a constant input.
double spearman(std::span<const double> s1, std::span<const double> s2, double tie_tolerance = 0.0);

// Cosines closer than this are rounding noise around one exact value.
inline constexpr double kEctTieTolerance = 1e-12;

/// Spearman correlation between the cosine profiles of the two target
/// centroids over the attribute words.
MetricResult ect(const ResolvedQuery& rq);

/// Dispatches on `metric`. The RNSB hyperparameters are ignored otherwise.
MetricResult evaluate_metric(Metric metric, const ResolvedQuery& rq,
                             const ClassifierHyper& hyper = {});

}  // namespace biaseval

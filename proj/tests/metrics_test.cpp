#include <gtest/gtest.h>

#include <cmath>

#include "biaseval/metrics.hpp"
#include "oracle.hpp"
#include "random_query.hpp"
#include "support.hpp"

using namespace biaseval;
using testing_support::Gen;

namespace {

NamedMatrix nm(const std::string& name, std::vector<Vector> rows) {
  NamedMatrix m;
  m.name = name;
  for (std::size_t i = 0; i < rows.size(); ++i) m.tokens.push_back(name + std::to_string(i));
  m.rows = std::move(rows);
  return m;
}

ResolvedQuery rq(std::vector<NamedMatrix> targets, std::vector<NamedMatrix> attributes) {
  ResolvedQuery q;
  q.label = "q";
  q.targets = std::move(targets);
  q.attributes = std::move(attributes);
  return q;
}

ResolvedQuery swap_targets(ResolvedQuery q) {
  std::swap(q.targets[0], q.targets[1]);
  return q;
}

}  // namespace

TEST(Names, ParseAndTemplate) {
  EXPECT_EQ(parse_metric("weat"), Metric::kWeat);
  EXPECT_EQ(parse_metric("Rnsb"), Metric::kRnsb);
  EXPECT_THROW(parse_metric("xyz"), InputError);
  EXPECT_EQ(metric_template(Metric::kWeat), (QueryTemplate{2, 2}));
  EXPECT_EQ(metric_template(Metric::kRnd), (QueryTemplate{2, 1}));
  EXPECT_EQ(metric_template(Metric::kRnsb), (QueryTemplate{2, 2}));
  EXPECT_EQ(metric_template(Metric::kEct), (QueryTemplate{2, 1}));
}

TEST(WeatAssociation, Examples) {
  EXPECT_DOUBLE_EQ(weat_association(Vector{1, 0}, {{1, 0}}, {{0, 1}}), 1.0);
  std::vector<Vector> a{{0.2, 0.9}, {-1, 3}};
  EXPECT_EQ(weat_association(Vector{0.7, -0.1}, a, a), 0.0);
  // both cosines 1/sqrt2
  EXPECT_NEAR(weat_association(Vector{1, 1}, {{1, 0}}, {{0, 1}}), 0.0, 1e-15);
}

TEST(Weat, Examples) {
  auto q = rq({nm("T1", {{1, 0}}), nm("T2", {{0, 1}})}, {nm("A1", {{1, 0}}), nm("A2", {{0, 1}})});
  auto r = weat(q);
  EXPECT_DOUBLE_EQ(r.value, 2.0);
  EXPECT_EQ(r.metric, Metric::kWeat);
  EXPECT_EQ(r.diagnostics["target_sizes"]["T1"], 1);

  auto same = rq({nm("T1", {{1, 2}, {3, 1}}), nm("T2", {{1, 2}, {3, 1}})},
                 {nm("A1", {{1, 0}}), nm("A2", {{0, 1}})});
  EXPECT_EQ(weat(same).value, 0.0);
  EXPECT_DOUBLE_EQ(weat(swap_targets(q)).value, -2.0);
}

TEST(Weat, TemplateMismatch) {
  auto q = rq({nm("T1", {{1, 0}}), nm("T2", {{0, 1}})}, {nm("A1", {{1, 0}})});
  EXPECT_THROW(weat(q), InputError);
}

TEST(Rnd, Examples) {
  auto q = rq({nm("T1", {{1, 0}}), nm("T2", {{0, 1}})}, {nm("A", {{1, 0}})});
  // |(0,0)| - |(-1,1)|
  EXPECT_NEAR(rnd(q).value, -std::sqrt(2.0), 1e-15);
  auto same = rq({nm("T1", {{1, 2}}), nm("T2", {{1, 2}})}, {nm("A", {{5, -1}, {0, 3}})});
  EXPECT_EQ(rnd(same).value, 0.0);
  EXPECT_NEAR(rnd(swap_targets(q)).value, std::sqrt(2.0), 1e-15);
}

TEST(Classifier, SeparableData) {
  auto m = train_attribute_classifier({{1, 0}}, {{-1, 0}});
  EXPECT_GT(m.probability(Vector{1, 0}), 0.9);
  EXPECT_LT(m.probability(Vector{-1, 0}), 0.1);
  EXPECT_EQ(m.weights.size(), 2u);
}

TEST(Classifier, IndistinguishableClasses) {
  std::vector<Vector> a{{0.3, 0.4}, {-0.2, 0.9}};
  auto m = train_attribute_classifier(a, a);
  EXPECT_GE(m.training_loss, std::log(2.0) - 1e-12);
  for (const auto& x : a) EXPECT_NEAR(m.probability(x), 0.5, 1e-3);
}

TEST(Classifier, Deterministic) {
  Gen g(5);
  auto a1 = g.matrix(4, 3), a2 = g.matrix(3, 3);
  auto m1 = train_attribute_classifier(a1, a2, {0.1, 200, 9});
  auto m2 = train_attribute_classifier(a1, a2, {0.1, 200, 9});
  EXPECT_EQ(m1.weights, m2.weights);
  EXPECT_EQ(m1.bias, m2.bias);
  auto m3 = train_attribute_classifier(a1, a2, {0.1, 200, 10});
  EXPECT_NE(m1.weights, m3.weights);
}

TEST(Classifier, DivergenceIsReported) {
  try {
    train_attribute_classifier({{1e300, 1e300}}, {{-1e300, -1e300}}, {1e10, 50, 1});
    FAIL();
  } catch (const ComputationError& e) {
    EXPECT_NE(std::string(e.what()).find("learning rate"), std::string::npos);
  }
}

TEST(Classifier, InitialWeightsInRange) {
  auto w = classifier_initial_weights(1000, 42);
  for (double x : w) {
    EXPECT_GE(x, -0.01);
    EXPECT_LT(x, 0.01);
  }
  EXPECT_EQ(w, classifier_initial_weights(1000, 42));
}

TEST(Sigmoid, StableAtExtremes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-800.0), 0.0);
  EXPECT_EQ(sigmoid(800.0), 1.0);
  EXPECT_DOUBLE_EQ(sigmoid(2.0) + sigmoid(-2.0), 1.0);
}

TEST(Kl, Examples) {
  EXPECT_EQ(kl_from_uniform(std::vector<double>{0.3, 0.3, 0.3}), 0.0);
  EXPECT_NEAR(kl_from_uniform(std::vector<double>{1.0, 0.0}), std::log(2.0), 1e-15);
  EXPECT_THROW(kl_from_uniform(std::vector<double>{0.0, 0.0}), ComputationError);
  EXPECT_THROW(kl_from_uniform(std::vector<double>{-0.1, 1.0}), ComputationError);
}

TEST(Rnsb, EqualOutputsGiveZero) {
  // All target words share one vector, so the classifier scores them equally.
  auto q = rq({nm("T1", {{0.5, 0.5}, {0.5, 0.5}}), nm("T2", {{0.5, 0.5}})},
              {nm("A1", {{1, 0}}), nm("A2", {{0, 1}})});
  auto r = rnsb(q);
  EXPECT_NEAR(r.value, 0.0, 1e-9);
  EXPECT_EQ(r.diagnostics["normalization"], "union_dedup");
  EXPECT_EQ(r.diagnostics["seed"], 42);
}

TEST(Rnsb, DeduplicatesSharedTargetWords) {
  NamedMatrix t1 = nm("T1", {{1, 0.2}});
  NamedMatrix t2 = nm("T2", {{1, 0.2}, {-1, 0.3}});
  t2.tokens[0] = t1.tokens[0];
  auto r = rnsb(rq({t1, t2}, {nm("A1", {{1, 0}}), nm("A2", {{-1, 0}})}));
  EXPECT_EQ(r.diagnostics["support_size"], 2);
  EXPECT_GE(r.value, 0.0);
  EXPECT_NE(r.value, r.diagnostics["kl_without_dedup"].get<double>());
}

TEST(Rnsb, DeterministicAndMultiTarget) {
  auto q = rq({nm("T1", {{1, 0.2}}), nm("T2", {{-0.3, 1}}), nm("T3", {{0.2, -1}})},
              {nm("A1", {{1, 0}}), nm("A2", {{0, 1}})});
  EXPECT_EQ(rnsb(q).value, rnsb(q).value);
  EXPECT_THROW(rnsb(rq({nm("T1", {{1, 0}})}, {nm("A1", {{1, 0}}), nm("A2", {{0, 1}})})),
               InputError);
}

TEST(Spearman, Examples) {
  std::vector<double> s{0.1, 0.5, 0.9};
  EXPECT_EQ(spearman(s, s), 1.0);
  std::vector<double> r{0.9, 0.5, 0.1};
  EXPECT_EQ(spearman(s, r), -1.0);
  // 1 - 6*2/(4*15)
  EXPECT_NEAR(spearman(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}), 0.8,
              1e-15);
}

TEST(Spearman, TiesUseAverageRanks) {
  auto r = fractional_ranks(std::vector<double>{3, 1, 3, 2});
  EXPECT_EQ(r, (std::vector<double>{3.5, 1, 3.5, 2}));
}

TEST(Spearman, Errors) {
  EXPECT_THROW(spearman(std::vector<double>{1}, std::vector<double>{1}), ComputationError);
  EXPECT_THROW(spearman(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), ComputationError);
  EXPECT_THROW(spearman(std::vector<double>{1, 1}, std::vector<double>{1, 2}), ComputationError);
  std::vector<double> noisy{1.0, 1.0 - 1e-16, 0.2};
  EXPECT_EQ(fractional_ranks(noisy, kEctTieTolerance), (std::vector<double>{2.5, 2.5, 1}));
  EXPECT_EQ(fractional_ranks(noisy), (std::vector<double>{3, 2, 1}));
}

TEST(Ect, Examples) {
  auto same = rq({nm("T1", {{1, 2}}), nm("T2", {{1, 2}})}, {nm("A", {{1, 0}, {0, 1}, {1, 1}})});
  EXPECT_EQ(ect(same).value, 1.0);
  // s1 = (1, 0, 0.7071), s2 = (0, 1, 0.7071): ranks (3,1,2) vs (1,3,2).
  auto q = rq({nm("T1", {{1, 0}}), nm("T2", {{0, 1}})}, {nm("A", {{1, 0}, {0, 1}, {1, 1}})});
  EXPECT_DOUBLE_EQ(ect(q).value, -1.0);
  auto permuted =
      rq({nm("T1", {{1, 0}}), nm("T2", {{0, 1}})}, {nm("A", {{1, 1}, {1, 0}, {0, 1}})});
  EXPECT_EQ(ect(permuted).value, ect(q).value);
}

TEST(Ect, NeedsTwoAttributes) {
  auto q = rq({nm("T1", {{1, 0}}), nm("T2", {{0, 1}})}, {nm("A", {{1, 0}})});
  EXPECT_THROW(ect(q), ComputationError);
}

TEST(MetricProperty, SwapAndScale) {
  Gen g(21);
  for (int trial = 0; trial < 200; ++trial) {
    auto c = testing_support::random_case(g, 2, 2, 2);
    auto r = resolve_query(c.query, c.table);
    auto swapped = swap_targets(r);
    EXPECT_NEAR(weat(swapped).value, -weat(r).value, 1e-12);
    auto attr_swapped = r;
    std::swap(attr_swapped.attributes[0], attr_swapped.attributes[1]);
    EXPECT_NEAR(weat(attr_swapped).value, -weat(r).value, 1e-12);

    auto one_attr = r;
    one_attr.attributes.pop_back();
    auto one_attr_swapped = swap_targets(one_attr);
    EXPECT_NEAR(rnd(one_attr_swapped).value, -rnd(one_attr).value, 1e-12);

    double alpha = g.uniform(0.1, 10.0);
    auto scaled = one_attr;
    for (auto* group : {&scaled.targets, &scaled.attributes})
      for (auto& m : *group)
        for (auto& row : m.rows)
          for (auto& x : row) x *= alpha;
    EXPECT_NEAR(rnd(scaled).value, alpha * rnd(one_attr).value, 1e-9);
    auto scaled_full = r;
    for (auto* group : {&scaled_full.targets, &scaled_full.attributes})
      for (auto& m : *group)
        for (auto& row : m.rows)
          for (auto& x : row) x *= alpha;
    EXPECT_NEAR(weat(scaled_full).value, weat(r).value, 1e-9);

    auto self = one_attr;
    self.targets[1] = self.targets[0];
    try {
      EXPECT_EQ(ect(self).value, 1.0);
      double e = ect(one_attr).value;
      EXPECT_GE(e, -1.0);
      EXPECT_LE(e, 1.0);
    } catch (const ComputationError&) {
      // constant cosine profile, e.g. in one dimension
    }
    EXPECT_GE(rnsb(r, {0.1, 50, 42}).value, 0.0);
  }
}

TEST(MetricOracle, RandomQueriesMatchDirectFormulas) {
  Gen g(99);
  for (int trial = 0; trial < 100; ++trial) {
    auto c = testing_support::random_case(g, 2, 2, 2);
    auto r = resolve_query(c.query, c.table);
    EXPECT_NEAR(weat(r).value,
                oracle::weat(c.target(0), c.target(1), c.attribute(0), c.attribute(1)), 1e-9);
    auto one = r;
    one.attributes.pop_back();
    EXPECT_NEAR(rnd(one).value, oracle::rnd(c.target(0), c.target(1), c.attribute(0)), 1e-9);
    double want = oracle::ect(c.target(0), c.target(1), c.attribute(0));
    try {
      EXPECT_NEAR(ect(one).value, want, 1e-9);
    } catch (const ComputationError&) {
      EXPECT_TRUE(std::isnan(want));
    }
    std::vector<std::pair<std::string, oracle::Vec>> words = c.targets[0];
    words.insert(words.end(), c.targets[1].begin(), c.targets[1].end());
    EXPECT_EQ(rnsb(r, {0.1, 100, 7}).value,
              oracle::rnsb(words, c.attribute(0), c.attribute(1), 0.1, 100, 7));
  }
}

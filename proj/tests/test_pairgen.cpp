#include <gtest/gtest.h>

#include <cmath>

#include "prenet/errors.hpp"
#include "prenet/pairgen.hpp"

using namespace prenet;

namespace {

// Store rows carry their own index in column 0 so sides can be traced.
TrainingPools indexed_pools(std::size_t k, std::size_t n) {
  TrainingPools p;
  p.store = Matrix(k + n, 2);
  for (std::size_t i = 0; i < k + n; ++i) {
    p.store(i, 0) = static_cast<double>(i);
    p.store(i, 1) = i < k ? 1.0 : 0.0;
  }
  for (std::size_t i = 0; i < k; ++i) p.anomalies.push_back(i);
  for (std::size_t i = k; i < k + n; ++i) p.unlabeled.push_back(i);
  return p;
}

}  // namespace

TEST(OrdinalLabelsTest, ValidationAndParsing) {
  EXPECT_NO_THROW(OrdinalLabels{}.validate());
  EXPECT_THROW((OrdinalLabels{4, 4, 0}.validate()), ConfigError);
  EXPECT_THROW((OrdinalLabels{8, 4, -1}.validate()), ConfigError);
  EXPECT_EQ(OrdinalLabels::parse("10,5,1"), (OrdinalLabels{10, 5, 1}));
  EXPECT_THROW(OrdinalLabels::parse("8,4"), ConfigError);
  EXPECT_THROW(OrdinalLabels::parse("8,x,0"), ConfigError);
  EXPECT_THROW(OrdinalLabels::parse("0,4,8"), ConfigError);
}

TEST(SamplePairBatch, DefaultComposition) {
  const auto pools = indexed_pools(60, 500);
  Rng rng(1);
  const auto b = sample_pair_batch(pools, 512, PairTargets{}, rng);
  EXPECT_EQ(b.count(RowClass::AA), 128u);
  EXPECT_EQ(b.count(RowClass::AU), 128u);
  EXPECT_EQ(b.count(RowClass::UU), 256u);
  for (std::size_t r = 0; r < b.size(); ++r) {
    const double expected = b.classes[r] == RowClass::AA ? 8 : b.classes[r] == RowClass::AU ? 4 : 0;
    EXPECT_EQ(b.targets[r], expected);
    const bool left_anomaly = b.left(r, 1) == 1.0, right_anomaly = b.right(r, 1) == 1.0;
    switch (b.classes[r]) {
      case RowClass::AA: EXPECT_TRUE(left_anomaly && right_anomaly); break;
      case RowClass::AU: EXPECT_TRUE(left_anomaly && !right_anomaly); break;
      default: EXPECT_TRUE(!left_anomaly && !right_anomaly); break;
    }
  }
  // Block layout.
  EXPECT_EQ(b.classes[0], RowClass::AA);
  EXPECT_EQ(b.classes[128], RowClass::AU);
  EXPECT_EQ(b.classes[256], RowClass::UU);
}

TEST(SamplePairBatch, SingletonPools) {
  const auto pools = indexed_pools(1, 1);
  Rng rng(2);
  const auto b = sample_pair_batch(pools, 4, PairTargets{}, rng);
  EXPECT_EQ(b.left(0, 0), 0.0);
  EXPECT_EQ(b.right(0, 0), 0.0);
  EXPECT_EQ(b.left(1, 0), 0.0);
  EXPECT_EQ(b.right(1, 0), 1.0);
  for (std::size_t r = 2; r < 4; ++r) {
    EXPECT_EQ(b.left(r, 0), 1.0);
    EXPECT_EQ(b.right(r, 0), 1.0);
  }
}

TEST(SamplePairBatch, Errors) {
  const auto pools = indexed_pools(2, 2);
  Rng rng(0);
  EXPECT_THROW(sample_pair_batch(pools, 6, PairTargets{}, rng), ArgumentError);
  EXPECT_THROW(sample_pair_batch(pools, 0, PairTargets{}, rng), ArgumentError);
  auto no_a = pools;
  no_a.anomalies.clear();
  EXPECT_THROW(sample_pair_batch(no_a, 4, PairTargets{}, rng), DomainError);
  auto no_u = pools;
  no_u.unlabeled.clear();
  EXPECT_THROW(sample_pair_batch(no_u, 4, PairTargets{}, rng), DomainError);
}

TEST(SamplePairBatch, AnomalyLeftSideIsUniform) {
  const auto pools = indexed_pools(3, 10);
  Rng rng(3);
  std::vector<double> counts(3, 0.0);
  const int batches = 10000;
  for (int i = 0; i < batches; ++i) {
    const auto b = sample_pair_batch(pools, 4, PairTargets{}, rng);
    counts[b.left_index[0]] += 1.0;
  }
  for (double c : counts) EXPECT_NEAR(c / batches, 1.0 / 3.0, 0.02);
}

TEST(SampleInstanceBatch, HalfAndHalf) {
  const auto pools = indexed_pools(5, 20);
  Rng rng(4);
  const auto b = sample_instance_batch(pools, 8, 4.0, 0.0, rng);
  EXPECT_EQ(b.right.cols(), 0u);
  EXPECT_EQ(b.count(RowClass::A), 4u);
  EXPECT_EQ(b.count(RowClass::U), 4u);
  for (std::size_t r = 0; r < 8; ++r) EXPECT_EQ(b.targets[r], r < 4 ? 4.0 : 0.0);
  EXPECT_THROW(sample_instance_batch(pools, 3, 4.0, 0.0, rng), ArgumentError);
}

TEST(PairSpace, ExactCounts) {
  EXPECT_EQ(training_pair_space_size(1, 1), "1");
  EXPECT_EQ(training_pair_space_size(2, 3), "216");
  EXPECT_EQ(training_pair_space_size(60, 5000), "27000000000000000");
  // Beyond 64 bits: (10^6)^3 (10^7)^3 = 10^39.
  EXPECT_EQ(training_pair_space_size(1000000, 10000000), "1" + std::string(39, '0'));
}

TEST(Theory, RelationProportions) {
  const auto clean = expected_true_relation_proportions(0.0);
  EXPECT_DOUBLE_EQ(clean.anomaly_anomaly, 0.25);
  EXPECT_DOUBLE_EQ(clean.anomaly_normal, 0.25);
  EXPECT_DOUBLE_EQ(clean.normal_normal, 0.5);

  const auto p = expected_true_relation_proportions(0.05);
  EXPECT_NEAR(p.anomaly_anomaly, 0.26375, 1e-15);
  EXPECT_NEAR(p.anomaly_normal, 0.285, 1e-15);
  EXPECT_NEAR(p.normal_normal, 0.45125, 1e-15);

  for (double eps = 0.0; eps < 1.0; eps += 0.037) {
    const auto q = expected_true_relation_proportions(eps);
    EXPECT_NEAR(q.anomaly_anomaly + q.anomaly_normal + q.normal_normal, 1.0, 1e-12);
  }
  EXPECT_THROW(expected_true_relation_proportions(1.0), DomainError);
  EXPECT_THROW(expected_true_relation_proportions(-0.1), DomainError);
}

TEST(Theory, MislabelFraction) {
  EXPECT_EQ(mislabel_fraction(0.0), 0.0);
  EXPECT_NEAR(mislabel_fraction(0.05), 0.0975, 1e-15);
  EXPECT_NEAR(mislabel_fraction(0.02), 0.0396, 1e-15);
}

TEST(Theory, ExpectedScores) {
  const auto s = expected_scores(OrdinalLabels{}, 0.02);
  EXPECT_NEAR(s.anomaly_mean, 6.0, 1e-15);
  EXPECT_NEAR(s.normal_mean, 1.84, 1e-15);

  const OrdinalLabels l{10, 3, 1};
  const auto zero = expected_scores(l, 0.0);
  EXPECT_EQ(zero.anomaly_mean, 6.5);
  EXPECT_EQ(zero.normal_mean, 2.0);

  for (double eps = 0.0; eps < 0.9; eps += 0.01) {
    const auto d = expected_scores(OrdinalLabels{}, eps);
    EXPECT_NEAR(d.anomaly_mean - d.normal_mean, 4.0 + 8.0 * eps, 1e-12);
  }
}

TEST(Theory, SeparationThreshold) {
  // (c1 + c2)/2 > (c2 + c3 - 2 eps c1)/2  <=>  eps > (c3 - c1) / (2 c1), which
  // every eps >= 0 satisfies; the stated sufficient condition eps < (c1 - c3)/(2 c1)
  // therefore always yields separation.
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double c3 = rng.uniform(0.0, 5.0);
    const double c2 = c3 + rng.uniform(0.1, 5.0);
    const double c1 = c2 + rng.uniform(0.1, 5.0);
    const double eps = rng.uniform(0.0, std::min(0.999, (c1 - c3) / (2.0 * c1)));
    const auto s = expected_scores(OrdinalLabels{c1, c2, c3}, eps);
    EXPECT_GT(s.anomaly_mean, s.normal_mean);
  }
}

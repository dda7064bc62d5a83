#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "swu/uncertainty.hpp"
#include "test_support.hpp"

using namespace swu;

namespace {

const double kLn2 = std::log(2.0);

ScalarVolume constant(float v, Shape s = {3, 3, 3}) { return ScalarVolume(s, kUnitSpacing, v); }

// Plain evaluation of the binary-entropy formula, no shared code.
double entropy_oracle(double p) {
  double h = 0;
  if (p > 0) h -= p * std::log(p);
  if (p < 1) h -= (1 - p) * std::log(1 - p);
  return h;
}

}  // namespace

TEST(MeanPrediction, Examples) {
  const EnsembleCase c("c", {constant(0.2f), constant(0.8f)});
  for (float v : swu::testing::values(mean_prediction(c))) EXPECT_FLOAT_EQ(v, 0.5f);

  std::mt19937_64 rng(1);
  const ScalarVolume m = swu::testing::random_volume({4, 4, 4}, rng);
  const ScalarVolume single = mean_prediction(EnsembleCase("s", {m}));
  EXPECT_TRUE(std::equal(single.data().begin(), single.data().end(), m.data().begin()));
}

TEST(MeanPrediction, MatchesPerVoxelOracle) {
  std::mt19937_64 rng(2);
  const EnsembleCase c = swu::testing::random_ensemble({6, 6, 6}, 5, rng);
  const ScalarVolume mean = mean_prediction(c);
  for (std::int64_t i = 0; i < mean.size(); ++i) {
    double s = 0;
    for (int t = 0; t < 5; ++t) s += c.member(t)[i];
    EXPECT_NEAR(mean[i], s / 5, 1e-6);
  }
}

TEST(Entropy, AnalyticPoints) {
  EXPECT_NEAR(binary_entropy(0.5), kLn2, 1e-12);
  EXPECT_EQ(binary_entropy(0.0), 0.0);
  EXPECT_EQ(binary_entropy(1.0), 0.0);
  EXPECT_NEAR(binary_entropy(0.9), -0.9 * std::log(0.9) - 0.1 * std::log(0.1), 1e-12);

  ScalarVolume v({1, 1, 4}, kUnitSpacing, std::vector<float>{0.5f, 0.0f, 1.0f, 0.9f});
  const ScalarVolume h = entropy_map(v);
  EXPECT_NEAR(h[0], kLn2, 1e-6);
  EXPECT_EQ(h[1], 0.0f);
  EXPECT_EQ(h[2], 0.0f);
  EXPECT_NEAR(h[3], entropy_oracle(0.9f), 1e-6);
}

TEST(AverageEntropy, Examples) {
  std::mt19937_64 rng(3);
  const ScalarVolume m = swu::testing::random_volume({4, 4, 4}, rng);
  const ScalarVolume ae = average_entropy_map(EnsembleCase("c", {m, m, m}));
  const ScalarVolume h = entropy_map(m);
  for (std::int64_t i = 0; i < ae.size(); ++i) EXPECT_NEAR(ae[i], h[i], 1e-6);

  for (float v : swu::testing::values(average_entropy_map(EnsembleCase("c", {constant(0), constant(1)})))) EXPECT_EQ(v, 0.0f);

  const EnsembleCase c = swu::testing::random_ensemble({5, 5, 5}, 5, rng);
  const ScalarVolume got = average_entropy_map(c);
  for (std::int64_t i = 0; i < got.size(); ++i) {
    double s = 0;
    for (int t = 0; t < 5; ++t) s += entropy_oracle(c.member(t)[i]);
    EXPECT_NEAR(got[i], s / 5, 1e-6);
  }
  EXPECT_THROW(average_entropy_map(EnsembleCase("c", {m})), Error);
}

TEST(MutualInformation, Examples) {
  std::mt19937_64 rng(4);
  const ScalarVolume m = swu::testing::random_volume({4, 4, 4}, rng);
  for (float v : swu::testing::values(mutual_information_map(EnsembleCase("c", {m, m, m, m})))) EXPECT_NEAR(v, 0.0f, 1e-6);
  for (float v : swu::testing::values(mutual_information_map(EnsembleCase("c", {constant(0), constant(1)})))) {
    EXPECT_NEAR(v, kLn2, 1e-6);
  }
  EXPECT_THROW(mutual_information_map(EnsembleCase("c", {m})), Error);
}

TEST(Variance, Examples) {
  std::mt19937_64 rng(5);
  const ScalarVolume m = swu::testing::random_volume({4, 4, 4}, rng);
  for (float v : swu::testing::values(variance_map(EnsembleCase("c", {m, m})))) EXPECT_EQ(v, 0.0f);
  for (float v : swu::testing::values(variance_map(EnsembleCase("c", {constant(0), constant(1)})))) EXPECT_NEAR(v, 0.25, 1e-9);

  // Two channels {p, 1-p}, each with the same squared deviation.
  const EnsembleCase c = swu::testing::random_ensemble({5, 5, 5}, 5, rng);
  const ScalarVolume got = variance_map(c);
  for (std::int64_t i = 0; i < got.size(); ++i) {
    double mean1 = 0, mean0 = 0;
    for (int t = 0; t < 5; ++t) {
      mean1 += c.member(t)[i];
      mean0 += 1.0 - c.member(t)[i];
    }
    mean1 /= 5;
    mean0 /= 5;
    double s = 0;
    for (int t = 0; t < 5; ++t) {
      const double p = c.member(t)[i];
      s += (p - mean1) * (p - mean1) + ((1 - p) - mean0) * ((1 - p) - mean0);
    }
    EXPECT_NEAR(got[i], s / (5 * 2), 1e-6);
  }
  EXPECT_THROW(variance_map(EnsembleCase("c", {m})), Error);
}

TEST(Logit, Examples) {
  EXPECT_EQ(logit(0.5), 0.0);
  EXPECT_NEAR(logit(1.0), std::log((1 - kLogEpsilon) / kLogEpsilon), 1e-9);
  EXPECT_NEAR(logit(0.0), -std::log((1 - kLogEpsilon) / kLogEpsilon), 1e-9);
  EXPECT_NEAR(logit(0.88), std::log(0.88 / 0.12), 1e-12);
}

TEST(Logit, StrictlyIncreasing) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(kLogEpsilon, 1 - kLogEpsilon);
  for (int i = 0; i < 100000; ++i) {
    double a = u(rng), b = u(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    ASSERT_LT(logit(a), logit(b));
  }
}

TEST(ConfidenceMap, Composition) {
  std::mt19937_64 rng(7);
  const EnsembleCase c = swu::testing::random_ensemble({4, 4, 4}, 3, rng);
  const OrientedMap e = confidence_map({Estimator::Entropy, Source::ensemble()}, c);
  const ScalarVolume expect = entropy_map(mean_prediction(c));
  EXPECT_TRUE(std::equal(e.map.data().begin(), e.map.data().end(), expect.data().begin()));
  EXPECT_EQ(e.orientation, Orientation::Uncertainty);

  const OrientedMap p = confidence_map({Estimator::Pred, Source::single(0)}, c);
  EXPECT_TRUE(std::equal(p.map.data().begin(), p.map.data().end(), c.member(0).data().begin()));
  EXPECT_EQ(p.orientation, Orientation::Confidence);

  EXPECT_THROW(confidence_map({Estimator::Variance, Source::single(0)}, c), Error);
  EXPECT_THROW(confidence_map({Estimator::PairwiseDice, Source::ensemble()}, c), Error);
  EXPECT_THROW(confidence_map({Estimator::Pred, Source::single(3)}, c), Error);
}

TEST(UncertaintyProperties, IdentityBoundsAndJensen) {
  std::mt19937_64 rng(8);
  std::int64_t checked = 0;
  while (checked < 1'000'000) {
    // Mix uniform members with saturated ones to reach the bounds.
    std::vector<ScalarVolume> members;
    for (int t = 0; t < 5; ++t) {
      ScalarVolume v = swu::testing::random_volume({16, 16, 16}, rng);
      for (auto& x : v.data()) {
        const auto r = rng() % 8;
        if (r == 0) x = 0.0f;
        if (r == 1) x = 1.0f;
      }
      members.push_back(std::move(v));
    }
    const EnsembleCase c("c", std::move(members));
    const ScalarVolume h_mean = entropy_map(mean_prediction(c));
    const ScalarVolume ae = average_entropy_map(c);
    const ScalarVolume mi = mutual_information_map(c);
    const ScalarVolume var = variance_map(c);
    for (std::int64_t i = 0; i < ae.size(); ++i) {
      ASSERT_NEAR(mi[i] + ae[i], h_mean[i], 1e-6);
      ASSERT_GE(h_mean[i], 0.0f);
      ASSERT_LE(h_mean[i], kLn2 + 1e-6);
      ASSERT_GE(ae[i], 0.0f);
      ASSERT_LE(ae[i], kLn2 + 1e-6);
      ASSERT_GE(mi[i], 0.0f);
      ASSERT_LE(mi[i], kLn2 + 1e-6);
      ASSERT_GE(var[i], 0.0f);
      ASSERT_LE(var[i], 0.25f + 1e-7f);
      ASSERT_LE(ae[i], h_mean[i] + 1e-6);
    }
    checked += ae.size();
  }
}

TEST(UncertaintyProperties, MemberPermutationIsExact) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const EnsembleCase c = swu::testing::random_ensemble({8, 8, 8}, 5, rng);
    std::vector<ScalarVolume> shuffled = c.members();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const EnsembleCase p("p", shuffled);
    auto same = [](const ScalarVolume& a, const ScalarVolume& b) {
      return std::equal(a.data().begin(), a.data().end(), b.data().begin());
    };
    EXPECT_TRUE(same(mean_prediction(c), mean_prediction(p)));
    EXPECT_TRUE(same(average_entropy_map(c), average_entropy_map(p)));
    EXPECT_TRUE(same(mutual_information_map(c), mutual_information_map(p)));
    EXPECT_TRUE(same(variance_map(c), variance_map(p)));
  }
}

TEST(MethodSpec, ParsingAndValidation) {
  EXPECT_EQ(parse_estimator("MI"), Estimator::MutualInfo);
  EXPECT_EQ(parse_estimator("AE"), Estimator::AvgEntropy);
  EXPECT_THROW(parse_estimator("Bogus"), Error);
  EXPECT_EQ(orientation_of(Estimator::Pred), Orientation::Confidence);
  EXPECT_EQ(orientation_of(Estimator::Logit), Orientation::Confidence);
  EXPECT_EQ(orientation_of(Estimator::PairwiseDice), Orientation::Confidence);
  EXPECT_EQ(orientation_of(Estimator::MutualInfo), Orientation::Uncertainty);
  EXPECT_THROW((MethodSpec{Estimator::MutualInfo, Source::ensemble()}.validate(1)), Error);
  EXPECT_NO_THROW((MethodSpec{Estimator::Entropy, Source::single(0)}.validate(1)));
}

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "covlab/coverage.hpp"
#include "covlab/error.hpp"
#include "covlab/paper_example.hpp"

namespace covlab {
namespace {

using Labels = std::vector<Label>;
const Labels kIdentified{"theta1", "theta2"};
const Labels kAll{"theta1", "theta2", "theta3", "theta4"};

TEST(DrawSample, PointMassPutsEverythingOnOneCell) {
  const auto counts = draw_sample(ObservableMarginal({1.0, 0.0, 0.0}), {250, 9});
  EXPECT_EQ(counts, (std::vector<std::uint64_t>{250, 0, 0}));
  const auto last = draw_sample(ObservableMarginal({0.0, 0.0, 1.0}), {17, 3});
  EXPECT_EQ(last, (std::vector<std::uint64_t>{0, 0, 17}));
}

TEST(DrawSample, ReproducibleAndSumsToN) {
  const ObservableMarginal half({0.5, 0.5});
  const auto a = draw_sample(half, {1000, 42});
  const auto b = draw_sample(half, {1000, 42});
  EXPECT_EQ(a, b);
  EXPECT_EQ(std::accumulate(a.begin(), a.end(), std::uint64_t{0}), 1000u);
  EXPECT_NE(a, draw_sample(half, {1000, 43}));
  EXPECT_THROW(draw_sample(half, {0, 1}), InvalidInput);
}

TEST(DrawSample, FractionConcentratesWithinFourSigma) {
  // Binomial tail bound: P(|F/n - 1/2| > 4 sqrt(0.25/n)) ~ 6.3e-5.
  const ObservableMarginal half({0.5, 0.5});
  const std::uint64_t n = 1000, reps = 10000;
  const double band = 4.0 * std::sqrt(0.25 / static_cast<double>(n));
  std::uint64_t outside = 0;
  for (std::uint64_t r = 0; r < reps; ++r) {
    const auto c = draw_sample(half, {n, r});
    if (std::fabs(static_cast<double>(c[0]) / n - 0.5) > band) ++outside;
  }
  EXPECT_GE(static_cast<double>(reps - outside) / reps, 0.9999);
}

TEST(Multinomial, MeansMatchProbabilities) {
  Rng rng(5);
  const std::vector<double> q{0.2, 0.0, 0.5, 0.3};
  std::vector<double> totals(q.size(), 0.0);
  const int reps = 20000, n = 50;
  for (int r = 0; r < reps; ++r) {
    const auto c = draw_multinomial(q, n, rng);
    EXPECT_EQ(c[1], 0u);
    for (std::size_t i = 0; i < q.size(); ++i) totals[i] += c[i];
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double mean = totals[i] / reps;
    const double se = std::sqrt(n * q[i] * (1 - q[i]) / reps);
    EXPECT_NEAR(mean, n * q[i], 4 * se + 1e-12) << i;
  }
}

TEST(SyntheticRegion, PointCoverageDropProbabilityByInclusionExclusion) {
  const SyntheticRegionSpec spec{0.05, CoverageMode::point_coverage, {}};
  double any_drop = 0.0;
  for (const auto& o : enumerate_synthetic(kIdentified, spec)) {
    if (!o.dropped.empty()) any_drop += o.probability;
  }
  const double alpha = 0.05;
  EXPECT_NEAR(any_drop, 2 * alpha - alpha * alpha, 1e-15);
  EXPECT_NEAR(any_drop, 0.0975, 1e-15);
  EXPECT_GT(any_drop, alpha);
  EXPECT_LE(any_drop, 2 * alpha);
}

TEST(SyntheticRegion, ZeroAlphaAlwaysFull) {
  Rng rng(1);
  for (auto mode : {CoverageMode::set_coverage, CoverageMode::point_coverage}) {
    for (int i = 0; i < 1000; ++i) {
      EXPECT_EQ(synthetic_region(kIdentified, kAll, {0.0, mode, {}}, rng).labels, kAll);
    }
  }
}

TEST(SyntheticRegion, SetCoverageFailureRateMatchesAlpha) {
  Rng rng(2024);
  const SyntheticRegionSpec spec{0.05, CoverageMode::set_coverage, {}};
  const int draws = 100000;
  int misses = 0;
  for (int i = 0; i < draws; ++i) {
    const auto region = synthetic_region(kIdentified, kAll, spec, rng);
    if (!region.contains_all(kIdentified)) ++misses;
    // Exactly one identified label goes missing, never a non-identified one.
    EXPECT_GE(region.labels.size(), 3u);
    EXPECT_TRUE(region.contains("theta3") && region.contains("theta4"));
  }
  EXPECT_NEAR(static_cast<double>(misses) / draws, 0.05, 0.007);
}

TEST(SyntheticRegion, ExplicitDropProbabilities) {
  const SyntheticRegionSpec asym{0.05, CoverageMode::point_coverage, {{"theta1", 0.02}, {"theta2", 0.05}}};
  const auto outcomes = enumerate_synthetic(kIdentified, asym);
  double p1 = 0.0, p2 = 0.0;
  for (const auto& o : outcomes) {
    for (const auto& l : o.dropped) (l == "theta1" ? p1 : p2) += o.probability;
  }
  EXPECT_NEAR(p1, 0.02, 1e-15);
  EXPECT_NEAR(p2, 0.05, 1e-15);

  Rng rng(1);
  EXPECT_THROW(synthetic_region(kIdentified, kAll, {0.05, CoverageMode::point_coverage, {{"theta3", 0.01}}}, rng),
               InvalidInput);
  EXPECT_THROW(synthetic_region(kIdentified, kAll, {0.05, CoverageMode::point_coverage, {{"theta1", 0.2}}}, rng),
               InvalidInput);
  // Set coverage drop probabilities must add up to alpha.
  EXPECT_THROW(enumerate_synthetic(kIdentified, {0.05, CoverageMode::set_coverage, {{"theta1", 0.01}}}),
               InvalidInput);
  EXPECT_NO_THROW(enumerate_synthetic(kIdentified, {0.05, CoverageMode::set_coverage, {{"theta1", 0.05}}}));
  EXPECT_THROW(synthetic_region({}, kAll, {0.05, CoverageMode::set_coverage, {}}, rng), InvalidInput);
  EXPECT_THROW(synthetic_region(Labels{"zeta"}, kAll, {0.05, CoverageMode::set_coverage, {}}, rng), InvalidInput);
}

TEST(SyntheticRegion, SameSeedSameSequence) {
  const SyntheticRegionSpec spec{0.3, CoverageMode::point_coverage, {}};
  Rng a(77), b(77);
  for (int i = 0; i < 500; ++i) {
    EXPECT_EQ(synthetic_region(kIdentified, kAll, spec, a).labels,
              synthetic_region(kIdentified, kAll, spec, b).labels);
  }
}

TEST(TestStatistic, PerfectFitIsZero) {
  EXPECT_DOUBLE_EQ(marginal_test_statistic(std::vector<double>{0.25, 0.75}, std::vector<std::uint64_t>{25, 75}, 100),
                   0.0);
}

TEST(TestStatistic, HandComputedValue) {
  const auto p = paper_example();
  const std::vector<std::uint64_t> counts{600, 400};
  // (100^2 / 500) + (100^2 / 500)
  EXPECT_DOUBLE_EQ(marginal_test_statistic(p.theta().at("theta1"), counts, 1000), 40.0);
}

TEST(TestStatistic, ImpossibleCellIsInfinite) {
  const std::vector<double> q{1.0, 0.0};
  EXPECT_EQ(marginal_test_statistic(q, std::vector<std::uint64_t>{9, 1}, 10),
            std::numeric_limits<double>::infinity());
  EXPECT_DOUBLE_EQ(marginal_test_statistic(q, std::vector<std::uint64_t>{10, 0}, 10), 0.0);
  EXPECT_THROW(marginal_test_statistic(q, std::vector<std::uint64_t>{10, 0}, 11), InvalidInput);
  EXPECT_THROW(marginal_test_statistic(q, std::vector<std::uint64_t>{10}, 10), InvalidInput);
}

TEST(RandomizedPValue, DegenerateReferenceReturnsTheRandomizer) {
  // Every resample under a point mass has statistic 0, so all M tie.
  Rng rng(3);
  const std::vector<double> q{1.0, 0.0};
  EXPECT_DOUBLE_EQ(randomized_p_value(q, 0.0, 20, 0.37, 100, rng), 0.37);
}

TEST(RandomizedPValue, UniformUnderTheNull) {
  // Exactness of the randomized Monte Carlo test: P(p <= a) = a for every a.
  const std::vector<double> q{0.3, 0.7};
  const std::uint64_t n = 12;
  const int reps = 20000;
  Rng rng(11);
  int below05 = 0, below20 = 0, below50 = 0;
  for (int r = 0; r < reps; ++r) {
    const auto c = draw_multinomial(q, n, rng);
    const double pv = randomized_p_value(q, marginal_test_statistic(q, c, n), n, rng.uniform_open(), 99, rng);
    ASSERT_GT(pv, 0.0);
    ASSERT_LT(pv, 1.0);
    below05 += pv <= 0.05;
    below20 += pv <= 0.20;
    below50 += pv <= 0.50;
  }
  auto check = [&](int hits, double a) {
    EXPECT_NEAR(static_cast<double>(hits) / reps, a, 4 * std::sqrt(a * (1 - a) / reps)) << a;
  };
  check(below05, 0.05);
  check(below20, 0.20);
  check(below50, 0.50);
}

TEST(TestInversion, SharedModeKeepsEqualMarginalsTogether) {
  const auto p = paper_example().without_restrictions();
  const TestInversionOptions opts{0.2, Randomization::shared, 200};
  for (std::uint64_t r = 0; r < 300; ++r) {
    Rng rng = Rng::substream(8, r);
    const auto counts = draw_multinomial(p.p_x().pmf(), 60, rng);
    const auto region = test_inversion_region(p, counts, 60, opts, rng);
    // All four models imply the same marginal.
    EXPECT_TRUE(region.labels.empty() || region.labels.size() == 4u) << r;
  }
}

TEST(TestInversion, TinyAlphaKeepsMatchingModels) {
  const auto p = paper_example();
  const TestInversionOptions opts{1e-6, Randomization::independent, 200};
  int full = 0;
  for (std::uint64_t r = 0; r < 200; ++r) {
    Rng rng = Rng::substream(4, r);
    const auto counts = draw_multinomial(p.p_x().pmf(), 100, rng);
    if (test_inversion_region(p, counts, 100, opts, rng).labels.size() == 4u) ++full;
  }
  EXPECT_EQ(full, 200);
}

TEST(TestInversion, RejectsModelsWithWrongMarginal) {
  StateSpace s({"a", "b"}, {"u"});
  ModelSet theta(s, {Model("right", s, {0.5, 0.5}), Model("wrong", s, {0.9, 0.1}), Model("never", s, {1.0, 0.0})});
  DecisionProblem p(theta, ObservableMarginal({0.5, 0.5}), {}, {Action("a", s, {0, 0})});
  Rng rng(1);
  const std::vector<std::uint64_t> counts{510, 490};
  const auto region = test_inversion_region(p, counts, 1000, {0.05, Randomization::shared, 500}, rng);
  EXPECT_EQ(region.labels, (Labels{"right"}));
  EXPECT_THROW(test_inversion_region(p, counts, 1000, {0.0, Randomization::shared, 500}, rng), InvalidInput);
  EXPECT_THROW(test_inversion_region(p, counts, 1000, {1.0, Randomization::shared, 500}, rng), InvalidInput);
}

TEST(EstimateCoverage, FullRegionHasCoverageOne) {
  const RegionProcess full = [](std::uint64_t, Rng&) { return Region{kAll, {}}; };
  const auto report = estimate_coverage(full, kIdentified, 100, 1);
  EXPECT_EQ(report.set.rate, 1.0);
  EXPECT_EQ(report.set.std_error, 0.0);
  EXPECT_EQ(report.point_of("theta1").rate, 1.0);
  EXPECT_EQ(report.point_of("theta2").rate, 1.0);
  EXPECT_THROW(estimate_coverage(full, kIdentified, 0, 1), InvalidInput);
}

TEST(EstimateCoverage, SyntheticProcesses) {
  const auto synth = [](CoverageMode mode) -> RegionProcess {
    return [mode](std::uint64_t, Rng& rng) {
      return synthetic_region(kIdentified, kIdentified, {0.05, mode, {}}, rng);
    };
  };
  const auto sc = estimate_coverage(synth(CoverageMode::set_coverage), kIdentified, 100000, 17);
  EXPECT_NEAR(sc.set.rate, 0.95, 3 * 0.0007);
  const auto pc = estimate_coverage(synth(CoverageMode::point_coverage), kIdentified, 100000, 17);
  EXPECT_NEAR(pc.point_of("theta1").rate, 0.95, 3 * 0.0007);
  EXPECT_NEAR(pc.point_of("theta2").rate, 0.95, 3 * 0.0007);
  EXPECT_NEAR(pc.set.rate, 0.9025, 3 * 0.0009);
  for (const auto* r : {&sc, &pc}) {
    for (const auto& [label, e] : r->point) EXPECT_GE(e.rate, r->set.rate) << label;
  }
}

TEST(EstimateCoverage, Deterministic) {
  const RegionProcess proc = [](std::uint64_t, Rng& rng) {
    return synthetic_region(kIdentified, kAll, {0.4, CoverageMode::point_coverage, {}}, rng);
  };
  const auto a = estimate_coverage(proc, kIdentified, 5000, 99);
  const auto b = estimate_coverage(proc, kIdentified, 5000, 99);
  EXPECT_EQ(a.set.rate, b.set.rate);
  EXPECT_EQ(a.point_of("theta1").rate, b.point_of("theta1").rate);
}

}  // namespace
}  // namespace covlab

#include <gtest/gtest.h>

#include <cmath>

#include "covlab/error.hpp"
#include "covlab/experiment.hpp"
#include "covlab/io.hpp"
#include "covlab/paper_example.hpp"

namespace covlab {
namespace {

ExperimentConfig paper_config(double alpha, std::uint64_t reps, std::uint64_t seed = 7) {
  ExperimentConfig cfg(paper_example(1.0));
  cfg.paper_example_benefit = 1.0;
  cfg.alpha = alpha;
  cfg.replications = reps;
  cfg.seed = seed;
  return cfg;
}

double mc_band(double p, std::uint64_t reps) { return 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(reps)); }

TEST(ExactAnalysis, PaperExampleProbabilities) {
  const auto exact = exact_analysis(paper_config(0.05, 1));
  EXPECT_TRUE(exact.exact);
  EXPECT_NEAR(exact.pc.violation_rate.rate, 0.0975, 1e-12);
  EXPECT_NEAR(exact.sc.violation_rate.rate, 0.05, 1e-12);
  EXPECT_NEAR(exact.pc.frequency_of("a1"), 0.05 * 0.95, 1e-12);
  EXPECT_NEAR(exact.pc.frequency_of("a2"), 0.0475, 1e-12);
  EXPECT_NEAR(exact.pc.degenerate_rate.rate, 0.0025, 1e-12);
  EXPECT_NEAR(exact.sc.frequency_of("a3"), 0.95, 1e-12);
  EXPECT_NEAR(exact.sc.set_coverage.rate, 0.95, 1e-12);
  EXPECT_NEAR(exact.pc.set_coverage.rate, 0.9025, 1e-12);
  EXPECT_EQ(exact.pc.violation_rate.std_error, 0.0);
}

TEST(ExactAnalysis, ZeroAlphaIsDegenerateAtFullRegion) {
  const auto exact = exact_analysis(paper_config(0.0, 1));
  for (const auto* s : {&exact.sc, &exact.pc}) {
    EXPECT_EQ(s->violation_rate.rate, 0.0);
    EXPECT_EQ(s->frequency_of("a3"), 1.0);
    EXPECT_EQ(s->set_coverage.rate, 1.0);
    EXPECT_EQ(s->mean_identified_min, 0.0);
  }
}

TEST(ExactAnalysis, RejectsTestInversion) {
  auto cfg = paper_config(0.05, 10);
  cfg.pc.kind = ProcessKind::test_inversion;
  EXPECT_THROW(exact_analysis(cfg), InvalidInput);
}

TEST(ExactAnalysis, MinmaxRegretGivesSameViolations) {
  auto cfg = paper_config(0.05, 1);
  cfg.rule = Rule::minmax_regret;
  const auto exact = exact_analysis(cfg);
  EXPECT_NEAR(exact.pc.violation_rate.rate, 0.0975, 1e-12);
  EXPECT_NEAR(exact.sc.violation_rate.rate, 0.05, 1e-12);
  EXPECT_NEAR(exact.sc.frequency_of("a3"), 0.95, 1e-12);
}

TEST(RunExperiment, PaperExampleHeadline) {
  const auto report = run_experiment(paper_config(0.05, 100000));
  EXPECT_NEAR(report.pc.violation_rate.rate, 0.0975, 0.003);
  EXPECT_NEAR(report.sc.violation_rate.rate, 0.05, 0.003);
  EXPECT_LE(report.sc.violation_rate.rate, 0.05 + mc_band(0.05, 100000));
  EXPECT_NEAR(report.sc.frequency_of("a3"), 0.95, 0.003);
  for (const auto& rec : report.records) {
    if (rec.sc.covers_identified) {
      ASSERT_EQ(rec.sc.chosen, "a3");
      ASSERT_EQ(rec.sc.region_min, 0.0);
    }
  }
}

TEST(RunExperiment, ZeroAlphaNeverViolates) {
  const auto report = run_experiment(paper_config(0.0, 2000));
  for (const auto* s : {&report.sc, &report.pc}) {
    EXPECT_EQ(s->violation_rate.rate, 0.0);
    EXPECT_EQ(s->frequency_of("a3"), 1.0);
    EXPECT_EQ(s->set_coverage.rate, 1.0);
    EXPECT_EQ(s->point_of("theta1").rate, 1.0);
  }
}

TEST(RunExperiment, ConvergesToExactAnalysis) {
  const auto cfg = paper_config(0.05, 100000, 2718);
  const auto mc = run_experiment(cfg);
  const auto exact = exact_analysis(cfg);
  const std::uint64_t r = cfg.replications;
  for (const bool pc : {false, true}) {
    const auto& m = pc ? mc.pc : mc.sc;
    const auto& e = pc ? exact.pc : exact.sc;
    EXPECT_NEAR(m.violation_rate.rate, e.violation_rate.rate, mc_band(e.violation_rate.rate, r));
    EXPECT_NEAR(m.set_coverage.rate, e.set_coverage.rate, mc_band(e.set_coverage.rate, r));
    EXPECT_NEAR(m.degenerate_rate.rate, e.degenerate_rate.rate, mc_band(e.degenerate_rate.rate, r));
    for (const auto& [label, f] : e.action_frequency) {
      EXPECT_NEAR(m.frequency_of(label), f, mc_band(f, r)) << label;
    }
    for (const auto& [label, est] : e.point_coverage) {
      EXPECT_NEAR(m.point_of(label).rate, est.rate, mc_band(est.rate, r)) << label;
    }
  }
}

TEST(RunExperiment, ReportIsConsistentWithRecords) {
  const auto cfg = paper_config(0.3, 3000, 5);
  const auto report = run_experiment(cfg);
  ASSERT_EQ(report.records.size(), 3000u);
  std::uint64_t sc_viol = 0, pc_viol = 0;
  for (const auto& rec : report.records) {
    for (const auto* c : {&rec.sc, &rec.pc}) {
      if (!c->degenerate()) {
        EXPECT_EQ(c->violation, !(c->identified_min >= c->region_min));
      }
    }
    sc_viol += rec.sc.violation;
    pc_viol += rec.pc.violation;
  }
  EXPECT_DOUBLE_EQ(report.sc.violation_rate.rate, sc_viol / 3000.0);
  EXPECT_DOUBLE_EQ(report.pc.violation_rate.rate, pc_viol / 3000.0);
  const auto again = summarize_records(report, true, cfg.problem);
  EXPECT_EQ(again.violation_rate.rate, report.pc.violation_rate.rate);

  for (const auto* s : {&report.sc, &report.pc}) {
    double total = s->degenerate_rate.rate;
    for (const auto& [label, f] : s->action_frequency) {
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
      total += f;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (const auto& [label, e] : s->point_coverage) EXPECT_GE(e.rate, s->set_coverage.rate);
  }
}

TEST(RunExperiment, IndependentOfThreadCount) {
  auto cfg = paper_config(0.1, 4000, 31);
  const auto one = run_experiment(cfg);
  cfg.threads = 4;
  const auto four = run_experiment(cfg);
  EXPECT_EQ(records_csv(one), records_csv(four));
  cfg.threads = 1;
  EXPECT_EQ(summary_json(one, cfg), summary_json(four, cfg));
}

TEST(RunExperiment, AdmissibleNonIdentifiedModelsAreNeverDropped) {
  const auto base = paper_example();
  auto models = base.theta().models();
  // Satisfies P(T) = 1/2 but implies P_X = (3/4, 1/4).
  models.emplace_back("theta5", base.space(), std::vector<double>{0.25, 0.5, 0.25, 0.0});
  DecisionProblem p(ModelSet(base.space(), models), base.p_x(), base.restrictions(), base.actions());
  ExperimentConfig cfg(p);
  cfg.alpha = 0.4;
  cfg.replications = 3000;
  const auto report = run_experiment(cfg);
  EXPECT_EQ(report.identified, (std::vector<Label>{"theta1", "theta2"}));
  EXPECT_EQ(report.admissible, (std::vector<Label>{"theta1", "theta2", "theta5"}));
  EXPECT_EQ(report.pc.degenerate_count, 0u);
  for (const auto& rec : report.records) {
    EXPECT_EQ(rec.sc.region.back(), "theta5");
    EXPECT_EQ(rec.pc.region.back(), "theta5");
  }
}

TEST(RunExperiment, TestInversionSharesOneSample) {
  auto cfg = paper_config(0.2, 300, 9);
  for (auto* spec : {&cfg.sc, &cfg.pc}) {
    spec->kind = ProcessKind::test_inversion;
    spec->n = 200;
    spec->reference_draws = 200;
  }
  const auto report = run_experiment(cfg);
  for (const auto& rec : report.records) {
    // Shared randomization: theta1 and theta2 have the same marginal.
    EXPECT_TRUE(rec.sc.region.empty() || rec.sc.region.size() == 2u);
  }
  EXPECT_EQ(report.sc.process, "sc:test_inversion:shared");
  EXPECT_EQ(report.pc.process, "pc:test_inversion:independent");
}

TEST(RunExperiment, ConfigValidation) {
  auto cfg = paper_config(0.05, 0);
  EXPECT_THROW(run_experiment(cfg), InvalidInput);
  cfg = paper_config(1.0, 10);
  EXPECT_THROW(run_experiment(cfg), InvalidInput);
  cfg = paper_config(0.0, 10);
  cfg.sc.kind = ProcessKind::test_inversion;
  EXPECT_THROW(run_experiment(cfg), InvalidInput);
  cfg = paper_config(0.05, 10);
  cfg.sc.kind = cfg.pc.kind = ProcessKind::test_inversion;
  cfg.sc.n = 100;
  cfg.pc.n = 200;
  EXPECT_THROW(run_experiment(cfg), InvalidInput);
  cfg = paper_config(0.05, 10);
  cfg.pc.drop_probs = {{"theta3", 0.01}};
  EXPECT_THROW(run_experiment(cfg), InvalidInput);

  StateSpace s({"a", "b"}, {"u"});
  ModelSet theta(s, {Model("m", s, {1.0, 0.0})});
  ExperimentConfig empty(DecisionProblem(theta, ObservableMarginal({0.5, 0.5}), {}, {Action("x", s, {0, 0})}));
  EXPECT_THROW(run_experiment(empty), InvalidInput);
}

}  // namespace
}  // namespace covlab

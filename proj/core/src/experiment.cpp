#include "covlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "covlab/error.hpp"

namespace covlab {
namespace {

enum StreamTag : std::uint64_t { kSampleStream = 1, kScStream = 2, kPcStream = 3 };

// Weighted tallies for one process. Monte Carlo runs use unit weights,
// exact analysis uses outcome probabilities.
class Tally {
 public:
  Tally(std::vector<Label> identified, const DecisionProblem& p)
      : identified_(std::move(identified)), point_(identified_.size(), 0.0) {
    for (const auto& a : p.actions()) actions_.emplace_back(a.label(), 0.0);
  }

  void add(const RegionChoice& c, double w) {
    total_ += w;
    if (c.covers_identified) set_ += w;
    for (std::size_t i = 0; i < identified_.size(); ++i) {
      if (std::find(c.region.begin(), c.region.end(), identified_[i]) != c.region.end()) point_[i] += w;
    }
    if (c.violation) violation_ += w;
    if (c.degenerate()) {
      degenerate_ += w;
      ++degenerate_count_;
      return;
    }
    for (auto& [label, f] : actions_) {
      if (label == *c.chosen) f += w;
    }
    identified_min_ += w * c.identified_min;
    region_min_ += w * c.region_min;
  }

  ProcessSummary finish(std::string name, bool exact) const {
    ProcessSummary s;
    s.process = std::move(name);
    s.set_coverage = estimate(set_, exact);
    for (std::size_t i = 0; i < identified_.size(); ++i) {
      s.point_coverage.emplace_back(identified_[i], estimate(point_[i], exact));
    }
    for (const auto& [label, f] : actions_) s.action_frequency.emplace_back(label, f / total_);
    s.violation_rate = estimate(violation_, exact);
    s.degenerate_rate = estimate(degenerate_, exact);
    s.degenerate_count = exact ? 0 : degenerate_count_;
    const double live = total_ - degenerate_;
    if (live > 0.0) {
      s.mean_identified_min = identified_min_ / live;
      s.mean_region_min = region_min_ / live;
    }
    return s;
  }

 private:
  Estimate estimate(double hits, bool exact) const {
    Estimate e;
    e.rate = hits / total_;
    e.std_error = exact ? 0.0 : std::sqrt(e.rate * (1.0 - e.rate) / total_);
    return e;
  }

  std::vector<Label> identified_;
  std::vector<std::pair<Label, double>> actions_;
  std::vector<double> point_;
  double total_ = 0.0;
  double set_ = 0.0;
  double violation_ = 0.0;
  double degenerate_ = 0.0;
  std::uint64_t degenerate_count_ = 0;
  double identified_min_ = 0.0;
  double region_min_ = 0.0;
};

RegionChoice decide(const DecisionProblem& p, Rule rule, std::vector<Label> region,
                    const std::vector<Label>& identified) {
  RegionChoice c;
  c.region = std::move(region);
  c.covers_identified = std::all_of(identified.begin(), identified.end(), [&](const Label& l) {
    return std::find(c.region.begin(), c.region.end(), l) != c.region.end();
  });
  if (c.region.empty()) {
    // No admissible model left: the rule has no basis for a choice and
    // the apparent guarantee is treated as violated.
    c.violation = true;
    return c;
  }
  const RegionEvaluation ev = evaluate_rule(rule, p, c.region);
  const GuaranteeCheck g = guarantee_holds(p, ev.chosen_action, c.region, identified);
  c.chosen = ev.chosen_action;
  c.region_min = g.region_min;
  c.identified_min = g.identified_min;
  c.violation = !g.holds;
  return c;
}

SyntheticRegionSpec synthetic_spec(const ProcessSpec& spec, double alpha, CoverageMode mode) {
  return SyntheticRegionSpec{alpha, mode, spec.drop_probs};
}

Randomization randomization_for(const ProcessSpec& spec, bool is_pc) {
  return spec.randomization.value_or(is_pc ? Randomization::independent : Randomization::shared);
}

std::string process_name(const ProcessSpec& spec, bool is_pc) {
  std::string name = is_pc ? "pc:" : "sc:";
  if (spec.kind == ProcessKind::synthetic) return name + "synthetic";
  return name + "test_inversion:" + std::string(to_string(randomization_for(spec, is_pc)));
}

struct Context {
  const ExperimentConfig& cfg;
  std::vector<Label> identified;
  std::vector<Label> admissible;
};

Region realize(const Context& ctx, const ProcessSpec& spec, bool is_pc, std::uint64_t r,
               const std::vector<std::uint64_t>& counts) {
  Rng rng = Rng::substream(ctx.cfg.seed, r, is_pc ? kPcStream : kScStream);
  Region region;
  if (spec.kind == ProcessKind::synthetic) {
    const auto mode = is_pc ? CoverageMode::point_coverage : CoverageMode::set_coverage;
    region = synthetic_region(ctx.identified, ctx.admissible, synthetic_spec(spec, ctx.cfg.alpha, mode), rng);
  } else {
    TestInversionOptions opts{ctx.cfg.alpha, randomization_for(spec, is_pc), spec.reference_draws};
    region = test_inversion_region(ctx.cfg.problem, counts, spec.n, opts, rng, ctx.admissible);
  }
  region.provenance.replication = r;
  region.provenance.seed = ctx.cfg.seed;
  return region;
}

ReplicationRecord replicate(const Context& ctx, std::uint64_t r) {
  const auto& cfg = ctx.cfg;
  std::vector<std::uint64_t> counts;
  const ProcessSpec* ti = cfg.sc.kind == ProcessKind::test_inversion   ? &cfg.sc
                          : cfg.pc.kind == ProcessKind::test_inversion ? &cfg.pc
                                                                       : nullptr;
  if (ti) {
    Rng sample_rng = Rng::substream(cfg.seed, r, kSampleStream);
    counts = draw_multinomial(cfg.problem.p_x().pmf(), ti->n, sample_rng);
  }
  ReplicationRecord rec;
  rec.index = r;
  rec.sc = decide(cfg.problem, cfg.rule, realize(ctx, cfg.sc, false, r, counts).labels, ctx.identified);
  rec.pc = decide(cfg.problem, cfg.rule, realize(ctx, cfg.pc, true, r, counts).labels, ctx.identified);
  return rec;
}

ExperimentReport report_header(const ExperimentConfig& cfg, const Context& ctx, bool exact) {
  ExperimentReport report;
  report.exact = exact;
  report.replications = exact ? 0 : cfg.replications;
  report.seed = cfg.seed;
  report.alpha = cfg.alpha;
  report.rule = cfg.rule;
  report.identified = ctx.identified;
  report.admissible = ctx.admissible;
  return report;
}

}  // namespace

std::string_view to_string(ProcessKind kind) {
  return kind == ProcessKind::synthetic ? "synthetic" : "test_inversion";
}

void validate(const ExperimentConfig& cfg) {
  const bool any_ti =
      cfg.sc.kind == ProcessKind::test_inversion || cfg.pc.kind == ProcessKind::test_inversion;
  if (any_ti) {
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) {
      throw InvalidInput("alpha must lie in (0, 1) for test-inversion processes");
    }
  } else if (!(cfg.alpha >= 0.0 && cfg.alpha < 1.0)) {
    throw InvalidInput("alpha must lie in [0, 1)");
  }
  if (cfg.replications < 1) throw InvalidInput("R must be at least 1");
  if (cfg.threads < 1) throw InvalidInput("threads must be at least 1");
  if (cfg.sc.kind == ProcessKind::test_inversion && cfg.pc.kind == ProcessKind::test_inversion &&
      cfg.sc.n != cfg.pc.n) {
    throw InvalidInput("sc_process and pc_process share one sample per replication; their n must match");
  }
  const auto identified = cfg.problem.identified_set();
  if (identified.empty()) throw InvalidInput("the identified set is empty; there is nothing to cover");
  for (const auto* spec : {&cfg.sc, &cfg.pc}) {
    if (spec->kind == ProcessKind::test_inversion) {
      if (spec->n < 1) throw InvalidInput("test-inversion sample size n must be at least 1");
      if (spec->reference_draws < 1) throw InvalidInput("reference_draws must be at least 1");
      if (!spec->drop_probs.empty()) throw InvalidInput("drop_probs only applies to synthetic processes");
    } else {
      const auto mode = spec == &cfg.pc ? CoverageMode::point_coverage : CoverageMode::set_coverage;
      enumerate_synthetic(identified, synthetic_spec(*spec, cfg.alpha, mode));
    }
  }
}

double ProcessSummary::frequency_of(const Label& action) const {
  for (const auto& [label, f] : action_frequency) {
    if (label == action) return f;
  }
  throw InvalidInput("no frequency recorded for action '" + action + "'");
}

const Estimate& ProcessSummary::point_of(const Label& label) const {
  for (const auto& [l, e] : point_coverage) {
    if (l == label) return e;
  }
  throw InvalidInput("no point coverage recorded for '" + label + "'");
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const Context ctx{cfg, cfg.problem.identified_set(), cfg.problem.admissible_labels()};

  std::vector<ReplicationRecord> records(cfg.replications);
  const unsigned threads = static_cast<unsigned>(
      std::min<std::uint64_t>(cfg.threads, cfg.replications));
  if (threads <= 1) {
    for (std::uint64_t r = 0; r < cfg.replications; ++r) records[r] = replicate(ctx, r);
  } else {
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::uint64_t r = t; r < cfg.replications; r += threads) records[r] = replicate(ctx, r);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  ExperimentReport report = report_header(cfg, ctx, false);
  report.records = std::move(records);
  report.sc = summarize_records(report, false, cfg.problem);
  report.pc = summarize_records(report, true, cfg.problem);
  report.sc.process = process_name(cfg.sc, false);
  report.pc.process = process_name(cfg.pc, true);
  if (!cfg.keep_records) report.records.clear();
  return report;
}

ProcessSummary summarize_records(const ExperimentReport& report, bool pc, const DecisionProblem& p) {
  if (report.records.empty()) throw InvalidInput("report has no records to summarize");
  Tally tally(report.identified, p);
  for (const auto& rec : report.records) tally.add(pc ? rec.pc : rec.sc, 1.0);
  return tally.finish(pc ? "pc" : "sc", false);
}

ExperimentReport exact_analysis(const ExperimentConfig& cfg) {
  if (cfg.sc.kind != ProcessKind::synthetic || cfg.pc.kind != ProcessKind::synthetic) {
    throw InvalidInput("exact analysis needs synthetic processes; test-inversion regions are not enumerable");
  }
  validate(cfg);
  const Context ctx{cfg, cfg.problem.identified_set(), cfg.problem.admissible_labels()};
  ExperimentReport report = report_header(cfg, ctx, true);

  for (const bool is_pc : {false, true}) {
    const ProcessSpec& spec = is_pc ? cfg.pc : cfg.sc;
    const auto mode = is_pc ? CoverageMode::point_coverage : CoverageMode::set_coverage;
    Tally tally(ctx.identified, cfg.problem);
    for (const auto& outcome : enumerate_synthetic(ctx.identified, synthetic_spec(spec, cfg.alpha, mode))) {
      std::vector<Label> region;
      for (const auto& l : ctx.admissible) {
        if (std::find(outcome.dropped.begin(), outcome.dropped.end(), l) == outcome.dropped.end()) {
          region.push_back(l);
        }
      }
      tally.add(decide(cfg.problem, cfg.rule, std::move(region), ctx.identified), outcome.probability);
    }
    (is_pc ? report.pc : report.sc) = tally.finish(process_name(spec, is_pc), true);
  }
  return report;
}

}  // namespace covlab

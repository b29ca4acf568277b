#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <sstream>

#include "covlab/coverage.hpp"
#include "covlab/decision.hpp"
#include "covlab/error.hpp"
#include "covlab/experiment.hpp"
#include "covlab/io.hpp"
#include "covlab/paper_example.hpp"

namespace covlab::cli {
namespace {

namespace fs = std::filesystem;

constexpr const char* kSeedEnv = "COVERAGE_LAB_SEED";

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::string format = "both";
  std::optional<unsigned> threads;
  std::optional<double> benefit;
  std::string dump_path;
};

struct ProblemOptions {
  bool paper_example = false;
  std::string problem_path;
  bool no_restrictions = false;
};

struct RunOptions {
  std::string config_path;
  std::optional<double> alpha;
  std::optional<std::uint64_t> replications;
  std::optional<std::string> rule;
  bool synthetic = false;
  bool test_inversion = false;
  std::optional<std::uint64_t> n;
  std::optional<std::string> randomization;
  std::optional<std::size_t> reference_draws;
};

void add_problem_options(CLI::App* cmd, ProblemOptions& o) {
  auto* pe = cmd->add_flag("--paper-example", o.paper_example, "Use the built-in gender/talent problem");
  auto* pf = cmd->add_option("--problem", o.problem_path, "Problem description file (JSON)");
  pe->excludes(pf);
  cmd->add_flag("--no-restrictions", o.no_restrictions, "Ignore the a priori restrictions");
}

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config_path, "Experiment config file (JSON)");
  cmd->add_option("--alpha", o.alpha, "Confidence level alpha");
  cmd->add_option("--R", o.replications, "Number of Monte Carlo replications");
  auto* syn = cmd->add_flag("--synthetic", o.synthetic, "Use synthetic region processes for SC and PC");
  auto* ti = cmd->add_flag("--test-inversion", o.test_inversion,
                           "Use test-inversion regions built from multinomial samples of X");
  syn->excludes(ti);
  cmd->add_option("--n", o.n, "Sample size for test-inversion processes");
  cmd->add_option("--randomization", o.randomization, "Override p-value randomization (shared|independent)")
      ->check(CLI::IsMember({"shared", "independent"}));
  cmd->add_option("--reference-draws", o.reference_draws, "Monte Carlo reference resamples per p-value");
}

DecisionProblem with_tol(const DecisionProblem& p, double tol) {
  return DecisionProblem(p.theta(), p.p_x(), p.restrictions(), p.actions(), tol);
}

DecisionProblem load_source(const ProblemOptions& o, const GlobalOptions& g) {
  DecisionProblem p = [&] {
    if (o.paper_example) return paper_example(g.benefit.value_or(1.0));
    if (o.problem_path.empty()) throw InvalidInput("one of --paper-example or --problem is required");
    return load_problem(o.problem_path);
  }();
  return o.no_restrictions ? p.without_restrictions() : p;
}

std::vector<Label> split_labels(const std::string& csv) {
  std::vector<Label> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::uint64_t resolve_seed(const GlobalOptions& g, std::uint64_t fallback) {
  if (g.seed) return *g.seed;
  if (const char* env = std::getenv(kSeedEnv); env && *env) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument(env);
      return v;
    } catch (const std::exception&) {
      throw InvalidInput(std::string(kSeedEnv) + " is not a nonnegative integer");
    }
  }
  return fallback;
}

ExperimentConfig build_config(const ProblemOptions& po, const RunOptions& ro, const GlobalOptions& g) {
  std::optional<ExperimentConfig> loaded;
  if (!ro.config_path.empty()) {
    if (po.paper_example || !po.problem_path.empty()) {
      throw InvalidInput("--config cannot be combined with --paper-example or --problem");
    }
    loaded.emplace(load_experiment_config(ro.config_path));
    if (g.benefit) {
      if (!loaded->paper_example_benefit) throw InvalidInput("--B only applies to the built-in example");
      loaded->problem = paper_example(*g.benefit);
      loaded->paper_example_benefit = *g.benefit;
    }
  } else {
    loaded.emplace(load_source(po, g));
    if (po.paper_example) loaded->paper_example_benefit = g.benefit.value_or(1.0);
  }
  ExperimentConfig cfg = std::move(*loaded);
  if (po.no_restrictions && !ro.config_path.empty()) cfg.problem = cfg.problem.without_restrictions();

  if (ro.alpha) cfg.alpha = *ro.alpha;
  if (ro.replications) cfg.replications = *ro.replications;
  if (ro.rule) cfg.rule = parse_rule(*ro.rule);
  if (ro.synthetic) cfg.sc = cfg.pc = ProcessSpec{};
  if (ro.test_inversion) {
    cfg.sc = cfg.pc = ProcessSpec{};
    cfg.sc.kind = cfg.pc.kind = ProcessKind::test_inversion;
  }
  for (ProcessSpec* spec : {&cfg.sc, &cfg.pc}) {
    if (spec->kind != ProcessKind::test_inversion) continue;
    if (ro.n) spec->n = *ro.n;
    if (ro.reference_draws) spec->reference_draws = *ro.reference_draws;
    if (ro.randomization) {
      spec->randomization = *ro.randomization == "shared" ? Randomization::shared : Randomization::independent;
    }
  }
  if (g.threads) cfg.threads = *g.threads;
  cfg.seed = resolve_seed(g, cfg.seed);
  return cfg;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string fmt(const Estimate& e) { return fmt(e.rate) + " (se " + fmt(e.std_error) + ")"; }

void print_summary(std::ostream& out, const ProcessSummary& s) {
  out << s.process << "\n";
  out << "  set coverage        " << fmt(s.set_coverage) << "\n";
  for (const auto& [label, e] : s.point_coverage) {
    out << "  point coverage " << std::left << std::setw(12) << label << std::right << fmt(e) << "\n";
  }
  out << "  violation rate      " << fmt(s.violation_rate) << "\n";
  out << "  empty-region rate   " << fmt(s.degenerate_rate) << "\n";
  out << "  action frequency   ";
  for (const auto& [label, f] : s.action_frequency) out << " " << label << "=" << fmt(f);
  out << "\n";
  out << "  mean region min     " << fmt(s.mean_region_min) << "\n";
  out << "  mean Theta_I min    " << fmt(s.mean_identified_min) << "\n";
}

// Output directory for report files; created if missing.
fs::path output_dir(const GlobalOptions& g) {
  fs::path dir(g.out.value_or("."));
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory '" + dir.string() + "'");
  return dir;
}

int cmd_dump(const GlobalOptions& g, std::ostream& out) {
  const std::string text = dump_problem(paper_example(g.benefit.value_or(1.0)));
  if (g.dump_path == "-") {
    out << text;
  } else {
    write_file(g.dump_path, text);
  }
  return kOk;
}

int cmd_identify(const ProblemOptions& po, std::optional<double> tol, const GlobalOptions& g,
                 std::ostream& out, std::ostream& err) {
  DecisionProblem p = load_source(po, g);
  if (tol) p = with_tol(p, *tol);
  const auto identified = p.identified_set();
  for (const auto& label : identified) out << label << "\n";
  for (const auto& m : p.theta().models()) {
    const auto px = implied_marginal(m);
    err << "# " << m.label() << " implied P_X:";
    for (std::size_t x = 0; x < px.size(); ++x) err << " " << p.space().x_values()[x] << "=" << fmt(px[x]);
    err << "\n";
  }
  if (identified.empty()) err << "warning: the identified set is empty\n";
  return kOk;
}

int cmd_decide(const ProblemOptions& po, const std::string& region_text, const std::string& rule_text,
               const GlobalOptions& g, std::ostream& out) {
  const DecisionProblem p = load_source(po, g);
  const Rule rule = parse_rule(rule_text);
  const auto region = split_labels(region_text);
  if (region.empty()) throw InvalidInput("--region is empty");
  for (const auto& label : region) p.theta().at(label);
  const RegionEvaluation ev = evaluate_rule(rule, p, region);
  const bool regret_form = rule == Rule::minmax_regret;

  out << "rule: " << to_string(rule) << "\n";
  out << "region:";
  for (const auto& l : region) out << " " << l;
  out << "\n";
  out << (regret_form ? "action  worst_case_regret\n" : "action  worst_case_utility\n");
  for (const auto& [label, v] : ev.per_action_values) {
    out << std::left << std::setw(8) << label << std::right << fmt(regret_form ? -v : v) << "\n";
  }
  out << "chosen: " << ev.chosen_action << "\n";
  out << "value: " << fmt(regret_form ? ev.worst_case_regret() : ev.value) << "\n";
  out << "tie_set:";
  for (const auto& l : ev.tie_set) out << " " << l;
  out << "\n";
  return kOk;
}

Region realize_for_coverage(const ExperimentConfig& cfg, const ProcessSpec& spec, bool is_pc,
                            const std::vector<Label>& identified, const std::vector<Label>& admissible,
                            std::uint64_t r, Rng& rng) {
  Region region;
  if (spec.kind == ProcessKind::synthetic) {
    SyntheticRegionSpec s{cfg.alpha, is_pc ? CoverageMode::point_coverage : CoverageMode::set_coverage,
                          spec.drop_probs};
    region = synthetic_region(identified, admissible, s, rng);
  } else {
    const auto counts = draw_multinomial(cfg.problem.p_x().pmf(), spec.n, rng);
    TestInversionOptions opts{cfg.alpha,
                              spec.randomization.value_or(is_pc ? Randomization::independent
                                                                : Randomization::shared),
                              spec.reference_draws};
    region = test_inversion_region(cfg.problem, counts, spec.n, opts, rng, admissible);
  }
  region.provenance.replication = r;
  region.provenance.seed = cfg.seed;
  return region;
}

int cmd_coverage(const ProblemOptions& po, const RunOptions& ro, const std::string& which,
                 const GlobalOptions& g, std::ostream& out) {
  ExperimentConfig cfg = build_config(po, ro, g);
  validate(cfg);
  const auto identified = cfg.problem.identified_set();
  const auto admissible = cfg.problem.admissible_labels();

  std::string json_text;
  for (const bool is_pc : {false, true}) {
    if ((is_pc && which == "sc") || (!is_pc && which == "pc")) continue;
    const ProcessSpec& spec = is_pc ? cfg.pc : cfg.sc;
    const RegionProcess process = [&](std::uint64_t r, Rng& rng) {
      return realize_for_coverage(cfg, spec, is_pc, identified, admissible, r, rng);
    };
    const std::uint64_t seed = mix_seed(cfg.seed, is_pc ? 3 : 2);
    const CoverageReport report = estimate_coverage(process, identified, cfg.replications, seed);

    out << (is_pc ? "pc:" : "sc:") << to_string(spec.kind) << "  (alpha " << fmt(cfg.alpha) << ", R "
        << report.replications << ", seed " << cfg.seed << ")\n";
    out << "  set coverage        " << fmt(report.set) << "\n";
    for (const auto& [label, e] : report.point) {
      out << "  point coverage " << std::left << std::setw(12) << label << std::right << fmt(e) << "\n";
    }
    json_text += coverage_json(report);
  }
  if (g.format != "csv" && g.out) write_file(output_dir(g) / "coverage.json", json_text);
  return kOk;
}

int cmd_experiment(const ProblemOptions& po, const RunOptions& ro, bool exact, const GlobalOptions& g,
                   std::ostream& out) {
  const ExperimentConfig cfg = build_config(po, ro, g);
  const ExperimentReport report = exact ? exact_analysis(cfg) : run_experiment(cfg);

  const fs::path dir = output_dir(g);
  if (g.format != "csv") write_file(dir / "summary.json", summary_json(report, cfg));
  if (g.format != "json" && !exact) write_file(dir / "records.csv", records_csv(report));

  out << (exact ? "exact analysis" : "monte carlo") << ": rule " << to_string(report.rule) << ", alpha "
      << fmt(report.alpha);
  if (!exact) out << ", R " << report.replications << ", seed " << report.seed;
  out << "\nidentified set:";
  for (const auto& l : report.identified) out << " " << l;
  out << "\n";
  print_summary(out, report.sc);
  print_summary(out, report.pc);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"coverage_lab: robust decisions over partially identified models"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master seed (falls back to $COVERAGE_LAB_SEED)");
  app.add_option("--out", g.out, "Output directory for report files (experiment default: .)");
  app.add_option("--format", g.format, "Report files to write: csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  app.add_option("--threads", g.threads, "Worker threads for experiment runs");
  app.add_option("--B", g.benefit, "Benefit B of the built-in example (default 1)");
  app.add_option("--dump-paper-example", g.dump_path,
                 "Write the built-in example as a problem file ('-' for stdout)");

  ProblemOptions identify_po;
  std::optional<double> tol;
  auto* identify = app.add_subcommand("identify", "Print the identified set");
  add_problem_options(identify, identify_po);
  identify->add_option("--tol", tol, "Sup-norm tolerance for marginal matching");

  ProblemOptions decide_po;
  std::string region_text;
  std::string decide_rule = "maxmin";
  auto* decide = app.add_subcommand("decide", "Apply a decision rule to a region of models");
  add_problem_options(decide, decide_po);
  decide->add_option("--region", region_text, "Comma-separated model labels")->required();
  decide->add_option("--rule", decide_rule, "maxmin or minmax_regret");

  ProblemOptions coverage_po;
  RunOptions coverage_ro;
  std::string which = "both";
  auto* coverage = app.add_subcommand("coverage", "Estimate set and point coverage of region processes");
  add_problem_options(coverage, coverage_po);
  add_run_options(coverage, coverage_ro);
  coverage->add_option("--process", which, "sc, pc or both")->check(CLI::IsMember({"sc", "pc", "both"}));

  ProblemOptions experiment_po;
  RunOptions experiment_ro;
  bool exact = false;
  auto* experiment = app.add_subcommand("experiment", "Run the SC vs PC robustness experiment");
  add_problem_options(experiment, experiment_po);
  add_run_options(experiment, experiment_ro);
  experiment->add_option("--rule", experiment_ro.rule, "maxmin or minmax_regret");
  experiment->add_flag("--exact", exact, "Enumerate synthetic region outcomes instead of sampling");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (!g.dump_path.empty()) return cmd_dump(g, out);
    if (*identify) return cmd_identify(identify_po, tol, g, out, err);
    if (*decide) return cmd_decide(decide_po, region_text, decide_rule, g, out);
    if (*coverage) return cmd_coverage(coverage_po, coverage_ro, which, g, out);
    if (*experiment) return cmd_experiment(experiment_po, experiment_ro, exact, g, out);
    err << app.help();
    return kInputError;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace covlab::cli

#include "covlab/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "covlab/error.hpp"
#include "covlab/paper_example.hpp"

namespace covlab {
namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& field, const std::string& message) {
  throw InvalidInput(field + ": " + message);
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) fail(where.empty() ? key : where + "." + key, "unknown key");
  }
}

const json& require(const json& obj, const std::string& key, const std::string& where = {}) {
  const auto it = obj.find(key);
  if (it == obj.end()) fail(where.empty() ? key : where + "." + key, "missing required key");
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) fail(field, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) fail(field, "expected a finite number");
  return d;
}

std::uint64_t count(const json& v, const std::string& field) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  fail(field, "expected a nonnegative integer");
}

std::string text(const json& v, const std::string& field) {
  if (!v.is_string()) fail(field, "expected a string");
  return v.get<std::string>();
}

std::vector<Label> labels(const json& v, const std::string& field) {
  if (!v.is_array()) fail(field, "expected an array of labels");
  std::vector<Label> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(text(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<double> numbers(const json& v, const std::string& field) {
  if (!v.is_array()) fail(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

json parse_json(std::string_view raw, const std::string& what) {
  try {
    return json::parse(raw.begin(), raw.end());
  } catch (const json::parse_error& e) {
    throw InvalidInput(what + ": " + e.what());
  }
}

// Re-labels InvalidInput from domain constructors with the field it came from.
template <typename F>
auto at_field(const std::string& field, F&& f) {
  try {
    return f();
  } catch (const InvalidInput& e) {
    fail(field, e.what());
  }
}

DecisionProblem problem_from_json(const json& root, const std::string& where) {
  if (!root.is_object()) fail(where.empty() ? "problem" : where, "expected an object");
  const auto key = [&](const char* k) { return where.empty() ? std::string(k) : where + "." + k; };
  reject_unknown_keys(root, where,
                      {"x_values", "eps_values", "models", "p_x", "restrictions", "actions", "tol"});

  StateSpace space = at_field(key("x_values"), [&] {
    return StateSpace(labels(require(root, "x_values", where), key("x_values")),
                      labels(require(root, "eps_values", where), key("eps_values")));
  });

  const json& jm = require(root, "models", where);
  if (!jm.is_object()) fail(key("models"), "expected an object mapping label to probabilities");
  std::vector<Model> models;
  for (const auto& [label, probs] : jm.items()) {
    const std::string f = key("models") + "." + label;
    models.push_back(at_field(f, [&] { return Model(label, space, numbers(probs, f)); }));
  }

  ObservableMarginal p_x = at_field(key("p_x"), [&] {
    auto v = numbers(require(root, "p_x", where), key("p_x"));
    if (v.size() != space.x_size()) {
      throw InvalidInput("has " + std::to_string(v.size()) + " entries for " +
                         std::to_string(space.x_size()) + " observable values");
    }
    return ObservableMarginal(std::move(v));
  });

  double tol = 0.0;
  if (const auto it = root.find("tol"); it != root.end()) {
    tol = number(*it, key("tol"));
    if (tol < 0.0) fail(key("tol"), "must be nonnegative");
  }

  std::vector<Restriction> restrictions;
  if (const auto it = root.find("restrictions"); it != root.end()) {
    if (!it->is_array()) fail(key("restrictions"), "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const json& r = (*it)[i];
      const std::string f = key("restrictions") + "[" + std::to_string(i) + "]";
      if (!r.is_object()) fail(f, "expected an object");
      reject_unknown_keys(r, f, {"type", "eps", "value"});
      const std::string type = text(require(r, "type", f), f + ".type");
      if (type != "latent_marginal_eq") fail(f + ".type", "unsupported restriction type '" + type + "'");
      restrictions.push_back(at_field(f, [&] {
        return Restriction::latent_marginal_eq(space, text(require(r, "eps", f), f + ".eps"),
                                               number(require(r, "value", f), f + ".value"),
                                               std::max(tol, kProbabilityTolerance));
      }));
    }
  }

  const json& ja = require(root, "actions", where);
  if (!ja.is_object()) fail(key("actions"), "expected an object mapping label to outcomes");
  std::vector<Action> actions;
  for (const auto& [label, outcomes] : ja.items()) {
    const std::string f = key("actions") + "." + label;
    actions.push_back(at_field(f, [&] { return Action(label, space, numbers(outcomes, f)); }));
  }

  ModelSet theta = at_field(key("models"), [&] { return ModelSet(space, std::move(models)); });
  return at_field(where.empty() ? "problem" : where, [&] {
    return DecisionProblem(std::move(theta), std::move(p_x), std::move(restrictions), std::move(actions), tol);
  });
}

json problem_to_json(const DecisionProblem& p) {
  json root;
  root["x_values"] = p.space().x_values();
  root["eps_values"] = p.space().eps_values();
  json models = json::object();
  for (const auto& m : p.theta().models()) models[m.label()] = m.pmf();
  root["models"] = std::move(models);
  root["p_x"] = p.p_x().pmf();
  json restrictions = json::array();
  for (const auto& r : p.restrictions()) {
    if (!r.latent_spec()) {
      throw InvalidInput("restriction '" + r.description() + "' has no file representation");
    }
    restrictions.push_back({{"type", "latent_marginal_eq"}, {"eps", r.latent_spec()->eps},
                            {"value", r.latent_spec()->value}});
  }
  root["restrictions"] = std::move(restrictions);
  json actions = json::object();
  for (const auto& a : p.actions()) actions[a.label()] = a.outcomes();
  root["actions"] = std::move(actions);
  root["tol"] = p.tol();
  return root;
}

ProcessSpec process_from_json(const json& v, const std::string& field) {
  if (!v.is_object()) fail(field, "expected an object");
  ProcessSpec spec;
  const std::string type = text(require(v, "type", field), field + ".type");
  if (type == "synthetic") {
    reject_unknown_keys(v, field, {"type", "drop_probs"});
    spec.kind = ProcessKind::synthetic;
    if (const auto it = v.find("drop_probs"); it != v.end()) {
      if (!it->is_object()) fail(field + ".drop_probs", "expected an object mapping label to probability");
      for (const auto& [label, p] : it->items()) {
        spec.drop_probs.emplace_back(label, number(p, field + ".drop_probs." + label));
      }
    }
  } else if (type == "test_inversion") {
    reject_unknown_keys(v, field, {"type", "n", "randomization", "reference_draws"});
    spec.kind = ProcessKind::test_inversion;
    spec.n = count(require(v, "n", field), field + ".n");
    if (spec.n < 1) fail(field + ".n", "must be at least 1");
    if (const auto it = v.find("randomization"); it != v.end()) {
      const std::string r = text(*it, field + ".randomization");
      if (r == "shared") {
        spec.randomization = Randomization::shared;
      } else if (r == "independent") {
        spec.randomization = Randomization::independent;
      } else {
        fail(field + ".randomization", "expected \"shared\" or \"independent\"");
      }
    }
    if (const auto it = v.find("reference_draws"); it != v.end()) {
      spec.reference_draws = count(*it, field + ".reference_draws");
      if (spec.reference_draws < 1) fail(field + ".reference_draws", "must be at least 1");
    }
  } else {
    fail(field + ".type", "expected \"synthetic\" or \"test_inversion\"");
  }
  return spec;
}

json process_to_json(const ProcessSpec& spec) {
  json v;
  v["type"] = std::string(to_string(spec.kind));
  if (spec.kind == ProcessKind::synthetic) {
    if (!spec.drop_probs.empty()) {
      json d = json::object();
      for (const auto& [label, p] : spec.drop_probs) d[label] = p;
      v["drop_probs"] = std::move(d);
    }
  } else {
    v["n"] = spec.n;
    if (spec.randomization) v["randomization"] = std::string(to_string(*spec.randomization));
    v["reference_draws"] = spec.reference_draws;
  }
  return v;
}

json config_to_json(const ExperimentConfig& cfg) {
  json v;
  if (cfg.paper_example_benefit) {
    v["problem"] = "paper_example";
    v["B"] = *cfg.paper_example_benefit;
  } else {
    v["problem"] = problem_to_json(cfg.problem);
  }
  v["rule"] = std::string(to_string(cfg.rule));
  v["alpha"] = cfg.alpha;
  v["R"] = cfg.replications;
  v["seed"] = cfg.seed;
  v["sc_process"] = process_to_json(cfg.sc);
  v["pc_process"] = process_to_json(cfg.pc);
  return v;
}

json estimate_to_json(const Estimate& e) { return {{"rate", e.rate}, {"std_error", e.std_error}}; }

json summary_to_json(const ProcessSummary& s) {
  json v;
  v["process"] = s.process;
  v["set_coverage"] = estimate_to_json(s.set_coverage);
  json point = json::object();
  for (const auto& [label, e] : s.point_coverage) point[label] = estimate_to_json(e);
  v["point_coverage"] = std::move(point);
  json freq = json::object();
  for (const auto& [label, f] : s.action_frequency) freq[label] = f;
  v["action_frequency"] = std::move(freq);
  v["violation_rate"] = estimate_to_json(s.violation_rate);
  v["degenerate_rate"] = estimate_to_json(s.degenerate_rate);
  v["degenerate_count"] = s.degenerate_count;
  v["mean_identified_min"] = s.mean_identified_min;
  v["mean_region_min"] = s.mean_region_min;
  return v;
}

std::string join(const std::vector<Label>& labels, char sep) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out += sep;
    out += labels[i];
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

DecisionProblem parse_problem(std::string_view json_text) {
  return problem_from_json(parse_json(json_text, "problem file"), "");
}

DecisionProblem load_problem(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  try {
    return parse_problem(raw);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

std::string dump_problem(const DecisionProblem& p) { return problem_to_json(p).dump(2) + "\n"; }

ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const json root = parse_json(json_text, "config file");
  if (!root.is_object()) fail("config", "expected an object");
  reject_unknown_keys(root, "",
                      {"problem", "B", "rule", "alpha", "R", "seed", "threads", "sc_process", "pc_process"});

  std::optional<double> benefit;
  const json& jp = require(root, "problem");
  const auto problem = [&]() -> DecisionProblem {
    if (jp.is_string()) {
      const std::string name = jp.get<std::string>();
      if (name == "paper_example") {
        benefit = 1.0;
        if (const auto it = root.find("B"); it != root.end()) benefit = number(*it, "B");
        return at_field("B", [&] { return paper_example(*benefit); });
      }
      std::filesystem::path path(name);
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      return load_problem(path);
    }
    if (root.contains("B")) fail("B", "only applies when problem is \"paper_example\"");
    return problem_from_json(jp, "problem");
  }();

  ExperimentConfig cfg(problem);
  cfg.paper_example_benefit = benefit;
  if (const auto it = root.find("rule"); it != root.end()) {
    cfg.rule = at_field("rule", [&] { return parse_rule(text(*it, "rule")); });
  }
  if (const auto it = root.find("alpha"); it != root.end()) cfg.alpha = number(*it, "alpha");
  if (const auto it = root.find("R"); it != root.end()) cfg.replications = count(*it, "R");
  if (const auto it = root.find("seed"); it != root.end()) cfg.seed = count(*it, "seed");
  if (const auto it = root.find("threads"); it != root.end()) {
    cfg.threads = static_cast<unsigned>(count(*it, "threads"));
  }
  if (const auto it = root.find("sc_process"); it != root.end()) cfg.sc = process_from_json(*it, "sc_process");
  if (const auto it = root.find("pc_process"); it != root.end()) cfg.pc = process_from_json(*it, "pc_process");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const std::string raw = read_file(path);
  try {
    return parse_experiment_config(raw, path.parent_path());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

std::string config_json(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2) + "\n"; }

std::string summary_json(const ExperimentReport& report, const ExperimentConfig& cfg) {
  json v;
  v["tool"] = "coverage_lab";
  v["version"] = std::string(kToolVersion);
  v["exact"] = report.exact;
  v["replications"] = report.replications;
  v["seed"] = report.seed;
  v["alpha"] = report.alpha;
  v["rule"] = std::string(to_string(report.rule));
  v["identified_set"] = report.identified;
  v["admissible_models"] = report.admissible;
  v["sc"] = summary_to_json(report.sc);
  v["pc"] = summary_to_json(report.pc);
  v["config"] = config_to_json(cfg);
  return v.dump(2) + "\n";
}

std::string records_csv(const ExperimentReport& report) {
  std::string out = "rep,process,region_labels,rule,chosen_action,region_min,identified_min,violation\n";
  const std::string rule(to_string(report.rule));
  for (const auto& rec : report.records) {
    for (const auto* c : {&rec.sc, &rec.pc}) {
      out += std::to_string(rec.index);
      out += c == &rec.sc ? ",sc," : ",pc,";
      out += join(c->region, '|');
      out += ',' + rule + ',';
      if (c->chosen) {
        out += *c->chosen + ',' + format_double(c->region_min) + ',' + format_double(c->identified_min);
      } else {
        out += ",,";
      }
      out += c->violation ? ",1\n" : ",0\n";
    }
  }
  return out;
}

std::string coverage_json(const CoverageReport& report) {
  json v;
  v["replications"] = report.replications;
  v["set_coverage"] = estimate_to_json(report.set);
  json point = json::object();
  for (const auto& [label, e] : report.point) point[label] = estimate_to_json(e);
  v["point_coverage"] = std::move(point);
  return v.dump(2) + "\n";
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace covlab

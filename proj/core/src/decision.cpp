#include "covlab/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "covlab/error.hpp"

namespace covlab {
namespace {

bool near_max(double v, double best) {
  return v >= best - 1e-12 * std::max(1.0, std::fabs(best));
}

std::vector<const Model*> resolve_region(const DecisionProblem& p, std::span<const Label> region,
                                         const char* what) {
  if (region.empty()) throw InvalidInput(std::string(what) + " is empty");
  std::vector<const Model*> out;
  out.reserve(region.size());
  for (const auto& label : region) out.push_back(&p.theta().at(label));
  return out;
}

double best_utility(const DecisionProblem& p, const Model& m) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& b : p.actions()) best = std::max(best, expected_utility(b, m));
  return best;
}

RegionEvaluation pick(std::vector<std::pair<Label, double>> values) {
  RegionEvaluation ev;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [label, v] : values) best = std::max(best, v);
  for (const auto& [label, v] : values) {
    if (near_max(v, best)) ev.tie_set.push_back(label);
  }
  ev.chosen_action = ev.tie_set.front();
  ev.value = std::find_if(values.begin(), values.end(), [&](const auto& kv) {
               return kv.first == ev.chosen_action;
             })->second;
  ev.per_action_values = std::move(values);
  return ev;
}

}  // namespace

Action::Action(Label label, const StateSpace& space, std::vector<double> outcomes)
    : label_(std::move(label)), outcomes_(std::move(outcomes)) {
  if (outcomes_.size() != space.size()) {
    std::ostringstream os;
    os << "action '" << label_ << "': " << outcomes_.size() << " outcomes for a " << space.x_size()
       << "x" << space.eps_size() << " state grid";
    throw InvalidInput(os.str());
  }
  for (double v : outcomes_) {
    if (!std::isfinite(v)) throw InvalidInput("action '" + label_ + "' has a non-finite outcome");
  }
}

DecisionProblem::DecisionProblem(ModelSet theta, ObservableMarginal p_x,
                                 std::vector<Restriction> restrictions, std::vector<Action> actions,
                                 double tol)
    : theta_(std::move(theta)),
      p_x_(std::move(p_x)),
      restrictions_(std::move(restrictions)),
      actions_(std::move(actions)),
      tol_(tol) {
  if (actions_.empty()) throw InvalidInput("a decision problem needs at least one action");
  if (p_x_.size() != theta_.space().x_size()) {
    std::ostringstream os;
    os << "p_x has " << p_x_.size() << " entries but there are " << theta_.space().x_size()
       << " observable values";
    throw InvalidInput(os.str());
  }
  if (std::isnan(tol_) || tol_ < 0.0) throw InvalidInput("tol must be nonnegative");
  std::set<Label> seen;
  for (const auto& a : actions_) {
    if (a.outcomes().size() != theta_.space().size()) {
      throw InvalidInput("action '" + a.label() + "' does not match the state space");
    }
    if (!seen.insert(a.label()).second) throw InvalidInput("duplicate action label '" + a.label() + "'");
  }
}

const Action* DecisionProblem::find_action(const Label& label) const {
  auto it = std::find_if(actions_.begin(), actions_.end(),
                         [&](const Action& a) { return a.label() == label; });
  return it == actions_.end() ? nullptr : &*it;
}

const Action& DecisionProblem::action(const Label& label) const {
  if (const Action* a = find_action(label)) return *a;
  std::string valid;
  for (const auto& a : actions_) valid += (valid.empty() ? "" : ", ") + a.label();
  throw InvalidInput("unknown action label '" + label + "' (valid: " + valid + ")");
}

std::vector<Label> DecisionProblem::identified_set() const {
  return covlab::identified_set(theta_, p_x_, restrictions_, tol_);
}

std::vector<Label> DecisionProblem::admissible_labels() const {
  return covlab::admissible_labels(theta_, restrictions_);
}

DecisionProblem DecisionProblem::without_restrictions() const {
  return DecisionProblem(theta_, p_x_, {}, actions_, tol_);
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::maxmin:
      return "maxmin";
    case Rule::minmax_regret:
      return "minmax_regret";
  }
  return "?";
}

Rule parse_rule(std::string_view text) {
  if (text == "maxmin") return Rule::maxmin;
  if (text == "minmax_regret") return Rule::minmax_regret;
  throw InvalidInput("unknown rule '" + std::string(text) + "' (expected maxmin or minmax_regret)");
}

double RegionEvaluation::value_of(const Label& action) const {
  for (const auto& [label, v] : per_action_values) {
    if (label == action) return v;
  }
  throw InvalidInput("no value recorded for action '" + action + "'");
}

double expected_utility(const Action& a, const Model& m) {
  const auto& out = a.outcomes();
  const auto& pmf = m.pmf();
  double u = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) u += out[i] * pmf[i];
  return u;
}

double regret(const Action& a, const Model& m, const DecisionProblem& p) {
  return std::max(0.0, best_utility(p, m) - expected_utility(a, m));
}

RegionEvaluation maxmin_action(const DecisionProblem& p, std::span<const Label> region) {
  const auto models = resolve_region(p, region, "region");
  std::vector<std::pair<Label, double>> values;
  values.reserve(p.actions().size());
  for (const auto& a : p.actions()) {
    double worst = std::numeric_limits<double>::infinity();
    for (const Model* m : models) worst = std::min(worst, expected_utility(a, *m));
    values.emplace_back(a.label(), worst);
  }
  return pick(std::move(values));
}

RegionEvaluation minmax_regret_action(const DecisionProblem& p, std::span<const Label> region) {
  const auto models = resolve_region(p, region, "region");
  std::vector<double> best;
  best.reserve(models.size());
  for (const Model* m : models) best.push_back(best_utility(p, *m));

  std::vector<std::pair<Label, double>> values;
  values.reserve(p.actions().size());
  for (const auto& a : p.actions()) {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < models.size(); ++k) {
      worst = std::min(worst, std::min(0.0, expected_utility(a, *models[k]) - best[k]));
    }
    values.emplace_back(a.label(), worst);
  }
  return pick(std::move(values));
}

RegionEvaluation evaluate_rule(Rule rule, const DecisionProblem& p, std::span<const Label> region) {
  return rule == Rule::maxmin ? maxmin_action(p, region) : minmax_regret_action(p, region);
}

double min_utility(const DecisionProblem& p, const Label& action, std::span<const Label> models) {
  const auto resolved = resolve_region(p, models, "model list");
  const Action& a = p.action(action);
  double worst = std::numeric_limits<double>::infinity();
  for (const Model* m : resolved) worst = std::min(worst, expected_utility(a, *m));
  return worst;
}

GuaranteeCheck guarantee_holds(const DecisionProblem& p, const Label& chosen,
                               std::span<const Label> region, std::span<const Label> identified) {
  if (identified.empty()) throw InvalidInput("identified set is empty");
  if (region.empty()) throw InvalidInput("region is empty");
  GuaranteeCheck g;
  g.identified_min = min_utility(p, chosen, identified);
  g.region_min = min_utility(p, chosen, region);
  g.holds = g.identified_min >= g.region_min;
  return g;
}

}  // namespace covlab

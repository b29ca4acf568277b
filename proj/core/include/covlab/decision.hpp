#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "covlab/model.hpp"

namespace covlab {

/// A map from states to real-valued outcomes.
class Action {
 public:
  Action(Label label, const StateSpace& space, std::vector<double> outcomes);

  const Label& label() const { return label_; }
  const std::vector<double>& outcomes() const { return outcomes_; }

  friend bool operator==(const Action&, const Action&) = default;

 private:
  Label label_;
  std::vector<double> outcomes_;
};

class DecisionProblem {
 public:
  DecisionProblem(ModelSet theta, ObservableMarginal p_x, std::vector<Restriction> restrictions,
                  std::vector<Action> actions, double tol = 0.0);

  const StateSpace& space() const { return theta_.space(); }
  const ModelSet& theta() const { return theta_; }
  const ObservableMarginal& p_x() const { return p_x_; }
  const std::vector<Restriction>& restrictions() const { return restrictions_; }
  const std::vector<Action>& actions() const { return actions_; }
  double tol() const { return tol_; }

  const Action& action(const Label& label) const;  // throws InvalidInput
  const Action* find_action(const Label& label) const;

  std::vector<Label> identified_set() const;
  std::vector<Label> admissible_labels() const;

  // Same problem with the restrictions dropped.
  DecisionProblem without_restrictions() const;

 private:
  ModelSet theta_;
  ObservableMarginal p_x_;
  std::vector<Restriction> restrictions_;
  std::vector<Action> actions_;
  double tol_;
};

enum class Rule { maxmin, minmax_regret };

std::string_view to_string(Rule rule);
Rule parse_rule(std::string_view text);  // throws InvalidInput

/// Outcome of applying a decision rule to a region of models.
///
/// For maxmin, per-action values are worst-case expected utilities. For
/// minmax regret they are the signed form min_theta [U(a,theta) - max_b U(b,theta)],
/// so the value is the negated worst-case regret and larger is still better.
/// `chosen_action` is the first action in declaration order among `tie_set`.
struct RegionEvaluation {
  Label chosen_action;
  double value = 0.0;
  std::vector<std::pair<Label, double>> per_action_values;
  std::vector<Label> tie_set;

  double value_of(const Label& action) const;
  // Nonnegative worst-case regret of the chosen action (minmax regret only).
  double worst_case_regret() const { return -value; }
};

double expected_utility(const Action& a, const Model& m);

// max over actions b of U(b, m) - U(a, m); never negative.
double regret(const Action& a, const Model& m, const DecisionProblem& p);

RegionEvaluation maxmin_action(const DecisionProblem& p, std::span<const Label> region);
RegionEvaluation minmax_regret_action(const DecisionProblem& p, std::span<const Label> region);
RegionEvaluation evaluate_rule(Rule rule, const DecisionProblem& p, std::span<const Label> region);

// Worst-case expected utility of one action over a set of models.
double min_utility(const DecisionProblem& p, const Label& action, std::span<const Label> models);

struct GuaranteeCheck {
  bool holds = false;
  double identified_min = 0.0;
  double region_min = 0.0;
};

/// Whether the region's worst-case utility for `chosen` is a valid lower
/// bound for its worst case over the identified set.
GuaranteeCheck guarantee_holds(const DecisionProblem& p, const Label& chosen,
                               std::span<const Label> region, std::span<const Label> identified);

}  // namespace covlab

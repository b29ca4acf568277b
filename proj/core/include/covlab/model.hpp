#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace covlab {

using Label = std::string;

// Validation tolerance for probability tables.
inline constexpr double kProbabilityTolerance = 1e-12;

/// Product grid of observable values X and latent values eps. Cells are
/// stored row-major: cell(x, e) = x * |eps| + e.
class StateSpace {
 public:
  StateSpace(std::vector<Label> x_values, std::vector<Label> eps_values);

  const std::vector<Label>& x_values() const { return x_values_; }
  const std::vector<Label>& eps_values() const { return eps_values_; }
  std::size_t x_size() const { return x_values_.size(); }
  std::size_t eps_size() const { return eps_values_.size(); }
  std::size_t size() const { return x_values_.size() * eps_values_.size(); }
  std::size_t cell(std::size_t x, std::size_t e) const { return x * eps_values_.size() + e; }

  std::optional<std::size_t> x_index(const Label& label) const;
  std::optional<std::size_t> eps_index(const Label& label) const;

  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  std::vector<Label> x_values_;
  std::vector<Label> eps_values_;
};

/// Distribution of the observable component.
class ObservableMarginal {
 public:
  explicit ObservableMarginal(std::vector<double> pmf);

  const std::vector<double>& pmf() const { return pmf_; }
  std::size_t size() const { return pmf_.size(); }
  double operator[](std::size_t x) const { return pmf_[x]; }

  friend bool operator==(const ObservableMarginal&, const ObservableMarginal&) = default;

 private:
  std::vector<double> pmf_;
};

/// One candidate joint distribution of (X, eps).
class Model {
 public:
  Model(Label label, const StateSpace& space, std::vector<double> pmf);

  const Label& label() const { return label_; }
  const std::vector<double>& pmf() const { return pmf_; }
  std::size_t x_size() const { return x_size_; }
  std::size_t eps_size() const { return eps_size_; }
  double at(std::size_t x, std::size_t e) const { return pmf_[x * eps_size_ + e]; }

  friend bool operator==(const Model&, const Model&) = default;

 private:
  Label label_;
  std::size_t x_size_;
  std::size_t eps_size_;
  std::vector<double> pmf_;
};

// Serializable form of the one built-in restriction family:
// P(eps = eps_label) == value.
struct LatentMarginalEq {
  Label eps;
  double value = 0.0;

  friend bool operator==(const LatentMarginalEq&, const LatentMarginalEq&) = default;
};

/// An a priori restriction on the joint distribution. Restrictions are
/// opaque deterministic predicates; those built from LatentMarginalEq keep
/// their parameters so problem files can be written back out.
class Restriction {
 public:
  using Predicate = std::function<bool(const Model&)>;

  Restriction(std::string description, Predicate predicate);

  static Restriction latent_marginal_eq(const StateSpace& space, const Label& eps, double value,
                                        double tol = kProbabilityTolerance);

  const std::string& description() const { return description_; }
  const std::optional<LatentMarginalEq>& latent_spec() const { return latent_spec_; }
  bool operator()(const Model& m) const { return predicate_(m); }

 private:
  std::string description_;
  Predicate predicate_;
  std::optional<LatentMarginalEq> latent_spec_;
};

/// The candidate set Theta: models over one state space with unique labels.
class ModelSet {
 public:
  ModelSet(StateSpace space, std::vector<Model> models);

  const StateSpace& space() const { return space_; }
  const std::vector<Model>& models() const { return models_; }
  std::size_t size() const { return models_.size(); }

  const Model* find(const Label& label) const;
  const Model& at(const Label& label) const;  // throws InvalidInput
  std::vector<Label> labels() const;

  friend bool operator==(const ModelSet&, const ModelSet&) = default;

 private:
  StateSpace space_;
  std::vector<Model> models_;
};

ObservableMarginal implied_marginal(const Model& m);

// Marginal of the latent component: sum over x for each eps.
std::vector<double> latent_marginal(const Model& m);

// Sup-norm distance between two tables of equal length.
double sup_distance(std::span<const double> a, std::span<const double> b);

/// Labels of the models whose implied X-marginal lies within `tol` of p_x
/// in sup-norm and which satisfy every restriction, in Theta order.
std::vector<Label> identified_set(const ModelSet& theta, const ObservableMarginal& p_x,
                                  std::span<const Restriction> restrictions, double tol);

// Labels of the models satisfying every restriction, ignoring the data.
std::vector<Label> admissible_labels(const ModelSet& theta, std::span<const Restriction> restrictions);

}  // namespace covlab

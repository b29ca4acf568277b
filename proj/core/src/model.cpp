#include "covlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "covlab/error.hpp"

namespace covlab {
namespace {

void require_unique(const std::vector<Label>& labels, const char* what) {
  if (labels.empty()) throw InvalidInput(std::string(what) + " must be nonempty");
  std::set<Label> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw InvalidInput(std::string(what) + ": duplicate label '" + l + "'");
  }
}

void require_distribution(const std::vector<double>& pmf, const std::string& what) {
  double total = 0.0;
  for (double p : pmf) {
    if (!std::isfinite(p) || p < 0.0) {
      std::ostringstream os;
      os << what << ": probability " << p << " is not a finite nonnegative number";
      throw InvalidInput(os.str());
    }
    total += p;
  }
  if (std::fabs(total - 1.0) > kProbabilityTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": probabilities sum to " << total << ", expected 1";
    throw InvalidInput(os.str());
  }
}

std::optional<std::size_t> index_of(const std::vector<Label>& labels, const Label& label) {
  auto it = std::find(labels.begin(), labels.end(), label);
  if (it == labels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels.begin());
}

}  // namespace

StateSpace::StateSpace(std::vector<Label> x_values, std::vector<Label> eps_values)
    : x_values_(std::move(x_values)), eps_values_(std::move(eps_values)) {
  require_unique(x_values_, "x_values");
  require_unique(eps_values_, "eps_values");
}

std::optional<std::size_t> StateSpace::x_index(const Label& label) const {
  return index_of(x_values_, label);
}

std::optional<std::size_t> StateSpace::eps_index(const Label& label) const {
  return index_of(eps_values_, label);
}

ObservableMarginal::ObservableMarginal(std::vector<double> pmf) : pmf_(std::move(pmf)) {
  if (pmf_.empty()) throw InvalidInput("p_x must be nonempty");
  require_distribution(pmf_, "p_x");
}

Model::Model(Label label, const StateSpace& space, std::vector<double> pmf)
    : label_(std::move(label)),
      x_size_(space.x_size()),
      eps_size_(space.eps_size()),
      pmf_(std::move(pmf)) {
  if (pmf_.size() != space.size()) {
    std::ostringstream os;
    os << "model '" << label_ << "': " << pmf_.size() << " probabilities for a "
       << space.x_size() << "x" << space.eps_size() << " state grid";
    throw InvalidInput(os.str());
  }
  require_distribution(pmf_, "model '" + label_ + "'");
}

Restriction::Restriction(std::string description, Predicate predicate)
    : description_(std::move(description)), predicate_(std::move(predicate)) {
  if (!predicate_) throw InvalidInput("restriction '" + description_ + "' has no predicate");
}

Restriction Restriction::latent_marginal_eq(const StateSpace& space, const Label& eps, double value,
                                            double tol) {
  const auto e = space.eps_index(eps);
  if (!e) throw InvalidInput("restriction references unknown latent label '" + eps + "'");
  if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
    throw InvalidInput("restriction value for '" + eps + "' must lie in [0, 1]");
  }
  std::ostringstream os;
  os << "P(eps=" << eps << ") = " << value;
  const std::size_t idx = *e;
  Restriction r(os.str(), [idx, value, tol](const Model& m) {
    double mass = 0.0;
    for (std::size_t x = 0; x < m.x_size(); ++x) mass += m.at(x, idx);
    return std::fabs(mass - value) <= tol;
  });
  r.latent_spec_ = LatentMarginalEq{eps, value};
  return r;
}

ModelSet::ModelSet(StateSpace space, std::vector<Model> models)
    : space_(std::move(space)), models_(std::move(models)) {
  std::set<Label> seen;
  for (const auto& m : models_) {
    if (m.x_size() != space_.x_size() || m.eps_size() != space_.eps_size()) {
      throw InvalidInput("model '" + m.label() + "' does not match the state space");
    }
    if (!seen.insert(m.label()).second) throw InvalidInput("duplicate model label '" + m.label() + "'");
  }
}

const Model* ModelSet::find(const Label& label) const {
  auto it = std::find_if(models_.begin(), models_.end(),
                         [&](const Model& m) { return m.label() == label; });
  return it == models_.end() ? nullptr : &*it;
}

const Model& ModelSet::at(const Label& label) const {
  if (const Model* m = find(label)) return *m;
  std::string valid;
  for (const auto& m : models_) valid += (valid.empty() ? "" : ", ") + m.label();
  throw InvalidInput("unknown model label '" + label + "' (valid: " + valid + ")");
}

std::vector<Label> ModelSet::labels() const {
  std::vector<Label> out;
  out.reserve(models_.size());
  for (const auto& m : models_) out.push_back(m.label());
  return out;
}

ObservableMarginal implied_marginal(const Model& m) {
  std::vector<double> px(m.x_size(), 0.0);
  for (std::size_t x = 0; x < m.x_size(); ++x) {
    for (std::size_t e = 0; e < m.eps_size(); ++e) px[x] += m.at(x, e);
  }
  return ObservableMarginal(std::move(px));
}

std::vector<double> latent_marginal(const Model& m) {
  std::vector<double> pe(m.eps_size(), 0.0);
  for (std::size_t x = 0; x < m.x_size(); ++x) {
    for (std::size_t e = 0; e < m.eps_size(); ++e) pe[e] += m.at(x, e);
  }
  return pe;
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidInput("sup_distance: tables differ in length");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

std::vector<Label> identified_set(const ModelSet& theta, const ObservableMarginal& p_x,
                                  std::span<const Restriction> restrictions, double tol) {
  if (p_x.size() != theta.space().x_size()) {
    std::ostringstream os;
    os << "p_x has " << p_x.size() << " entries but the state space has " << theta.space().x_size()
       << " observable values";
    throw InvalidInput(os.str());
  }
  if (std::isnan(tol) || tol < 0.0) throw InvalidInput("tol must be nonnegative");
  std::vector<Label> out;
  for (const auto& m : theta.models()) {
    if (sup_distance(implied_marginal(m).pmf(), p_x.pmf()) > tol) continue;
    if (!std::all_of(restrictions.begin(), restrictions.end(),
                     [&](const Restriction& r) { return r(m); })) {
      continue;
    }
    out.push_back(m.label());
  }
  return out;
}

std::vector<Label> admissible_labels(const ModelSet& theta, std::span<const Restriction> restrictions) {
  std::vector<Label> out;
  for (const auto& m : theta.models()) {
    if (std::all_of(restrictions.begin(), restrictions.end(),
                    [&](const Restriction& r) { return r(m); })) {
      out.push_back(m.label());
    }
  }
  return out;
}

}  // namespace covlab

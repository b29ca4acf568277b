#include "covlab/paper_example.hpp"

#include <cmath>

#include "covlab/error.hpp"

namespace covlab {

DecisionProblem paper_example(double benefit) {
  if (!(benefit > 0.0) || !std::isfinite(benefit)) throw InvalidInput("B must be positive");
  const double b = benefit;

  // cells: (F,T) (F,N) (M,T) (M,N)
  StateSpace space({"F", "M"}, {"T", "N"});
  std::vector<Model> models;
  models.emplace_back("theta1", space, std::vector<double>{0.0, 0.5, 0.5, 0.0});
  models.emplace_back("theta2", space, std::vector<double>{0.5, 0.0, 0.0, 0.5});
  models.emplace_back("theta3", space, std::vector<double>{0.5, 0.0, 0.5, 0.0});
  models.emplace_back("theta4", space, std::vector<double>{0.0, 0.5, 0.0, 0.5});

  // Offer: +B talented, -B not talented. Withhold: -B talented, 0 otherwise.
  const double offer_t = b, offer_n = -b, skip_t = -b, skip_n = 0.0;
  std::vector<Action> actions;
  actions.emplace_back("a1", space, std::vector<double>{offer_t, offer_n, skip_t, skip_n});
  actions.emplace_back("a2", space, std::vector<double>{skip_t, skip_n, offer_t, offer_n});
  actions.emplace_back("a3", space, std::vector<double>{offer_t, offer_n, offer_t, offer_n});

  std::vector<Restriction> restrictions;
  restrictions.push_back(Restriction::latent_marginal_eq(space, "T", 0.5));

  ModelSet theta(space, std::move(models));
  return DecisionProblem(std::move(theta), ObservableMarginal({0.5, 0.5}), std::move(restrictions),
                         std::move(actions), 0.0);
}

}  // namespace covlab

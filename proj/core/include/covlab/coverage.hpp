#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "covlab/decision.hpp"
#include "covlab/model.hpp"
#include "covlab/rng.hpp"

namespace covlab {

struct Provenance {
  std::string process;
  std::uint64_t replication = 0;
  std::uint64_t seed = 0;
};

/// A confidence region: a subset of model labels, in Theta order.
struct Region {
  std::vector<Label> labels;
  Provenance provenance;

  bool contains(const Label& label) const;
  bool contains_all(std::span<const Label> labels) const;
};

enum class CoverageMode { set_coverage, point_coverage };

std::string_view to_string(CoverageMode mode);

/// Randomized region that realizes a prescribed coverage exactly.
///
/// set_coverage: with probability alpha exactly one identified label is
/// dropped. Without drop_probs the dropped label is uniform; with drop_probs
/// entry p_l is the probability that label l is the one dropped, and the
/// entries must sum to alpha.
///
/// point_coverage: each identified label is dropped independently, with
/// probability alpha or, when drop_probs is set, with its listed probability
/// (each <= alpha; unlisted labels are never dropped).
struct SyntheticRegionSpec {
  double alpha = 0.05;
  CoverageMode mode = CoverageMode::set_coverage;
  std::vector<std::pair<Label, double>> drop_probs;
};

struct SampleSpec {
  std::uint64_t n = 1;
  std::uint64_t seed = 0;
};

// Multinomial counts of size n over the cells of `probs`.
std::vector<std::uint64_t> draw_multinomial(std::span<const double> probs, std::uint64_t n, Rng& rng);

std::vector<std::uint64_t> draw_sample(const ObservableMarginal& p_x, const SampleSpec& spec);

Region synthetic_region(std::span<const Label> theta_I, std::span<const Label> all_labels,
                        const SyntheticRegionSpec& spec, Rng& rng);

// One possible realization of a synthetic process: the identified labels it
// drops and the probability of that outcome.
struct SyntheticOutcome {
  std::vector<Label> dropped;
  double probability = 0.0;
};

/// Full distribution of the dropped set. Outcomes with zero probability are
/// omitted; probabilities sum to one.
std::vector<SyntheticOutcome> enumerate_synthetic(std::span<const Label> theta_I,
                                                  const SyntheticRegionSpec& spec);

/// Pearson chi-square statistic of `counts` against the model's implied
/// X-marginal. A positive count on a zero-probability cell gives +infinity.
double marginal_test_statistic(const Model& m, std::span<const std::uint64_t> counts, std::uint64_t n);
double marginal_test_statistic(std::span<const double> q, std::span<const std::uint64_t> counts,
                               std::uint64_t n);

inline constexpr std::size_t kDefaultReferenceDraws = 2000;

/// Monte Carlo randomized p-value of an observed chi-square statistic:
/// (#{reference > observed} + u * (1 + #{reference == observed})) / (M + 1)
/// over M multinomial resamples of size n under q. Exactly uniform under the
/// null for any M.
double randomized_p_value(std::span<const double> q, double observed, std::uint64_t n, double u,
                          std::size_t reference_draws, Rng& reference_rng);

enum class Randomization { shared, independent };

std::string_view to_string(Randomization r);

struct TestInversionOptions {
  double alpha = 0.05;
  Randomization randomization = Randomization::shared;
  std::size_t reference_draws = kDefaultReferenceDraws;
};

/// Region of candidate models whose marginal test is not rejected at level
/// alpha (kept iff p-value > alpha).
///
/// shared: one uniform and one reference resample set per distinct implied
/// marginal, so models with equal marginals are kept or dropped together.
/// independent: each model draws its own uniform and its own reference set.
/// `candidates` defaults to every model of the problem.
Region test_inversion_region(const DecisionProblem& p, std::span<const std::uint64_t> counts,
                             std::uint64_t n, const TestInversionOptions& options, Rng& rng,
                             std::span<const Label> candidates = {});

struct Estimate {
  double rate = 0.0;
  double std_error = 0.0;
};

// rate with binomial standard error sqrt(p(1-p)/R).
Estimate binomial_estimate(std::uint64_t hits, std::uint64_t trials);

struct CoverageReport {
  std::uint64_t replications = 0;
  Estimate set;
  std::vector<std::pair<Label, Estimate>> point;

  const Estimate& point_of(const Label& label) const;
};

using RegionProcess = std::function<Region(std::uint64_t replication, Rng& rng)>;

/// Monte Carlo estimate of set coverage P(theta_I in region) and point
/// coverage P(theta in region) for each theta in theta_I. Replication r uses
/// the substream Rng::substream(seed, r).
CoverageReport estimate_coverage(const RegionProcess& process, std::span<const Label> theta_I,
                                 std::uint64_t replications, std::uint64_t seed);

}  // namespace covlab

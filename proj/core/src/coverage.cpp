#include "covlab/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "covlab/error.hpp"

namespace covlab {
namespace {

constexpr std::size_t kMaxEnumeratedLabels = 20;

// Draws multinomial vectors of fixed size n under fixed cell probabilities
// by sequential conditional binomials. The first cell's distribution is
// fixed and precomputed.
class MultinomialSampler {
 public:
  using binomial = std::binomial_distribution<std::uint64_t>;

  MultinomialSampler(std::span<const double> probs, std::uint64_t n)
      : probs_(probs.begin(), probs.end()), n_(n) {
    tail_.resize(probs_.size() + 1, 0.0);
    for (std::size_t i = probs_.size(); i-- > 0;) tail_[i] = tail_[i + 1] + probs_[i];
    if (!probs_.empty()) first_ = binomial(n_, conditional(0));
  }

  void draw(Rng& rng, std::vector<std::uint64_t>& counts) {
    counts.assign(probs_.size(), 0);
    if (probs_.empty()) return;
    std::uint64_t left = n_;
    for (std::size_t i = 0; i + 1 < probs_.size() && left > 0; ++i) {
      const double p = conditional(i);
      std::uint64_t c = 0;
      if (p >= 1.0) {
        c = left;
      } else if (p > 0.0) {
        c = (i == 0) ? first_(rng.engine()) : binomial(left, p)(rng.engine());
      }
      counts[i] = c;
      left -= c;
    }
    counts.back() += left;
  }

 private:
  double conditional(std::size_t i) const {
    if (tail_[i] <= 0.0) return 0.0;
    return std::clamp(probs_[i] / tail_[i], 0.0, 1.0);
  }

  std::vector<double> probs_;
  std::vector<double> tail_;
  std::uint64_t n_;
  binomial first_;
};

bool same_statistic(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b));
}

void validate_synthetic(std::span<const Label> theta_I, std::span<const Label> all_labels,
                        const SyntheticRegionSpec& spec) {
  if (theta_I.empty()) throw InvalidInput("synthetic region: identified set is empty");
  if (!(spec.alpha >= 0.0 && spec.alpha < 1.0)) {
    throw InvalidInput("synthetic region: alpha must lie in [0, 1)");
  }
  for (const auto& l : theta_I) {
    if (std::find(all_labels.begin(), all_labels.end(), l) == all_labels.end()) {
      throw InvalidInput("synthetic region: identified label '" + l + "' is not a model label");
    }
  }
  double total = 0.0;
  std::set<Label> seen;
  for (const auto& [label, p] : spec.drop_probs) {
    if (std::find(theta_I.begin(), theta_I.end(), label) == theta_I.end()) {
      throw InvalidInput("drop_probs: label '" + label + "' is not in the identified set");
    }
    if (!seen.insert(label).second) throw InvalidInput("drop_probs: duplicate label '" + label + "'");
    if (!(p >= 0.0 && p <= spec.alpha)) {
      throw InvalidInput("drop_probs: probability for '" + label + "' must lie in [0, alpha]");
    }
    total += p;
  }
  if (spec.mode == CoverageMode::set_coverage && !spec.drop_probs.empty() &&
      std::fabs(total - spec.alpha) > kProbabilityTolerance) {
    throw InvalidInput("drop_probs: set-coverage drop probabilities must sum to alpha");
  }
}

// Per-label drop probability (point coverage) or exclusive drop probability
// (set coverage), aligned with theta_I.
std::vector<double> drop_table(std::span<const Label> theta_I, const SyntheticRegionSpec& spec) {
  std::vector<double> probs(theta_I.size(), 0.0);
  if (spec.drop_probs.empty()) {
    const double each = spec.mode == CoverageMode::point_coverage
                            ? spec.alpha
                            : spec.alpha / static_cast<double>(theta_I.size());
    std::fill(probs.begin(), probs.end(), each);
    return probs;
  }
  for (const auto& [label, p] : spec.drop_probs) {
    const auto it = std::find(theta_I.begin(), theta_I.end(), label);
    probs[static_cast<std::size_t>(it - theta_I.begin())] = p;
  }
  return probs;
}

std::vector<Label> remove_labels(std::span<const Label> all_labels, const std::vector<Label>& dropped) {
  std::vector<Label> out;
  out.reserve(all_labels.size());
  for (const auto& l : all_labels) {
    if (std::find(dropped.begin(), dropped.end(), l) == dropped.end()) out.push_back(l);
  }
  return out;
}

}  // namespace

bool Region::contains(const Label& label) const {
  return std::find(labels.begin(), labels.end(), label) != labels.end();
}

bool Region::contains_all(std::span<const Label> wanted) const {
  return std::all_of(wanted.begin(), wanted.end(), [&](const Label& l) { return contains(l); });
}

std::string_view to_string(CoverageMode mode) {
  return mode == CoverageMode::set_coverage ? "set_coverage" : "point_coverage";
}

std::string_view to_string(Randomization r) {
  return r == Randomization::shared ? "shared" : "independent";
}

std::vector<std::uint64_t> draw_multinomial(std::span<const double> probs, std::uint64_t n, Rng& rng) {
  MultinomialSampler sampler(probs, n);
  std::vector<std::uint64_t> counts;
  sampler.draw(rng, counts);
  return counts;
}

std::vector<std::uint64_t> draw_sample(const ObservableMarginal& p_x, const SampleSpec& spec) {
  if (spec.n < 1) throw InvalidInput("sample size must be at least 1");
  Rng rng(spec.seed);
  return draw_multinomial(p_x.pmf(), spec.n, rng);
}

Region synthetic_region(std::span<const Label> theta_I, std::span<const Label> all_labels,
                        const SyntheticRegionSpec& spec, Rng& rng) {
  validate_synthetic(theta_I, all_labels, spec);
  const auto probs = drop_table(theta_I, spec);
  std::vector<Label> dropped;
  if (spec.mode == CoverageMode::set_coverage) {
    const double u = rng.uniform();
    double edge = 0.0;
    for (std::size_t i = 0; i < theta_I.size(); ++i) {
      edge += probs[i];
      if (u < edge) {
        dropped.push_back(theta_I[i]);
        break;
      }
    }
  } else {
    for (std::size_t i = 0; i < theta_I.size(); ++i) {
      if (rng.uniform() < probs[i]) dropped.push_back(theta_I[i]);
    }
  }
  Region region;
  region.labels = remove_labels(all_labels, dropped);
  region.provenance.process = "synthetic:" + std::string(to_string(spec.mode));
  return region;
}

std::vector<SyntheticOutcome> enumerate_synthetic(std::span<const Label> theta_I,
                                                  const SyntheticRegionSpec& spec) {
  validate_synthetic(theta_I, theta_I, spec);
  const auto probs = drop_table(theta_I, spec);
  std::vector<SyntheticOutcome> out;
  if (spec.mode == CoverageMode::set_coverage) {
    const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
    if (1.0 - total > 0.0) out.push_back({{}, 1.0 - total});
    for (std::size_t i = 0; i < theta_I.size(); ++i) {
      if (probs[i] > 0.0) out.push_back({{theta_I[i]}, probs[i]});
    }
    return out;
  }
  if (theta_I.size() > kMaxEnumeratedLabels) {
    throw InvalidInput("enumerate_synthetic: identified set too large to enumerate");
  }
  const std::uint64_t subsets = std::uint64_t{1} << theta_I.size();
  for (std::uint64_t mask = 0; mask < subsets; ++mask) {
    SyntheticOutcome o;
    o.probability = 1.0;
    for (std::size_t i = 0; i < theta_I.size(); ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        o.dropped.push_back(theta_I[i]);
        o.probability *= probs[i];
      } else {
        o.probability *= 1.0 - probs[i];
      }
    }
    if (o.probability > 0.0) out.push_back(std::move(o));
  }
  return out;
}

double marginal_test_statistic(std::span<const double> q, std::span<const std::uint64_t> counts,
                               std::uint64_t n) {
  if (q.size() != counts.size()) {
    throw InvalidInput("counts table does not match the number of observable values");
  }
  if (std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) != n || n < 1) {
    throw InvalidInput("counts must sum to a positive sample size n");
  }
  const double nd = static_cast<double>(n);
  double stat = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double expected = nd * q[i];
    const double c = static_cast<double>(counts[i]);
    if (expected <= 0.0) {
      if (counts[i] > 0) return std::numeric_limits<double>::infinity();
      continue;
    }
    stat += (c - expected) * (c - expected) / expected;
  }
  return stat;
}

double marginal_test_statistic(const Model& m, std::span<const std::uint64_t> counts, std::uint64_t n) {
  return marginal_test_statistic(implied_marginal(m).pmf(), counts, n);
}

double randomized_p_value(std::span<const double> q, double observed, std::uint64_t n, double u,
                          std::size_t reference_draws, Rng& reference_rng) {
  MultinomialSampler sampler(q, n);
  std::vector<std::uint64_t> counts;
  std::size_t greater = 0;
  std::size_t ties = 0;
  for (std::size_t k = 0; k < reference_draws; ++k) {
    sampler.draw(reference_rng, counts);
    const double s = marginal_test_statistic(q, counts, n);
    if (same_statistic(s, observed)) {
      ++ties;
    } else if (s > observed) {
      ++greater;
    }
  }
  return (static_cast<double>(greater) + u * static_cast<double>(1 + ties)) /
         static_cast<double>(reference_draws + 1);
}

Region test_inversion_region(const DecisionProblem& p, std::span<const std::uint64_t> counts,
                             std::uint64_t n, const TestInversionOptions& options, Rng& rng,
                             std::span<const Label> candidates) {
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw InvalidInput("test inversion: alpha must lie in (0, 1)");
  }
  if (options.reference_draws < 1) throw InvalidInput("test inversion: reference_draws must be >= 1");
  const std::vector<Label> all = p.theta().labels();
  if (candidates.empty()) candidates = all;

  Region region;
  region.provenance.process = "test_inversion:" + std::string(to_string(options.randomization));

  if (options.randomization == Randomization::shared) {
    const double u = rng.uniform_open();
    std::map<std::vector<double>, double> p_values;
    for (const auto& label : candidates) {
      const auto q = implied_marginal(p.theta().at(label)).pmf();
      auto it = p_values.find(q);
      if (it == p_values.end()) {
        const double stat = marginal_test_statistic(q, counts, n);
        it = p_values.emplace(q, randomized_p_value(q, stat, n, u, options.reference_draws, rng)).first;
      }
      if (it->second > options.alpha) region.labels.push_back(label);
    }
  } else {
    for (const auto& label : candidates) {
      const auto q = implied_marginal(p.theta().at(label)).pmf();
      const double stat = marginal_test_statistic(q, counts, n);
      const double u = rng.uniform_open();
      if (randomized_p_value(q, stat, n, u, options.reference_draws, rng) > options.alpha) {
        region.labels.push_back(label);
      }
    }
  }
  return region;
}

Estimate binomial_estimate(std::uint64_t hits, std::uint64_t trials) {
  if (trials == 0) throw InvalidInput("binomial_estimate: zero trials");
  Estimate e;
  e.rate = static_cast<double>(hits) / static_cast<double>(trials);
  e.std_error = std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(trials));
  return e;
}

const Estimate& CoverageReport::point_of(const Label& label) const {
  for (const auto& [l, e] : point) {
    if (l == label) return e;
  }
  throw InvalidInput("no point coverage recorded for '" + label + "'");
}

CoverageReport estimate_coverage(const RegionProcess& process, std::span<const Label> theta_I,
                                 std::uint64_t replications, std::uint64_t seed) {
  if (replications < 1) throw InvalidInput("replications must be at least 1");
  std::uint64_t set_hits = 0;
  std::vector<std::uint64_t> point_hits(theta_I.size(), 0);
  for (std::uint64_t r = 0; r < replications; ++r) {
    Rng rng = Rng::substream(seed, r);
    const Region region = process(r, rng);
    bool all = true;
    for (std::size_t i = 0; i < theta_I.size(); ++i) {
      if (region.contains(theta_I[i])) {
        ++point_hits[i];
      } else {
        all = false;
      }
    }
    if (all) ++set_hits;
  }
  CoverageReport report;
  report.replications = replications;
  report.set = binomial_estimate(set_hits, replications);
  for (std::size_t i = 0; i < theta_I.size(); ++i) {
    report.point.emplace_back(theta_I[i], binomial_estimate(point_hits[i], replications));
  }
  return report;
}

}  // namespace covlab

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "covlab/coverage.hpp"
#include "covlab/decision.hpp"

namespace covlab {

enum class ProcessKind { synthetic, test_inversion };

std::string_view to_string(ProcessKind kind);

/// How one of the two confidence regions is produced.
struct ProcessSpec {
  ProcessKind kind = ProcessKind::synthetic;
  // synthetic only
  std::vector<std::pair<Label, double>> drop_probs;
  // test_inversion only
  std::uint64_t n = 1000;
  std::optional<Randomization> randomization;  // default: shared for SC, independent for PC
  std::size_t reference_draws = kDefaultReferenceDraws;
};

struct ExperimentConfig {
  explicit ExperimentConfig(DecisionProblem p) : problem(std::move(p)) {}

  DecisionProblem problem;
  // Set when the problem is the built-in example; echoed in reports.
  std::optional<double> paper_example_benefit;
  Rule rule = Rule::maxmin;
  ProcessSpec sc;
  ProcessSpec pc;
  double alpha = 0.05;
  std::uint64_t replications = 10000;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  bool keep_records = true;
};

// Validates ranges and cross-field consistency; throws InvalidInput.
void validate(const ExperimentConfig& cfg);

/// What one rule did with one region in one replication.
struct RegionChoice {
  std::vector<Label> region;
  bool covers_identified = false;
  // Empty when the region was empty (degenerate replication).
  std::optional<Label> chosen;
  double region_min = 0.0;
  double identified_min = 0.0;
  bool violation = false;

  bool degenerate() const { return !chosen.has_value(); }
};

struct ReplicationRecord {
  std::uint64_t index = 0;
  RegionChoice sc;
  RegionChoice pc;
};

/// Aggregates for one region process under the configured rule.
///
/// Action frequencies are shares of all replications; degenerate
/// replications choose no action, so frequencies plus degenerate_rate sum
/// to one. An empty region counts as a guarantee violation.
struct ProcessSummary {
  std::string process;
  Estimate set_coverage;
  std::vector<std::pair<Label, Estimate>> point_coverage;
  std::vector<std::pair<Label, double>> action_frequency;
  Estimate violation_rate;
  Estimate degenerate_rate;
  std::uint64_t degenerate_count = 0;
  // Means over non-degenerate replications.
  double mean_identified_min = 0.0;
  double mean_region_min = 0.0;

  double frequency_of(const Label& action) const;
  const Estimate& point_of(const Label& label) const;
};

struct ExperimentReport {
  bool exact = false;
  std::uint64_t replications = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  Rule rule = Rule::maxmin;
  std::vector<Label> identified;
  std::vector<Label> admissible;
  ProcessSummary sc;
  ProcessSummary pc;
  std::vector<ReplicationRecord> records;
};

/// Monte Carlo replication engine. Replication r draws from substreams of
/// (seed, r), so the report does not depend on `threads`.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Closed-form counterpart of run_experiment for synthetic processes:
/// enumerates every joint region outcome with its probability. Standard
/// errors are zero. Throws InvalidInput for test-inversion processes.
ExperimentReport exact_analysis(const ExperimentConfig& cfg);

// Recomputes a summary from stored records (used to check report consistency).
ProcessSummary summarize_records(const ExperimentReport& report, bool pc, const DecisionProblem& p);

}  // namespace covlab

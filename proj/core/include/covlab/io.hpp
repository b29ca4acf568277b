#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "covlab/coverage.hpp"
#include "covlab/decision.hpp"
#include "covlab/experiment.hpp"

namespace covlab {

inline constexpr std::string_view kToolVersion = "0.3.0";

/// Problem file (JSON):
///   x_values, eps_values : label lists
///   models               : {label: row-major probabilities}, order preserved
///   p_x                  : probabilities over x_values
///   restrictions         : [{type: "latent_marginal_eq", eps: label, value: real}]
///   actions              : {label: row-major outcomes}, order preserved
///   tol                  : nonnegative real (optional, default 0)
/// Unknown keys are rejected. Errors name the offending field.
DecisionProblem parse_problem(std::string_view json_text);
DecisionProblem load_problem(const std::filesystem::path& path);
std::string dump_problem(const DecisionProblem& p);

/// Experiment config file (JSON): problem ("paper_example" or inline
/// problem object), B, rule, alpha, R, seed, threads, sc_process, pc_process.
/// Process objects: {type: "synthetic", drop_probs?: {label: p}} or
/// {type: "test_inversion", n, randomization?, reference_draws?}.
/// Relative problem paths resolve against `base_dir`.
ExperimentConfig parse_experiment_config(std::string_view json_text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

std::string config_json(const ExperimentConfig& cfg);

// Summary JSON: report fields, tool version and config echo.
std::string summary_json(const ExperimentReport& report, const ExperimentConfig& cfg);

// Header: rep,process,region_labels,rule,chosen_action,region_min,identified_min,violation
std::string records_csv(const ExperimentReport& report);

std::string coverage_json(const CoverageReport& report);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

void write_file(const std::filesystem::path& path, std::string_view contents);  // throws IoError
std::string read_file(const std::filesystem::path& path);                       // throws IoError

}  // namespace covlab

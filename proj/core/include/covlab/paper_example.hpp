#pragma once

#include "covlab/decision.hpp"

namespace covlab {

/// Gender/talent planning problem with benefit `benefit` per correct call.
///
/// States are {F, M} x {T, N}. Models: theta1 (all talent male), theta2 (all
/// talent female), theta3 (everyone talented), theta4 (no one talented).
/// P_X is uniform and half the population is talented. Actions offer an
/// opportunity to women only (a1), men only (a2) or everyone (a3): offering
/// to a talented person earns +B, to a not-so-talented person -B, withholding
/// from a talented person -B and from a not-so-talented person 0.
DecisionProblem paper_example(double benefit = 1.0);

}  // namespace covlab

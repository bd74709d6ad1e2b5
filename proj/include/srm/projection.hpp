#pragma once

#include <Eigen/Dense>

namespace srm {

/// Exact Euclidean projection of y onto {f in R^3 : f >= 0, g . f = target},
/// by enumerating the candidate active sets of the nonnegativity constraints
/// and keeping the feasible point closest to y.
/// Throws InfeasibleError when the set is empty (no coil gain with the sign
/// of the target).
Eigen::Vector3d project_feasible(const Eigen::Vector3d& y, const Eigen::Vector3d& g,
                                 double target);

/// Closed-form minimizer of sum(f) over {f >= 0, g . f = target}: the whole
/// load goes to the coil with the largest gain of matching sign, ties broken
/// by lowest coil index.
Eigen::Vector3d per_point_lp(const Eigen::Vector3d& g, double target);

}  // namespace srm

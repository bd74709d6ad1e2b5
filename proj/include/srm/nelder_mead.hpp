#pragma once

#include <Eigen/Dense>
#include <functional>

namespace srm {

struct NelderMeadResult {
    Eigen::VectorXd x;
    double value = 0;
    int evaluations = 0;
    bool converged = false;
};

/// Deterministic Nelder-Mead minimization. The start simplex is the start
/// point plus one vertex per coordinate offset by `step`; ordering ties are
/// broken by vertex index, so reruns are bitwise identical. Stops when the
/// max-norm simplex diameter drops below `diameter_tol` or the evaluation
/// budget runs out.
NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, double step,
                             double diameter_tol, int max_evaluations);

}  // namespace srm

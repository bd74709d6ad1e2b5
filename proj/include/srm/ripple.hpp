#pragma once

#include <optional>
#include <vector>

#include "srm/commutation.hpp"
#include "srm/kernels.hpp"
#include "srm/motor_model.hpp"
#include "srm/projection.hpp"

namespace srm {

/// Uniform electrical grid of N angles, theta_i = -pi + 2*pi*i/N.
std::vector<double> build_grid(int n_points);

/// v = 2*pi / (n_teeth * N * Ts): one grid point advance per control sample.
double nominal_velocity(int n_teeth, int n_points, double sample_period);

/// Assembled data of the commutation synthesis program: the subsample gain
/// rows (N*M regular rows plus one wrap row back to grid point 0), the grid
/// gains carrying the equality constraints, and the scalarization weight.
struct RippleProblem {
    const TorqueGainModel* model = nullptr;
    int n_points = 0;      // N
    int subsamples = 0;    // M
    double beta = 0;       // ripple weight
    double sample_period = 0;
    double target = 1.0;   // requested torque sign (+1 or -1)
    double velocity = 0;   // nominal velocity, rad/s

    std::vector<double> grid_theta_e;  // N
    RowMat3 grid_gains;                // N x 3
    RowMat3 rows;                      // (N*M + 1) x 3
};

RippleProblem assemble(const TorqueGainModel& model, int n_points, int subsamples,
                       double beta, double sample_period, double target = 1.0);

struct SolveSettings {
    double obj_rel_tol = 1e-10;  // windowed relative objective decrease
    int obj_window = 20;
    // unit-step gradient mapping norm relative to the gradient norm; the
    // absolute mapping norm floors near sqrt(eps * curvature) in doubles,
    // so the stationarity test is scale-relative
    double pg_tol = 1e-6;
    double eq_tol = 1e-10;       // max |g_i . f_i - target|
    long max_iters = 400000;
    Exec exec = Exec::parallel;
};

struct RippleSolution {
    Eigen::MatrixX3d table;   // N x 3 optimal values, >= 0
    double objective = 0;     // power_l1 + beta * ripple_norm
    double power_l1 = 0;      // sum of all entries
    double ripple_norm = 0;   // || A F - target ||_2
    double eq_residual = 0;   // max_i |g_i . f_i - target|
    double pg_norm = 0;       // relative projected-gradient measure at the solution
    long iterations = 0;
};

/// Deterministic projected spectral-gradient solve of
///   min  sum(F) + beta * ||A F - target||_2   over the product of
///   per-point polytopes {f_i >= 0, g_i . f_i = target}.
/// Alternating Barzilai-Borwein steps propose a projected candidate; an exact
/// closed-form line search along the feasible segment keeps descent monotone.
/// The norm term stays smooth along the path because sampled-data ripple
/// cannot vanish. Warm-startable; identical output for any thread count.
/// Throws InfeasibleError if any grid point is infeasible and NumericError
/// if the iteration cap is hit before the stopping criteria are met.
RippleSolution solve(const RippleProblem& problem, const SolveSettings& settings = {},
                     const Eigen::MatrixX3d* warm_start = nullptr);

}  // namespace srm

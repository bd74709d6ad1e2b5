#pragma once

#include <Eigen/Dense>
#include <vector>

#include "srm/commutation.hpp"
#include "srm/kernels.hpp"
#include "srm/motor_model.hpp"

namespace srm {

/// Matern covariance parameters. mu is the mean-square differentiability
/// order of the sample paths (smoothness index, integer, not optimized).
struct MaternSpec {
    int mu = 3;
    double length_scale = 1.0;  // ell > 0
    double signal_var = 1.0;    // sigma_f^2 > 0
};

/// Maps an angle onto the unit circle so covariances become periodic:
/// x = [sin(2*pi*phi/p), cos(2*pi*phi/p)].
struct PeriodicWarp {
    double period = kTwoPi;  // p > 0, rad

    Eigen::Vector2d operator()(double phi) const
    {
        const double u = kTwoPi * std::remainder(phi, period) / period;
        return {std::sin(u), std::cos(u)};
    }
};

Eigen::Vector2d warp(double phi, double period);

/// Matern kernel on the chordal distance rho = |x - x'|/ell:
/// sigma_f^2 * exp(-sqrt(2mu+1) rho) * poly_mu(rho). Exactly sigma_f^2 at
/// coincident inputs.
double matern(const Eigen::Vector2d& x, const Eigen::Vector2d& xp,
              const MaternSpec& spec);
/// Same kernel from the unscaled chordal distance |x - x'|.
double matern_from_distance(double distance, const MaternSpec& spec);

/// Gram matrix of warped angles: symmetric, diagonal exactly sigma_f^2, PSD.
Eigen::MatrixXd gram(const std::vector<double>& phis, const MaternSpec& spec,
                     const PeriodicWarp& warp, Exec exec = default_exec());

struct FitWeights {
    Eigen::VectorXd alpha;
    double jitter = 0;  // diagonal boost needed to factorize, 0 when clean
};

/// alpha solving (K + sigma_n^2 I) alpha = targets via an SPD factorization.
/// On factorization failure the diagonal is boosted from 1e-12*sigma_f^2 in
/// decade steps up to 1e-6*sigma_f^2; past that an ill-conditioning error is
/// thrown with a condition estimate.
FitWeights fit_weights(const Eigen::VectorXd& targets, const Eigen::MatrixXd& k,
                       double sigma_n2);

/// Log marginal likelihood
///   -1/2 F' (K + sigma_n^2 I)^-1 F - 1/2 logdet(K + sigma_n^2 I) - N/2 log(2 pi),
/// computed through the same factorization path as fit_weights.
double log_marginal(const Eigen::VectorXd& targets, const Eigen::MatrixXd& k,
                    double sigma_n2);
double log_marginal(const Eigen::VectorXd& targets, const std::vector<double>& phis,
                    const MaternSpec& spec, double sigma_n2, const PeriodicWarp& warp);

struct Hyperparams {
    double length_scale = 1.0;
    double signal_var = 1.0;
    double noise_var = 1.0;
    double log_marginal = 0.0;
};

struct HyperSearchOptions {
    int mu = 3;
    std::vector<double> ell_factors{0.1, 1.0, 10.0};    // times mean warped spacing
    std::vector<double> sf2_factors{0.1, 1.0, 10.0};    // times target variance
    std::vector<double> sn2_factors{1e-6, 1e-4, 1e-2};  // times target variance
    double log_bound_lo = 1e-10;
    double log_bound_hi = 1e10;
    double diameter_tol = 1e-8;  // log-space simplex diameter
    int max_evaluations = 2000;  // per start
    Exec exec = default_exec();
};

/// Maximizes the log marginal likelihood over (log ell, log sigma_f^2,
/// log sigma_n^2) with mu fixed, by Nelder-Mead from a fixed 3x3x3 start grid
/// scaled to the data. Deterministic: reruns are bitwise identical.
Hyperparams optimize_hyperparams(const Eigen::VectorXd& targets,
                                 const std::vector<double>& circle_angles,
                                 const HyperSearchOptions& options = {});

/// Nonnegativity clamp applied to GP posterior shares.
inline double clamp_share(double value) { return value > 0.0 ? value : 0.0; }

/// One fitted coil: kernel spec, noise level and representer weights over the
/// shared training angles.
struct GpCoil {
    MaternSpec spec;
    double sigma_n2 = 0;
    Eigen::VectorXd alpha;
};

struct GpFitDiagnostics {
    double log_marginal = 0;
    double max_interp_error = 0;   // max |predict(theta_i) - target_i|
    double max_clamp = 0;          // largest negative excursion clamped away
    bool clamp_flagged = false;    // clamp exceeded 1e-6 * max |target|
    double jitter = 0;
    int evaluations = 0;
};

/// Continuous periodic commutation function: per coil and torque sign, a GP
/// posterior mean through the optimal table, clamped at zero. Immutable;
/// concurrent prediction is safe.
class GpCommutation : public CommutationFunction {
public:
    GpCommutation(MotorGeometry geometry, std::vector<double> train_theta_e,
                  std::array<GpCoil, 3> pos, std::array<GpCoil, 3> neg);

    Vec3 shares_pos(double phi) const override;
    Vec3 shares_neg(double phi) const override;
    double period() const override { return geometry_.spatial_period(); }

    /// Unclamped posterior mean for one coil; sign = +1 picks the positive
    /// torque table's GP, -1 the negative one.
    double predict(double phi, int coil, double sign) const;
    /// Same from an electrical angle (used for grid-aligned queries).
    double predict_electrical(double theta_e, int coil, double sign) const;

    const MotorGeometry& geometry() const { return geometry_; }
    const std::vector<double>& train_theta_e() const { return train_theta_; }
    const GpCoil& coil(int c, double sign) const
    {
        return sign >= 0 ? pos_[c] : neg_[c];
    }

private:
    MotorGeometry geometry_;
    std::vector<double> train_theta_;       // electrical angles
    std::vector<Eigen::Vector2d> train_x_;  // warped training points
    std::array<GpCoil, 3> pos_;
    std::array<GpCoil, 3> neg_;
};

/// Batch posterior evaluation over many angles (parallel map).
void predict_batch(const GpCommutation& gp, int coil, double sign,
                   const std::vector<double>& phis, Eigen::VectorXd& out,
                   Exec exec = default_exec());

/// Fits one GP per coil through a table's columns: hyperparameter search,
/// weight solve and diagnostics (interpolation error at the grid, clamp size
/// on a dense probe).
std::array<GpCoil, 3> fit_table_gps(const CommutationTable& table,
                                    const HyperSearchOptions& options,
                                    std::array<GpFitDiagnostics, 3>* diagnostics);

}  // namespace srm

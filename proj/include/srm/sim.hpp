#pragma once

#include <Eigen/Dense>
#include <vector>

#include "srm/commutation.hpp"
#include "srm/motor_model.hpp"

namespace srm {

/// Continuous-time plant 1/(s(s+1)): state [position; velocity], torque input.
struct Plant {
    Eigen::Matrix2d a;
    Eigen::Vector2d b;
    Eigen::RowVector2d c;

    Plant()
    {
        a << 0.0, 1.0, 0.0, -1.0;
        b << 0.0, 1.0;
        c << 1.0, 0.0;
    }
};

/// The 1 kHz position controller
///   C(z) = (6.72e5 z^2 - 1.1e6 z + 4.51e5) / ((z - 1)(z - 0.0296))
/// run as the direct-form difference equation with zero initial states.
class DiscreteController {
public:
    static constexpr double kSampleRate = 1000.0;  // Hz
    static constexpr double kSamplePeriod = 1.0 / kSampleRate;

    double step(double error);
    void reset();

private:
    double e1_ = 0, e2_ = 0;  // previous errors
    double y1_ = 0, y2_ = 0;  // previous outputs
};

/// Second-order motion profile in mechanical radians: constant acceleration
/// over 5 tooth pitches, constant velocity over 15 more, then hold.
struct ReferenceProfile {
    double velocity = 0;        // rad/s at cruise
    double accel_distance = 0;  // rad (5 teeth)
    double cruise_distance = 0; // rad (15 teeth)
    double acceleration = 0;    // velocity^2 / (2 * accel_distance)
    double t_accel = 0;         // end of the acceleration phase
    double t_end = 0;           // end of the cruise phase

    ReferenceProfile(double velocity_rad_s, const MotorGeometry& geometry,
                     double accel_teeth = 5.0, double cruise_teeth = 15.0);

    /// Position and velocity at time t (holds the final position past t_end).
    void at(double t, double& position, double& velocity_out) const;
};

struct SimResult {
    // substep series, uniform at Ts / m_sim
    std::vector<double> time;
    std::vector<double> reference;
    std::vector<double> position;
    std::vector<double> error;         // reference - position
    std::vector<double> torque;        // produced
    std::vector<double> torque_request;// held T* of the containing interval
    std::vector<Vec3> currents_sq;     // held u of the containing interval
    std::vector<double> ripple_rel;    // g(phi(t)) . shares(phi_k) -/+ 1

    // sample-instant series
    std::vector<double> sample_time;
    std::vector<double> sample_error;
    std::vector<double> sample_torque_request;
    std::vector<Vec3> sample_currents_sq;

    double sample_period = 0;
    int m_sim = 0;
    double tooth_time = 0;  // seconds per tooth pitch at cruise
    double t_end = 0;
};

struct SimMetrics {
    double rms_error_last_tooth = 0;  // rad, over the final tooth of cruise
    double rms_abs_ripple = 0;        // Nm, over the same window
    double rel_ripple_norm = 0;       // 2-norm of the substep ripple series
    double energy = 0;                // sum ||u_k||_1 * Ts over all samples
};

/// phi_m = phi - 2*pi*floor((phi + pi) / (2*pi)), in [-pi, pi).
double wrap_relative_angle(double phi);

/// Closed-loop sampled-data simulation: ideal sampler at 1 kHz, discrete
/// controller, commutation of the sampled angle, zero-order hold on the
/// squared currents, RK4 plant integration at Ts/m_sim with the torque gain
/// re-evaluated at every stage. Throws NumericError past |phi| > 1e6 rad.
/// A positive t_limit truncates the horizon before the profile ends (metrics
/// need the full horizon; truncated runs are for focused tests).
SimResult run_closed_loop(const TorqueGainModel& model, const CommutationFunction& f,
                          DiscreteController controller, const ReferenceProfile& profile,
                          int m_sim, double t_limit = 0.0);

/// Open-loop relative ripple at constant velocity: e(t) = g(phi(t)) . u_hold - target
/// evaluated on the N*M + 1 subsample grid, phi(t) = phi0 + v t starting at the
/// first synthesis grid angle. At the nominal velocity with a grid-aligned
/// table this reproduces the optimizer's residual vector entry for entry.
std::vector<double> open_loop_ripple(const TorqueGainModel& model,
                                     const CommutationFunction& f, double velocity,
                                     double sample_period, int n_points,
                                     int subsamples, double target = 1.0);

/// Metrics over a stored run. Rejects series shorter than one tooth of cruise.
SimMetrics metrics(const SimResult& result);

/// RMS of uniformly sampled values over [t_lo, t_hi] by trapezoid weighting.
double rms_window(const std::vector<double>& time, const std::vector<double>& values,
                  double t_lo, double t_hi);

}  // namespace srm

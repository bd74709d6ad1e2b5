#include "srm/sim.hpp"

#include <cmath>
#include <sstream>

#include "srm/angles.hpp"
#include "srm/errors.hpp"
#include "srm/ripple.hpp"

namespace srm {

double DiscreteController::step(double error)
{
    // denominator (z - 1)(z - 0.0296) = z^2 - 1.0296 z + 0.0296: the discrete
    // integrator is load-bearing (it zeroes the cruise-phase ramp error);
    // 1.0296 prints as 1.03 at three significant digits
    const double y = 6.72e5 * error - 1.1e6 * e1_ + 4.51e5 * e2_ + 1.0296 * y1_ -
                     0.0296 * y2_;
    e2_ = e1_;
    e1_ = error;
    y2_ = y1_;
    y1_ = y;
    return y;
}

void DiscreteController::reset() { e1_ = e2_ = y1_ = y2_ = 0.0; }

ReferenceProfile::ReferenceProfile(double velocity_rad_s, const MotorGeometry& geometry,
                                   double accel_teeth, double cruise_teeth)
{
    if (!(velocity_rad_s > 0.0))
        throw ConfigError("ReferenceProfile: velocity must be positive");
    const double p = geometry.spatial_period();
    velocity = velocity_rad_s;
    accel_distance = accel_teeth * p;
    cruise_distance = cruise_teeth * p;
    acceleration = velocity * velocity / (2.0 * accel_distance);
    t_accel = velocity / acceleration;  // = 2 * accel_distance / velocity
    t_end = t_accel + cruise_distance / velocity;
}

void ReferenceProfile::at(double t, double& position, double& velocity_out) const
{
    if (t <= 0.0) {
        position = 0.0;
        velocity_out = 0.0;
    } else if (t < t_accel) {
        position = 0.5 * acceleration * t * t;
        velocity_out = acceleration * t;
    } else if (t < t_end) {
        position = accel_distance + velocity * (t - t_accel);
        velocity_out = velocity;
    } else {
        position = accel_distance + cruise_distance;
        velocity_out = 0.0;
    }
}

double wrap_relative_angle(double phi) { return wrap_relative(phi); }

namespace {

// plant derivative with the held squared currents: x' = A x + B (g(x1) . u)
inline Eigen::Vector2d plant_rhs(const TorqueGainModel& model,
                                 const Eigen::Vector2d& x, const Vec3& u)
{
    const double torque = model.eval(x[0]).dot(u);
    return Eigen::Vector2d(x[1], -x[1] + torque);
}

}  // namespace

SimResult run_closed_loop(const TorqueGainModel& model, const CommutationFunction& f,
                          DiscreteController controller, const ReferenceProfile& profile,
                          int m_sim, double t_limit)
{
    if (m_sim < 1) throw ConfigError("run_closed_loop: m_sim must be >= 1");
    const double ts = DiscreteController::kSamplePeriod;
    const double h = ts / m_sim;
    const double horizon =
        t_limit > 0.0 ? std::min(t_limit, profile.t_end) : profile.t_end;
    const long n_samples = static_cast<long>(std::ceil(horizon / ts - 1e-9));

    SimResult out;
    out.sample_period = ts;
    out.m_sim = m_sim;
    out.tooth_time = model.geometry().spatial_period() / profile.velocity;
    out.t_end = profile.t_end;
    const size_t n_sub = static_cast<size_t>(n_samples) * m_sim + 1;
    out.time.reserve(n_sub);
    out.reference.reserve(n_sub);
    out.position.reserve(n_sub);
    out.error.reserve(n_sub);
    out.torque.reserve(n_sub);
    out.torque_request.reserve(n_sub);
    out.currents_sq.reserve(n_sub);
    out.ripple_rel.reserve(n_sub);

    Eigen::Vector2d x = Eigen::Vector2d::Zero();
    double r = 0, rdot = 0;

    auto push_substep = [&](double t, const Vec3& u, double t_request,
                            const Vec3& shares, double sign) {
        profile.at(t, r, rdot);
        const double phi = x[0];
        out.time.push_back(t);
        out.reference.push_back(r);
        out.position.push_back(phi);
        out.error.push_back(r - phi);
        out.torque.push_back(model.eval(phi).dot(u));
        out.torque_request.push_back(t_request);
        out.currents_sq.push_back(u);
        // relative ripple from the held shares; sign-aware so it vanishes
        // exactly when the commutation linearizes g
        out.ripple_rel.push_back(sign * model.eval(phi).dot(shares) - 1.0);
    };

    Vec3 shares_hold = Vec3::Zero(), u_hold = Vec3::Zero();
    double tstar_hold = 0.0, sign_hold = 1.0;

    for (long k = 0; k < n_samples; ++k) {
        const double tk = k * ts;
        profile.at(tk, r, rdot);
        const double phi_k = x[0];
        const double e_k = r - phi_k;
        const double t_star = controller.step(e_k);
        sign_hold = t_star >= 0.0 ? 1.0 : -1.0;
        shares_hold = sign_hold >= 0.0 ? f.shares_pos(phi_k) : f.shares_neg(phi_k);
        u_hold = shares_hold * std::abs(t_star);
        tstar_hold = t_star;

        out.sample_time.push_back(tk);
        out.sample_error.push_back(e_k);
        out.sample_torque_request.push_back(t_star);
        out.sample_currents_sq.push_back(u_hold);

        push_substep(tk, u_hold, t_star, shares_hold, sign_hold);

        for (int m = 0; m < m_sim; ++m) {
            const Eigen::Vector2d k1 = plant_rhs(model, x, u_hold);
            const Eigen::Vector2d k2 = plant_rhs(model, x + 0.5 * h * k1, u_hold);
            const Eigen::Vector2d k3 = plant_rhs(model, x + 0.5 * h * k2, u_hold);
            const Eigen::Vector2d k4 = plant_rhs(model, x + h * k3, u_hold);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            if (m < m_sim - 1)
                push_substep(tk + (m + 1) * h, u_hold, t_star, shares_hold, sign_hold);
        }
        if (std::abs(x[0]) > 1e6)
            throw NumericError("run_closed_loop: position diverged (|phi| > 1e6 rad)");
    }
    // final point still sits in the last hold interval
    push_substep(n_samples * ts, u_hold, tstar_hold, shares_hold, sign_hold);
    return out;
}

std::vector<double> open_loop_ripple(const TorqueGainModel& model,
                                     const CommutationFunction& f, double velocity,
                                     double sample_period, int n_points,
                                     int subsamples, double target)
{
    if (n_points < 1 || subsamples < 1)
        throw ConfigError("open_loop_ripple: need n_points >= 1, subsamples >= 1");
    const double phi0 =
        -(kTwoPi / 2.0) / model.geometry().n_teeth;  // grid angle 0, mechanical
    std::vector<double> ripple;
    ripple.reserve(static_cast<size_t>(n_points) * subsamples + 1);

    const double sign = target >= 0.0 ? 1.0 : -1.0;
    for (int k = 0; k < n_points; ++k) {
        const double phi_sample = phi0 + velocity * (k * sample_period);
        const Vec3 shares = sign >= 0.0 ? f.shares_pos(phi_sample)
                                        : f.shares_neg(phi_sample);
        for (int j = 0; j < subsamples; ++j) {
            const double t = (k + j / (double)subsamples) * sample_period;
            const double phi = phi0 + velocity * t;
            ripple.push_back(sign * model.eval(phi).dot(shares) - 1.0);
        }
    }
    // final entry at t = N*Ts: a fresh sample of the commutation, which at the
    // nominal velocity wraps onto the first grid angle
    {
        const double t = n_points * sample_period;
        const double phi = phi0 + velocity * t;
        const Vec3 shares = sign >= 0.0 ? f.shares_pos(phi) : f.shares_neg(phi);
        ripple.push_back(sign * model.eval(phi).dot(shares) - 1.0);
    }
    return ripple;
}

double rms_window(const std::vector<double>& time, const std::vector<double>& values,
                  double t_lo, double t_hi)
{
    if (time.size() != values.size() || time.size() < 2)
        throw ConfigError("rms_window: need matching series with >= 2 points");
    double acc = 0.0, span = 0.0;
    for (size_t i = 0; i + 1 < time.size(); ++i) {
        const double a = std::max(time[i], t_lo);
        const double b = std::min(time[i + 1], t_hi);
        if (b <= a) continue;
        // trapezoid on the squared signal over the clipped interval
        const double dt_full = time[i + 1] - time[i];
        const double va = values[i] + (values[i + 1] - values[i]) * (a - time[i]) / dt_full;
        const double vb = values[i] + (values[i + 1] - values[i]) * (b - time[i]) / dt_full;
        acc += 0.5 * (va * va + vb * vb) * (b - a);
        span += b - a;
    }
    if (span <= 0.0) throw ConfigError("rms_window: empty window");
    return std::sqrt(acc / span);
}

SimMetrics metrics(const SimResult& result)
{
    if (result.time.empty()) throw ConfigError("metrics: empty series");
    const double t_hi = result.t_end;
    const double t_lo = t_hi - result.tooth_time;
    if (result.time.back() + result.sample_period < t_hi || t_lo < result.time.front())
        throw ConfigError("metrics: series shorter than one tooth of cruise");

    SimMetrics m;
    m.rms_error_last_tooth = rms_window(result.time, result.error, t_lo, t_hi);

    std::vector<double> abs_ripple(result.time.size());
    for (size_t i = 0; i < result.time.size(); ++i)
        abs_ripple[i] = result.torque[i] - result.torque_request[i];
    m.rms_abs_ripple = rms_window(result.time, abs_ripple, t_lo, t_hi);

    double acc = 0.0;
    for (double e : result.ripple_rel) acc += e * e;
    m.rel_ripple_norm = std::sqrt(acc);

    double energy = 0.0;
    for (const Vec3& u : result.sample_currents_sq)
        energy += (u[0] + u[1] + u[2]) * result.sample_period;
    m.energy = energy;
    return m;
}

}  // namespace srm

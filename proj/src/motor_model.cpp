#include "srm/motor_model.hpp"

#include <cmath>
#include <limits>

#include "srm/errors.hpp"

namespace srm {

TorqueGainModel::TorqueGainModel(MotorGeometry geometry,
                                 std::array<std::vector<Harmonic>, 3> coils)
    : geometry_(geometry), coils_(std::move(coils))
{
    if (geometry_.n_teeth < 1)
        throw ConfigError("motor model: n_teeth must be >= 1");
    for (int c = 0; c < 3; ++c)
        for (const Harmonic& h : coils_[c]) {
            if (h.order < 1)
                throw ConfigError("motor model: harmonic order must be >= 1");
            if (!std::isfinite(h.amplitude) || !std::isfinite(h.phase))
                throw ConfigError("motor model: non-finite harmonic parameter");
        }
}

double TorqueGainModel::eval_coil_electrical(double theta_e, int c) const
{
    double g = 0.0;
    for (const Harmonic& h : coils_[c])
        g += h.amplitude * std::sin(h.order * theta_e + h.phase);
    return g;
}

double TorqueGainModel::eval_coil(double phi, int c) const
{
    // reduce mechanically first so phi and phi + p see the same argument
    double phi_m = std::remainder(phi, geometry_.spatial_period());
    return eval_coil_electrical(geometry_.n_teeth * phi_m, c);
}

Vec3 TorqueGainModel::eval(double phi) const
{
    double phi_m = std::remainder(phi, geometry_.spatial_period());
    return eval_electrical(geometry_.n_teeth * phi_m);
}

Vec3 TorqueGainModel::eval_electrical(double theta_e) const
{
    return Vec3(eval_coil_electrical(theta_e, 0),
                eval_coil_electrical(theta_e, 1),
                eval_coil_electrical(theta_e, 2));
}

double TorqueGainModel::torque(double phi, const Vec3& u) const
{
    for (int c = 0; c < 3; ++c)
        if (u[c] < 0.0)
            throw ConfigError("torque: squared currents must be nonnegative");
    return eval(phi).dot(u);
}

namespace {

// Golden-section maximization of f over [lo, hi].
template <typename F>
double golden_max(F f, double lo, double hi)
{
    const double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (fc > fd) {
            b = d; d = c; fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

double TorqueGainModel::argmax_electrical(int c) const
{
    const int n = 4096;
    double best = -std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < n; ++i) {
        double th = -kTwoPi / 2.0 + kTwoPi * i / n;
        double v = eval_coil_electrical(th, c);
        if (v > best) { best = v; best_i = i; }
    }
    double lo = -kTwoPi / 2.0 + kTwoPi * (best_i - 1.0) / n;
    double hi = -kTwoPi / 2.0 + kTwoPi * (best_i + 1.0) / n;
    double th = golden_max([&](double t) { return eval_coil_electrical(t, c); }, lo, hi);
    return wrap_relative(th);
}

double TorqueGainModel::argmin_electrical(int c) const
{
    const int n = 4096;
    double best = std::numeric_limits<double>::infinity();
    int best_i = 0;
    for (int i = 0; i < n; ++i) {
        double th = -kTwoPi / 2.0 + kTwoPi * i / n;
        double v = eval_coil_electrical(th, c);
        if (v < best) { best = v; best_i = i; }
    }
    double lo = -kTwoPi / 2.0 + kTwoPi * (best_i - 1.0) / n;
    double hi = -kTwoPi / 2.0 + kTwoPi * (best_i + 1.0) / n;
    double th = golden_max([&](double t) { return -eval_coil_electrical(t, c); }, lo, hi);
    return wrap_relative(th);
}

ModelValidation TorqueGainModel::validate(double g_min, int n_probe) const
{
    if (n_probe < 1000) n_probe = 1000;
    const double p = geometry_.spatial_period();

    ModelValidation rep;
    rep.g_min = g_min;
    rep.coverage_pos = std::numeric_limits<double>::infinity();
    rep.coverage_neg = -std::numeric_limits<double>::infinity();
    rep.periodicity_residual = 0.0;

    for (int i = 0; i < n_probe; ++i) {
        double phi = p * i / n_probe;
        Vec3 g = eval(phi);
        Vec3 g_shift = eval(phi + p);
        rep.periodicity_residual =
            std::max(rep.periodicity_residual, (g - g_shift).cwiseAbs().maxCoeff());
        rep.coverage_pos = std::min(rep.coverage_pos, g.maxCoeff());
        rep.coverage_neg = std::max(rep.coverage_neg, g.minCoeff());
    }
    rep.coverage_ok = rep.coverage_pos >= g_min && rep.coverage_neg <= -g_min;
    rep.periodicity_ok = rep.periodicity_residual <= 1e-12;
    return rep;
}

TorqueGainModel default_model()
{
    const double third = kTwoPi / 3.0;
    std::array<std::vector<Harmonic>, 3> coils;
    coils[0] = {{1, 1.0, 0.0}};
    coils[1] = {{1, 0.9, 0.1 - third}};
    coils[2] = {{1, 1.1, -0.1 - 2.0 * third}};
    return TorqueGainModel(MotorGeometry{131}, coils);
}

}  // namespace srm

#include "srm/commutation.hpp"

#include <cmath>

#include "srm/errors.hpp"

namespace srm {

Vec3 commute(const CommutationFunction& f, double phi, double torque_request)
{
    if (torque_request >= 0.0)
        return f.shares_pos(phi) * torque_request;
    return f.shares_neg(phi) * (-torque_request);
}

double tsf_rise(TsfKind kind, double x)
{
    if (x < 0.0 || x > 1.0)
        throw ConfigError("tsf_rise: argument outside [0, 1]");
    switch (kind) {
        case TsfKind::sine:   return 0.5 - 0.5 * std::cos(kTwoPi / 2.0 * x);
        case TsfKind::cubic:  return x * x * (3.0 - 2.0 * x);
        case TsfKind::linear: return x;
    }
    return x;
}

double saturate(double x, double a)
{
    if (x > a) return a;
    if (x < -a) return -a;
    return x;
}

ConventionalTsf::ConventionalTsf(const TorqueGainModel& model, TsfKind kind,
                                 double overlap_electrical, double saturation)
    : model_(&model), kind_(kind), overlap_(overlap_electrical), saturation_(saturation)
{
    if (!(overlap_ > 0.0 && overlap_ < kTwoPi / 3.0))
        throw ConfigError("ConventionalTsf: overlap must be in (0, 2*pi/3) electrical");
    if (!(saturation_ > 0.0))
        throw ConfigError("ConventionalTsf: saturation level must be positive");
    // window support is 2*pi/3 + overlap wide, centered on coil 1's gain peak
    const double half_support = kTwoPi / 6.0 + 0.5 * overlap_;
    start_pos_ = model_->argmax_electrical(0) - half_support;
    start_neg_ = model_->argmin_electrical(0) - half_support;
}

double ConventionalTsf::window_at(double theta_e, int c, double start) const
{
    const double third = kTwoPi / 3.0;
    double x = wrap_two_pi(theta_e - third * c - start);
    if (x < overlap_) return tsf_rise(kind_, x / overlap_);
    if (x < third) return 1.0;
    if (x < third + overlap_) return 1.0 - tsf_rise(kind_, (x - third) / overlap_);
    return 0.0;
}

double ConventionalTsf::window(double theta_e, int c) const
{
    return window_at(theta_e, c, start_pos_);
}

double ConventionalTsf::window_neg(double theta_e, int c) const
{
    return window_at(theta_e, c, start_neg_);
}

Vec3 ConventionalTsf::shares_pos(double phi) const
{
    const double p = model_->geometry().spatial_period();
    double phi_m = std::remainder(phi, p);
    double theta_e = model_->geometry().electrical(phi_m);
    Vec3 out;
    for (int c = 0; c < 3; ++c) {
        double g = model_->eval_coil_electrical(theta_e, c);
        double v = window(theta_e, c) * saturate(1.0 / g, saturation_);
        out[c] = v > 0.0 ? v : 0.0;
    }
    return out;
}

Vec3 ConventionalTsf::shares_neg(double phi) const
{
    const double p = model_->geometry().spatial_period();
    double phi_m = std::remainder(phi, p);
    double theta_e = model_->geometry().electrical(phi_m);
    Vec3 out;
    for (int c = 0; c < 3; ++c) {
        double g = model_->eval_coil_electrical(theta_e, c);
        double v = window_neg(theta_e, c) * saturate(1.0 / std::abs(g), saturation_);
        out[c] = v > 0.0 ? v : 0.0;
    }
    return out;
}

CommutationTable::CommutationTable(std::vector<double> grid, Eigen::MatrixX3d vals,
                                   double tgt)
    : theta_e(std::move(grid)), values(std::move(vals)), target(tgt)
{
    const auto n = static_cast<Eigen::Index>(theta_e.size());
    if (n < 2) throw ConfigError("CommutationTable: need at least 2 grid points");
    if (values.rows() != n)
        throw ConfigError("CommutationTable: grid/value size mismatch");
    const double spacing = theta_e[1] - theta_e[0];
    if (!(spacing > 0.0))
        throw ConfigError("CommutationTable: grid must be strictly increasing");
    for (size_t i = 1; i < theta_e.size(); ++i) {
        double d = theta_e[i] - theta_e[i - 1];
        if (std::abs(d - spacing) > 1e-9 * spacing)
            throw ConfigError("CommutationTable: grid must be uniform");
    }
    // one full electrical period, no duplicated endpoint
    if (std::abs(spacing * static_cast<double>(n) - kTwoPi) > 1e-9)
        throw ConfigError("CommutationTable: grid must span exactly one period");
    if ((values.array() < -1e-12).any())
        throw ConfigError("CommutationTable: values must be nonnegative");
}

TableCommutation::TableCommutation(MotorGeometry geometry, CommutationTable positive,
                                   CommutationTable negative)
    : geometry_(geometry), pos_(std::move(positive)), neg_(std::move(negative))
{
}

Vec3 TableCommutation::lookup(const CommutationTable& tab, double phi) const
{
    const auto n = static_cast<Eigen::Index>(tab.theta_e.size());
    const double spacing = kTwoPi / static_cast<double>(n);
    double phi_m = std::remainder(phi, geometry_.spatial_period());
    double theta_e = geometry_.electrical(phi_m);
    auto idx = static_cast<long>(std::llround((theta_e - tab.theta_e[0]) / spacing));
    idx %= n;
    if (idx < 0) idx += n;
    return tab.values.row(idx).transpose();
}

Vec3 TableCommutation::shares_pos(double phi) const { return lookup(pos_, phi); }
Vec3 TableCommutation::shares_neg(double phi) const { return lookup(neg_, phi); }

namespace {

// Minimum-power single-coil solution of g . f = target, f >= 0.
Vec3 best_coil_shares(const Vec3& g, double target)
{
    int best = -1;
    double best_gain = 0.0;
    for (int c = 0; c < 3; ++c) {
        double gain = g[c] * (target >= 0.0 ? 1.0 : -1.0);
        if (gain > best_gain) { best_gain = gain; best = c; }
    }
    if (best < 0)
        throw InfeasibleError("ideal commutation: no coil can produce the requested torque sign");
    Vec3 f = Vec3::Zero();
    f[best] = target / g[best];
    return f;
}

}  // namespace

Vec3 IdealCommutation::shares_pos(double phi) const
{
    return best_coil_shares(model_->eval(phi), 1.0);
}

Vec3 IdealCommutation::shares_neg(double phi) const
{
    return best_coil_shares(model_->eval(phi), -1.0);
}

}  // namespace srm

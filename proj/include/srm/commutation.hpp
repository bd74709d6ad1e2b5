#pragma once

#include <memory>
#include <vector>

#include "srm/motor_model.hpp"

namespace srm {

/// Angle -> per-coil squared-current shares for one unit of requested torque.
/// shares_pos serves T* = +1 Nm, shares_neg serves T* = -1 Nm; both are
/// componentwise >= 0 and periodic with the spatial period.
class CommutationFunction {
public:
    virtual ~CommutationFunction() = default;
    virtual Vec3 shares_pos(double phi) const = 0;  // A^2/Nm
    virtual Vec3 shares_neg(double phi) const = 0;  // A^2/Nm
    virtual double period() const = 0;              // rad, mechanical
};

/// u = shares(phi) * |T*|, picking the share table by the sign of T*.
Vec3 commute(const CommutationFunction& f, double phi, double torque_request);

enum class TsfKind { sine, cubic, linear };

/// Monotone 0->1 ramp on [0,1]. sine: (1-cos(pi x))/2, cubic: 3x^2-2x^3, linear: x.
double tsf_rise(TsfKind kind, double x);

/// Clamp to [-a, a].
double saturate(double x, double a);

/// Conventional torque-sharing commutation: a single window function of
/// electrical angle, phase-shifted by exactly 2*pi/3 per coil, times the
/// saturated reciprocal of the coil torque gain. The window is placed so the
/// first coil's window is centered where its gain peaks; the windows of the
/// other coils follow at the exact 120-degree shifts (so the shares sum to 1
/// everywhere, which per-coil centering with unequal phase offsets would break).
class ConventionalTsf : public CommutationFunction {
public:
    ConventionalTsf(const TorqueGainModel& model, TsfKind kind,
                    double overlap_electrical, double saturation);

    Vec3 shares_pos(double phi) const override;
    Vec3 shares_neg(double phi) const override;
    double period() const override { return model_->geometry().spatial_period(); }

    /// Window weight of coil c (0-based) at electrical angle theta_e, in [0,1].
    double window(double theta_e, int c) const;
    /// Same for the mirrored (negative-torque) windows.
    double window_neg(double theta_e, int c) const;

    TsfKind kind() const { return kind_; }
    double overlap() const { return overlap_; }
    double saturation() const { return saturation_; }

private:
    double window_at(double theta_e, int c, double start) const;

    const TorqueGainModel* model_;
    TsfKind kind_;
    double overlap_;     // rad, electrical
    double saturation_;  // A^2/Nm
    double start_pos_;   // window start of coil 1, positive torque
    double start_neg_;   // window start of coil 1, negative torque
};

/// Optimal commutation samples on the synthesis grid.
struct CommutationTable {
    std::vector<double> theta_e;           // N electrical angles, uniform, one period
    Eigen::MatrixX3d values;               // N x 3, >= 0, A^2/Nm
    double target = 1.0;                   // torque sign this table serves

    CommutationTable() = default;
    CommutationTable(std::vector<double> grid, Eigen::MatrixX3d vals, double tgt);
};

/// Nearest-grid-point lookup over a positive and a negative table.
/// Exact at the grid angles; zero-order interpolation elsewhere.
class TableCommutation : public CommutationFunction {
public:
    TableCommutation(MotorGeometry geometry, CommutationTable positive,
                     CommutationTable negative);

    Vec3 shares_pos(double phi) const override;
    Vec3 shares_neg(double phi) const override;
    double period() const override { return geometry_.spatial_period(); }

    const CommutationTable& positive() const { return pos_; }
    const CommutationTable& negative() const { return neg_; }

private:
    Vec3 lookup(const CommutationTable& tab, double phi) const;

    MotorGeometry geometry_;
    CommutationTable pos_;
    CommutationTable neg_;
};

/// Exact linearization at every angle: shares solve the per-angle minimum-power
/// program, so g(phi) . shares_pos(phi) = 1 holds everywhere (and -1 for neg).
/// Discontinuous across coil handoffs; used as the R1-exact reference.
class IdealCommutation : public CommutationFunction {
public:
    explicit IdealCommutation(const TorqueGainModel& model) : model_(&model) {}

    Vec3 shares_pos(double phi) const override;
    Vec3 shares_neg(double phi) const override;
    double period() const override { return model_->geometry().spatial_period(); }

private:
    const TorqueGainModel* model_;
};

}  // namespace srm

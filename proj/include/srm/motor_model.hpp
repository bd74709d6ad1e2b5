#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "srm/angles.hpp"

namespace srm {

using Vec3 = Eigen::Vector3d;

/// Rotor tooth geometry. One tooth pitch is one electrical revolution.
struct MotorGeometry {
    int n_teeth = 1;

    double spatial_period() const { return kTwoPi / n_teeth; }
    /// Electrical angle theta_e = n_teeth * phi.
    double electrical(double phi) const { return n_teeth * phi; }
};

/// One sinusoidal term of a coil's torque gain, amplitude*sin(order*theta_e + phase).
/// Order is in electrical harmonics, so every term has spatial period p/order.
struct Harmonic {
    int order = 1;        // >= 1
    double amplitude = 0; // Nm/A^2
    double phase = 0;     // rad, electrical
};

struct ModelValidation {
    double periodicity_residual = 0;  // max |g(phi) - g(phi + p)| over probe grid
    double coverage_pos = 0;          // min over probe of max_c g_c
    double coverage_neg = 0;          // max over probe of min_c g_c
    double g_min = 0;
    bool coverage_ok = false;
    bool periodicity_ok = false;
    bool pass() const { return coverage_ok && periodicity_ok; }
};

/// Torque per unit squared current for the three coils, as harmonic series in
/// electrical angle. Immutable after construction; concurrent reads are safe.
class TorqueGainModel {
public:
    TorqueGainModel(MotorGeometry geometry,
                    std::array<std::vector<Harmonic>, 3> coils);

    const MotorGeometry& geometry() const { return geometry_; }
    const std::vector<Harmonic>& coil(int c) const { return coils_[c]; }

    /// g_c(phi) for one coil, phi mechanical.
    double eval_coil(double phi, int c) const;
    /// [g_1, g_2, g_3](phi), phi mechanical.
    Vec3 eval(double phi) const;
    /// Same but from an electrical angle (exact: avoids the n_t*phi round trip).
    double eval_coil_electrical(double theta_e, int c) const;
    Vec3 eval_electrical(double theta_e) const;

    /// T = g(phi) . u. Rejects negative u entries (u holds squared currents).
    double torque(double phi, const Vec3& u) const;

    /// Electrical angle in [-pi, pi) where g_c is maximal / minimal,
    /// resolved numerically on a dense probe plus golden-section refinement.
    double argmax_electrical(int c) const;
    double argmin_electrical(int c) const;

    /// Periodicity and coverage report over a dense probe grid
    /// (n_probe points per period, at least 1000).
    ModelValidation validate(double g_min = 1e-3, int n_probe = 2048) const;

private:
    MotorGeometry geometry_;
    std::array<std::vector<Harmonic>, 3> coils_;
};

/// The configurable three-coil first-harmonic model used throughout the tests
/// and shipped as the bundled config: amplitudes {1.0, 0.9, 1.1} Nm/A^2,
/// electrical phase offsets {0, 0.1, -0.1} rad on top of the 120-degree
/// coil separation, 131 teeth.
TorqueGainModel default_model();

}  // namespace srm

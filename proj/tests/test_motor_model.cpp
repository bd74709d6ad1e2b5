#include <doctest.h>

#include <cmath>

#include "srm/errors.hpp"
#include "srm/motor_model.hpp"

using namespace srm;

namespace {

// small deterministic generator for probe angles
struct Lcg {
    uint64_t s = 0x9e3779b97f4a7c15ULL;
    double uniform(double lo, double hi)
    {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return lo + (hi - lo) * ((s >> 11) * 0x1.0p-53);
    }
};

}  // namespace

TEST_CASE("geometry derives the spatial period")
{
    MotorGeometry g{131};
    CHECK(g.spatial_period() == doctest::Approx(kTwoPi / 131).epsilon(1e-15));
    CHECK(MotorGeometry{1}.spatial_period() == doctest::Approx(kTwoPi));
}

TEST_CASE("default model evaluates the documented anchor points")
{
    auto model = default_model();
    const double p = model.geometry().spatial_period();

    // quarter period puts the first coil at its unit peak
    CHECK(model.eval(p / 4.0)[0] == doctest::Approx(1.0).epsilon(1e-12));
    // first harmonic with zero phase starts at zero
    CHECK(model.eval(0.0)[0] == 0.0);

    // coils are pairwise distinct functions
    double d12 = 0, d13 = 0, d23 = 0;
    for (int i = 0; i < 500; ++i) {
        Vec3 g = model.eval(p * i / 500.0);
        d12 = std::max(d12, std::abs(g[0] - g[1]));
        d13 = std::max(d13, std::abs(g[0] - g[2]));
        d23 = std::max(d23, std::abs(g[1] - g[2]));
    }
    CHECK(d12 > 0.01);
    CHECK(d13 > 0.01);
    CHECK(d23 > 0.01);
}

TEST_CASE("gain evaluation is periodic")
{
    auto model = default_model();
    const double p = model.geometry().spatial_period();
    Lcg rng;
    for (int i = 0; i < 200; ++i) {
        const double phi = rng.uniform(-10.0, 10.0);
        const Vec3 a = model.eval(phi);
        const Vec3 b = model.eval(phi + p);
        CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("torque is the inner product with the squared currents")
{
    auto model = default_model();
    const double p = model.geometry().spatial_period();

    CHECK(model.torque(0.1234, Vec3::Zero()) == 0.0);
    CHECK(model.torque(0.77, Vec3(1, 0, 0)) == doctest::Approx(model.eval(0.77)[0]));
    CHECK(model.torque(p / 4.0, Vec3(2, 0, 0)) == doctest::Approx(2.0).epsilon(1e-12));

    CHECK_THROWS_AS(model.torque(0.0, Vec3(1, -0.5, 0)), ConfigError);
}

TEST_CASE("torque is linear in the currents")
{
    auto model = default_model();
    Lcg rng;
    for (int i = 0; i < 100; ++i) {
        const double phi = rng.uniform(-5, 5);
        const Vec3 u1(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2));
        const Vec3 u2(rng.uniform(0, 2), rng.uniform(0, 2), rng.uniform(0, 2));
        const double a = rng.uniform(0, 3), b = rng.uniform(0, 3);
        const double lhs = model.torque(phi, a * u1 + b * u2);
        const double rhs = a * model.torque(phi, u1) + b * model.torque(phi, u2);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs)));
    }
}

TEST_CASE("validation passes the default model and flags coverage gaps")
{
    auto model = default_model();
    ModelValidation rep = model.validate();
    CHECK(rep.pass());
    CHECK(rep.coverage_pos >= 1e-3);
    CHECK(rep.coverage_neg <= -1e-3);
    CHECK(rep.periodicity_residual <= 1e-12);

    // a single active coil cannot cover the angles where its gain vanishes
    std::array<std::vector<Harmonic>, 3> coils;
    coils[0] = {{1, 1.0, 0.0}};
    coils[1] = {};
    coils[2] = {};
    TorqueGainModel single(MotorGeometry{131}, coils);
    CHECK_FALSE(single.validate().pass());
}

TEST_CASE("harmonic order below one is rejected at construction")
{
    std::array<std::vector<Harmonic>, 3> coils;
    coils[0] = {{0, 1.0, 0.0}};
    coils[1] = {{1, 1.0, 0.0}};
    coils[2] = {{1, 1.0, 0.0}};
    CHECK_THROWS_AS(TorqueGainModel(MotorGeometry{131}, coils), ConfigError);
    CHECK_THROWS_AS(TorqueGainModel(MotorGeometry{0}, coils), ConfigError);
}

TEST_CASE("gain extrema are located on the electrical circle")
{
    auto model = default_model();
    const double peak = model.argmax_electrical(0);
    CHECK(std::abs(peak - kTwoPi / 4.0) <= 1e-6);    // sin peaks at pi/2
    const double valley = model.argmin_electrical(0);
    CHECK(std::abs(valley + kTwoPi / 4.0) <= 1e-6);  // and bottoms at -pi/2
    CHECK(model.eval_coil_electrical(valley, 0) ==
          doctest::Approx(-1.0).epsilon(1e-10));
}

#include <doctest.h>

#include <cmath>

#include "srm/errors.hpp"
#include "srm/ripple.hpp"
#include "srm/sim.hpp"

using namespace srm;

TEST_CASE("relative angle wrapping")
{
    const double pi = kTwoPi / 2.0;
    CHECK(wrap_relative_angle(0.0) == 0.0);
    CHECK(wrap_relative_angle(pi) == -pi);  // the seam folds down
    CHECK(std::abs(wrap_relative_angle(kTwoPi + 0.1) - 0.1) <= 1e-15);
    for (int i = -20; i <= 20; ++i) {
        const double w = wrap_relative_angle(0.37 * i);
        CHECK(w >= -pi);
        CHECK(w < pi);
    }
}

TEST_CASE("controller recursion from rest")
{
    DiscreteController c;
    CHECK(c.step(1.0) == doctest::Approx(672000.0));
    // second sample of the unit step response
    CHECK(c.step(1.0) == doctest::Approx(6.72e5 - 1.1e6 + 1.0296 * 6.72e5)
                             .epsilon(1e-12));

    DiscreteController zero;
    for (int i = 0; i < 50; ++i) CHECK(zero.step(0.0) == 0.0);
}

TEST_CASE("reference profile kinematics")
{
    auto model = default_model();
    const double p = model.geometry().spatial_period();
    const double v = 8.0 * p;  // 8 teeth/s
    ReferenceProfile prof(v, model.geometry());

    double r, rd;
    prof.at(0.0, r, rd);
    CHECK(r == 0.0);
    CHECK(rd == 0.0);

    CHECK(prof.t_accel == doctest::Approx(1.25).epsilon(1e-12));
    CHECK(prof.t_end == doctest::Approx(3.125).epsilon(1e-12));

    // the junction is continuous in position and velocity
    prof.at(prof.t_accel - 1e-9, r, rd);
    double r2, rd2;
    prof.at(prof.t_accel + 1e-9, r2, rd2);
    CHECK(std::abs(r2 - r) <= 1e-8);
    CHECK(rd2 == doctest::Approx(v).epsilon(1e-9));

    // past the end the position holds and the velocity is zero
    prof.at(prof.t_end + 5.0, r, rd);
    CHECK(r == doctest::Approx(20.0 * p).epsilon(1e-12));
    CHECK(rd == 0.0);

    CHECK_THROWS_AS(ReferenceProfile(0.0, model.geometry()), ConfigError);
}

TEST_CASE("a resting loop with a vanishing reference stays at rest")
{
    auto model = default_model();
    IdealCommutation ideal(model);
    ReferenceProfile prof(1e-9, model.geometry());
    SimResult res =
        run_closed_loop(model, ideal, DiscreteController{}, prof, 4, 0.05);
    for (size_t i = 0; i < res.time.size(); ++i) {
        CHECK(std::abs(res.position[i]) <= 1e-15);
        CHECK(std::abs(res.torque[i]) <= 1e-12);
        CHECK(res.currents_sq[i].cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("exact linearization reproduces the torque request at samples")
{
    auto model = default_model();
    IdealCommutation ideal(model);
    const double p = model.geometry().spatial_period();
    ReferenceProfile prof(4.0 * p, model.geometry());
    SimResult res = run_closed_loop(model, ideal, DiscreteController{}, prof, 8);

    for (size_t k = 0; k < res.sample_time.size(); ++k) {
        const size_t idx = k * res.m_sim;
        const double t_star = res.sample_torque_request[k];
        CHECK(std::abs(res.torque[idx] - t_star) <=
              1e-9 * std::abs(t_star) + 1e-12);
        CHECK(std::abs(res.ripple_rel[idx]) <= 1e-9);
    }
}

TEST_CASE("currents hold constant over each sampling interval")
{
    auto model = default_model();
    IdealCommutation ideal(model);
    const double p = model.geometry().spatial_period();
    ReferenceProfile prof(8.0 * p, model.geometry());
    SimResult res = run_closed_loop(model, ideal, DiscreteController{}, prof, 5);

    for (size_t k = 0; k + 1 < res.sample_time.size(); ++k)
        for (int m = 1; m < res.m_sim; ++m) {
            const size_t idx = k * res.m_sim;
            CHECK((res.currents_sq[idx + m] - res.currents_sq[idx])
                      .cwiseAbs()
                      .maxCoeff() == 0.0);
            CHECK(res.torque_request[idx + m] == res.torque_request[idx]);
        }
}

TEST_CASE("sampled closed loop matches the held-input discretization")
{
    auto model = default_model();
    IdealCommutation ideal(model);
    // barely moving, so the held torque is exact over each interval
    ReferenceProfile prof(1e-4 * model.geometry().spatial_period(), model.geometry());
    DiscreteController ctrl;
    const double ts = DiscreteController::kSamplePeriod;

    SimResult res = run_closed_loop(model, ideal, ctrl, prof, 20, 0.1);
    const size_t n = std::min<size_t>(100, res.sample_time.size());
    REQUIRE(n == 100);

    // exact zero-order-hold discretization of x' = [[0,1],[0,-1]] x + [0,1] T
    const double ad01 = 1.0 - std::exp(-ts);
    const double ad11 = std::exp(-ts);
    const double bd0 = ts - (1.0 - std::exp(-ts));
    const double bd1 = 1.0 - std::exp(-ts);

    Eigen::Vector2d x(0.0, 0.0);
    double max_err = 0.0, scale = 0.0;
    for (size_t k = 0; k < n; ++k) {
        const double phi_sim = res.position[k * res.m_sim];
        max_err = std::max(max_err, std::abs(phi_sim - x[0]));
        scale = std::max(scale, std::abs(phi_sim));
        const double t_star = res.sample_torque_request[k];
        const Eigen::Vector2d xn(x[0] + ad01 * x[1] + bd0 * t_star,
                                 ad11 * x[1] + bd1 * t_star);
        x = xn;
    }
    CHECK(max_err <= 1e-6 * std::max(scale, 1e-30));
}

TEST_CASE("open-loop ripple vanishes at samples and as the speed goes to zero")
{
    auto model = default_model();
    IdealCommutation ideal(model);
    const int n = 20, m = 5;
    const double ts = 1e-3;
    const double v = nominal_velocity(model.geometry().n_teeth, n, ts);

    std::vector<double> rip = open_loop_ripple(model, ideal, v, ts, n, m);
    CHECK(rip.size() == static_cast<size_t>(n * m + 1));
    for (int k = 0; k < n; ++k) CHECK(std::abs(rip[k * m]) <= 1e-9);
    // between samples the ripple is generically nonzero
    double worst = 0.0;
    for (int k = 0; k < n; ++k)
        for (int j = 1; j < m; ++j) worst = std::max(worst, std::abs(rip[k * m + j]));
    CHECK(worst > 1e-8);

    std::vector<double> slow = open_loop_ripple(model, ideal, 1e-6, ts, n, m);
    for (double e : slow) CHECK(std::abs(e) <= 1e-5);
}

TEST_CASE("open-loop ripple of a grid table reproduces the solver residuals")
{
    auto model = default_model();
    const int n = 20, m = 5;
    auto prob = assemble(model, n, m, 100.0, 1e-3, 1.0);
    auto sol = solve(prob);
    CommutationTable tab(prob.grid_theta_e, sol.table, 1.0);
    TableCommutation table(model.geometry(), tab, tab);

    std::vector<double> rip =
        open_loop_ripple(model, table, prob.velocity, 1e-3, n, m);

    // the same residuals by the solver's linear algebra
    Eigen::VectorXd r;
    kernels::residual(prob.rows, m, sol.table, 1.0, r, Exec::serial);
    REQUIRE(rip.size() == static_cast<size_t>(r.size()));
    for (Eigen::Index i = 0; i < r.size(); ++i)
        CHECK(std::abs(rip[static_cast<size_t>(i)] - r[i]) <= 1e-10);
}

TEST_CASE("metric windows behave like their analytic values")
{
    // constant error over the window: RMS equals the magnitude
    std::vector<double> t, e;
    for (int i = 0; i <= 1000; ++i) {
        t.push_back(i * 1e-3);
        e.push_back(-0.25);
    }
    CHECK(rms_window(t, e, 0.2, 0.9) == doctest::Approx(0.25).epsilon(1e-12));

    // density invariance on a smooth signal
    auto make = [](int density, std::vector<double>& tt, std::vector<double>& ee) {
        tt.clear();
        ee.clear();
        const int n = 1000 * density;
        for (int i = 0; i <= n; ++i) {
            const double x = i * 1.0 / n;
            tt.push_back(x);
            ee.push_back(std::sin(kTwoPi * 7.3 * x) + 0.2);
        }
    };
    std::vector<double> t1, e1, t2, e2;
    make(1, t1, e1);
    make(16, t2, e2);
    const double a = rms_window(t1, e1, 0.1, 0.9);
    const double b = rms_window(t2, e2, 0.1, 0.9);
    CHECK(std::abs(a - b) <= 1e-3 * b);
}

TEST_CASE("metrics reject series without a full cruise tooth")
{
    auto model = default_model();
    IdealCommutation ideal(model);
    const double p = model.geometry().spatial_period();
    ReferenceProfile prof(8.0 * p, model.geometry());
    SimResult res = run_closed_loop(model, ideal, DiscreteController{}, prof, 4);

    SimMetrics m = metrics(res);
    CHECK(m.rms_error_last_tooth >= 0.0);
    CHECK(m.energy > 0.0);

    SimResult truncated = res;
    const size_t keep = res.time.size() / 2;
    truncated.time.resize(keep);
    truncated.error.resize(keep);
    truncated.torque.resize(keep);
    truncated.torque_request.resize(keep);
    CHECK_THROWS_AS(metrics(truncated), ConfigError);

    SimResult empty;
    CHECK_THROWS_AS(metrics(empty), ConfigError);
}

TEST_CASE("zero currents cost zero energy")
{
    SimResult res;
    res.sample_period = 1e-3;
    res.m_sim = 1;
    res.tooth_time = 0.1;
    res.t_end = 0.5;
    for (int i = 0; i <= 600; ++i) {
        res.time.push_back(i * 1e-3);
        res.error.push_back(0.0);
        res.torque.push_back(0.0);
        res.torque_request.push_back(0.0);
        res.ripple_rel.push_back(0.0);
        if (i < 600) {
            res.sample_time.push_back(i * 1e-3);
            res.sample_currents_sq.push_back(Vec3::Zero());
        }
    }
    CHECK(metrics(res).energy == 0.0);
}

TEST_CASE("runaway loops trip the divergence guard")
{
    auto model = default_model();
    struct Hot : CommutationFunction {
        const TorqueGainModel* m;
        explicit Hot(const TorqueGainModel& mm) : m(&mm) {}
        Vec3 shares_pos(double phi) const override
        {
            return IdealCommutation(*m).shares_pos(phi) * 1000.0;
        }
        Vec3 shares_neg(double phi) const override
        {
            return IdealCommutation(*m).shares_neg(phi) * 1000.0;
        }
        double period() const override { return m->geometry().spatial_period(); }
    } hot(model);

    const double p = model.geometry().spatial_period();
    ReferenceProfile prof(8.0 * p, model.geometry());
    CHECK_THROWS_AS(run_closed_loop(model, hot, DiscreteController{}, prof, 4),
                    NumericError);
}

TEST_CASE("doubling the integration substeps barely moves the metrics")
{
    auto model = default_model();
    IdealCommutation ideal(model);
    const double p = model.geometry().spatial_period();
    ReferenceProfile prof(8.0 * p, model.geometry());

    SimResult a = run_closed_loop(model, ideal, DiscreteController{}, prof, 20);
    SimResult b = run_closed_loop(model, ideal, DiscreteController{}, prof, 40);
    const double ra = metrics(a).rms_error_last_tooth;
    const double rb = metrics(b).rms_error_last_tooth;
    CHECK(std::abs(ra - rb) <= 1e-3 * std::max(ra, rb));
}

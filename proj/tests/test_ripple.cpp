#include <doctest.h>

#include <cmath>
#include <cstring>

#include "oracle.hpp"
#include "srm/errors.hpp"
#include "srm/ripple.hpp"

using namespace srm;

namespace {

struct Lcg {
    uint64_t s = 0x12345678abcdef01ULL;
    double uniform(double lo, double hi)
    {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        return lo + (hi - lo) * ((s >> 11) * 0x1.0p-53);
    }
};

}  // namespace

TEST_CASE("grid spans one electrical period uniformly")
{
    auto g4 = build_grid(4);
    const double pi = kTwoPi / 2.0;
    CHECK(g4[0] == -pi);
    CHECK(g4[1] == doctest::Approx(-pi / 2).epsilon(1e-15));
    CHECK(g4[2] == doctest::Approx(0.0));
    CHECK(g4[3] == doctest::Approx(pi / 2).epsilon(1e-15));

    auto g150 = build_grid(150);
    CHECK(g150.size() == 150);
    for (int i = 1; i < 150; ++i)
        CHECK(g150[i] - g150[i - 1] == doctest::Approx(kTwoPi / 150).epsilon(1e-13));

    CHECK_THROWS_AS(build_grid(1), ConfigError);
}

TEST_CASE("nominal velocity advances one grid point per sample")
{
    const double v = nominal_velocity(131, 150, 1e-3);
    CHECK(v == doctest::Approx(0.319755).epsilon(1e-5));
    CHECK(std::abs(v - 0.319758) <= 1e-5);  // documented rounded anchor
    CHECK(nominal_velocity(1, 1, kTwoPi) == doctest::Approx(1.0).epsilon(1e-15));
    // v * N * Ts = one spatial period, for any parameters
    for (int n_teeth : {7, 131})
        for (int n : {5, 150})
            for (double ts : {1e-3, 0.02}) {
                const double vv = nominal_velocity(n_teeth, n, ts);
                CHECK(vv * n * ts == doctest::Approx(kTwoPi / n_teeth).epsilon(1e-14));
            }
}

TEST_CASE("assembled problem has the expected row structure")
{
    auto model = default_model();
    auto prob = assemble(model, 2, 2, 1.0, 1e-3, 1.0);
    CHECK(prob.rows.rows() == 5);

    auto prob43 = assemble(model, 4, 3, 1.0, 1e-3, 1.0);
    CHECK(prob43.rows.rows() == 13);
    // rows at subsample offset zero replicate the grid gains bitwise
    for (int k = 0; k < 4; ++k)
        for (int c = 0; c < 3; ++c)
            CHECK(prob43.rows(k * 3, c) == prob43.grid_gains(k, c));
    // the wrap row replicates grid point zero
    for (int c = 0; c < 3; ++c)
        CHECK(prob43.rows(12, c) == prob43.grid_gains(0, c));
}

TEST_CASE("assembly rejects invalid parameters and uncovered models")
{
    auto model = default_model();
    CHECK_THROWS_AS(assemble(model, 4, 0, 1.0, 1e-3, 1.0), ConfigError);
    CHECK_THROWS_AS(assemble(model, 4, 3, -1.0, 1e-3, 1.0), ConfigError);
    CHECK_THROWS_AS(assemble(model, 4, 3, 1.0, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(assemble(model, 4, 3, 1.0, 1e-3, 0.5), ConfigError);

    std::array<std::vector<Harmonic>, 3> coils;
    coils[0] = {{1, 1.0, 0.0}};
    coils[1] = {};
    coils[2] = {};
    TorqueGainModel uncovered(MotorGeometry{131}, coils);
    CHECK_THROWS_AS(assemble(uncovered, 4, 3, 1.0, 1e-3, 1.0), ConfigError);
}

TEST_CASE("projection onto the per-point polytope")
{
    // centroid of the symmetric case
    Eigen::Vector3d p = project_feasible(Eigen::Vector3d::Zero(),
                                         Eigen::Vector3d(1, 1, 1), 1.0);
    CHECK((p - Eigen::Vector3d(1.0 / 3, 1.0 / 3, 1.0 / 3)).norm() <= 1e-14);

    // only the positive-gain coil can carry the load
    p = project_feasible(Eigen::Vector3d::Zero(), Eigen::Vector3d(1, 0, -1), 1.0);
    CHECK((p - Eigen::Vector3d(1, 0, 0)).norm() <= 1e-14);

    // projecting a feasible point returns it
    Lcg rng;
    for (int i = 0; i < 200; ++i) {
        Eigen::Vector3d g(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.2, 2));
        Eigen::Vector3d y(rng.uniform(0, 2), rng.uniform(0, 2), 0);
        y[2] = (1.0 - g.head(2).dot(y.head(2))) / g[2];
        if (y[2] < 0) continue;
        Eigen::Vector3d proj = project_feasible(y, g, 1.0);
        CHECK((proj - y).norm() <= 1e-13 * (1.0 + y.norm()));
    }

    // optimality: no sampled feasible point is closer than the projection
    for (int i = 0; i < 100; ++i) {
        Eigen::Vector3d g(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(0.2, 2));
        Eigen::Vector3d y(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
        Eigen::Vector3d proj = project_feasible(y, g, 1.0);
        CHECK(std::abs(g.dot(proj) - 1.0) <= 1e-12);
        CHECK(proj.minCoeff() >= 0.0);
        const double d_best = (proj - y).norm();
        for (int t = 0; t < 50; ++t) {
            Eigen::Vector3d z(rng.uniform(0, 3), rng.uniform(0, 3), 0);
            z[2] = (1.0 - g.head(2).dot(z.head(2))) / g[2];
            if (z[2] < 0) continue;
            CHECK((z - y).norm() + 1e-12 >= d_best);
        }
    }

    CHECK_THROWS_AS(
        project_feasible(Eigen::Vector3d::Zero(), Eigen::Vector3d(-1, -2, 0), 1.0),
        InfeasibleError);
}

TEST_CASE("per-point minimum-power loads land on the strongest coil")
{
    Eigen::Vector3d f = per_point_lp(Eigen::Vector3d(2, 0.5, -1), 1.0);
    CHECK((f - Eigen::Vector3d(0.5, 0, 0)).norm() == 0.0);

    f = per_point_lp(Eigen::Vector3d(1, 1, 1), 1.0);  // tie -> lowest index
    CHECK((f - Eigen::Vector3d(1, 0, 0)).norm() == 0.0);

    f = per_point_lp(Eigen::Vector3d(-2, 1, 0), -1.0);
    CHECK((f - Eigen::Vector3d(0.5, 0, 0)).norm() == 0.0);

    CHECK_THROWS_AS(per_point_lp(Eigen::Vector3d(-1, 0, 0), 1.0), InfeasibleError);
}

TEST_CASE("solver with zero ripple weight reproduces the per-point loads")
{
    auto model = default_model();
    auto prob = assemble(model, 4, 3, 0.0, 1e-3, 1.0);
    auto sol = solve(prob);
    for (int k = 0; k < 4; ++k) {
        Eigen::Vector3d lp = per_point_lp(prob.grid_gains.row(k).transpose(), 1.0);
        CHECK((sol.table.row(k).transpose() - lp).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("solver matches the brute-force reference objective")
{
    auto model = default_model();
    for (double beta : {0.0, 1.0, 100.0}) {
        auto prob = assemble(model, 4, 3, beta, 1e-3, 1.0);
        auto sol = solve(prob);
        auto oracle = srm_test::brute_force_solve(model, 4, 3, beta);
        CHECK(std::abs(sol.objective - oracle.objective) <=
              1e-6 * std::abs(oracle.objective));
    }
}

TEST_CASE("solution satisfies the grid equalities and nonnegativity")
{
    auto model = default_model();
    auto prob = assemble(model, 40, 5, 1000.0, 1e-3, 1.0);
    auto sol = solve(prob);
    CHECK(sol.eq_residual <= 1e-10);
    CHECK(sol.table.minCoeff() >= -1e-12);

    auto prob_neg = assemble(model, 40, 5, 1000.0, 1e-3, -1.0);
    auto sol_neg = solve(prob_neg);
    CHECK(sol_neg.eq_residual <= 1e-10);
    CHECK(sol_neg.table.minCoeff() >= -1e-12);
    for (int k = 0; k < 40; ++k)
        CHECK(prob_neg.grid_gains.row(k).dot(sol_neg.table.row(k)) ==
              doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("increasing the ripple weight trades power for ripple")
{
    auto model = default_model();
    double prev_ripple = 1e300, prev_power = -1e300;
    for (double beta : {0.0, 1.0, 10.0, 100.0, 1000.0}) {
        auto prob = assemble(model, 12, 4, beta, 1e-3, 1.0);
        auto sol = solve(prob);
        CHECK(sol.ripple_norm <= prev_ripple + 1e-9);
        CHECK(sol.power_l1 >= prev_power - 1e-9);
        prev_ripple = sol.ripple_norm;
        prev_power = sol.power_l1;
    }
}

TEST_CASE("rotating the model by one grid spacing permutes the solution rows")
{
    auto base = default_model();
    const double shift = kTwoPi / 12.0;  // one spacing of a 12-point grid
    std::array<std::vector<Harmonic>, 3> coils;
    for (int c = 0; c < 3; ++c) {
        coils[c] = base.coil(c);
        for (Harmonic& h : coils[c]) h.phase += h.order * shift;
    }
    TorqueGainModel rotated(MotorGeometry{131}, coils);

    auto prob_a = assemble(base, 12, 4, 10.0, 1e-3, 1.0);
    auto prob_b = assemble(rotated, 12, 4, 10.0, 1e-3, 1.0);
    auto sol_a = solve(prob_a);
    auto sol_b = solve(prob_b);
    // rotated model evaluated at theta equals the base at theta + shift, so
    // row k of the rotated solution equals row k+1 of the base solution
    for (int k = 0; k < 12; ++k) {
        const int kk = (k + 1) % 12;
        CHECK((sol_b.table.row(k) - sol_a.table.row(kk)).cwiseAbs().maxCoeff() <=
              1e-6);
    }
}

TEST_CASE("warm starts converge immediately and reruns are bitwise stable")
{
    auto model = default_model();
    auto prob = assemble(model, 20, 4, 50.0, 1e-3, 1.0);
    auto sol_a = solve(prob);
    auto sol_b = solve(prob);
    CHECK(std::memcmp(sol_a.table.data(), sol_b.table.data(),
                      sizeof(double) * sol_a.table.size()) == 0);

    Eigen::MatrixX3d warm = sol_a.table;
    auto sol_w = solve(prob, {}, &warm);
    CHECK(sol_w.iterations <= sol_a.iterations);
    CHECK(std::abs(sol_w.objective - sol_a.objective) <=
          1e-9 * std::abs(sol_a.objective));
}

TEST_CASE("iteration cap reports a non-convergence error")
{
    auto model = default_model();
    auto prob = assemble(model, 20, 4, 1000.0, 1e-3, 1.0);
    SolveSettings st;
    st.max_iters = 2;
    CHECK_THROWS_AS(solve(prob, st), NumericError);
}

TEST_CASE("infeasible torque signs are reported per grid point")
{
    // assembly validates coverage, so force the bad gains in by hand:
    // all-positive grid gains cannot produce negative torque
    auto prob = assemble(default_model(), 8, 2, 1.0, 1e-3, -1.0);
    for (int k = 0; k < 8; ++k)
        prob.grid_gains.row(k) = prob.grid_gains.row(k).cwiseAbs();
    CHECK_THROWS_AS(solve(prob), InfeasibleError);
}

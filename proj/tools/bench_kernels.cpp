// Times the OpenMP kernels against their serial references and verifies that
// both produce bitwise-identical results.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <vector>

#include "srm/gp.hpp"
#include "srm/kernels.hpp"
#include "srm/ripple.hpp"

using namespace srm;

namespace {

double now_ms()
{
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <typename F>
double time_ms(F&& body, int reps)
{
    body();  // warm up
    const double t0 = now_ms();
    for (int i = 0; i < reps; ++i) body();
    return (now_ms() - t0) / reps;
}

bool bitwise_equal(const double* a, const double* b, size_t n)
{
    return std::memcmp(a, b, n * sizeof(double)) == 0;
}

}  // namespace

int main(int argc, char** argv)
{
    int n_points = 600;
    int subsamples = 40;
    int reps = 20;
    if (argc > 1) n_points = std::atoi(argv[1]);
    if (argc > 2) subsamples = std::atoi(argv[2]);
    if (argc > 3) reps = std::atoi(argv[3]);

    auto model = default_model();
    RippleProblem prob = assemble(model, n_points, subsamples, 100.0, 1e-3, 1.0);
    std::printf("kernel bench: N=%d M=%d rows=%ld threads=%d\n", n_points, subsamples,
                (long)prob.rows.rows(), omp_get_max_threads());

    RowMat3 table(n_points, 3);
    for (int k = 0; k < n_points; ++k)
        table.row(k) = per_point_lp(prob.grid_gains.row(k).transpose(), 1.0).transpose();

    Eigen::VectorXd r_s, r_p, w_s, w_p;
    const double t_res_s = time_ms(
        [&] { kernels::residual_serial(prob.rows, subsamples, table, 1.0, r_s); }, reps);
    const double t_res_p = time_ms(
        [&] { kernels::residual_parallel(prob.rows, subsamples, table, 1.0, r_p); },
        reps);
    std::printf("residual   serial %8.3f ms  parallel %8.3f ms  speedup %.2fx  %s\n",
                t_res_s, t_res_p, t_res_s / t_res_p,
                bitwise_equal(r_s.data(), r_p.data(), r_s.size()) ? "bitwise-equal"
                                                                  : "MISMATCH");

    RowMat3 g_s(n_points, 3), g_p(n_points, 3);
    const double t_grad_s = time_ms(
        [&] { kernels::gradient_serial(prob.rows, subsamples, r_s, 2.5, g_s); }, reps);
    const double t_grad_p = time_ms(
        [&] { kernels::gradient_parallel(prob.rows, subsamples, r_s, 2.5, g_p); }, reps);
    std::printf("gradient   serial %8.3f ms  parallel %8.3f ms  speedup %.2fx  %s\n",
                t_grad_s, t_grad_p, t_grad_s / t_grad_p,
                bitwise_equal(g_s.data(), g_p.data(), 3 * n_points) ? "bitwise-equal"
                                                                    : "MISMATCH");

    const double t_app_s = time_ms(
        [&] { kernels::apply_serial(prob.rows, subsamples, table, w_s); }, reps);
    const double t_app_p = time_ms(
        [&] { kernels::apply_parallel(prob.rows, subsamples, table, w_p); }, reps);
    std::printf("apply      serial %8.3f ms  parallel %8.3f ms  speedup %.2fx  %s\n",
                t_app_s, t_app_p, t_app_s / t_app_p,
                bitwise_equal(w_s.data(), w_p.data(), w_s.size()) ? "bitwise-equal"
                                                                  : "MISMATCH");

    RowMat3 proj_s = table.array() + 0.3;
    RowMat3 proj_p = proj_s;
    const double t_prj_s = time_ms(
        [&] {
            RowMat3 x = proj_s;
            kernels::project_serial(prob.grid_gains, 1.0, x);
            proj_s = x;
        },
        reps);
    const double t_prj_p = time_ms(
        [&] {
            RowMat3 x = proj_p;
            kernels::project_parallel(prob.grid_gains, 1.0, x);
            proj_p = x;
        },
        reps);
    std::printf("project    serial %8.3f ms  parallel %8.3f ms  speedup %.2fx  %s\n",
                t_prj_s, t_prj_p, t_prj_s / t_prj_p,
                bitwise_equal(proj_s.data(), proj_p.data(), 3 * n_points)
                    ? "bitwise-equal"
                    : "MISMATCH");

    Eigen::MatrixXd d_s, d_p;
    const double t_chd_s =
        time_ms([&] { kernels::chord_distances_serial(prob.grid_theta_e, d_s); }, reps);
    const double t_chd_p = time_ms(
        [&] { kernels::chord_distances_parallel(prob.grid_theta_e, d_p); }, reps);
    std::printf("distances  serial %8.3f ms  parallel %8.3f ms  speedup %.2fx  %s\n",
                t_chd_s, t_chd_p, t_chd_s / t_chd_p,
                bitwise_equal(d_s.data(), d_p.data(), d_s.size()) ? "bitwise-equal"
                                                                  : "MISMATCH");

    // end-to-end: the ripple solve with serial vs parallel kernels
    SolveSettings st;
    st.exec = Exec::serial;
    const double t_solve_s = time_ms([&] { (void)solve(prob, st); }, 1);
    st.exec = Exec::parallel;
    const double t_solve_p = time_ms([&] { (void)solve(prob, st); }, 1);
    SolveSettings s1 = st, s2 = st;
    s1.exec = Exec::serial;
    s2.exec = Exec::parallel;
    RippleSolution a = solve(prob, s1), b = solve(prob, s2);
    std::printf("solve      serial %8.3f ms  parallel %8.3f ms  speedup %.2fx  %s\n",
                t_solve_s, t_solve_p, t_solve_s / t_solve_p,
                bitwise_equal(a.table.data(), b.table.data(), a.table.size())
                    ? "bitwise-equal"
                    : "MISMATCH");
    return 0;
}

#include "srm/kernels.hpp"

#include <cmath>

#include "srm/angles.hpp"
#include "srm/projection.hpp"

namespace srm {

namespace {
Exec g_default_exec = Exec::parallel;

inline Eigen::Index block_of(Eigen::Index row, Eigen::Index n_ripple, int subsamples)
{
    return row == n_ripple ? 0 : row / subsamples;
}
}  // namespace

Exec default_exec() { return g_default_exec; }
void set_default_exec(Exec e) { g_default_exec = e; }

namespace kernels {

void residual_serial(const RowMat3& rows, int subsamples, const RowMat3& table,
                     double target, Eigen::VectorXd& r)
{
    const Eigen::Index n_rows = rows.rows();
    const Eigen::Index n_ripple = n_rows - 1;
    r.resize(n_rows);
    for (Eigen::Index i = 0; i < n_rows; ++i) {
        const Eigen::Index k = block_of(i, n_ripple, subsamples);
        r[i] = rows(i, 0) * table(k, 0) + rows(i, 1) * table(k, 1) +
               rows(i, 2) * table(k, 2) - target;
    }
}

void residual_parallel(const RowMat3& rows, int subsamples, const RowMat3& table,
                       double target, Eigen::VectorXd& r)
{
    const Eigen::Index n_rows = rows.rows();
    const Eigen::Index n_ripple = n_rows - 1;
    r.resize(n_rows);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n_rows; ++i) {
        const Eigen::Index k = block_of(i, n_ripple, subsamples);
        r[i] = rows(i, 0) * table(k, 0) + rows(i, 1) * table(k, 1) +
               rows(i, 2) * table(k, 2) - target;
    }
}

void residual(const RowMat3& rows, int subsamples, const RowMat3& table,
              double target, Eigen::VectorXd& r, Exec exec)
{
    if (exec == Exec::parallel)
        residual_parallel(rows, subsamples, table, target, r);
    else
        residual_serial(rows, subsamples, table, target, r);
}

namespace {
// One grid block's gradient: its own subsample rows in order, then (block 0
// only) the final wrap row. Shared by both variants so they stay bitwise equal.
inline void grad_block(const RowMat3& rows, int subsamples, const Eigen::VectorXd& r,
                       double scale, Eigen::Index k, Eigen::Index n_ripple,
                       RowMat3& grad)
{
    double a0 = 0.0, a1 = 0.0, a2 = 0.0;
    const Eigen::Index lo = k * subsamples;
    const Eigen::Index hi = lo + subsamples;
    for (Eigen::Index i = lo; i < hi; ++i) {
        a0 += r[i] * rows(i, 0);
        a1 += r[i] * rows(i, 1);
        a2 += r[i] * rows(i, 2);
    }
    if (k == 0) {
        a0 += r[n_ripple] * rows(n_ripple, 0);
        a1 += r[n_ripple] * rows(n_ripple, 1);
        a2 += r[n_ripple] * rows(n_ripple, 2);
    }
    grad(k, 0) = 1.0 + scale * a0;
    grad(k, 1) = 1.0 + scale * a1;
    grad(k, 2) = 1.0 + scale * a2;
}
}  // namespace

void gradient_serial(const RowMat3& rows, int subsamples, const Eigen::VectorXd& r,
                     double scale, RowMat3& grad)
{
    const Eigen::Index n_ripple = rows.rows() - 1;
    const Eigen::Index n_blocks = n_ripple / subsamples;
    grad.resize(n_blocks, 3);
    for (Eigen::Index k = 0; k < n_blocks; ++k)
        grad_block(rows, subsamples, r, scale, k, n_ripple, grad);
}

void gradient_parallel(const RowMat3& rows, int subsamples, const Eigen::VectorXd& r,
                       double scale, RowMat3& grad)
{
    const Eigen::Index n_ripple = rows.rows() - 1;
    const Eigen::Index n_blocks = n_ripple / subsamples;
    grad.resize(n_blocks, 3);
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < n_blocks; ++k)
        grad_block(rows, subsamples, r, scale, k, n_ripple, grad);
}

void gradient(const RowMat3& rows, int subsamples, const Eigen::VectorXd& r,
              double scale, RowMat3& grad, Exec exec)
{
    if (exec == Exec::parallel)
        gradient_parallel(rows, subsamples, r, scale, grad);
    else
        gradient_serial(rows, subsamples, r, scale, grad);
}

void apply_serial(const RowMat3& rows, int subsamples, const RowMat3& d,
                  Eigen::VectorXd& w)
{
    const Eigen::Index n_rows = rows.rows();
    const Eigen::Index n_ripple = n_rows - 1;
    w.resize(n_rows);
    for (Eigen::Index i = 0; i < n_rows; ++i) {
        const Eigen::Index k = block_of(i, n_ripple, subsamples);
        w[i] = rows(i, 0) * d(k, 0) + rows(i, 1) * d(k, 1) + rows(i, 2) * d(k, 2);
    }
}

void apply_parallel(const RowMat3& rows, int subsamples, const RowMat3& d,
                    Eigen::VectorXd& w)
{
    const Eigen::Index n_rows = rows.rows();
    const Eigen::Index n_ripple = n_rows - 1;
    w.resize(n_rows);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n_rows; ++i) {
        const Eigen::Index k = block_of(i, n_ripple, subsamples);
        w[i] = rows(i, 0) * d(k, 0) + rows(i, 1) * d(k, 1) + rows(i, 2) * d(k, 2);
    }
}

void apply(const RowMat3& rows, int subsamples, const RowMat3& d,
           Eigen::VectorXd& w, Exec exec)
{
    if (exec == Exec::parallel)
        apply_parallel(rows, subsamples, d, w);
    else
        apply_serial(rows, subsamples, d, w);
}

void project_serial(const RowMat3& gains, double target, RowMat3& table)
{
    const Eigen::Index n = gains.rows();
    for (Eigen::Index k = 0; k < n; ++k)
        table.row(k) = project_feasible(table.row(k).transpose(),
                                        gains.row(k).transpose(), target)
                           .transpose();
}

void project_parallel(const RowMat3& gains, double target, RowMat3& table)
{
    const Eigen::Index n = gains.rows();
#pragma omp parallel for schedule(static)
    for (Eigen::Index k = 0; k < n; ++k)
        table.row(k) = project_feasible(table.row(k).transpose(),
                                        gains.row(k).transpose(), target)
                           .transpose();
}

void project(const RowMat3& gains, double target, RowMat3& table, Exec exec)
{
    if (exec == Exec::parallel)
        project_parallel(gains, target, table);
    else
        project_serial(gains, target, table);
}

namespace {
inline void chord_row(const std::vector<double>& theta_e, Eigen::Index i,
                      Eigen::MatrixXd& d)
{
    const double si = std::sin(theta_e[i]), ci = std::cos(theta_e[i]);
    d(i, i) = 0.0;
    for (Eigen::Index j = 0; j < i; ++j) {
        const double ds = si - std::sin(theta_e[j]);
        const double dc = ci - std::cos(theta_e[j]);
        const double v = std::sqrt(ds * ds + dc * dc);
        d(i, j) = v;
        d(j, i) = v;
    }
}
}  // namespace

void chord_distances_serial(const std::vector<double>& theta_e, Eigen::MatrixXd& d)
{
    const Eigen::Index n = static_cast<Eigen::Index>(theta_e.size());
    d.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) chord_row(theta_e, i, d);
}

void chord_distances_parallel(const std::vector<double>& theta_e, Eigen::MatrixXd& d)
{
    const Eigen::Index n = static_cast<Eigen::Index>(theta_e.size());
    d.resize(n, n);
#pragma omp parallel for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) chord_row(theta_e, i, d);
}

void chord_distances(const std::vector<double>& theta_e, Eigen::MatrixXd& d, Exec exec)
{
    if (exec == Exec::parallel)
        chord_distances_parallel(theta_e, d);
    else
        chord_distances_serial(theta_e, d);
}

}  // namespace kernels
}  // namespace srm

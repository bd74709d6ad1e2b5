#pragma once

#include <Eigen/Dense>
#include <vector>

namespace srm {

/// Execution mode of the data-parallel kernels. Serial and parallel variants
/// produce bitwise-identical results: every output element is written by
/// exactly one iteration, and multi-term accumulations run in a fixed order
/// that does not depend on the thread count.
enum class Exec { serial, parallel };

Exec default_exec();
void set_default_exec(Exec e);

using RowMat3 = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

namespace kernels {

/// r[i] = rows.row(i) . table.row(block(i)) - target, where rows i of the
/// ripple matrix map M-to-one onto grid blocks and the last row wraps to
/// block 0.
void residual_serial(const RowMat3& rows, int subsamples, const RowMat3& table,
                     double target, Eigen::VectorXd& r);
void residual_parallel(const RowMat3& rows, int subsamples, const RowMat3& table,
                       double target, Eigen::VectorXd& r);
void residual(const RowMat3& rows, int subsamples, const RowMat3& table,
              double target, Eigen::VectorXd& r, Exec exec);

/// grad.row(k) = scale * sum over rows i of block k of r[i]*rows.row(i),
/// plus ones. Per-block sums run in row order (last row folded into block 0
/// after its regular rows).
void gradient_serial(const RowMat3& rows, int subsamples, const Eigen::VectorXd& r,
                     double scale, RowMat3& grad);
void gradient_parallel(const RowMat3& rows, int subsamples, const Eigen::VectorXd& r,
                       double scale, RowMat3& grad);
void gradient(const RowMat3& rows, int subsamples, const Eigen::VectorXd& r,
              double scale, RowMat3& grad, Exec exec);

/// w[i] = rows.row(i) . d.row(block(i)): the ripple matrix applied to a
/// table-shaped direction (no target subtraction).
void apply_serial(const RowMat3& rows, int subsamples, const RowMat3& d,
                  Eigen::VectorXd& w);
void apply_parallel(const RowMat3& rows, int subsamples, const RowMat3& d,
                    Eigen::VectorXd& w);
void apply(const RowMat3& rows, int subsamples, const RowMat3& d,
           Eigen::VectorXd& w, Exec exec);

/// In-place exact projection of every table row onto its per-point polytope
/// {f >= 0, gains.row(k) . f = target}.
void project_serial(const RowMat3& gains, double target, RowMat3& table);
void project_parallel(const RowMat3& gains, double target, RowMat3& table);
void project(const RowMat3& gains, double target, RowMat3& table, Exec exec);

/// Pairwise chordal distances of unit-circle embeddings of electrical angles.
void chord_distances_serial(const std::vector<double>& theta_e, Eigen::MatrixXd& d);
void chord_distances_parallel(const std::vector<double>& theta_e, Eigen::MatrixXd& d);
void chord_distances(const std::vector<double>& theta_e, Eigen::MatrixXd& d, Exec exec);

}  // namespace kernels
}  // namespace srm

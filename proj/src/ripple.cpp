#include "srm/ripple.hpp"

#include <cmath>
#include <deque>
#include <sstream>

#include "srm/errors.hpp"

namespace srm {

std::vector<double> build_grid(int n_points)
{
    if (n_points < 2)
        throw ConfigError("build_grid: need at least 2 grid points");
    std::vector<double> grid(n_points);
    const double pi = kTwoPi / 2.0;
    for (int i = 0; i < n_points; ++i)
        grid[i] = -pi + kTwoPi * (i + 0.0) / n_points;
    return grid;
}

double nominal_velocity(int n_teeth, int n_points, double sample_period)
{
    return kTwoPi / (n_teeth * n_points * sample_period);
}

RippleProblem assemble(const TorqueGainModel& model, int n_points, int subsamples,
                       double beta, double sample_period, double target)
{
    if (subsamples < 1) throw ConfigError("assemble: subsamples must be >= 1");
    if (beta < 0) throw ConfigError("assemble: beta must be >= 0");
    if (!(sample_period > 0)) throw ConfigError("assemble: sample period must be > 0");
    if (target != 1.0 && target != -1.0)
        throw ConfigError("assemble: target must be +1 or -1");

    ModelValidation val = model.validate();
    if (!val.pass()) {
        std::ostringstream os;
        os << "assemble: model validation failed (coverage_pos=" << val.coverage_pos
           << ", coverage_neg=" << val.coverage_neg
           << ", periodicity=" << val.periodicity_residual << ")";
        throw ConfigError(os.str());
    }

    RippleProblem p;
    p.model = &model;
    p.n_points = n_points;
    p.subsamples = subsamples;
    p.beta = beta;
    p.sample_period = sample_period;
    p.target = target;
    p.velocity = nominal_velocity(model.geometry().n_teeth, n_points, sample_period);

    p.grid_theta_e = build_grid(n_points);
    p.grid_gains.resize(n_points, 3);
    for (int k = 0; k < n_points; ++k)
        p.grid_gains.row(k) = model.eval_electrical(p.grid_theta_e[k]).transpose();

    const double pi = kTwoPi / 2.0;
    const Eigen::Index n_rows = static_cast<Eigen::Index>(n_points) * subsamples + 1;
    p.rows.resize(n_rows, 3);
    for (int k = 0; k < n_points; ++k)
        for (int j = 0; j < subsamples; ++j) {
            // j = 0 reproduces the grid expression bitwise, so those rows
            // duplicate the equality constraints exactly
            const double theta = -pi + kTwoPi * (k + j / (double)subsamples) / n_points;
            p.rows.row(static_cast<Eigen::Index>(k) * subsamples + j) =
                model.eval_electrical(theta).transpose();
        }
    // t = N*Ts wraps to grid point 0
    p.rows.row(n_rows - 1) = p.grid_gains.row(0);
    return p;
}

namespace {

double sum_entries(const RowMat3& m)
{
    double s = 0.0;
    for (Eigen::Index k = 0; k < m.rows(); ++k)
        s += m(k, 0) + m(k, 1) + m(k, 2);
    return s;
}

double norm2(const Eigen::VectorXd& v)
{
    double s = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) s += v[i] * v[i];
    return std::sqrt(s);
}

double dot_all(const RowMat3& a, const RowMat3& b)
{
    double s = 0.0;
    for (Eigen::Index k = 0; k < a.rows(); ++k)
        s += a(k, 0) * b(k, 0) + a(k, 1) * b(k, 1) + a(k, 2) * b(k, 2);
    return s;
}

double max_eq_residual(const RippleProblem& p, const RowMat3& f)
{
    double worst = 0.0;
    for (Eigen::Index k = 0; k < f.rows(); ++k) {
        const double e = std::abs(p.grid_gains.row(k).dot(f.row(k)) - p.target);
        worst = std::max(worst, e);
    }
    return worst;
}

// Minimizer over alpha in [0,1] of  Sd*alpha + beta*sqrt(c0 + 2 b1 alpha + a2 alpha^2),
// the objective restricted to a feasible segment. Stationary points solve a
// quadratic; the endpoints cover the rest.
double exact_segment_step(double Sd, double beta, double a2, double b1, double c0)
{
    auto value = [&](double a) {
        const double q = c0 + 2.0 * b1 * a + a2 * a * a;
        return Sd * a + beta * std::sqrt(q > 0.0 ? q : 0.0);
    };
    double best_a = 0.0;
    double best_f = value(0.0);
    const double f1 = value(1.0);
    if (f1 < best_f) { best_f = f1; best_a = 1.0; }

    const double qa = beta * beta * a2 * a2 - Sd * Sd * a2;
    const double qb = 2.0 * (beta * beta * a2 * b1 - Sd * Sd * b1);
    const double qc = beta * beta * b1 * b1 - Sd * Sd * c0;
    double roots[2];
    int n_roots = 0;
    if (std::abs(qa) > 0.0) {
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            roots[n_roots++] = (-qb + sq) / (2.0 * qa);
            roots[n_roots++] = (-qb - sq) / (2.0 * qa);
        }
    } else if (std::abs(qb) > 0.0) {
        roots[n_roots++] = -qc / qb;
    }
    for (int i = 0; i < n_roots; ++i) {
        const double a = roots[i];
        if (!(a > 0.0 && a < 1.0) || !std::isfinite(a)) continue;
        const double f = value(a);
        if (f < best_f) { best_f = f; best_a = a; }
    }
    return best_a;
}

}  // namespace

RippleSolution solve(const RippleProblem& p, const SolveSettings& st,
                     const Eigen::MatrixX3d* warm_start)
{
    SolveSettings cfg = st;
    // the parallel kernels only pay off on large row counts
    if (p.rows.rows() < 16384) cfg.exec = Exec::serial;

    const Eigen::Index n = p.n_points;
    const double sign = p.target >= 0.0 ? 1.0 : -1.0;
    for (Eigen::Index k = 0; k < n; ++k)
        if ((sign * p.grid_gains.row(k).array()).maxCoeff() <= 0.0) {
            std::ostringstream os;
            os << "solve: grid point " << k << " (theta_e=" << p.grid_theta_e[k]
               << ") cannot produce torque of sign " << p.target;
            throw InfeasibleError(os.str());
        }

    RowMat3 x(n, 3);
    if (warm_start) {
        x = *warm_start;
        kernels::project(p.grid_gains, p.target, x, cfg.exec);
    } else {
        for (Eigen::Index k = 0; k < n; ++k)
            x.row(k) = per_point_lp(p.grid_gains.row(k).transpose(), p.target).transpose();
    }

    Eigen::VectorXd r, w;
    RowMat3 gx(n, 3), g_prev(n, 3), x_prev(n, 3), cand(n, 3), d(n, 3);

    // gradient of sum(F) + beta*||A F - target||; also refreshes r at f
    auto grad_at = [&](const RowMat3& f, RowMat3& g) {
        kernels::residual(p.rows, p.subsamples, f, p.target, r, cfg.exec);
        const double nr = norm2(r);
        const double scale = (p.beta > 0.0 && nr > 0.0) ? p.beta / nr : 0.0;
        kernels::gradient(p.rows, p.subsamples, r, scale, g, cfg.exec);
        return sum_entries(f) + p.beta * nr;
    };

    // relative stationarity: unit-step gradient mapping over gradient norm
    auto pg_rel_at = [&](const RowMat3& f) {
        grad_at(f, gx);
        const double gn = std::sqrt(dot_all(gx, gx));
        cand = f - gx;
        kernels::project(p.grid_gains, p.target, cand, cfg.exec);
        d = f - cand;
        return std::sqrt(dot_all(d, d)) / std::max(1.0, gn);
    };

    double fx = grad_at(x, gx);
    double t = 1.0;
    if (p.beta > 0.0) {
        const double fro2 = p.rows.squaredNorm();
        t = std::max(norm2(r), 1e-12) / (p.beta * fro2);
    }
    t = std::min(std::max(t, 1e-14), 1e8);

    std::deque<double> hist{fx};
    bool have_prev = false;
    bool converged = false;
    long iter = 0;
    double eq_res = 0.0, pg = 0.0;

    for (iter = 1; iter <= cfg.max_iters; ++iter) {
        grad_at(x, gx);

        if (have_prev) {
            // alternating safeguarded Barzilai-Borwein step
            d = x - x_prev;          // dx
            cand = gx - g_prev;      // dg
            const double sy = dot_all(d, cand);
            if (sy > 0.0) {
                const double tb = (iter % 2 == 0) ? sy / dot_all(cand, cand)
                                                  : dot_all(d, d) / sy;
                if (std::isfinite(tb) && tb > 0.0)
                    t = std::min(std::max(tb, 1e-14), 1e8);
            }
        }

        cand = x - t * gx;
        kernels::project(p.grid_gains, p.target, cand, cfg.exec);
        d = cand - x;

        // exact line search along the feasible segment [x, cand]
        double Sd = sum_entries(d);
        double alpha;
        if (p.beta > 0.0) {
            kernels::apply(p.rows, p.subsamples, d, w, cfg.exec);
            alpha = exact_segment_step(Sd, p.beta, w.squaredNorm(), r.dot(w),
                                       r.squaredNorm());
        } else {
            alpha = Sd < 0.0 ? 1.0 : 0.0;
        }

        x_prev = x;
        g_prev = gx;
        if (alpha != 0.0) x = x + alpha * d;
        have_prev = true;

        kernels::residual(p.rows, p.subsamples, x, p.target, r, cfg.exec);
        fx = sum_entries(x) + p.beta * norm2(r);

        hist.push_back(fx);
        if ((int)hist.size() > cfg.obj_window + 1) hist.pop_front();
        if ((int)hist.size() == cfg.obj_window + 1) {
            const double drop = hist.front() - hist.back();
            if (drop < cfg.obj_rel_tol * std::max(1.0, std::abs(hist.back()))) {
                eq_res = max_eq_residual(p, x);
                pg = pg_rel_at(x);
                if (eq_res <= cfg.eq_tol && pg <= cfg.pg_tol) {
                    converged = true;
                    break;
                }
            }
        }
    }

    if (!converged) {
        eq_res = max_eq_residual(p, x);
        pg = pg_rel_at(x);
        std::ostringstream os;
        os << "solve: no convergence after " << cfg.max_iters
           << " iterations (objective=" << fx << ", eq_residual=" << eq_res
           << ", pg_rel=" << pg << ")";
        throw NumericError(os.str());
    }

    RippleSolution sol;
    sol.table = x;
    kernels::residual(p.rows, p.subsamples, x, p.target, r, cfg.exec);
    sol.ripple_norm = norm2(r);
    sol.power_l1 = sum_entries(x);
    sol.objective = sol.power_l1 + p.beta * sol.ripple_norm;
    sol.eq_residual = eq_res;
    sol.pg_norm = pg;
    sol.iterations = iter;
    return sol;
}

}  // namespace srm

#include "srm/gp.hpp"

#include <cmath>
#include <sstream>

#include "srm/errors.hpp"
#include "srm/nelder_mead.hpp"

namespace srm {

Eigen::Vector2d warp(double phi, double period)
{
    if (!(period > 0.0)) throw ConfigError("warp: period must be positive");
    return PeriodicWarp{period}(phi);
}

namespace {

constexpr int kMaxMu = 16;

double exact_factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Matern series prepared for Horner evaluation: coeff[j] multiplies
// rho^(mu-j), so coeff[mu] is the constant term and equals exactly 1,
// which keeps k(x,x) = sigma_f^2 exact.
struct MaternPoly {
    int mu;
    double inv_ell;
    double signal_var;
    double root;  // sqrt(2*mu + 1)
    double coeff[kMaxMu + 1];

    explicit MaternPoly(const MaternSpec& spec)
        : mu(spec.mu), inv_ell(1.0 / spec.length_scale), signal_var(spec.signal_var),
          root(std::sqrt(2.0 * spec.mu + 1.0))
    {
        if (spec.mu < 0 || spec.mu > kMaxMu || !(spec.length_scale > 0.0) ||
            !(spec.signal_var > 0.0))
            throw ConfigError("matern: invalid kernel parameters");
        for (int j = 0; j <= mu; ++j) {
            const int i = j;  // series index; power is mu - i
            const double num = exact_factorial(mu) * exact_factorial(mu + i);
            const double den = exact_factorial(2 * mu) * exact_factorial(i) *
                               exact_factorial(mu - i);
            coeff[j] = (num / den) * std::pow(2.0 * root, mu - i);
        }
    }

    double eval(double distance) const
    {
        const double rho = distance * inv_ell;
        if (rho == 0.0) return signal_var;
        double poly = coeff[0];
        for (int j = 1; j <= mu; ++j) poly = poly * rho + coeff[j];
        return signal_var * std::exp(-root * rho) * poly;
    }
};

}  // namespace

double matern_from_distance(double distance, const MaternSpec& spec)
{
    return MaternPoly(spec).eval(distance);
}

double matern(const Eigen::Vector2d& x, const Eigen::Vector2d& xp,
              const MaternSpec& spec)
{
    return matern_from_distance((x - xp).norm(), spec);
}

namespace {

void gram_from_distances(const Eigen::MatrixXd& d, const MaternSpec& spec,
                         Eigen::MatrixXd& k, Exec exec)
{
    const Eigen::Index n = d.rows();
    const MaternPoly poly(spec);
    k.resize(n, n);
    if (n >= 32) {
        // whole-matrix Horner + exp vectorize well; d is exactly symmetric,
        // so k comes out exactly symmetric too
        Eigen::ArrayXXd rho = d.array() * poly.inv_ell;
        Eigen::ArrayXXd acc = Eigen::ArrayXXd::Constant(n, n, poly.coeff[0]);
        for (int j = 1; j <= poly.mu; ++j) acc = acc * rho + poly.coeff[j];
        k = (poly.signal_var * (-poly.root * rho).exp() * acc).matrix();
        k.diagonal().setConstant(spec.signal_var);
        return;
    }
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (Eigen::Index i = 0; i < n; ++i) {
        k(i, i) = spec.signal_var;
        for (Eigen::Index j = 0; j < i; ++j) {
            const double v = poly.eval(d(i, j));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
}

std::vector<double> circle_angles_of(const std::vector<double>& phis,
                                     const PeriodicWarp& w)
{
    std::vector<double> u(phis.size());
    for (size_t i = 0; i < phis.size(); ++i)
        u[i] = kTwoPi * std::remainder(phis[i], w.period) / w.period;
    return u;
}

}  // namespace

Eigen::MatrixXd gram(const std::vector<double>& phis, const MaternSpec& spec,
                     const PeriodicWarp& w, Exec exec)
{
    Eigen::MatrixXd d, k;
    kernels::chord_distances(circle_angles_of(phis, w), d, exec);
    gram_from_distances(d, spec, k, exec);
    return k;
}

namespace {

struct Factorized {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter = 0;
};

// SPD factorization of K + sigma_n^2 I with decade jitter escalation.
Factorized factorize(const Eigen::MatrixXd& k, double sigma_n2)
{
    const double scale = k(0, 0);  // diagonal is sigma_f^2
    Factorized out;
    Eigen::MatrixXd kn = k;
    kn.diagonal().array() += sigma_n2;
    out.llt.compute(kn);
    if (out.llt.info() == Eigen::Success) return out;

    for (double jitter = 1e-12 * scale; jitter <= 1e-6 * scale; jitter *= 10.0) {
        Eigen::MatrixXd kj = kn;
        kj.diagonal().array() += jitter;
        out.llt.compute(kj);
        if (out.llt.info() == Eigen::Success) {
            out.jitter = jitter;
            return out;
        }
    }
    const double dmax = kn.diagonal().maxCoeff();
    const double dmin = kn.diagonal().minCoeff();
    std::ostringstream os;
    os << "fit_weights: Gram matrix not factorizable after jitter escalation "
       << "(n=" << k.rows() << ", diag range [" << dmin << ", " << dmax
       << "], condition estimate > " << dmax / (1e-6 * scale) << ")";
    throw NumericError(os.str());
}

}  // namespace

FitWeights fit_weights(const Eigen::VectorXd& targets, const Eigen::MatrixXd& k,
                       double sigma_n2)
{
    if (!(sigma_n2 > 0.0)) throw ConfigError("fit_weights: sigma_n^2 must be > 0");
    Factorized f = factorize(k, sigma_n2);
    FitWeights w;
    w.alpha = f.llt.solve(targets);
    w.jitter = f.jitter;
    return w;
}

double log_marginal(const Eigen::VectorXd& targets, const Eigen::MatrixXd& k,
                    double sigma_n2)
{
    if (!(sigma_n2 > 0.0)) throw ConfigError("log_marginal: sigma_n^2 must be > 0");
    Factorized f = factorize(k, sigma_n2);
    const Eigen::VectorXd alpha = f.llt.solve(targets);
    double logdet = 0.0;
    const auto& l = f.llt.matrixLLT();
    for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += std::log(l(i, i));
    logdet *= 2.0;
    const double n = static_cast<double>(targets.size());
    return -0.5 * targets.dot(alpha) - 0.5 * logdet - 0.5 * n * std::log(kTwoPi);
}

double log_marginal(const Eigen::VectorXd& targets, const std::vector<double>& phis,
                    const MaternSpec& spec, double sigma_n2, const PeriodicWarp& w)
{
    return log_marginal(targets, gram(phis, spec, w, Exec::serial), sigma_n2);
}

Hyperparams optimize_hyperparams(const Eigen::VectorXd& targets,
                                 const std::vector<double>& circle_angles,
                                 const HyperSearchOptions& opt)
{
    const auto n = static_cast<Eigen::Index>(circle_angles.size());
    if (n < 3)
        throw ConfigError("optimize_hyperparams: need at least 3 training points");
    if (targets.size() != n)
        throw ConfigError("optimize_hyperparams: target/angle size mismatch");

    Eigen::MatrixXd dist;
    kernels::chord_distances(circle_angles, dist, Exec::serial);

    double mean_spacing = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i) mean_spacing += dist(i, i + 1);
    mean_spacing /= static_cast<double>(n - 1);
    if (!(mean_spacing > 0.0)) mean_spacing = 1.0;

    const double mean = targets.mean();
    double var = (targets.array() - mean).square().sum() / static_cast<double>(n);
    if (!(var > 0.0)) var = 1e-12;

    const double lo = std::log(opt.log_bound_lo), hi = std::log(opt.log_bound_hi);
    const double huge = 1e300;
    auto objective = [&](const Eigen::VectorXd& z) -> double {
        for (int i = 0; i < 3; ++i)
            if (!(z[i] >= lo && z[i] <= hi)) return huge;
        MaternSpec spec{opt.mu, std::exp(z[0]), std::exp(z[1])};
        Eigen::MatrixXd k;
        gram_from_distances(dist, spec, k, Exec::serial);
        try {
            return -log_marginal(targets, k, std::exp(z[2]));
        } catch (const NumericError&) {
            return huge;
        }
    };

    struct StartResult {
        double value;
        Eigen::VectorXd x;
        int evals;
    };
    const int n_ell = static_cast<int>(opt.ell_factors.size());
    const int n_sf = static_cast<int>(opt.sf2_factors.size());
    const int n_sn = static_cast<int>(opt.sn2_factors.size());
    const int n_starts = n_ell * n_sf * n_sn;
    std::vector<StartResult> results(n_starts);

#pragma omp parallel for schedule(static) if (opt.exec == Exec::parallel)
    for (int s = 0; s < n_starts; ++s) {
        const int ie = s / (n_sf * n_sn);
        const int isf = (s / n_sn) % n_sf;
        const int isn = s % n_sn;
        Eigen::VectorXd z0(3);
        z0 << std::log(opt.ell_factors[ie] * mean_spacing),
            std::log(opt.sf2_factors[isf] * var),
            std::log(opt.sn2_factors[isn] * var);
        NelderMeadResult r = nelder_mead(objective, z0, 0.5, opt.diameter_tol,
                                         opt.max_evaluations);
        results[s] = {r.value, r.x, r.evaluations};
    }

    int best = -1;
    for (int s = 0; s < n_starts; ++s) {
        if (results[s].value >= huge) continue;
        if (best < 0 || results[s].value < results[best].value) best = s;
    }
    if (best < 0)
        throw NumericError("optimize_hyperparams: every start failed factorization");

    Hyperparams h;
    h.length_scale = std::exp(results[best].x[0]);
    h.signal_var = std::exp(results[best].x[1]);
    h.noise_var = std::exp(results[best].x[2]);
    h.log_marginal = -results[best].value;
    return h;
}

GpCommutation::GpCommutation(MotorGeometry geometry, std::vector<double> train_theta_e,
                             std::array<GpCoil, 3> pos, std::array<GpCoil, 3> neg)
    : geometry_(geometry),
      train_theta_(std::move(train_theta_e)),
      pos_(std::move(pos)),
      neg_(std::move(neg))
{
    const auto n = static_cast<Eigen::Index>(train_theta_.size());
    for (int c = 0; c < 3; ++c)
        if (pos_[c].alpha.size() != n || neg_[c].alpha.size() != n)
            throw ConfigError("GpCommutation: weight vector length != training size");
    train_x_.resize(train_theta_.size());
    for (size_t i = 0; i < train_theta_.size(); ++i)
        train_x_[i] = Eigen::Vector2d(std::sin(train_theta_[i]),
                                      std::cos(train_theta_[i]));
}

double GpCommutation::predict_electrical(double theta_e, int coil, double sign) const
{
    const GpCoil& g = sign >= 0 ? pos_[coil] : neg_[coil];
    const MaternPoly poly(g.spec);
    const double u = std::remainder(theta_e, kTwoPi);
    const double sx = std::sin(u), cx = std::cos(u);
    double acc = 0.0;
    for (size_t i = 0; i < train_x_.size(); ++i) {
        const double ds = sx - train_x_[i][0];
        const double dc = cx - train_x_[i][1];
        acc += poly.eval(std::sqrt(ds * ds + dc * dc)) *
               g.alpha[static_cast<Eigen::Index>(i)];
    }
    return acc;
}

double GpCommutation::predict(double phi, int coil, double sign) const
{
    const double phi_m = std::remainder(phi, geometry_.spatial_period());
    return predict_electrical(geometry_.electrical(phi_m), coil, sign);
}

Vec3 GpCommutation::shares_pos(double phi) const
{
    const double phi_m = std::remainder(phi, geometry_.spatial_period());
    const double theta_e = geometry_.electrical(phi_m);
    return Vec3(clamp_share(predict_electrical(theta_e, 0, 1.0)),
                clamp_share(predict_electrical(theta_e, 1, 1.0)),
                clamp_share(predict_electrical(theta_e, 2, 1.0)));
}

Vec3 GpCommutation::shares_neg(double phi) const
{
    const double phi_m = std::remainder(phi, geometry_.spatial_period());
    const double theta_e = geometry_.electrical(phi_m);
    return Vec3(clamp_share(predict_electrical(theta_e, 0, -1.0)),
                clamp_share(predict_electrical(theta_e, 1, -1.0)),
                clamp_share(predict_electrical(theta_e, 2, -1.0)));
}

void predict_batch(const GpCommutation& gp, int coil, double sign,
                   const std::vector<double>& phis, Eigen::VectorXd& out, Exec exec)
{
    const auto n = static_cast<Eigen::Index>(phis.size());
    out.resize(n);
#pragma omp parallel for schedule(static) if (exec == Exec::parallel)
    for (Eigen::Index i = 0; i < n; ++i)
        out[i] = gp.predict(phis[i], coil, sign);
}

std::array<GpCoil, 3> fit_table_gps(const CommutationTable& table,
                                    const HyperSearchOptions& opt,
                                    std::array<GpFitDiagnostics, 3>* diagnostics)
{
    const auto n = static_cast<Eigen::Index>(table.theta_e.size());
    Eigen::MatrixXd dist;
    kernels::chord_distances(table.theta_e, dist, opt.exec);

    std::array<GpCoil, 3> coils;
    for (int c = 0; c < 3; ++c) {
        const Eigen::VectorXd targets = table.values.col(c);
        Hyperparams h = optimize_hyperparams(targets, table.theta_e, opt);

        GpCoil gc;
        gc.spec = MaternSpec{opt.mu, h.length_scale, h.signal_var};
        gc.sigma_n2 = h.noise_var;

        Eigen::MatrixXd k;
        gram_from_distances(dist, gc.spec, k, opt.exec);
        FitWeights w = fit_weights(targets, k, gc.sigma_n2);
        gc.alpha = w.alpha;

        if (diagnostics) {
            GpFitDiagnostics& d = (*diagnostics)[c];
            d.log_marginal = h.log_marginal;
            d.jitter = w.jitter;
            // posterior at the training angles is (K alpha); the residual to
            // the targets is sigma_n^2 * alpha plus jitter effects
            const Eigen::VectorXd at_train = k * gc.alpha;
            d.max_interp_error = (at_train - targets).cwiseAbs().maxCoeff();
            // clamp size on a dense probe across one period
            const int n_probe = 2000;
            const MaternPoly poly(gc.spec);
            double min_pred = 0.0;
            for (int i = 0; i < n_probe; ++i) {
                const double theta = -kTwoPi / 2.0 + kTwoPi * i / n_probe;
                const double sx = std::sin(theta), cx = std::cos(theta);
                double acc = 0.0;
                for (Eigen::Index j = 0; j < n; ++j) {
                    const double ds = sx - std::sin(table.theta_e[j]);
                    const double dc = cx - std::cos(table.theta_e[j]);
                    acc += poly.eval(std::sqrt(ds * ds + dc * dc)) * gc.alpha[j];
                }
                min_pred = std::min(min_pred, acc);
            }
            d.max_clamp = min_pred < 0.0 ? -min_pred : 0.0;
            const double scale = targets.cwiseAbs().maxCoeff();
            d.clamp_flagged = d.max_clamp > 1e-6 * scale;
        }
        coils[c] = std::move(gc);
    }
    return coils;
}

}  // namespace srm

#include "srm/nelder_mead.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace srm {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& start, double step,
                             double diameter_tol, int max_evaluations)
{
    const int n = static_cast<int>(start.size());
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    std::vector<Eigen::VectorXd> v(n + 1, start);
    std::vector<double> fv(n + 1);
    int evals = 0;

    for (int i = 1; i <= n; ++i) v[i][i - 1] += step;
    for (int i = 0; i <= n; ++i) { fv[i] = f(v[i]); ++evals; }

    std::vector<int> order(n + 1);
    auto sort_order = [&]() {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](int a, int b) { return fv[a] < fv[b]; });
    };

    NelderMeadResult res;
    while (evals < max_evaluations) {
        sort_order();
        const int best = order[0], worst = order[n], second_worst = order[n - 1];

        double diameter = 0.0;
        for (int i = 0; i <= n; ++i)
            diameter = std::max(diameter,
                                (v[i] - v[best]).cwiseAbs().maxCoeff());
        if (diameter < diameter_tol) { res.converged = true; break; }

        Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
        for (int i = 0; i <= n; ++i)
            if (i != worst) centroid += v[i];
        centroid /= n;

        Eigen::VectorXd xr = centroid + alpha * (centroid - v[worst]);
        double fr = f(xr); ++evals;

        if (fr < fv[best]) {
            Eigen::VectorXd xe = centroid + gamma * (centroid - v[worst]);
            double fe = f(xe); ++evals;
            if (fe < fr) { v[worst] = xe; fv[worst] = fe; }
            else { v[worst] = xr; fv[worst] = fr; }
        } else if (fr < fv[second_worst]) {
            v[worst] = xr; fv[worst] = fr;
        } else {
            Eigen::VectorXd xc = fr < fv[worst]
                                     ? centroid + rho * (xr - centroid)
                                     : centroid + rho * (v[worst] - centroid);
            double fc = f(xc); ++evals;
            if (fc < std::min(fr, fv[worst])) {
                v[worst] = xc; fv[worst] = fc;
            } else {
                for (int i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    v[i] = v[best] + sigma * (v[i] - v[best]);
                    fv[i] = f(v[i]); ++evals;
                    if (evals >= max_evaluations) break;
                }
            }
        }
    }

    sort_order();
    res.x = v[order[0]];
    res.value = fv[order[0]];
    res.evaluations = evals;
    return res;
}

}  // namespace srm

#include "srm/projection.hpp"

#include <cmath>
#include <limits>

#include "srm/errors.hpp"

namespace srm {

Eigen::Vector3d project_feasible(const Eigen::Vector3d& y, const Eigen::Vector3d& g,
                                 double target)
{
    double best_dist = std::numeric_limits<double>::infinity();
    Eigen::Vector3d best = Eigen::Vector3d::Zero();
    bool found = false;

    // mask bit c set -> coil c free, clear -> pinned at zero
    for (int mask = 1; mask < 8; ++mask) {
        double gz2 = 0.0, gy = 0.0;
        for (int c = 0; c < 3; ++c)
            if (mask & (1 << c)) {
                gz2 += g[c] * g[c];
                gy += g[c] * y[c];
            }
        if (gz2 <= 0.0) continue;  // free coils cannot reach a nonzero target
        const double lambda = (target - gy) / gz2;

        Eigen::Vector3d f = Eigen::Vector3d::Zero();
        bool feasible = true;
        double dist = 0.0;
        for (int c = 0; c < 3; ++c) {
            if (mask & (1 << c)) {
                f[c] = y[c] + lambda * g[c];
                if (f[c] < 0.0) { feasible = false; break; }
            }
            const double dc = f[c] - y[c];
            dist += dc * dc;
        }
        if (!feasible) continue;
        if (dist < best_dist) {
            best_dist = dist;
            best = f;
            found = true;
        }
    }

    if (!found)
        throw InfeasibleError(
            "project_feasible: empty feasible set (no coil gain with the target's sign)");
    return best;
}

Eigen::Vector3d per_point_lp(const Eigen::Vector3d& g, double target)
{
    const double sign = target >= 0.0 ? 1.0 : -1.0;
    int best = -1;
    double best_gain = 0.0;
    for (int c = 0; c < 3; ++c) {
        const double gain = sign * g[c];
        if (gain > best_gain) { best_gain = gain; best = c; }
    }
    if (best < 0)
        throw InfeasibleError(
            "per_point_lp: empty feasible set (no coil gain with the target's sign)");
    Eigen::Vector3d f = Eigen::Vector3d::Zero();
    f[best] = target / g[best];
    return f;
}

}  // namespace srm

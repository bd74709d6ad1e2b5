#pragma once

#include <cmath>

namespace srm {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// Wrap an angle to [-pi, pi): phi - 2*pi*floor((phi + pi)/(2*pi)).
inline double wrap_relative(double phi)
{
    double w = phi - kTwoPi * std::floor((phi + kTwoPi / 2.0) / kTwoPi);
    // floor rounding can leave w == pi for inputs a hair under the seam
    if (w >= kTwoPi / 2.0) w -= kTwoPi;
    if (w < -kTwoPi / 2.0) w += kTwoPi;
    return w;
}

/// Wrap an angle to [0, 2*pi).
inline double wrap_two_pi(double x)
{
    double w = x - kTwoPi * std::floor(x / kTwoPi);
    if (w >= kTwoPi) w -= kTwoPi;
    if (w < 0.0) w += kTwoPi;
    return w;
}

}  // namespace srm

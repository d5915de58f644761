#pragma once

#include <cmath>

#include "girsanov/numerics.hpp"

namespace girsanov {

// Young pair used throughout: theta(a) = e^a - a - 1 and its convex conjugate
// theta_star(b) = (b+1)log(b+1) - b on b > -1, 1 at b = -1, +inf below.
// Both switch to truncated series below 1e-4 where the direct expressions
// cancel catastrophically; the branches agree to ~1e-14 at the threshold.

inline double theta(double a) {
    if (std::abs(a) < 1e-4) {
        return a * a * (1.0 / 2.0 + a * (1.0 / 6.0 + a * (1.0 / 24.0)));
    }
    return std::expm1(a) - a;
}

inline double theta_star(double b) {
    if (b < -1.0) return kInf;
    if (b == -1.0) return 1.0;
    if (std::abs(b) < 1e-4) {
        return b * b * (1.0 / 2.0 + b * (-1.0 / 6.0 + b * (1.0 / 12.0)));
    }
    return (b + 1.0) * std::log1p(b) - b;
}

inline double xlogx(double x) {
    return x > 0.0 ? x * std::log(x) : 0.0;  // 0 log 0 = 0
}

// a*b <= (a log a - a + 1) + (e^b - 1) for a >= 0, b in [-inf, inf), with the
// conventions 0 log 0 = 0, e^{-inf} = 0, -inf * 0 = 0. Returns the slack;
// zero exactly when a = e^b.
inline double fenchel_gap(double a, double b) {
    double lhs = (a > 0.0 && b > -kInf) ? a * b : 0.0;
    double eb = (b == -kInf) ? 0.0 : std::exp(b);
    return (xlogx(a) - a + 1.0) + (eb - 1.0) - lhs;
}

// KL rate of a Poisson intensity tilt: ell log ell - ell + 1, with the
// convention value 1 at ell = 0. Coincides with theta_star(ell - 1).
inline double poisson_kl_integrand(double ell) {
    if (ell == 0.0) return 1.0;
    return theta_star(ell - 1.0);
}

}  // namespace girsanov

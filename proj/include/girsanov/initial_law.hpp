#pragma once

#include <cmath>
#include <functional>
#include <utility>

#include "girsanov/numerics.hpp"
#include "girsanov/rng.hpp"

namespace girsanov {

// Initial laws of the reference (R0) and target (P0) measures together with
// the log density ratio log dP0/dR0 evaluated at a start point.
struct InitialLaw {
    std::function<void(RandomStream&, Vec&)> sample_r0;
    std::function<void(RandomStream&, Vec&)> sample_p0;
    std::function<double(const Vec&)> log_dp0_dr0;

    static InitialLaw point_mass(Vec x0) {
        InitialLaw law;
        auto sampler = [x0 = std::move(x0)](RandomStream&, Vec& out) { out = x0; };
        law.sample_r0 = sampler;
        law.sample_p0 = sampler;
        law.log_dp0_dr0 = [](const Vec&) { return 0.0; };
        return law;
    }

    // iid coordinates, R0 = N(mr, sr^2)^d and P0 = N(mp, sp^2)^d.
    static InitialLaw gaussian(std::size_t d, double mr, double sr, double mp, double sp) {
        InitialLaw law;
        law.sample_r0 = [d, mr, sr](RandomStream& rs, Vec& out) {
            out.resize(d);
            for (auto& c : out) c = mr + sr * rs.gaussian();
        };
        law.sample_p0 = [d, mp, sp](RandomStream& rs, Vec& out) {
            out.resize(d);
            for (auto& c : out) c = mp + sp * rs.gaussian();
        };
        law.log_dp0_dr0 = [mr, sr, mp, sp](const Vec& x) {
            double s = 0.0;
            for (double c : x) {
                double zr = (c - mr) / sr;
                double zp = (c - mp) / sp;
                s += std::log(sr / sp) + 0.5 * (zr * zr - zp * zp);
            }
            return s;
        };
        return law;
    }
};

// KL of N(mp, sp^2) against N(mr, sr^2), per coordinate.
inline double gaussian_kl(double mp, double sp, double mr, double sr) {
    double v = sp / sr;
    double m = (mp - mr) / sr;
    return std::log(1.0 / v) + 0.5 * (v * v + m * m - 1.0);
}

}  // namespace girsanov

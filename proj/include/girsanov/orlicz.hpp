#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "girsanov/jump.hpp"
#include "girsanov/numerics.hpp"
#include "girsanov/young.hpp"

namespace girsanov {

// Discrete stand-in for a measure: (value, mass) atoms. All Orlicz
// arithmetic runs on this one representation; continuous measures enter via
// the jump module's quadrature nodes.
struct WeightedSample {
    std::vector<std::pair<double, double>> atoms;  // (value, mass >= 0)

    void validate() const {
        double total = 0.0;
        for (auto [v, m] : atoms) {
            (void)v;
            if (!(m >= 0.0)) throw std::invalid_argument("WeightedSample: negative mass");
            total += m;
        }
        if (!std::isfinite(total)) throw std::invalid_argument("WeightedSample: infinite mass");
    }

    double total_mass() const {
        KahanSum s;
        for (auto [v, m] : atoms) {
            (void)v;
            s.add(m);
        }
        return s.value();
    }
};

enum class YoungKind { theta, theta_star };

inline double young_eval(YoungKind kind, double a) {
    return kind == YoungKind::theta ? theta(a) : theta_star(a);
}

// Luxemburg norm inf{a > 0 : sum young(|h_i| / a) m_i <= 1}, by bisection on
// the monotone Young integral. Returns 0 for h == 0 on the support and +inf
// if the bracket growth limit is exhausted without bringing the integral
// under 1.
inline double luxemburg_norm(const WeightedSample& h, YoungKind kind) {
    h.validate();
    double vmax = 0.0;
    for (auto [v, m] : h.atoms)
        if (m > 0.0) vmax = std::max(vmax, std::abs(v));
    if (vmax == 0.0) return 0.0;

    auto young_integral = [&](double a) {
        KahanSum s;
        for (auto [v, m] : h.atoms) {
            if (m == 0.0) continue;
            s.add(young_eval(kind, std::abs(v) / a) * m);
        }
        return s.value();
    };

    double hi = vmax;
    int growth = 0;
    while (young_integral(hi) > 1.0) {
        hi *= 2.0;
        if (++growth > 200) return kInf;
    }
    double lo = hi;
    int shrink = 0;
    while (young_integral(lo) <= 1.0) {
        lo *= 0.5;
        if (++shrink > 200) return 0.0;  // integral never exceeds 1: norm is 0
    }
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (young_integral(mid) <= 1.0)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// Energy functional of the tilt: sum theta_star(|ell_i - 1|) m_i. The sample
// values are tilt levels ell >= 0.
inline double energy_estimate(const WeightedSample& tilt_values) {
    tilt_values.validate();
    KahanSum s;
    for (auto [ell, m] : tilt_values.atoms) {
        if (m == 0.0) continue;
        if (!(ell >= 0.0)) throw std::invalid_argument("energy_estimate: tilt must be >= 0");
        s.add(theta_star(std::abs(ell - 1.0)) * m);
    }
    return s.value();
}

struct HolderCheck {
    double lhs = 0.0;  // sum z_i u_i m_i
    double rhs = 0.0;  // 2 ||z||_{theta*} ||u||_theta
    bool holds = false;
};

// Orlicz Hoelder inequality E(zu) <= 2 ||z||_{theta*} ||u||_theta on a shared
// atom set carrying the base measure's masses.
inline HolderCheck orlicz_holder_check(const WeightedSample& z, const WeightedSample& u) {
    if (z.atoms.size() != u.atoms.size())
        throw std::invalid_argument("orlicz_holder_check: atom sets differ in size");
    for (std::size_t i = 0; i < z.atoms.size(); ++i)
        if (z.atoms[i].second != u.atoms[i].second)
            throw std::invalid_argument("orlicz_holder_check: base masses differ");
    HolderCheck c;
    KahanSum s;
    for (std::size_t i = 0; i < z.atoms.size(); ++i)
        s.add(z.atoms[i].first * u.atoms[i].first * z.atoms[i].second);
    c.lhs = s.value();
    c.rhs = 2.0 * luxemburg_norm(z, YoungKind::theta_star) * luxemburg_norm(u, YoungKind::theta);
    c.holds = c.lhs <= c.rhs * (1.0 + 1e-12) + 1e-300;
    return c;
}

struct HprReport {
    double small_moment = 0.0;  // int 1_{|q|<=1} |h|^p dLbar
    double large_moment = 0.0;  // int 1_{|q|>1} |h|^r dLbar
    bool small_finite = true;
    bool large_finite = true;
};

// Membership moments for the class of integrands with p-th power small-jump
// and r-th power large-jump integrability, by quadrature over the kernel and
// the time rate. |q| <= 1 is inclusive.
inline HprReport hpr_membership(const std::function<double(double, std::span<const double>)>& h,
                                const JumpSpec& spec, double p, double r,
                                std::size_t time_cells = 256) {
    HprReport rep;
    KahanSum small, large;
    double dt = 1.0 / static_cast<double>(time_cells);
    for (std::size_t i = 0; i < time_cells; ++i) {
        double t = (static_cast<double>(i) + 0.5) * dt;
        double rate = spec.rho_rate(t);
        if (rate == 0.0) continue;
        spec.kernel.for_each_node([&](std::span<const double> q, double w) {
            double n2 = 0.0;
            for (double c : q) n2 += c * c;
            double hv = std::abs(h(t, q));
            if (n2 <= 1.0)
                small.add(rate * w * dt * std::pow(hv, p));
            else
                large.add(rate * w * dt * std::pow(hv, r));
        });
    }
    rep.small_moment = small.value();
    rep.large_moment = large.value();
    rep.small_finite = std::isfinite(rep.small_moment);
    rep.large_finite = std::isfinite(rep.large_moment);
    return rep;
}

}  // namespace girsanov

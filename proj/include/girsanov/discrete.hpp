#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "girsanov/numerics.hpp"
#include "girsanov/young.hpp"

namespace girsanov {

// Finite probability distribution over labelled atoms.
class DiscreteDist {
public:
    DiscreteDist(std::vector<std::string> labels, Vec probs)
        : labels_(std::move(labels)), probs_(std::move(probs)) {
        if (labels_.size() != probs_.size())
            throw std::invalid_argument("DiscreteDist: labels/probs size mismatch");
        KahanSum s;
        for (double p : probs_) {
            if (!(p >= 0.0)) throw std::invalid_argument("DiscreteDist: negative probability");
            s.add(p);
        }
        if (std::abs(s.value() - 1.0) > 1e-12)
            throw std::invalid_argument("DiscreteDist: probabilities do not sum to 1");
    }

    std::size_t size() const { return labels_.size(); }
    const std::vector<std::string>& labels() const { return labels_; }
    const Vec& probs() const { return probs_; }
    double prob(std::size_t i) const { return probs_[i]; }

private:
    std::vector<std::string> labels_;
    Vec probs_;
};

inline void require_shared_labels(const DiscreteDist& p, const DiscreteDist& r) {
    if (p.labels() != r.labels())
        throw std::invalid_argument("mismatched label sets");
}

// H(p|r) = sum p_i log(p_i / r_i), with 0 log(0/r) = 0; +inf if p charges an
// r-null atom.
inline double kl_divergence(const DiscreteDist& p, const DiscreteDist& r) {
    require_shared_labels(p, r);
    KahanSum s;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double pi = p.prob(i);
        if (pi == 0.0) continue;
        double ri = r.prob(i);
        if (ri == 0.0) return kInf;
        s.add(pi * std::log(pi / ri));
    }
    return s.value();
}

// Donsker-Varadhan objective: sum u dP - log sum e^u dR, with e^{-inf} = 0.
// u may take -inf; an atom with p > 0 and u = -inf sends the objective to
// -inf. Returns +inf when all r-mass sits where u = -inf (the supremum is
// unconstrained there).
inline double dv_objective(const std::map<std::string, double>& u, const DiscreteDist& p,
                           const DiscreteDist& r) {
    require_shared_labels(p, r);
    KahanSum linear;
    KahanSum mass;
    for (std::size_t i = 0; i < p.size(); ++i) {
        auto it = u.find(p.labels()[i]);
        if (it == u.end()) throw std::invalid_argument("dv_objective: u missing a label");
        double ui = it->second;
        if (p.prob(i) > 0.0) {
            if (ui == -kInf) return -kInf;
            linear.add(ui * p.prob(i));
        }
        if (r.prob(i) > 0.0 && ui > -kInf) mass.add(std::exp(ui) * r.prob(i));
    }
    double z = mass.value();
    if (z == 0.0) return kInf;
    return linear.value() - std::log(z);
}

struct SearchConfig {
    int max_sweeps = 20000;
    double tol = 1e-13;           // stop when a full sweep improves less than this
    double divergence_cap = 1e3;  // value beyond which the supremum is reported unbounded
};

struct DvResult {
    double value = 0.0;
    bool converged = false;  // stationary within tol
    bool diverged = false;   // exceeded the divergence cap (p not << r)
    int sweeps = 0;
    Vec maximizer;  // final u per atom (may contain -inf)
};

// Numerically maximizes the DV objective by exact coordinate ascent from
// u = 0. Each coordinate update solves d/du_j = 0 in closed form:
// u_j = log(p_j C_j / ((1 - p_j) r_j)) with C_j the off-coordinate mass.
// When p charges an r-null atom the objective is unbounded and the search
// walks past the divergence cap.
inline DvResult dv_supremum(const DiscreteDist& p, const DiscreteDist& r,
                            const SearchConfig& cfg = {}) {
    require_shared_labels(p, r);
    const std::size_t n = p.size();
    DvResult res;
    res.maximizer.assign(n, 0.0);
    Vec& u = res.maximizer;

    // exp(u_i) r_i, maintained incrementally
    Vec w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = r.prob(i);

    auto objective = [&]() {
        KahanSum lin, mass;
        for (std::size_t i = 0; i < n; ++i) {
            if (p.prob(i) > 0.0) lin.add(u[i] * p.prob(i));
            mass.add(w[i]);
        }
        double z = mass.value();
        return z == 0.0 ? kInf : lin.value() - std::log(z);
    };

    double best = objective();
    for (res.sweeps = 1; res.sweeps <= cfg.max_sweeps; ++res.sweeps) {
        for (std::size_t j = 0; j < n; ++j) {
            double pj = p.prob(j);
            double rj = r.prob(j);
            if (pj == 0.0) {
                u[j] = -kInf;  // only shrinks the log term
                w[j] = 0.0;
                continue;
            }
            if (rj == 0.0) {
                // p charges an r-null atom: the objective grows linearly in u_j.
                u[j] += (cfg.divergence_cap + 10.0) / pj;
                continue;
            }
            KahanSum cj;
            for (std::size_t i = 0; i < n; ++i)
                if (i != j) cj.add(w[i]);
            double c = cj.value();
            double denom = (1.0 - pj) * rj;
            // c == 0 means p is a point mass here and the objective no longer
            // depends on u_j; degenerate denom is a rounding artifact of a
            // near-Dirac p. Leave the coordinate alone in both cases.
            if (c == 0.0 || denom <= 0.0) continue;
            u[j] = std::min(std::log(pj * c / denom), 700.0);  // keep exp finite
            w[j] = std::exp(u[j]) * rj;
        }
        double val = objective();
        if (val > cfg.divergence_cap) {
            res.value = val;
            res.diverged = true;
            return res;
        }
        if (std::abs(val - best) < cfg.tol) {
            res.value = std::max(val, best);
            res.converged = true;
            return res;
        }
        best = val;
    }
    res.value = best;  // budget exhausted without stationarity: flag stays false
    return res;
}

}  // namespace girsanov

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "girsanov/estimate.hpp"
#include "girsanov/initial_law.hpp"
#include "girsanov/parallel.hpp"
#include "girsanov/path.hpp"
#include "girsanov/rng.hpp"

namespace girsanov {

inline constexpr std::size_t kMaxDim = 16;

// Reference diffusion: dX = b dt + sigma dW with a = sigma sigma^T the
// density of the bracket A(dt) = a dt.
struct DiffusionSpec {
    std::size_t dim = 1;
    std::function<void(double, std::span<const double>, Vec&)> drift;      // b(t,x)
    std::function<void(double, std::span<const double>, Mat&)> diffusion;  // a(t,x)
    std::function<void(double, std::span<const double>, Mat&)> sigma;      // factor of a
    InitialLaw initial_law = InitialLaw::point_mass({0.0});

    void check_dim() const {
        if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("DiffusionSpec: dim must be in [1,16]");
    }

    // Spot check of the structural invariants at one point: a symmetric PSD
    // and sigma sigma^T = a within 1e-10.
    void validate_at(double t, std::span<const double> x) const {
        Mat a(dim), s(dim);
        diffusion(t, x, a);
        sigma(t, x, s);
        if (!a.symmetric_psd(1e-10))
            throw std::invalid_argument("DiffusionSpec: a(t,x) not symmetric PSD");
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t j = 0; j < dim; ++j) {
                double ssT = 0.0;
                for (std::size_t k = 0; k < dim; ++k) ssT += s(i, k) * s(j, k);
                if (std::abs(ssT - a(i, j)) > 1e-10)
                    throw std::invalid_argument("DiffusionSpec: sigma sigma^T != a");
            }
    }

    // Constant coefficients with diagonal bracket; the workhorse of the test
    // scenarios.
    static DiffusionSpec constant(std::size_t d, Vec b, Vec a_diag, InitialLaw law) {
        DiffusionSpec s;
        s.dim = d;
        s.check_dim();
        Vec sig(d);
        for (std::size_t i = 0; i < d; ++i) {
            if (a_diag[i] < 0.0) throw std::invalid_argument("diffusion diagonal must be >= 0");
            sig[i] = std::sqrt(a_diag[i]);
        }
        s.drift = [b = std::move(b)](double, std::span<const double>, Vec& out) { out = b; };
        s.diffusion = [a_diag = std::move(a_diag)](double, std::span<const double>, Mat& out) {
            out = Mat::diag(a_diag);
        };
        s.sigma = [sig = std::move(sig)](double, std::span<const double>, Mat& out) {
            out = Mat::diag(sig);
        };
        s.initial_law = std::move(law);
        return s;
    }
};

// Predictable drift perturbation beta, evaluated at the left endpoint of
// each grid cell.
struct DriftPerturbation {
    std::function<void(double, std::span<const double>, Vec&)> beta;

    static DriftPerturbation constant(Vec c) {
        return {.beta = [c = std::move(c)](double, std::span<const double>, Vec& out) { out = c; }};
    }
    static DriftPerturbation zero(std::size_t d) { return constant(Vec(d, 0.0)); }
};

// Per-path Girsanov log-density ledger, continuous case.
struct ContinuousWeight {
    double stoch_integral = 0.0;  // int beta . dM^R on the grid
    double energy = 0.0;          // int beta . a beta dt
    double log_init = 0.0;        // log dP0/dR0(X_0)
    double log_z = 0.0;           // assembled below, exactly

    void assemble() { log_z = stoch_integral - 0.5 * energy + log_init; }
    bool finite() const { return std::isfinite(log_z); }
};

namespace detail {

// One Euler-Maruyama path. When beta != nullptr the drift is b + a beta and
// the start point is drawn from P0; the recorded martingale increments are
// always the ones of the *reference* decomposition, dX - b dt.
inline void simulate_one_diffusion_path(const DiffusionSpec& spec, const DriftPerturbation* beta,
                                        const TimeGrid& grid, std::uint64_t seed,
                                        std::size_t path_index, CadlagPath& out) {
    const std::size_t d = spec.dim;
    const std::size_t n = grid.n_intervals();
    out.grid = grid;
    out.dim = d;
    out.states.assign((n + 1) * d, 0.0);
    out.mart_increments.assign(n * d, 0.0);
    out.jumps.clear();
    out.exploded = false;

    RandomStream gs(seed, path_index, StreamPurpose::gaussians);
    RandomStream is(seed, path_index, StreamPurpose::initial);

    Vec x(d), b(d), bvec(d), abeta(d), xi(d), noise(d);
    Mat a(d), sg(d);

    if (beta)
        spec.initial_law.sample_p0(is, x);
    else
        spec.initial_law.sample_r0(is, x);
    if (x.size() != d) throw std::invalid_argument("initial sampler dimension mismatch");
    std::copy(x.begin(), x.end(), out.state(0).begin());

    for (std::size_t i = 0; i < n; ++i) {
        double t = grid.point(i);
        double dt = grid.dt(i);
        double sq = std::sqrt(dt);
        spec.drift(t, x, b);
        spec.sigma(t, x, sg);
        for (std::size_t k = 0; k < d; ++k) xi[k] = gs.gaussian();
        sg.matvec(xi, noise);
        for (std::size_t k = 0; k < d; ++k) noise[k] *= sq;

        double* mi = out.mart_increments.data() + i * d;
        if (beta) {
            beta->beta(t, x, bvec);
            spec.diffusion(t, x, a);
            a.matvec(bvec, abeta);
            for (std::size_t k = 0; k < d; ++k) {
                double extra = abeta[k] * dt;
                mi[k] = extra + noise[k];
                x[k] += b[k] * dt + extra + noise[k];
            }
        } else {
            for (std::size_t k = 0; k < d; ++k) {
                mi[k] = noise[k];
                x[k] += b[k] * dt + noise[k];
            }
        }

        bool finite = true;
        for (double c : x)
            if (!std::isfinite(c)) finite = false;
        if (!finite) {
            out.exploded = true;
            // freeze at the last finite state; the path stays excluded anyway
            for (std::size_t j = i; j < n; ++j) {
                std::copy(out.state(j).begin(), out.state(j).end(), out.state(j + 1).begin());
                std::fill(out.mart_increments.begin() + j * d,
                          out.mart_increments.begin() + (j + 1) * d, 0.0);
            }
            return;
        }
        std::copy(x.begin(), x.end(), out.state(i + 1).begin());
    }
}

}  // namespace detail

// Streaming driver: builds each path and hands it to visit(path_index, path).
// The visitor must be safe to call concurrently on distinct indices.
inline void for_each_diffusion_path(const DiffusionSpec& spec, const DriftPerturbation* beta,
                                    const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                    const std::function<void(std::size_t, CadlagPath&)>& visit,
                                    unsigned n_threads = 0) {
    spec.check_dim();
    if (n_paths < 1) throw std::invalid_argument("n_paths >= 1 required");
    parallel_for(
        n_paths,
        [&](std::size_t i) {
            CadlagPath p;
            detail::simulate_one_diffusion_path(spec, beta, grid, seed, i, p);
            visit(i, p);
        },
        n_threads);
}

inline Ensemble simulate_reference(const DiffusionSpec& spec, const TimeGrid& grid,
                                   std::size_t n_paths, std::uint64_t seed,
                                   unsigned n_threads = 0) {
    Ensemble e;
    e.base_grid = grid;
    e.seed = seed;
    e.law_tag = "R";
    e.paths.resize(n_paths);
    for_each_diffusion_path(
        spec, nullptr, grid, n_paths, seed,
        [&](std::size_t i, CadlagPath& p) { e.paths[i] = std::move(p); }, n_threads);
    for (const auto& p : e.paths)
        if (p.exploded) ++e.exploded_count;
    return e;
}

inline Ensemble simulate_tilted(const DiffusionSpec& spec, const DriftPerturbation& beta,
                                const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed,
                                unsigned n_threads = 0) {
    Ensemble e;
    e.base_grid = grid;
    e.seed = seed;
    e.law_tag = "P";
    e.paths.resize(n_paths);
    for_each_diffusion_path(
        spec, &beta, grid, n_paths, seed,
        [&](std::size_t i, CadlagPath& p) { e.paths[i] = std::move(p); }, n_threads);
    for (const auto& p : e.paths)
        if (p.exploded) ++e.exploded_count;
    return e;
}

// Girsanov log-density of Theorem type: log dP/dR along one path. The
// stochastic integral pairs beta with the *reference* martingale increments
// dX - b dt (recorded ones when available, reconstructed otherwise).
inline ContinuousWeight log_density(const CadlagPath& path, const DriftPerturbation& beta,
                                    const DiffusionSpec& spec) {
    const std::size_t d = path.dim;
    const std::size_t n = path.grid.n_intervals();
    ContinuousWeight w;
    KahanSum stoch, energy;
    Vec b(d), bvec(d), incr(d);
    Mat a(d);
    for (std::size_t i = 0; i < n; ++i) {
        double t = path.grid.point(i);
        double dt = path.grid.dt(i);
        auto x = path.state(i);
        if (path.has_mart_increments()) {
            auto mi = path.mart_increment(i);
            std::copy(mi.begin(), mi.end(), incr.begin());
        } else {
            spec.drift(t, x, b);
            auto xn = path.state(i + 1);
            for (std::size_t k = 0; k < d; ++k) incr[k] = xn[k] - x[k] - b[k] * dt;
        }
        beta.beta(t, x, bvec);
        for (std::size_t k = 0; k < d; ++k) stoch.add(bvec[k] * incr[k]);
        spec.diffusion(t, x, a);
        energy.add(a.quad(bvec, bvec) * dt);
    }
    w.stoch_integral = stoch.value();
    w.energy = energy.value();
    double r = spec.initial_law.log_dp0_dr0(Vec(path.state(0).begin(), path.state(0).end()));
    w.log_init = (r == -kInf || std::isnan(r)) ? -kInf : r;
    w.assemble();
    return w;
}

struct MartingaleCheckpoint {
    double t = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    bool flagged = false;  // |mean - 1| > 4 stderr
};

struct SupermartingaleReport {
    std::vector<MartingaleCheckpoint> checkpoints;
    std::size_t n_paths = 0;
    bool any_flagged() const {
        for (const auto& c : checkpoints)
            if (c.flagged) return true;
        return false;
    }
};

// Simulates under R and reports the Monte Carlo mean of
// Z_t = exp(sum beta.dM - 1/2 sum beta.a beta dt) at each checkpoint.
// For bounded beta the supermartingale is a true martingale, so the mean is
// flagged when it strays from 1 by more than 4 stderr.
inline SupermartingaleReport exp_supermartingale_check(const DiffusionSpec& spec,
                                                       const DriftPerturbation& beta,
                                                       const TimeGrid& grid, std::size_t n_paths,
                                                       std::uint64_t seed,
                                                       const std::vector<double>& checkpoints,
                                                       unsigned n_threads = 0) {
    const std::size_t n = grid.n_intervals();
    // snap each checkpoint to the last grid index with point <= t
    std::vector<std::size_t> cut(checkpoints.size());
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        std::size_t idx = 0;
        for (std::size_t i = 0; i <= n; ++i)
            if (grid.point(i) <= checkpoints[c] + 1e-12) idx = i;
        cut[c] = idx;
    }
    std::vector<Vec> z(checkpoints.size(), Vec(n_paths, 0.0));
    for_each_diffusion_path(
        spec, nullptr, grid, n_paths, seed,
        [&](std::size_t pi, CadlagPath& p) {
            const std::size_t d = p.dim;
            KahanSum s, e;
            Vec bvec(d);
            Mat a(d);
            std::size_t next = 0;
            std::vector<std::pair<std::size_t, std::size_t>> order;  // (cut, slot)
            for (std::size_t c = 0; c < cut.size(); ++c) order.emplace_back(cut[c], c);
            std::sort(order.begin(), order.end());
            for (std::size_t i = 0; i <= n; ++i) {
                while (next < order.size() && order[next].first == i) {
                    z[order[next].second][pi] = std::exp(s.value() - 0.5 * e.value());
                    ++next;
                }
                if (i == n) break;
                double t = p.grid.point(i);
                double dt = p.grid.dt(i);
                auto x = p.state(i);
                beta.beta(t, x, bvec);
                auto mi = p.mart_increment(i);
                for (std::size_t k = 0; k < d; ++k) s.add(bvec[k] * mi[k]);
                spec.diffusion(t, x, a);
                e.add(a.quad(bvec, bvec) * dt);
            }
        },
        n_threads);
    SupermartingaleReport rep;
    rep.n_paths = n_paths;
    for (std::size_t c = 0; c < checkpoints.size(); ++c) {
        auto ms = mean_stderr(z[c]);
        MartingaleCheckpoint mc;
        mc.t = checkpoints[c];
        mc.mean = ms.mean;
        mc.stderr_ = ms.stderr_;
        mc.flagged = std::abs(ms.mean - 1.0) > 4.0 * ms.stderr_;
        rep.checkpoints.push_back(mc);
    }
    return rep;
}

// E_P log dP/dR over a tilted ensemble. Paths with a dead initial ratio or an
// explosion are excluded and counted.
inline EntropyEstimate entropy_plugin(const Ensemble& ensemble_p, const DriftPerturbation& beta,
                                      const DiffusionSpec& spec) {
    Vec vals;
    vals.reserve(ensemble_p.paths.size());
    std::size_t excluded = 0;
    for (const auto& p : ensemble_p.paths) {
        if (p.exploded) {
            ++excluded;
            continue;
        }
        ContinuousWeight w = log_density(p, beta, spec);
        if (!w.finite()) {
            ++excluded;
            continue;
        }
        vals.push_back(w.log_z);
    }
    auto ms = mean_stderr(vals);
    return {ms.mean, ms.stderr_, vals.size(), "plugin", excluded};
}

// H(P0|R0) + 1/2 E_P int beta . a beta dt with h0 supplied in closed form.
inline EntropyEstimate entropy_decomposition(const Ensemble& ensemble_p,
                                             const DriftPerturbation& beta,
                                             const DiffusionSpec& spec, double h0) {
    Vec vals;
    vals.reserve(ensemble_p.paths.size());
    std::size_t excluded = 0;
    for (const auto& p : ensemble_p.paths) {
        if (p.exploded) {
            ++excluded;
            continue;
        }
        vals.push_back(log_density(p, beta, spec).energy);
    }
    auto ms = mean_stderr(vals);
    return {h0 + 0.5 * ms.mean, 0.5 * ms.stderr_, vals.size(), "decomposition", excluded};
}

// Streaming twins of the two estimators above: same estimator, same per-path
// arithmetic and RNG keying, but nothing is materialized. Used at ensemble
// sizes where storing paths is not sensible.
inline std::pair<EntropyEstimate, EntropyEstimate> entropy_estimators_streaming(
    const DiffusionSpec& spec, const DriftPerturbation& beta, const TimeGrid& grid,
    std::size_t n_paths, std::uint64_t seed, double h0, unsigned n_threads = 0) {
    Vec logz(n_paths, 0.0), energy(n_paths, 0.0);
    std::vector<char> ok(n_paths, 0);
    for_each_diffusion_path(
        spec, &beta, grid, n_paths, seed,
        [&](std::size_t i, CadlagPath& p) {
            if (p.exploded) return;
            ContinuousWeight w = log_density(p, beta, spec);
            energy[i] = w.energy;
            if (!w.finite()) return;
            logz[i] = w.log_z;
            ok[i] = 1;
        },
        n_threads);
    Vec lv, ev;
    lv.reserve(n_paths);
    ev.reserve(n_paths);
    std::size_t excluded = 0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (!ok[i]) {
            ++excluded;
            continue;
        }
        lv.push_back(logz[i]);
        ev.push_back(energy[i]);
    }
    auto ml = mean_stderr(lv);
    auto me = mean_stderr(ev);
    EntropyEstimate plugin{ml.mean, ml.stderr_, lv.size(), "plugin", excluded};
    EntropyEstimate decomp{h0 + 0.5 * me.mean, 0.5 * me.stderr_, ev.size(), "decomposition",
                           excluded};
    return {plugin, decomp};
}

struct ImportanceResult {
    double estimate = 0.0;        // mean of exp(log_z) f
    double stderr_ = 0.0;
    double self_normalized = 0.0; // sum w f / sum w
    double ess = 0.0;             // (sum w)^2 / sum w^2
    bool low_ess = false;
    std::size_t n = 0;
};

// Change-of-measure identity E_P f = E_R[Z f] over a reference ensemble.
inline ImportanceResult importance_sample(const Ensemble& ensemble_r,
                                          const DriftPerturbation& beta,
                                          const DiffusionSpec& spec,
                                          const std::function<double(const CadlagPath&)>& f,
                                          double ess_floor_fraction = 0.01) {
    Vec wf, ws;
    wf.reserve(ensemble_r.paths.size());
    ws.reserve(ensemble_r.paths.size());
    for (const auto& p : ensemble_r.paths) {
        if (p.exploded) continue;
        double w = std::exp(log_density(p, beta, spec).log_z);
        ws.push_back(w);
        wf.push_back(w * f(p));
    }
    ImportanceResult r;
    auto ms = mean_stderr(wf);
    r.estimate = ms.mean;
    r.stderr_ = ms.stderr_;
    r.n = wf.size();
    KahanSum sw, sw2, swf;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        sw.add(ws[i]);
        sw2.add(ws[i] * ws[i]);
        swf.add(wf[i]);
    }
    r.self_normalized = sw.value() > 0.0 ? swf.value() / sw.value() : 0.0;
    r.ess = sw2.value() > 0.0 ? sw.value() * sw.value() / sw2.value() : 0.0;
    r.low_ess = r.ess < ess_floor_fraction * static_cast<double>(r.n);
    return r;
}

}  // namespace girsanov

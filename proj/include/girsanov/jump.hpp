#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "girsanov/estimate.hpp"
#include "girsanov/initial_law.hpp"
#include "girsanov/parallel.hpp"
#include "girsanov/path.hpp"
#include "girsanov/rng.hpp"
#include "girsanov/young.hpp"

namespace girsanov {

// 16-point Gauss-Legendre rule on [-1,1], used for mark-space integrals of
// kernels with a continuous density.
namespace gl16 {
inline constexpr std::array<double, 8> abscissa = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> weight = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
}  // namespace gl16

// Finite-activity spatial jump kernel L(dq): either a list of weighted atoms
// or a uniform density on an interval (d = 1). Time dependence of the Levy
// kernel lives in the rate rho(dt) = r(t) dt, not here.
class Kernel {
public:
    static Kernel atoms(std::vector<std::pair<Vec, double>> atom_list) {
        Kernel k;
        k.kind_ = Kind::atoms;
        if (atom_list.empty()) {
            k.dim_ = 1;
            return k;
        }
        k.dim_ = atom_list.front().first.size();
        double m = 0.0;
        for (auto& [q, w] : atom_list) {
            if (q.size() != k.dim_) throw std::invalid_argument("Kernel: atom dim mismatch");
            bool zero = true;
            for (double c : q)
                if (c != 0.0) zero = false;
            if (zero) throw std::invalid_argument("Kernel: atom at the origin is not a jump");
            if (!(w >= 0.0)) throw std::invalid_argument("Kernel: negative atom mass");
            m += w;
        }
        k.atoms_ = std::move(atom_list);
        k.mass_ = m;
        return k;
    }

    static Kernel uniform1d(double lo, double hi, double mass) {
        if (!(hi > lo)) throw std::invalid_argument("Kernel: empty interval");
        if (!(mass > 0.0)) throw std::invalid_argument("Kernel: mass must be positive");
        Kernel k;
        k.kind_ = Kind::uniform1d;
        k.dim_ = 1;
        k.lo_ = lo;
        k.hi_ = hi;
        k.mass_ = mass;
        return k;
    }

    std::size_t dim() const { return dim_; }
    double total_mass() const { return mass_; }

    void sample(RandomStream& rs, Vec& out) const {
        if (kind_ == Kind::atoms) {
            double u = rs.u01() * mass_;
            double acc = 0.0;
            for (const auto& [q, w] : atoms_) {
                acc += w;
                if (u <= acc) {
                    out = q;
                    return;
                }
            }
            out = atoms_.back().first;
            return;
        }
        double q = lo_ + (hi_ - lo_) * rs.u01();
        while (q == 0.0) q = lo_ + (hi_ - lo_) * rs.u01();  // marks live off the origin
        out.assign(1, q);
    }

    // Visits quadrature nodes (q, weight) with sum of weights = total mass:
    // exact for atom kernels, 16-point Gauss-Legendre for the uniform one.
    void for_each_node(const std::function<void(std::span<const double>, double)>& cb) const {
        if (kind_ == Kind::atoms) {
            for (const auto& [q, w] : atoms_) cb(q, w);
            return;
        }
        double mid = 0.5 * (lo_ + hi_);
        double half = 0.5 * (hi_ - lo_);
        double density = mass_ / (hi_ - lo_);
        Vec q(1);
        for (std::size_t i = 0; i < gl16::abscissa.size(); ++i) {
            double w = gl16::weight[i] * half * density;
            q[0] = mid - half * gl16::abscissa[i];
            cb(q, w);
            q[0] = mid + half * gl16::abscissa[i];
            cb(q, w);
        }
    }

    double integrate(const std::function<double(std::span<const double>)>& f) const {
        KahanSum s;
        for_each_node([&](std::span<const double> q, double w) { s.add(w * f(q)); });
        return s.value();
    }

private:
    enum class Kind { atoms, uniform1d };
    Kind kind_ = Kind::atoms;
    std::size_t dim_ = 1;
    std::vector<std::pair<Vec, double>> atoms_;
    double lo_ = 0.0, hi_ = 0.0;
    double mass_ = 0.0;
};

// Reference jump process: Levy kernel rho(dt) L(dq) with rho(dt) = r(t) dt,
// continuous drift B(t), finite activity.
struct JumpSpec {
    std::size_t dim = 1;
    std::function<double(double)> rho_rate = [](double) { return 1.0; };  // r(t)
    double rho_rate_bound = 1.0;  // dominating sup of r over [0,1], for thinning
    Kernel kernel = Kernel::atoms({{Vec{1.0}, 1.0}});
    std::function<void(double, Vec&)> drift_B;  // B(t); defaults to 0
    InitialLaw initial_law = InitialLaw::point_mass({0.0});

    void eval_drift(double t, Vec& out) const {
        if (drift_B)
            drift_B(t, out);
        else
            out.assign(dim, 0.0);
    }

    // Numerical check of the square-moment integrability: returns
    // int (|q|^2 ^ 1) L(dq) * int r dt over the given time resolution.
    double square_moment(std::size_t time_cells = 256) const {
        double qm = kernel.integrate([](std::span<const double> q) {
            double n2 = 0.0;
            for (double c : q) n2 += c * c;
            return n2 < 1.0 ? n2 : 1.0;
        });
        KahanSum rt;
        double dt = 1.0 / static_cast<double>(time_cells);
        for (std::size_t i = 0; i < time_cells; ++i)
            rt.add(rho_rate((static_cast<double>(i) + 0.5) * dt) * dt);
        return qm * rt.value();
    }
};

// Nonnegative predictable tilt of the Levy kernel: the target law has kernel
// ell * (r L). Evaluated at (t, left-endpoint state, mark). sup_bound must
// dominate ell over the kernel support for tilted thinning.
struct TiltField {
    std::function<double(double, std::span<const double>, std::span<const double>)> ell;
    double sup_bound = 1.0;

    static TiltField state_free(std::function<double(double, std::span<const double>)> f,
                                double sup) {
        TiltField t;
        t.ell = [f = std::move(f)](double s, std::span<const double>, std::span<const double> q) {
            return f(s, q);
        };
        t.sup_bound = sup;
        return t;
    }
    static TiltField constant(double c) {
        TiltField t;
        t.ell = [c](double, std::span<const double>, std::span<const double>) { return c; };
        t.sup_bound = c > 0.0 ? c : 1.0;
        return t;
    }
};

// Two-sided log-density ledger of the jump case: Z = dP0/dR0 * Z+ * Z- with
// the Z+ ledger covering {ell >= alpha} (compensated log-ell integral minus
// the theta(log ell) compensator) and the Z- ledger covering {0 <= ell <
// alpha} (plain jump product minus the (ell - 1) compensator). The assembled
// log_z does not depend on alpha.
struct JumpWeight {
    double log_z_plus = 0.0;
    double log_z_minus = 0.0;
    double log_init = 0.0;
    bool tau_minus_hit = false;  // some jump had ell = 0
    double alpha = 0.5;
    std::size_t n_jumps = 0;

    double log_z() const {
        return tau_minus_hit ? -kInf : log_init + log_z_plus + log_z_minus;
    }
};

namespace detail {

struct JumpSimContext {
    const JumpSpec& spec;
    const TiltField* tilt;  // nullptr = reference (ell == 1)

    double ell_at(double t, std::span<const double> x, std::span<const double> q) const {
        return tilt ? tilt->ell(t, x, q) : 1.0;
    }
};

// Continuous increment of the canonical decomposition over one cell
// [t0, t1] with left state x: B(t1) - B(t0) + [tilted drift correction]
// - small-jump compensation of the simulated kernel, midpoint rule in t.
inline void continuous_increment(const JumpSimContext& ctx, double t0, double t1,
                                 std::span<const double> x, Vec& incr, Vec& scratch) {
    const auto& spec = ctx.spec;
    const std::size_t d = spec.dim;
    double dt = t1 - t0;
    double m = 0.5 * (t0 + t1);
    double r = spec.rho_rate(m);

    spec.eval_drift(t1, incr);
    spec.eval_drift(t0, scratch);
    for (std::size_t k = 0; k < d; ++k) incr[k] -= scratch[k];

    if (r != 0.0) {
        // tilted: (B-hat correction) int 1_{|q|<=1} (ell - 1) q dL, and the
        // compensation of small jumps under the simulated kernel ell L.
        // reference: ell == 1, only the compensation remains.
        spec.kernel.for_each_node([&](std::span<const double> q, double w) {
            double n2 = 0.0;
            for (double c : q) n2 += c * c;
            if (n2 > 1.0) return;  // |q| <= 1 inclusive
            double ell = ctx.ell_at(m, x, q);
            double corr = ctx.tilt ? (ell - 1.0) : 0.0;
            double coef = r * w * dt * (corr - ell);
            for (std::size_t k = 0; k < d; ++k) incr[k] += coef * q[k];
        });
    }
}

inline void simulate_one_jump_path(const JumpSimContext& ctx, const TimeGrid& base_grid,
                                   std::uint64_t seed, std::size_t path_index, CadlagPath& out) {
    const auto& spec = ctx.spec;
    const std::size_t d = spec.dim;

    RandomStream times(seed, path_index, StreamPurpose::jump_times);
    RandomStream thin(seed, path_index, StreamPurpose::thinning);
    RandomStream marks(seed, path_index, StreamPurpose::marks);
    RandomStream init(seed, path_index, StreamPurpose::initial);

    Vec x0;
    if (ctx.tilt)
        spec.initial_law.sample_p0(init, x0);
    else
        spec.initial_law.sample_r0(init, x0);
    if (x0.size() != d) throw std::invalid_argument("initial sampler dimension mismatch");

    double lambda = spec.kernel.total_mass();
    double ell_sup = 1.0;
    if (ctx.tilt) {
        ell_sup = ctx.tilt->sup_bound;
        if (!(ell_sup > 0.0) || !std::isfinite(ell_sup))
            throw std::invalid_argument(
                "simulate_tilted_jumps: unbounded tilt over the kernel support; supply a finite "
                "dominating sup_bound");
    }
    double dom = spec.rho_rate_bound * lambda * ell_sup;

    // Thinned inhomogeneous Poisson candidates. The mark is drawn for every
    // candidate (also on rejection) so the reference and an ell == 1 tilt
    // consume the streams identically.
    std::vector<JumpMark> jumps;
    Vec jump_times;
    Vec x_cur = x0;  // left-limit state tracked across candidates
    Vec q(d), incr(d), scratch(d);
    double t_prev = 0.0;
    if (dom > 0.0) {
        double t = 0.0;
        while (true) {
            double prev = t;
            t += times.exponential(dom);
            if (t <= prev) t = std::nextafter(prev, 2.0);  // zero gap is a measure-zero draw
            if (t >= 1.0) break;
            spec.kernel.sample(marks, q);
            continuous_increment(ctx, t_prev, t, x_cur, incr, scratch);
            for (std::size_t k = 0; k < d; ++k) x_cur[k] += incr[k];
            t_prev = t;
            double accept =
                spec.rho_rate(t) * lambda * ctx.ell_at(t, x_cur, q) / dom;
            if (accept > 1.0 + 1e-12) {
                std::ostringstream oss;
                oss << "thinning acceptance ratio " << accept << " > 1 at t = " << t
                    << " (dominating rate too small)";
                throw std::runtime_error(oss.str());
            }
            if (thin.u01() <= accept) {
                jumps.emplace_back(t, q);
                jump_times.push_back(t);
                for (std::size_t k = 0; k < d; ++k) x_cur[k] += q[k];
            }
        }
    }

    out.grid = refine_with_jumps(base_grid, jump_times);
    out.dim = d;
    out.jumps = std::move(jumps);
    out.mart_increments.clear();
    out.exploded = false;
    const std::size_t n = out.grid.n_intervals();
    out.states.assign((n + 1) * d, 0.0);
    std::copy(x0.begin(), x0.end(), out.state(0).begin());

    // Assemble values on the refined grid: continuous part cell by cell plus
    // the jump landing at each refinement point.
    std::size_t jidx = 0;
    Vec x = x0;
    for (std::size_t i = 0; i < n; ++i) {
        double t0 = out.grid.point(i);
        double t1 = out.grid.point(i + 1);
        continuous_increment(ctx, t0, t1, x, incr, scratch);
        for (std::size_t k = 0; k < d; ++k) x[k] += incr[k];
        if (jidx < out.jumps.size() && out.jumps[jidx].time == t1) {
            for (std::size_t k = 0; k < d; ++k) x[k] += out.jumps[jidx].size[k];
            ++jidx;
        }
        bool finite = true;
        for (double c : x)
            if (!std::isfinite(c)) finite = false;
        if (!finite) {
            out.exploded = true;
            for (std::size_t j = i; j < n; ++j)
                std::copy(out.state(j).begin(), out.state(j).end(), out.state(j + 1).begin());
            return;
        }
        std::copy(x.begin(), x.end(), out.state(i + 1).begin());
    }
}

}  // namespace detail

inline void for_each_jump_path(const JumpSpec& spec, const TiltField* tilt, const TimeGrid& grid,
                               std::size_t n_paths, std::uint64_t seed,
                               const std::function<void(std::size_t, CadlagPath&)>& visit,
                               unsigned n_threads = 0) {
    if (n_paths < 1) throw std::invalid_argument("n_paths >= 1 required");
    if (spec.dim < 1 || spec.dim > kMaxDim)
        throw std::invalid_argument("JumpSpec: dim must be in [1,16]");
    detail::JumpSimContext ctx{spec, tilt};
    parallel_for(
        n_paths,
        [&](std::size_t i) {
            CadlagPath p;
            detail::simulate_one_jump_path(ctx, grid, seed, i, p);
            visit(i, p);
        },
        n_threads);
}

inline Ensemble simulate_reference_jumps(const JumpSpec& spec, const TimeGrid& grid,
                                         std::size_t n_paths, std::uint64_t seed,
                                         unsigned n_threads = 0) {
    Ensemble e;
    e.base_grid = grid;
    e.seed = seed;
    e.law_tag = "R";
    e.paths.resize(n_paths);
    for_each_jump_path(
        spec, nullptr, grid, n_paths, seed,
        [&](std::size_t i, CadlagPath& p) { e.paths[i] = std::move(p); }, n_threads);
    for (const auto& p : e.paths)
        if (p.exploded) ++e.exploded_count;
    return e;
}

inline Ensemble simulate_tilted_jumps(const JumpSpec& spec, const TiltField& tilt,
                                      const TimeGrid& grid, std::size_t n_paths,
                                      std::uint64_t seed, unsigned n_threads = 0) {
    Ensemble e;
    e.base_grid = grid;
    e.seed = seed;
    e.law_tag = "tilted";
    e.paths.resize(n_paths);
    for_each_jump_path(
        spec, &tilt, grid, n_paths, seed,
        [&](std::size_t i, CadlagPath& p) { e.paths[i] = std::move(p); }, n_threads);
    for (const auto& p : e.paths)
        if (p.exploded) ++e.exploded_count;
    return e;
}

namespace detail {

// Quadrature of int h(t, x_left, q) L(dq) r(t) dt over the path's grid,
// midpoint in t, kernel nodes in q.
inline double levy_quadrature(
    const CadlagPath& path, const JumpSpec& spec,
    const std::function<double(double, std::span<const double>, std::span<const double>)>& h) {
    KahanSum acc;
    const std::size_t n = path.grid.n_intervals();
    for (std::size_t i = 0; i < n; ++i) {
        double t0 = path.grid.point(i);
        double dt = path.grid.dt(i);
        double m = t0 + 0.5 * dt;
        double r = spec.rho_rate(m);
        if (r == 0.0) continue;
        auto x = path.state(i);
        KahanSum cell;
        spec.kernel.for_each_node(
            [&](std::span<const double> q, double w) { cell.add(w * h(m, x, q)); });
        double v = r * cell.value() * dt;
        if (!std::isfinite(v)) {
            std::ostringstream oss;
            oss << "non-finite quadrature over cell [" << t0 << ", " << (t0 + dt) << "]";
            throw std::runtime_error(oss.str());
        }
        acc.add(v);
    }
    return acc.value();
}

// Left-limit state just before the jump stored at grid point index idx.
inline std::span<const double> left_state(const CadlagPath& path, std::size_t idx) {
    return path.state(idx == 0 ? 0 : idx - 1);
}

}  // namespace detail

// Compensated sum of jumps: sum_jumps h(t, dX_t) - int h dLbar.
inline double compensated_integral(
    const std::function<double(double, std::span<const double>)>& h, const CadlagPath& path,
    const JumpSpec& spec) {
    KahanSum jump_sum;
    for (const auto& j : path.jumps) jump_sum.add(h(j.time, j.size));
    double comp = detail::levy_quadrature(
        path, spec,
        [&](double t, std::span<const double>, std::span<const double> q) { return h(t, q); });
    return jump_sum.value() - comp;
}

// Fills the Z+ / Z- ledgers for one path. Jumps with ell = 0 trip the tau-
// trigger and the assembled density vanishes.
inline JumpWeight log_density_jump(const CadlagPath& path, const TiltField& tilt,
                                   const JumpSpec& spec, double alpha = 0.5) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("log_density_jump: alpha must lie in (0,1)");
    JumpWeight w;
    w.alpha = alpha;
    w.n_jumps = path.jumps.size();

    KahanSum plus_jumps, minus_jumps;
    const auto& pts = path.grid.points();
    for (const auto& j : path.jumps) {
        auto it = std::lower_bound(pts.begin(), pts.end(), j.time);
        std::size_t idx = static_cast<std::size_t>(it - pts.begin());
        double ell = tilt.ell(j.time, detail::left_state(path, idx), j.size);
        if (ell == 0.0) {
            w.tau_minus_hit = true;
            continue;
        }
        if (ell >= alpha)
            plus_jumps.add(std::log(ell));
        else
            minus_jumps.add(std::log(ell));
    }

    // Z+ over {ell >= alpha}: compensated log-ell integral minus the
    // theta(log ell) = ell - log ell - 1 compensator.
    double q_log = detail::levy_quadrature(
        path, spec, [&](double t, std::span<const double> x, std::span<const double> q) {
            double ell = tilt.ell(t, x, q);
            return ell >= alpha ? std::log(ell) : 0.0;
        });
    double q_theta = detail::levy_quadrature(
        path, spec, [&](double t, std::span<const double> x, std::span<const double> q) {
            double ell = tilt.ell(t, x, q);
            return ell >= alpha ? ell - std::log(ell) - 1.0 : 0.0;
        });
    // Z- over {0 <= ell < alpha}: plain jump product minus the (ell - 1)
    // compensator.
    double q_minus = detail::levy_quadrature(
        path, spec, [&](double t, std::span<const double> x, std::span<const double> q) {
            double ell = tilt.ell(t, x, q);
            return ell < alpha ? ell - 1.0 : 0.0;
        });

    w.log_z_plus = plus_jumps.value() - q_log - q_theta;
    w.log_z_minus = minus_jumps.value() - q_minus;

    Vec x0(path.state(0).begin(), path.state(0).end());
    double r = spec.initial_law.log_dp0_dr0(x0);
    w.log_init = (std::isnan(r)) ? -kInf : r;
    return w;
}

// Alternate product expression of dP/dR, valid when 1_{ell >= 1/2} log ell is
// integrable and ell is bounded away from 0 on the kernel support:
// (dP0/dR0)(X0) exp(-int (ell-1) dLbar) prod_jumps ell.
inline double alt_product_density(const CadlagPath& path, const TiltField& tilt,
                                  const JumpSpec& spec) {
    // precondition scan over quadrature nodes and cells
    double ell_min = kInf;
    double log_moment = detail::levy_quadrature(
        path, spec, [&](double t, std::span<const double> x, std::span<const double> q) {
            double ell = tilt.ell(t, x, q);
            if (ell < ell_min) ell_min = ell;
            return ell >= 0.5 ? std::abs(std::log(ell)) : 0.0;
        });
    if (!(ell_min > 0.0))
        throw std::domain_error(
            "alt_product_density: tilt vanishes on the kernel support; the exponential form is "
            "meaningless here, use the Z+Z- ledger");
    if (!std::isfinite(log_moment))
        throw std::domain_error("alt_product_density: log ell not integrable over the kernel");

    double comp = detail::levy_quadrature(
        path, spec, [&](double t, std::span<const double> x, std::span<const double> q) {
            return tilt.ell(t, x, q) - 1.0;
        });
    double prod = 1.0;
    const auto& pts = path.grid.points();
    for (const auto& j : path.jumps) {
        auto it = std::lower_bound(pts.begin(), pts.end(), j.time);
        std::size_t idx = static_cast<std::size_t>(it - pts.begin());
        prod *= tilt.ell(j.time, detail::left_state(path, idx), j.size);
    }
    Vec x0(path.state(0).begin(), path.state(0).end());
    return std::exp(spec.initial_law.log_dp0_dr0(x0)) * std::exp(-comp) * prod;
}

struct JumpMartingaleReport {
    double mean = 0.0;
    double stderr_ = 0.0;
    bool flagged = false;        // |mean - 1| > 4 stderr
    std::size_t killed = 0;      // paths with a jump where h = -inf
    std::size_t n_paths = 0;
};

// Monte Carlo check of E_R Z^h_1 = 1 for the theta-compensated exponential
// Z^h = exp(h (.) mu-tilde - int theta(h) dLbar). h may take -inf (then the
// path is killed, Z = 0, and e^{-inf} - 1 = -1 in the compensator), which is
// the extended-value variant.
inline JumpMartingaleReport exp_martingale_jump_check(
    const std::function<double(double, std::span<const double>)>& h, const JumpSpec& spec,
    const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed, unsigned n_threads = 0) {
    Vec z(n_paths, 0.0);
    std::vector<char> killed(n_paths, 0);
    for_each_jump_path(
        spec, nullptr, grid, n_paths, seed,
        [&](std::size_t i, CadlagPath& p) {
            KahanSum jump_sum;
            bool dead = false;
            for (const auto& j : p.jumps) {
                double v = h(j.time, j.size);
                if (v == -kInf) {
                    dead = true;
                    break;
                }
                jump_sum.add(v);
            }
            if (dead) {
                killed[i] = 1;
                z[i] = 0.0;
                return;
            }
            double comp = detail::levy_quadrature(
                p, spec, [&](double t, std::span<const double>, std::span<const double> q) {
                    double v = h(t, q);
                    return (v == -kInf) ? -1.0 : std::expm1(v);
                });
            z[i] = std::exp(jump_sum.value() - comp);
        },
        n_threads);
    JumpMartingaleReport rep;
    rep.n_paths = n_paths;
    for (char k : killed) rep.killed += k;
    auto ms = mean_stderr(z);
    rep.mean = ms.mean;
    rep.stderr_ = ms.stderr_;
    rep.flagged = std::abs(ms.mean - 1.0) > 4.0 * ms.stderr_;
    return rep;
}

// H(P0|R0) + E_P int (ell log ell - ell + 1) dLbar, with the 0 log 0 - 0 + 1
// = 1 convention where the tilt vanishes.
inline EntropyEstimate entropy_decomposition_jump(const Ensemble& ensemble_p,
                                                  const TiltField& tilt, const JumpSpec& spec,
                                                  double h0) {
    Vec vals;
    vals.reserve(ensemble_p.paths.size());
    std::size_t excluded = 0;
    for (const auto& p : ensemble_p.paths) {
        if (p.exploded) {
            ++excluded;
            continue;
        }
        vals.push_back(detail::levy_quadrature(
            p, spec, [&](double t, std::span<const double> x, std::span<const double> q) {
                return poisson_kl_integrand(tilt.ell(t, x, q));
            }));
    }
    auto ms = mean_stderr(vals);
    return {h0 + ms.mean, ms.stderr_, vals.size(), "decomposition", excluded};
}

// E_P log dP/dR via the ledger. tau- hits are excluded with a diagnostic
// count: under the tilted law they are a null event whenever ell > 0 on the
// tilted kernel's support.
inline EntropyEstimate entropy_plugin_jump(const Ensemble& ensemble_p, const TiltField& tilt,
                                           const JumpSpec& spec) {
    Vec vals;
    vals.reserve(ensemble_p.paths.size());
    std::size_t excluded = 0;
    for (const auto& p : ensemble_p.paths) {
        if (p.exploded) {
            ++excluded;
            continue;
        }
        JumpWeight w = log_density_jump(p, tilt, spec);
        if (w.tau_minus_hit || !std::isfinite(w.log_z())) {
            ++excluded;
            continue;
        }
        vals.push_back(w.log_z());
    }
    auto ms = mean_stderr(vals);
    return {ms.mean, ms.stderr_, vals.size(), "plugin", excluded};
}

// Streaming twin of the two jump estimators, one pass per ensemble.
inline std::pair<EntropyEstimate, EntropyEstimate> jump_entropy_estimators_streaming(
    const JumpSpec& spec, const TiltField& tilt, const TimeGrid& grid, std::size_t n_paths,
    std::uint64_t seed, double h0, unsigned n_threads = 0) {
    Vec logz(n_paths, 0.0), quad(n_paths, 0.0);
    std::vector<char> ok(n_paths, 0);
    for_each_jump_path(
        spec, &tilt, grid, n_paths, seed,
        [&](std::size_t i, CadlagPath& p) {
            if (p.exploded) return;
            quad[i] = detail::levy_quadrature(
                p, spec, [&](double t, std::span<const double> x, std::span<const double> q) {
                    return poisson_kl_integrand(tilt.ell(t, x, q));
                });
            JumpWeight w = log_density_jump(p, tilt, spec);
            if (w.tau_minus_hit || !std::isfinite(w.log_z())) {
                ok[i] = 2;  // counted for decomposition, excluded from plugin
                return;
            }
            logz[i] = w.log_z();
            ok[i] = 1;
        },
        n_threads);
    Vec lv, qv;
    std::size_t excluded_plugin = 0, excluded_decomp = 0;
    for (std::size_t i = 0; i < n_paths; ++i) {
        if (ok[i] == 0) {
            ++excluded_plugin;
            ++excluded_decomp;
            continue;
        }
        qv.push_back(quad[i]);
        if (ok[i] == 1)
            lv.push_back(logz[i]);
        else
            ++excluded_plugin;
    }
    auto ml = mean_stderr(lv);
    auto mq = mean_stderr(qv);
    EntropyEstimate plugin{ml.mean, ml.stderr_, lv.size(), "plugin", excluded_plugin};
    EntropyEstimate decomp{h0 + mq.mean, mq.stderr_, qv.size(), "decomposition", excluded_decomp};
    return {plugin, decomp};
}

struct CensusRow {
    double threshold = 0.0;
    std::size_t paths_hit = 0;
    double fraction = 0.0;
};

struct CensusReport {
    std::vector<CensusRow> rows;
    std::size_t tau_minus_hits = 0;  // jumps with ell exactly 0
    std::size_t n_paths = 0;
};

// Counts paths with any jump in {ell < threshold} for each threshold, plus
// the exact tau- trigger census (ell = 0 at a jump).
inline CensusReport tau_minus_census(const Ensemble& ensemble, const TiltField& tilt,
                                     const Vec& thresholds = {0.5, 0.25, 0.125}) {
    CensusReport rep;
    rep.n_paths = ensemble.paths.size();
    rep.rows.resize(thresholds.size());
    for (std::size_t k = 0; k < thresholds.size(); ++k) rep.rows[k].threshold = thresholds[k];
    for (const auto& p : ensemble.paths) {
        std::vector<char> hit(thresholds.size(), 0);
        bool tau_hit = false;
        const auto& pts = p.grid.points();
        for (const auto& j : p.jumps) {
            auto it = std::lower_bound(pts.begin(), pts.end(), j.time);
            std::size_t idx = static_cast<std::size_t>(it - pts.begin());
            double ell = tilt.ell(j.time, detail::left_state(p, idx), j.size);
            if (ell == 0.0) tau_hit = true;
            for (std::size_t k = 0; k < thresholds.size(); ++k)
                if (ell < thresholds[k]) hit[k] = 1;
        }
        if (tau_hit) ++rep.tau_minus_hits;
        for (std::size_t k = 0; k < thresholds.size(); ++k) rep.rows[k].paths_hit += hit[k];
    }
    for (auto& row : rep.rows)
        row.fraction = rep.n_paths ? static_cast<double>(row.paths_hit) /
                                         static_cast<double>(rep.n_paths)
                                   : 0.0;
    return rep;
}

}  // namespace girsanov

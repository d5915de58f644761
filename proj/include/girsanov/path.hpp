#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "girsanov/grid.hpp"
#include "girsanov/numerics.hpp"

namespace girsanov {

struct JumpMark {
    double time = 0.0;  // in (0,1]
    Vec size;           // nonzero vector

    JumpMark() = default;
    JumpMark(double t, Vec q) : time(t), size(std::move(q)) {
        bool all_zero = true;
        for (double c : size)
            if (c != 0.0) all_zero = false;
        if (all_zero) throw std::invalid_argument("JumpMark: zero jump");
    }
};

// Sample path on a grid: one state per grid point (post-jump at jump
// instants), jumps sorted by time with each time a grid point. States are
// stored flat, row-major over grid points. mart_increments, when present,
// hold the reference martingale part dX - b dt recorded at simulation time
// (continuous case only), one d-vector per interval.
struct CadlagPath {
    TimeGrid grid = TimeGrid::uniform(1);
    std::size_t dim = 1;
    Vec states;            // (N+1) * dim
    Vec mart_increments;   // N * dim, or empty
    std::vector<JumpMark> jumps;
    bool exploded = false;

    std::span<const double> state(std::size_t i) const {
        return {states.data() + i * dim, dim};
    }
    std::span<double> state(std::size_t i) {
        return {states.data() + i * dim, dim};
    }
    std::span<const double> mart_increment(std::size_t i) const {
        return {mart_increments.data() + i * dim, dim};
    }
    bool has_mart_increments() const { return !mart_increments.empty(); }

    void validate() const {
        if (states.size() != (grid.n_intervals() + 1) * dim)
            throw std::invalid_argument("CadlagPath: one state per grid point required");
        if (!mart_increments.empty() && mart_increments.size() != grid.n_intervals() * dim)
            throw std::invalid_argument("CadlagPath: one martingale increment per interval");
        double prev = 0.0;
        const auto& pts = grid.points();
        for (const auto& j : jumps) {
            if (!(j.time > 0.0 && j.time <= 1.0))
                throw std::invalid_argument("CadlagPath: jump time outside (0,1]");
            if (!(j.time > prev)) throw std::invalid_argument("CadlagPath: jump times not distinct");
            prev = j.time;
            if (!std::binary_search(pts.begin(), pts.end(), j.time))
                throw std::invalid_argument("CadlagPath: jump time not a grid point");
            if (j.size.size() != dim) throw std::invalid_argument("CadlagPath: jump dim mismatch");
        }
        if (!exploded)
            for (double c : states)
                if (!std::isfinite(c))
                    throw std::invalid_argument("CadlagPath: non-finite state on unflagged path");
    }
};

// Monte Carlo stand-in for a path measure. All paths share base_grid; jump
// paths carry their own per-path refinement of it.
struct Ensemble {
    TimeGrid base_grid = TimeGrid::uniform(1);
    std::vector<CadlagPath> paths;
    std::uint64_t seed = 0;
    std::string law_tag;  // "R", "P", "tilted", ...
    std::size_t exploded_count = 0;
};

// Left-endpoint (predictable) pairing: sum_i <integrand_i, increment_i>.
inline double stieltjes_integral(std::span<const Vec> integrand, std::span<const Vec> increments) {
    if (integrand.size() != increments.size())
        throw std::invalid_argument("stieltjes_integral: length mismatch");
    KahanSum s;
    for (std::size_t i = 0; i < integrand.size(); ++i) {
        if (integrand[i].size() != increments[i].size())
            throw std::invalid_argument("stieltjes_integral: dimension mismatch");
        for (std::size_t k = 0; k < integrand[i].size(); ++k)
            s.add(integrand[i][k] * increments[i][k]);
    }
    return s.value();
}

inline double stieltjes_integral(std::span<const double> integrand,
                                 std::span<const double> increments) {
    if (integrand.size() != increments.size())
        throw std::invalid_argument("stieltjes_integral: length mismatch");
    KahanSum s;
    for (std::size_t i = 0; i < integrand.size(); ++i) s.add(integrand[i] * increments[i]);
    return s.value();
}

// Cumulative sum of dX dX^T over grid increments. With continuous_part_only
// the jump contribution is removed from the increments ending at a jump
// instant, so the output targets the continuous-martingale bracket.
inline std::vector<Mat> realized_qv(const CadlagPath& path, bool continuous_part_only = false) {
    const std::size_t d = path.dim;
    const std::size_t n = path.grid.n_intervals();
    std::vector<Mat> out;
    out.reserve(n);
    Mat acc(d);
    std::size_t jidx = 0;
    Vec incr(d);
    for (std::size_t i = 0; i < n; ++i) {
        double t_right = path.grid.point(i + 1);
        auto lo = path.state(i);
        auto hi = path.state(i + 1);
        for (std::size_t k = 0; k < d; ++k) incr[k] = hi[k] - lo[k];
        if (continuous_part_only) {
            while (jidx < path.jumps.size() && path.jumps[jidx].time < t_right) ++jidx;
            if (jidx < path.jumps.size() && path.jumps[jidx].time == t_right)
                for (std::size_t k = 0; k < d; ++k) incr[k] -= path.jumps[jidx].size[k];
        }
        acc.add_outer(incr);
        out.push_back(acc);
    }
    return out;
}

}  // namespace girsanov

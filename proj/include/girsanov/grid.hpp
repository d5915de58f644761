#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "girsanov/numerics.hpp"

namespace girsanov {

// Strictly increasing time points t_0 = 0 < ... < t_N = 1.
class TimeGrid {
public:
    explicit TimeGrid(Vec points) : points_(std::move(points)) {
        if (points_.size() < 2) throw std::invalid_argument("TimeGrid: need at least 2 points");
        if (points_.front() != 0.0 || points_.back() != 1.0)
            throw std::invalid_argument("TimeGrid: endpoints must be exactly 0 and 1");
        for (std::size_t i = 1; i < points_.size(); ++i)
            if (!(points_[i] > points_[i - 1]))
                throw std::invalid_argument("TimeGrid: points must be strictly increasing");
    }

    static TimeGrid uniform(std::size_t n_intervals) {
        if (n_intervals < 1) throw std::invalid_argument("TimeGrid: n_intervals >= 1");
        Vec pts(n_intervals + 1);
        for (std::size_t i = 0; i <= n_intervals; ++i)
            pts[i] = static_cast<double>(i) / static_cast<double>(n_intervals);
        pts.front() = 0.0;
        pts.back() = 1.0;
        return TimeGrid(std::move(pts));
    }

    const Vec& points() const { return points_; }
    std::size_t n_intervals() const { return points_.size() - 1; }
    double point(std::size_t i) const { return points_[i]; }
    double dt(std::size_t i) const { return points_[i + 1] - points_[i]; }

    bool operator==(const TimeGrid& other) const { return points_ == other.points_; }

private:
    Vec points_;
};

// Merges jump times into the grid. Exact hits are absorbed (idempotent);
// a jump time colliding with an existing point within 1e-15 without being
// equal to it is perturbed by one ulp away from the collision and counted
// in *perturbed.
inline TimeGrid refine_with_jumps(const TimeGrid& grid, Vec jump_times, int* perturbed = nullptr) {
    if (perturbed) *perturbed = 0;
    Vec pts = grid.points();
    std::sort(jump_times.begin(), jump_times.end());
    for (double tau : jump_times) {
        if (!(tau > 0.0 && tau < 1.0))
            throw std::invalid_argument("refine_with_jumps: jump time outside (0,1)");
        auto it = std::lower_bound(pts.begin(), pts.end(), tau);
        if (it != pts.end() && *it == tau) continue;  // already a grid point
        double lo_gap = (it == pts.begin()) ? kInf : tau - *(it - 1);
        double hi_gap = (it == pts.end()) ? kInf : *it - tau;
        if (lo_gap < 1e-15) {
            tau = std::nextafter(tau, 2.0);
            if (perturbed) ++*perturbed;
        } else if (hi_gap < 1e-15) {
            tau = std::nextafter(tau, 0.0);
            if (perturbed) ++*perturbed;
        }
        // re-locate in case the perturbation landed on a point
        it = std::lower_bound(pts.begin(), pts.end(), tau);
        if (it != pts.end() && *it == tau) {
            if (perturbed) ++*perturbed;
            continue;
        }
        pts.insert(it, tau);
    }
    return TimeGrid(std::move(pts));
}

}  // namespace girsanov

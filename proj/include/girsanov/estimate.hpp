#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "girsanov/numerics.hpp"

namespace girsanov {

// Monte Carlo estimate with its identity tag (plugin / decomposition /
// variational / ...).
struct EntropyEstimate {
    double value = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
    std::string tag;
    std::size_t excluded = 0;  // paths dropped (exploded, -inf weight, tau- hit)
};

struct GateRecord {
    std::string name;
    double target = 0.0;        // the value the gate compares against
    std::string provenance;     // where the target comes from
    double achieved = 0.0;      // the measured quantity
    double margin = 0.0;        // allowed |achieved - target|
    bool pass = false;
};

// Pass iff |a.value - b.value| <= sigmas * sqrt(a.stderr^2 + b.stderr^2).
inline GateRecord compare_estimators(const EntropyEstimate& a, const EntropyEstimate& b,
                                     double sigmas) {
    GateRecord g;
    g.name = a.tag + " vs " + b.tag;
    g.target = a.value;
    g.provenance = "cross-estimator identity";
    g.achieved = b.value;
    g.margin = sigmas * std::sqrt(a.stderr_ * a.stderr_ + b.stderr_ * b.stderr_);
    g.pass = std::abs(a.value - b.value) <= g.margin;
    return g;
}

}  // namespace girsanov

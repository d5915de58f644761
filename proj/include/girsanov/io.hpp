#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "girsanov/discrete.hpp"
#include "girsanov/orlicz.hpp"
#include "girsanov/path.hpp"
#include "girsanov/version.hpp"

namespace girsanov {

// Shortest-roundtrip decimal form; CSV determinism depends on the doubles,
// never on locale or stream state.
inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string csv_header_comment() {
    return std::string("# girsanov-lab v") + kVersion + " schema=" + std::to_string(kCsvSchema);
}

inline void write_ensemble_csv(std::ostream& os, const Ensemble& e, std::size_t max_paths = 0) {
    os << csv_header_comment() << "\n";
    std::size_t d = e.paths.empty() ? 1 : e.paths.front().dim;
    os << "path_id,t";
    for (std::size_t k = 0; k < d; ++k) os << ",x" << k;
    os << ",is_jump\n";
    std::size_t count = e.paths.size();
    if (max_paths > 0 && max_paths < count) count = max_paths;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& p = e.paths[i];
        std::size_t jidx = 0;
        for (std::size_t g = 0; g <= p.grid.n_intervals(); ++g) {
            double t = p.grid.point(g);
            bool is_jump = false;
            while (jidx < p.jumps.size() && p.jumps[jidx].time < t) ++jidx;
            if (jidx < p.jumps.size() && p.jumps[jidx].time == t) is_jump = true;
            os << i << "," << fmt_double(t);
            for (double c : p.state(g)) os << "," << fmt_double(c);
            os << "," << (is_jump ? 1 : 0) << "\n";
        }
    }
}

struct ContinuousWeightRow {
    std::size_t path_id = 0;
    double log_init = 0.0, stoch_integral = 0.0, energy = 0.0, log_z = 0.0;
};

inline void write_continuous_weights_csv(std::ostream& os,
                                         const std::vector<ContinuousWeightRow>& rows) {
    os << csv_header_comment() << "\n";
    os << "path_id,log_init,stoch_integral,energy,log_z\n";
    for (const auto& r : rows)
        os << r.path_id << "," << fmt_double(r.log_init) << "," << fmt_double(r.stoch_integral)
           << "," << fmt_double(r.energy) << "," << fmt_double(r.log_z) << "\n";
}

struct JumpWeightRow {
    std::size_t path_id = 0;
    std::size_t n_jumps = 0;
    double log_z_plus = 0.0, log_z_minus = 0.0;
    bool tau_minus_hit = false;
    double log_z = 0.0;
};

inline void write_jump_weights_csv(std::ostream& os, const std::vector<JumpWeightRow>& rows) {
    os << csv_header_comment() << "\n";
    os << "path_id,n_jumps,log_z_plus,log_z_minus,tau_minus_hit,log_z\n";
    for (const auto& r : rows)
        os << r.path_id << "," << r.n_jumps << "," << fmt_double(r.log_z_plus) << ","
           << fmt_double(r.log_z_minus) << "," << (r.tau_minus_hit ? 1 : 0) << ","
           << fmt_double(r.log_z) << "\n";
}

namespace detail {
inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}
}  // namespace detail

// Flat key = value text, # comments, one scenario per file. Arrays are
// comma-separated values.
inline std::map<std::string, std::string> parse_key_value_file(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw std::runtime_error("cannot open config file: " + filename);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad config line (expected key = value): " + line);
        std::string key = detail::trim(line.substr(0, eq));
        std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw std::runtime_error("empty key in config line: " + line);
        kv[key] = val;
    }
    return kv;
}

// CSV of value,mass rows (header and # comment lines skipped).
inline WeightedSample read_weighted_sample_csv(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw std::runtime_error("cannot open csv: " + filename);
    WeightedSample ws;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) continue;
        try {
            double v = std::stod(a);
            double m = std::stod(b);
            ws.atoms.emplace_back(v, m);
        } catch (const std::exception&) {
            continue;  // header row
        }
    }
    ws.validate();
    return ws;
}

// CSV of label,probability rows.
inline DiscreteDist read_discrete_dist_csv(const std::string& filename) {
    std::ifstream in(filename);
    if (!in) throw std::runtime_error("cannot open csv: " + filename);
    std::vector<std::string> labels;
    Vec probs;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',')) continue;
        try {
            double p = std::stod(b);
            labels.push_back(detail::trim(a));
            probs.push_back(p);
        } catch (const std::exception&) {
            continue;
        }
    }
    return DiscreteDist(std::move(labels), std::move(probs));
}

}  // namespace girsanov

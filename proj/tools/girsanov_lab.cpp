#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "girsanov/io.hpp"
#include "girsanov/orlicz.hpp"
#include "girsanov/scenario.hpp"
#include "girsanov/version.hpp"

namespace {

void print_report(const girsanov::RunReport& rep) {
    std::cout << "scenario " << rep.scenario << " (seed " << rep.seed << ", " << rep.n_paths
              << " paths)\n";
    for (const auto& e : rep.estimates) {
        std::cout << "  " << e.tag << " = " << girsanov::fmt_double(e.value) << " +- "
                  << girsanov::fmt_double(e.stderr_) << " (n=" << e.n;
        if (e.excluded) std::cout << ", excluded=" << e.excluded;
        std::cout << ")\n";
    }
    for (const auto& g : rep.gates) {
        std::cout << "  [" << (g.pass ? "PASS" : "FAIL") << "] " << g.name << ": achieved "
                  << girsanov::fmt_double(g.achieved) << " vs target "
                  << girsanov::fmt_double(g.target) << " (margin "
                  << girsanov::fmt_double(g.margin) << "; " << g.provenance << ")\n";
    }
    for (const auto& f : rep.written_files) std::cout << "  wrote " << f << "\n";
    std::cout << "  wall " << rep.wall_ms << " ms -> " << (rep.passed() ? "PASS" : "FAIL")
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("girsanov-lab v") + girsanov::kVersion +
                 " - entropy-based change-of-measure laboratory"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a scenario from a config file");
    std::string config_file;
    run->add_option("config", config_file, "flat key = value config, one scenario per file")
        ->required();
    std::uint64_t seed = 0;
    std::size_t paths = 0, grid = 0;
    std::string out_dir, json_path;
    bool have_seed = false;
    run->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        have_seed = true;
    });
    run->add_option("--paths", paths, "override n_paths");
    run->add_option("--grid", grid, "override grid_n");
    run->add_option("--out", out_dir, "output directory (default: GIRSANOV_LAB_OUT or ./out)");
    run->add_option("--json", json_path, "also write the summary JSON to this exact path");

    // list-scenarios
    auto* list = app.add_subcommand("list-scenarios", "print the scenario registry");

    // orlicz-norm
    auto* norm = app.add_subcommand("orlicz-norm", "Luxemburg norms of a (value,mass) CSV");
    std::string sample_csv;
    norm->add_option("csv", sample_csv, "CSV rows: value,mass")->required();

    // dv
    auto* dv = app.add_subcommand("dv", "KL and its variational supremum for two discrete dists");
    std::string p_csv, r_csv;
    dv->add_option("p-csv", p_csv, "CSV rows: label,probability")->required();
    dv->add_option("r-csv", r_csv, "CSV rows: label,probability")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            for (const auto& s : girsanov::list_scenarios())
                std::cout << s.name << "  -  " << s.description << "\n";
            return 0;
        }
        if (*norm) {
            girsanov::WeightedSample ws = girsanov::read_weighted_sample_csv(sample_csv);
            double nt = girsanov::luxemburg_norm(ws, girsanov::YoungKind::theta);
            double ns = girsanov::luxemburg_norm(ws, girsanov::YoungKind::theta_star);
            std::cout << "atoms " << ws.atoms.size() << ", total mass "
                      << girsanov::fmt_double(ws.total_mass()) << "\n";
            std::cout << "luxemburg_theta = " << girsanov::fmt_double(nt) << "\n";
            std::cout << "luxemburg_theta_star = " << girsanov::fmt_double(ns) << "\n";
            return 0;
        }
        if (*dv) {
            girsanov::DiscreteDist p = girsanov::read_discrete_dist_csv(p_csv);
            girsanov::DiscreteDist r = girsanov::read_discrete_dist_csv(r_csv);
            double kl = girsanov::kl_divergence(p, r);
            girsanov::DvResult res = girsanov::dv_supremum(p, r);
            std::cout << "kl_divergence = " << girsanov::fmt_double(kl) << "\n";
            std::cout << "dv_supremum   = " << girsanov::fmt_double(res.value) << " (sweeps "
                      << res.sweeps << ", " << (res.converged ? "stationary" : "budget exhausted")
                      << (res.diverged ? ", diverged past cap" : "") << ")\n";
            if (std::isfinite(kl))
                std::cout << "abs diff      = " << girsanov::fmt_double(std::abs(res.value - kl))
                          << "\n";
            return 0;
        }
        // run
        girsanov::ScenarioConfig cfg = girsanov::ScenarioConfig::from_file(config_file);
        if (have_seed) cfg.seed = seed;
        if (paths > 0) cfg.n_paths = paths;
        if (grid > 0) cfg.grid_n = grid;
        if (!out_dir.empty()) cfg.output_path = out_dir;
        girsanov::RunReport rep = girsanov::run_scenario(cfg);
        print_report(rep);
        if (!json_path.empty()) {
            std::ofstream os(json_path);
            if (!os) {
                std::cerr << "error: cannot write " << json_path << "\n";
                return 3;
            }
            os << girsanov::report_to_json(rep).dump(2) << "\n";
        }
        return rep.passed() ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

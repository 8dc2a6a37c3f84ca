// hscluster: event-driven hard-sphere gas on the 3-torus with collisional
// cluster statistics. Subcommands cover single trajectories, Monte-Carlo
// cluster-size experiments, closed-form theory tables, dynamical-cluster
// percolation, mean-free-time estimation, and the backwards-flow
// reconstruction diagnostic.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hsc/clusters.hpp"
#include "hsc/harness.hpp"
#include "hsc/ibf.hpp"
#include "hsc/io.hpp"
#include "hsc/theory.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonArgs {
    int n = 100;
    double beta = 1.0;
    std::uint64_t seed = 0;
    std::string grid = "1";
    int samples = 100;
    std::string out;
    bool root_average = true;
    int workers = 0;
    std::string neighbor = "auto";
};

std::string default_out_dir() {
    const char* env = std::getenv("HSCLUSTER_OUT");
    return env && *env ? env : ".";
}

hsc::NeighborMode parse_neighbor(const std::string& name) {
    if (name == "auto") return hsc::NeighborMode::Auto;
    if (name == "cells") return hsc::NeighborMode::CellList;
    if (name == "pairs") return hsc::NeighborMode::AllPairs;
    throw CLI::ValidationError("--neighbor", "must be auto, cells or pairs");
}

fs::path prepare_out(const std::string& dir) {
    fs::path p(dir);
    fs::create_directories(p);
    return p;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

hsc::RunManifest base_manifest(const std::string& command, const CommonArgs& args) {
    hsc::RunManifest m;
    m.command = command;
    m.set("n", std::to_string(args.n));
    m.set_double("beta", args.beta);
    m.set("seed", std::to_string(args.seed));
    m.set("root_average", args.root_average ? "1" : "0");
    m.set("neighbor", args.neighbor);
    m.set("info_version", hsc::software_version());
    m.set("info_created_utc", utc_now());
    m.set("info_workers", std::to_string(hsc::resolve_workers(args.workers)));
    return m;
}

void finish_manifest(hsc::RunManifest& m, const Stopwatch& watch, const fs::path& out) {
    m.set_double("info_wallclock_sec", watch.seconds());
    m.write_file((out / "manifest.txt").string());
}

hsc::HarnessOptions harness_options(const CommonArgs& args) {
    hsc::HarnessOptions opts;
    opts.workers = args.workers;
    opts.root_average = args.root_average;
    opts.neighbor_mode = parse_neighbor(args.neighbor);
    return opts;
}

int run_simulate(const CommonArgs& args, double t_end) {
    const Stopwatch watch;
    const fs::path out = prepare_out(args.out);
    const hsc::EnsembleConfig cfg = hsc::EnsembleConfig::boltzmann_grad(args.n, args.beta, args.seed);
    hsc::SystemState state = hsc::sample_equilibrium(cfg);

    hsc::EvolveOptions eo;
    eo.neighbor_mode = parse_neighbor(args.neighbor);
    const hsc::CollisionLog log = hsc::evolve(state, t_end, eo);

    hsc::io::write_collision_log_file((out / "collision_log.txt").string(), log);
    hsc::io::write_state_file((out / "state_final.txt").string(), state);

    hsc::RunManifest m = base_manifest("simulate", args);
    m.set_double("t", t_end);
    m.set("info_events", std::to_string(log.events.size()));
    finish_manifest(m, watch, out);

    std::cout << "simulate: N=" << args.n << " events=" << log.events.size()
              << " -> " << (out / "collision_log.txt").string() << "\n";
    return 0;
}

int run_clusters(const CommonArgs& args, const std::string& grid_units, int mfp_samples) {
    const Stopwatch watch;
    const fs::path out = prepare_out(args.out);
    const hsc::EnsembleConfig cfg = hsc::EnsembleConfig::boltzmann_grad(args.n, args.beta, args.seed);
    const hsc::HarnessOptions opts = harness_options(args);

    std::vector<double> grid = hsc::io::parse_double_list(args.grid);
    if (grid.empty()) throw std::invalid_argument("clusters: empty --grid");

    double tau = 0.0;
    if (grid_units == "mfp") {
        const hsc::MfpEstimate est = hsc::estimate_mean_free_time(cfg, mfp_samples, opts);
        tau = est.tau;
        for (double& t : grid) t *= tau;
    } else if (grid_units != "time") {
        throw std::invalid_argument("clusters: --grid-units must be time or mfp");
    }

    const auto hists = hsc::cluster_size_experiment(cfg, grid, args.samples, opts);

    hsc::io::Table series;
    series.columns = {"t", "S", "stderr"};
    for (std::size_t g = 0; g < hists.size(); ++g) {
        const auto& h = hists[g];
        hsc::io::Table table;
        table.columns = {"k", "count", "probability", "stderr"};
        for (const auto& [k, count] : h.counts) {
            const double se = h.prob_stderr.count(k) ? h.prob_stderr.at(k) : 0.0;
            table.add_row({std::to_string(k), hsc::io::format_double(count),
                           hsc::io::format_double(count / h.n_samples), hsc::io::format_double(se)});
        }
        hsc::io::write_table_file((out / ("histogram_" + std::to_string(g) + ".csv")).string(),
                                  table);
        series.add_row({hsc::io::format_double(h.t), hsc::io::format_double(h.mean),
                        hsc::io::format_double(h.stderr_mean)});
    }
    hsc::io::write_table_file((out / "mean_size.csv").string(), series);

    hsc::RunManifest m = base_manifest("clusters", args);
    m.set("grid", args.grid);
    m.set("grid_units", grid_units);
    m.set("samples", std::to_string(args.samples));
    m.set("mfp_samples", std::to_string(mfp_samples));
    if (tau > 0.0) m.set_double("info_tau_mfp", tau);
    finish_manifest(m, watch, out);

    std::cout << "clusters: " << hists.size() << " grid times, " << args.samples
              << " samples -> " << (out / "mean_size.csv").string() << "\n";
    return 0;
}

int run_theory(const std::string& out_dir, double t, double bound_c, int k0, int kmax) {
    const fs::path out = prepare_out(out_dir);
    hsc::io::Table table;
    table.columns = {"k", "pmf", "tree_weight", "tail_bound", "rough_bound"};
    hsc::theory::TheoryParams params{t, bound_c, k0};
    for (int k = 0; k <= kmax; ++k) {
        std::vector<int> gamma(k);
        for (int r = 0; r < k; ++r) gamma[r] = 1;
        std::string tail;
        if (k > k0 && t > 0.0) {
            tail = hsc::io::format_double(hsc::theory::theorem_tail_bound(k, params));
        }
        table.add_row({std::to_string(k), hsc::io::format_double(hsc::theory::wild_cluster_pmf(k, t)),
                       hsc::io::format_double(hsc::theory::tree_weight(gamma, t)), tail,
                       hsc::io::format_double(hsc::theory::rough_bound(k, bound_c, t))});
    }
    hsc::io::write_table_file((out / "theory.csv").string(), table);
    std::cout << "theory: t=" << t << " kmax=" << kmax << " -> " << (out / "theory.csv").string()
              << "\n";
    return 0;
}

int run_percolation(const CommonArgs& args) {
    const Stopwatch watch;
    const fs::path out = prepare_out(args.out);
    const hsc::EnsembleConfig cfg = hsc::EnsembleConfig::boltzmann_grad(args.n, args.beta, args.seed);
    const std::vector<double> grid = hsc::io::parse_double_list(args.grid);
    const auto curve = hsc::percolation_experiment(cfg, grid, args.samples, harness_options(args));

    hsc::io::Table table;
    table.columns = {"t", "fraction", "stderr"};
    for (const auto& pt : curve) {
        table.add_row({hsc::io::format_double(pt.t), hsc::io::format_double(pt.mean_fraction),
                       hsc::io::format_double(pt.stderr_fraction)});
    }
    hsc::io::write_table_file((out / "percolation.csv").string(), table);

    hsc::RunManifest m = base_manifest("percolation", args);
    m.set("grid", args.grid);
    m.set("samples", std::to_string(args.samples));
    finish_manifest(m, watch, out);

    std::cout << "percolation: " << curve.size() << " grid times -> "
              << (out / "percolation.csv").string() << "\n";
    return 0;
}

int run_mfp(const CommonArgs& args, double horizon_factor) {
    const Stopwatch watch;
    const fs::path out = prepare_out(args.out);
    const hsc::EnsembleConfig cfg = hsc::EnsembleConfig::boltzmann_grad(args.n, args.beta, args.seed);
    hsc::HarnessOptions opts = harness_options(args);
    opts.mfp_horizon_factor = horizon_factor;
    const hsc::MfpEstimate est = hsc::estimate_mean_free_time(cfg, args.samples, opts);

    hsc::io::Table table;
    table.columns = {"tau", "stderr", "collisions", "particle_time"};
    table.add_row({hsc::io::format_double(est.tau), hsc::io::format_double(est.stderr_tau),
                   std::to_string(est.total_collisions),
                   hsc::io::format_double(est.total_particle_time)});
    hsc::io::write_table_file((out / "mfp.csv").string(), table);

    hsc::RunManifest m = base_manifest("mfp", args);
    m.set("samples", std::to_string(args.samples));
    m.set_double("horizon_factor", horizon_factor);
    finish_manifest(m, watch, out);

    std::cout << "mfp: tau = " << est.tau << " +- " << est.stderr_tau << " ("
              << est.total_collisions << " collisions)\n";
    return 0;
}

int run_ibf_roundtrip(const CommonArgs& args, int n_max, double eps) {
    const fs::path out = prepare_out(args.out);
    hsc::io::Table table;
    table.columns = {"case", "n", "ok", "max_time_error"};
    int done = 0;
    int failures = 0;
    std::uint64_t sub_seed = args.seed;
    int attempts = 0;
    while (done < args.samples && attempts < 100 * args.samples) {
        ++attempts;
        const hsc::IbfRoundTripReport rep = hsc::ibf_round_trip(sub_seed++, n_max, eps);
        if (rep.ambiguous) continue;
        table.add_row({std::to_string(done), std::to_string(rep.n), rep.ok ? "1" : "0",
                       hsc::io::format_double(rep.max_time_error)});
        if (!rep.ok) {
            ++failures;
            std::cerr << "case " << done << " failed: " << rep.detail << "\n";
        }
        ++done;
    }
    hsc::io::write_table_file((out / "ibf_roundtrip.csv").string(), table);
    std::cout << "ibf-roundtrip: " << (done - failures) << "/" << done << " reconstructions ok\n";
    if (done < args.samples) {
        std::cerr << "ibf-roundtrip: could not draw enough unambiguous cases\n";
        return 1;
    }
    return failures == 0 ? 0 : 1;
}

void add_common(CLI::App* sub, CommonArgs& args, bool with_ensemble, bool with_grid,
                bool with_samples) {
    sub->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    sub->add_option("--config", "key-value config or manifest to preload (flags override)");
    args.out = default_out_dir();
    sub->add_option("--out", args.out, "output directory");
    if (with_ensemble) {
        sub->add_option("--n", args.n, "number of spheres (eps = N^-1/2)")->check(CLI::PositiveNumber);
        sub->add_option("--beta", args.beta, "inverse temperature")->check(CLI::PositiveNumber);
        sub->add_option("--seed", args.seed, "master PRNG seed");
        sub->add_option("--workers", args.workers, "worker threads (0 = hardware)");
        sub->add_option("--neighbor", args.neighbor, "collision bookkeeping: auto|cells|pairs");
    }
    if (with_grid) sub->add_option("--grid", args.grid, "comma-separated query times");
    if (with_samples) sub->add_option("--samples", args.samples, "Monte-Carlo sample count");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"event-driven hard spheres on the 3-torus with cluster statistics"};
    app.require_subcommand(1);

    CommonArgs sim_args;
    double sim_t = 1.0;
    CLI::App* sim = app.add_subcommand("simulate", "one trajectory: sample, evolve, write the log");
    add_common(sim, sim_args, true, false, false);
    sim->add_option("--t", sim_t, "simulated time");

    CommonArgs cl_args;
    std::string cl_units = "time";
    int cl_mfp_samples = 30;
    CLI::App* clusters =
        app.add_subcommand("clusters", "backward-cluster size statistics over an ensemble");
    add_common(clusters, cl_args, true, true, true);
    clusters->add_option("--root-average", cl_args.root_average,
                         "average statistics over all N roots");
    clusters->add_option("--grid-units", cl_units, "grid time units: time|mfp");
    clusters->add_option("--mfp-samples", cl_mfp_samples,
                         "samples for the mean-free-time estimate when --grid-units=mfp");

    double th_t = 1.0, th_c = 1.0;
    int th_k0 = 0, th_kmax = 10;
    std::string th_out = default_out_dir();
    CLI::App* theory = app.add_subcommand("theory", "closed-form law and bound tables");
    theory->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    theory->add_option("--config", "key-value config or manifest to preload (flags override)");
    theory->add_option("--t", th_t, "time in mean-free-time units")->required();
    theory->add_option("--C", th_c, "bound constant");
    theory->add_option("--k0", th_k0, "bound validity threshold");
    theory->add_option("--kmax", th_kmax, "largest tabulated cluster size");
    theory->add_option("--out", th_out, "output directory");

    CommonArgs pc_args;
    CLI::App* percolation =
        app.add_subcommand("percolation", "largest dynamical-cluster fraction over time");
    add_common(percolation, pc_args, true, true, true);

    CommonArgs mfp_args;
    double mfp_horizon = 3.0;
    CLI::App* mfp = app.add_subcommand("mfp", "measure the mean free time");
    add_common(mfp, mfp_args, true, false, true);
    mfp->add_option("--horizon-factor", mfp_horizon,
                    "trajectory length in kinetic mean-free-time estimates");

    CommonArgs ibf_args;
    int ibf_nmax = 4;
    double ibf_eps = 0.15;
    CLI::App* ibf = app.add_subcommand(
        "ibf-roundtrip", "reconstruction diagnostic: tree variables -> flow -> re-simulation");
    add_common(ibf, ibf_args, false, false, true);
    ibf->add_option("--seed", ibf_args.seed, "master PRNG seed");
    ibf->add_option("--n-max", ibf_nmax, "largest cluster cardinality drawn")->check(CLI::Range(1, 8));
    ibf->add_option("--eps", ibf_eps, "sphere diameter for the diagnostic");

    // Expand any --config file into explicit options right after the
    // subcommand token, so flags given on the command line override it.
    std::vector<std::string> tokens(argv + 1, argv + argc);
    try {
        std::string config_path;
        std::size_t subcmd_pos = tokens.size();
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            const std::string& tk = tokens[i];
            if (tk == "--config" && i + 1 < tokens.size()) {
                config_path = tokens[i + 1];
            } else if (tk.rfind("--config=", 0) == 0) {
                config_path = tk.substr(9);
            } else if (subcmd_pos == tokens.size() && !tk.empty() && tk[0] != '-') {
                subcmd_pos = i;
            }
        }
        if (!config_path.empty() && subcmd_pos < tokens.size()) {
            CLI::App* sub = app.get_subcommand_no_throw(tokens[subcmd_pos]);
            if (sub == nullptr) {
                throw std::runtime_error("unknown subcommand: " + tokens[subcmd_pos]);
            }
            const hsc::io::KeyValues kv = hsc::io::read_key_values_file(config_path);
            const auto cmd = kv.find("command");
            if (cmd != kv.end() && cmd->second != tokens[subcmd_pos]) {
                throw std::runtime_error("config was written by subcommand '" + cmd->second +
                                         "', not '" + tokens[subcmd_pos] + "'");
            }
            std::vector<std::string> injected;
            for (const auto& [key, value] : kv) {
                if (key == "command" || key.rfind("info_", 0) == 0) continue;
                std::string flag = "--" + key;
                for (auto& c : flag) {
                    if (c == '_') c = '-';
                }
                if (sub->get_option_no_throw(flag) != nullptr) {
                    injected.push_back(flag);
                    injected.push_back(value);
                }
            }
            tokens.insert(tokens.begin() + static_cast<std::ptrdiff_t>(subcmd_pos) + 1,
                          injected.begin(), injected.end());
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        std::reverse(tokens.begin(), tokens.end());
        app.parse(std::move(tokens));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (sim->parsed()) return run_simulate(sim_args, sim_t);
        if (clusters->parsed()) return run_clusters(cl_args, cl_units, cl_mfp_samples);
        if (theory->parsed()) return run_theory(th_out, th_t, th_c, th_k0, th_kmax);
        if (percolation->parsed()) return run_percolation(pc_args);
        if (mfp->parsed()) return run_mfp(mfp_args, mfp_horizon);
        if (ibf->parsed()) return run_ibf_roundtrip(ibf_args, ibf_nmax, ibf_eps);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

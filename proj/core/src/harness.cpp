#include "hsc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "hsc/clusters.hpp"
#include "hsc/rng.hpp"

namespace hsc {

namespace {

/// Seed-stream tag for bootstrap resampling, kept away from trajectory seeds.
constexpr std::uint64_t kBootstrapStream = 0xB005757201ULL;

double sample_stddev(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / (xs.size() - 1));
}

std::vector<std::vector<int>> bootstrap_indices(int n, int resamples, std::uint64_t seed) {
    Rng rng(derive_seed(seed, kBootstrapStream));
    std::vector<std::vector<int>> out(resamples);
    for (auto& draw : out) {
        draw.resize(n);
        for (int i = 0; i < n; ++i) draw[i] = rng.uniform_int(0, n - 1);
    }
    return out;
}

EvolveOptions evolve_options(const HarnessOptions& options) {
    EvolveOptions eo;
    eo.neighbor_mode = options.neighbor_mode;
    return eo;
}

}  // namespace

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
    workers = std::min(resolve_workers(workers), std::max(n, 1));
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    int error_index = -1;

    auto body = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (error_index < 0 || i < error_index) {
                    error = std::current_exception();
                    error_index = i;
                }
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

double kinetic_mean_free_time(const EnsembleConfig& cfg) {
    if (cfg.n_particles < 2) {
        throw std::invalid_argument("kinetic_mean_free_time: need at least two particles");
    }
    const double volume = kTwoPi * kTwoPi * kTwoPi;
    const double n_other = (cfg.n_particles - 1) / volume;
    const double mean_rel_speed = 4.0 / std::sqrt(kPi * cfg.beta);
    return 1.0 / (n_other * kPi * cfg.eps * cfg.eps * mean_rel_speed);
}

MfpEstimate estimate_mean_free_time(const EnsembleConfig& cfg, int n_samples,
                                    const HarnessOptions& options) {
    if (n_samples < 10) {
        throw std::invalid_argument("estimate_mean_free_time: need at least 10 samples");
    }
    const double horizon = options.mfp_horizon_factor * kinetic_mean_free_time(cfg);
    const EvolveOptions eo = evolve_options(options);

    std::vector<std::uint64_t> events(n_samples, 0);
    parallel_for(n_samples, options.workers, [&](int idx) {
        SystemState state = sample_equilibrium(cfg.reseeded(derive_seed(cfg.seed, idx)));
        const CollisionLog log = evolve(state, horizon, eo);
        events[idx] = log.events.size();
    });

    MfpEstimate est;
    est.n_samples = n_samples;
    est.total_collisions = std::accumulate(events.begin(), events.end(), std::uint64_t{0});
    est.total_particle_time = static_cast<double>(n_samples) * cfg.n_particles * horizon;
    if (est.total_collisions == 0) {
        throw std::runtime_error("estimate_mean_free_time: no collisions observed; increase the horizon");
    }
    est.tau = est.total_particle_time / (2.0 * static_cast<double>(est.total_collisions));
    est.rate = 1.0 / est.tau;

    const double per_sample_time = static_cast<double>(cfg.n_particles) * horizon;
    std::vector<double> taus;
    taus.reserve(options.bootstrap_resamples);
    for (const auto& draw : bootstrap_indices(n_samples, options.bootstrap_resamples, cfg.seed)) {
        std::uint64_t total = 0;
        for (int idx : draw) total += events[idx];
        if (total > 0) {
            taus.push_back(per_sample_time * n_samples / (2.0 * static_cast<double>(total)));
        }
    }
    est.stderr_tau = sample_stddev(taus);
    return est;
}

std::vector<ClusterHistogram> cluster_size_experiment(const EnsembleConfig& cfg,
                                                      const std::vector<double>& time_grid,
                                                      int n_samples,
                                                      const HarnessOptions& options) {
    if (time_grid.empty()) throw std::invalid_argument("cluster_size_experiment: empty time grid");
    if (n_samples < 1) throw std::invalid_argument("cluster_size_experiment: need samples");
    std::vector<double> grid = time_grid;
    std::sort(grid.begin(), grid.end());
    if (grid.front() < 0.0) throw std::invalid_argument("cluster_size_experiment: negative grid time");
    const double t_max = grid.back();
    const int n_times = static_cast<int>(grid.size());
    const EvolveOptions eo = evolve_options(options);

    // per trajectory and grid time: sparse size histogram with total weight 1
    std::vector<std::vector<std::map<int, double>>> per_traj(n_samples);

    parallel_for(n_samples, options.workers, [&](int idx) {
        SystemState state = sample_equilibrium(cfg.reseeded(derive_seed(cfg.seed, idx)));
        const CollisionLog log = evolve(state, t_max, eo);
        ClusterScanner scanner(log);
        auto& slots = per_traj[idx];
        slots.resize(n_times);
        if (options.root_average) {
            const double w = 1.0 / cfg.n_particles;
            for (int root = 0; root < cfg.n_particles; ++root) {
                for (int g = 0; g < n_times; ++g) {
                    slots[g][scanner.backward_size(root, grid[g])] += w;
                }
            }
        } else {
            for (int g = 0; g < n_times; ++g) {
                slots[g][scanner.backward_size(0, grid[g])] += 1.0;
            }
        }
    });

    const auto resamples = bootstrap_indices(n_samples, options.bootstrap_resamples, cfg.seed);

    std::vector<ClusterHistogram> out(n_times);
    for (int g = 0; g < n_times; ++g) {
        ClusterHistogram& h = out[g];
        h.t = grid[g];
        h.n_samples = n_samples;
        for (int idx = 0; idx < n_samples; ++idx) {
            for (const auto& [k, w] : per_traj[idx][g]) h.counts[k] += w;
        }
        double mean = 0.0;
        for (const auto& [k, w] : h.counts) mean += k * w;
        h.mean = mean / n_samples;

        // bootstrap over trajectories, shared draws across grid times
        std::vector<double> means;
        std::map<int, std::vector<double>> probs;
        means.reserve(resamples.size());
        for (const auto& draw : resamples) {
            std::map<int, double> counts;
            double m = 0.0;
            for (int idx : draw) {
                for (const auto& [k, w] : per_traj[idx][g]) {
                    counts[k] += w;
                    m += k * w;
                }
            }
            means.push_back(m / n_samples);
            for (const auto& [k, w] : counts) probs[k].push_back(w / n_samples);
        }
        h.stderr_mean = sample_stddev(means);
        for (auto& [k, xs] : probs) {
            xs.resize(resamples.size(), 0.0);  // draws where k never appeared
            h.prob_stderr[k] = sample_stddev(xs);
        }
    }
    return out;
}

TreeCensus tree_structure_census(const EnsembleConfig& cfg, double t, int n_samples,
                                 const HarnessOptions& options) {
    if (n_samples < 1) throw std::invalid_argument("tree_structure_census: need samples");
    if (t < 0.0) throw std::invalid_argument("tree_structure_census: negative time");
    const EvolveOptions eo = evolve_options(options);

    std::vector<std::map<std::vector<int>, double>> per_traj(n_samples);
    std::vector<double> measured(n_samples, 0.0);

    parallel_for(n_samples, options.workers, [&](int idx) {
        SystemState state = sample_equilibrium(cfg.reseeded(derive_seed(cfg.seed, idx)));
        const CollisionLog log = evolve(state, t, eo);
        ClusterScanner scanner(log);
        const int n_roots = options.root_average ? cfg.n_particles : 1;
        const double w = 1.0 / n_roots;
        for (int root = 0; root < n_roots; ++root) {
            const ClusterTree tree = scanner.backward(root, t);
            measured[idx] += w;
            if (tree.n <= options.census_max_size) {
                per_traj[idx][tree.parents] += w;
            }
        }
    });

    TreeCensus census;
    census.t = t;
    census.max_size = options.census_max_size;
    for (int idx = 0; idx < n_samples; ++idx) {
        census.n_measurements += measured[idx];
        for (const auto& [parents, w] : per_traj[idx]) census.counts[parents] += w;
    }
    return census;
}

std::vector<PercolationPoint> percolation_experiment(const EnsembleConfig& cfg,
                                                     const std::vector<double>& time_grid,
                                                     int n_samples,
                                                     const HarnessOptions& options) {
    if (time_grid.empty()) throw std::invalid_argument("percolation_experiment: empty time grid");
    if (n_samples < 1) throw std::invalid_argument("percolation_experiment: need samples");
    std::vector<double> grid = time_grid;
    std::sort(grid.begin(), grid.end());
    if (grid.front() < 0.0) throw std::invalid_argument("percolation_experiment: negative grid time");
    const int n_times = static_cast<int>(grid.size());
    const EvolveOptions eo = evolve_options(options);

    std::vector<std::vector<double>> fractions(n_samples);
    parallel_for(n_samples, options.workers, [&](int idx) {
        SystemState state = sample_equilibrium(cfg.reseeded(derive_seed(cfg.seed, idx)));
        const CollisionLog log = evolve(state, grid.back(), eo);

        // incremental union-find over the time-sorted events
        const int n = cfg.n_particles;
        std::vector<int> parent(n), size(n, 1);
        std::iota(parent.begin(), parent.end(), 0);
        auto find = [&](int a) {
            while (parent[a] != a) {
                parent[a] = parent[parent[a]];
                a = parent[a];
            }
            return a;
        };
        int largest = 1;
        std::size_t next_event = 0;
        auto& track = fractions[idx];
        track.resize(n_times);
        for (int g = 0; g < n_times; ++g) {
            while (next_event < log.events.size() && log.events[next_event].time <= grid[g]) {
                const auto& ev = log.events[next_event++];
                int a = find(ev.i), b = find(ev.j);
                if (a != b) {
                    if (size[a] < size[b]) std::swap(a, b);
                    parent[b] = a;
                    size[a] += size[b];
                    largest = std::max(largest, size[a]);
                }
            }
            track[g] = static_cast<double>(largest) / n;
        }
    });

    const auto resamples = bootstrap_indices(n_samples, options.bootstrap_resamples, cfg.seed);
    std::vector<PercolationPoint> out(n_times);
    for (int g = 0; g < n_times; ++g) {
        PercolationPoint& pt = out[g];
        pt.t = grid[g];
        double total = 0.0;
        pt.min_fraction = fractions[0][g];
        pt.max_fraction = fractions[0][g];
        for (int idx = 0; idx < n_samples; ++idx) {
            const double f = fractions[idx][g];
            total += f;
            pt.min_fraction = std::min(pt.min_fraction, f);
            pt.max_fraction = std::max(pt.max_fraction, f);
        }
        pt.mean_fraction = total / n_samples;
        std::vector<double> means;
        means.reserve(resamples.size());
        for (const auto& draw : resamples) {
            double m = 0.0;
            for (int idx : draw) m += fractions[idx][g];
            means.push_back(m / n_samples);
        }
        pt.stderr_fraction = sample_stddev(means);
    }
    return out;
}

std::string RunManifest::get(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) {
        throw std::runtime_error("manifest: missing key " + key);
    }
    return it->second;
}

void RunManifest::write_file(const std::string& path) const {
    io::KeyValues kv = values;
    kv["command"] = command;
    io::write_key_values_file(path, kv);
}

RunManifest RunManifest::read_file(const std::string& path) {
    RunManifest m;
    m.values = io::read_key_values_file(path);
    const auto it = m.values.find("command");
    if (it == m.values.end()) {
        throw std::runtime_error("manifest: missing command key in " + path);
    }
    m.command = it->second;
    m.values.erase(it);
    return m;
}

io::KeyValues RunManifest::reproduction_keys() const {
    io::KeyValues kv;
    for (const auto& [key, value] : values) {
        if (key.rfind("info_", 0) != 0) kv[key] = value;
    }
    kv["command"] = command;
    return kv;
}

std::string software_version() { return "0.1.0"; }

}  // namespace hsc

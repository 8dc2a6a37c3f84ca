#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "hsc/dynamics.hpp"
#include "hsc/io.hpp"
#include "hsc/sampling.hpp"

namespace hsc {

/// Execution knobs shared by all experiments. Results are independent of
/// `workers`: per-trajectory seeds are derived from (seed, index) and results
/// are merged in index order.
struct HarnessOptions {
    int workers = 0;                 ///< 0 = hardware concurrency
    bool root_average = true;        ///< average cluster statistics over all N roots
    NeighborMode neighbor_mode = NeighborMode::Auto;
    int bootstrap_resamples = 200;
    double mfp_horizon_factor = 3.0; ///< mean-free-time run length, in kinetic estimates
    int census_max_size = 4;         ///< largest cluster size tabulated by the census
};

/// Run a function over trajectory indices [0, n) on a small thread pool.
/// The function must only touch per-index state.
void parallel_for(int n, int workers, const std::function<void(int)>& fn);

int resolve_workers(int requested);

/// Kinetic-theory estimate of the mean free time for a Maxwellian gas:
/// 1 / (n_other pi eps^2 <|v_rel|>), with n_other = (N-1)/(2pi)^3 and
/// <|v_rel|> = 4 / sqrt(pi beta); an a-priori scale, not a measurement.
double kinetic_mean_free_time(const EnsembleConfig& cfg);

/// Measured mean free time with a bootstrap standard error.
struct MfpEstimate {
    double tau = 0.0;
    double stderr_tau = 0.0;
    double rate = 0.0;               ///< per-particle collision rate 1/tau
    std::uint64_t total_collisions = 0;
    double total_particle_time = 0.0;
    int n_samples = 0;
};

/// tau = (total simulated particle-time) / (2 * total collision count) over
/// an ensemble of fresh equilibrium trajectories, each evolved for
/// mfp_horizon_factor kinetic mean free times.
/// Throws if no collisions are observed.
MfpEstimate estimate_mean_free_time(const EnsembleConfig& cfg, int n_samples,
                                    const HarnessOptions& options = {});

/// Empirical distribution of |BC(1)| at one query time.
struct ClusterHistogram {
    double t = 0.0;                      ///< query time (simulation units)
    std::map<int, double> counts;        ///< k -> weighted trajectory count
    std::map<int, double> prob_stderr;   ///< k -> bootstrap se of counts[k]/n_samples
    int n_samples = 0;
    double mean = 0.0;                   ///< empirical S^N(t)
    double stderr_mean = 0.0;
};

/// For each sample: draw from the equilibrium ensemble, evolve once to the
/// last grid time, and slice the log at every grid time; with root averaging
/// the histogram weight of each trajectory is spread over all N roots
/// (exchangeability of the measure).
std::vector<ClusterHistogram> cluster_size_experiment(const EnsembleConfig& cfg,
                                                      const std::vector<double>& time_grid,
                                                      int n_samples,
                                                      const HarnessOptions& options = {});

/// Observed tree structures of clusters with size <= census_max_size.
struct TreeCensus {
    double t = 0.0;
    std::map<std::vector<int>, double> counts;  ///< parents list -> weighted count
    double n_measurements = 0.0;                ///< total cluster extractions
    int max_size = 4;
};

TreeCensus tree_structure_census(const EnsembleConfig& cfg, double t, int n_samples,
                                 const HarnessOptions& options = {});

/// Largest dynamical-cluster fraction at one grid time.
struct PercolationPoint {
    double t = 0.0;
    double mean_fraction = 0.0;
    double stderr_fraction = 0.0;
    double min_fraction = 0.0;
    double max_fraction = 0.0;
};

std::vector<PercolationPoint> percolation_experiment(const EnsembleConfig& cfg,
                                                     const std::vector<double>& time_grid,
                                                     int n_samples,
                                                     const HarnessOptions& options = {});

/// Everything needed to reproduce a run bit-exactly within one build, plus
/// informational fields (prefixed "info_", excluded from reproduction).
struct RunManifest {
    std::string command;
    io::KeyValues values;

    void set(const std::string& key, const std::string& value) { values[key] = value; }
    void set_double(const std::string& key, double v) { values[key] = io::format_double(v); }
    std::string get(const std::string& key) const;
    bool has(const std::string& key) const { return values.count(key) != 0; }

    void write_file(const std::string& path) const;
    static RunManifest read_file(const std::string& path);

    /// Keys that matter for reproduction (everything except info_*).
    io::KeyValues reproduction_keys() const;
};

std::string software_version();

}  // namespace hsc

#pragma once

#include <cstdint>

#include "hsc/dynamics.hpp"

namespace hsc {

/// Ensemble parameters under the Boltzmann-Grad scaling eps^2 N = 1.
/// `eps` is derived from N; the explicit-eps factory exists for test
/// scenarios outside the scaling and still enforces the dilute-regime guard.
struct EnsembleConfig {
    int n_particles = 0;
    double beta = 1.0;       ///< inverse temperature
    std::uint64_t seed = 0;
    double eps = 0.0;        ///< sphere diameter, N^{-1/2} under the scaling

    /// eps = N^{-1/2}.
    static EnsembleConfig boltzmann_grad(int n, double beta, std::uint64_t seed);

    /// Explicit diameter (testing hook; not the scaling).
    static EnsembleConfig with_eps(int n, double beta, std::uint64_t seed, double eps);

    EnsembleConfig reseeded(std::uint64_t s) const {
        EnsembleConfig c = *this;
        c.seed = s;
        return c;
    }

    /// N (pi/6) eps^3 / (2pi)^3, guarded below 0.01 on construction.
    double packing_fraction() const;
};

/// Draw an initial configuration from the canonical Gibbs measure:
/// velocities i.i.d. centered Gaussian with variance 1/beta per component,
/// positions uniform on the torus with hard-core rejection (offending
/// particles are redrawn). Deterministic given cfg.seed.
/// Throws std::runtime_error if rejection exceeds 1e6 * N attempts.
SystemState sample_equilibrium(const EnsembleConfig& cfg);

/// As above but drawing from a caller-provided stream (used when sampling is
/// one step of a longer deterministic procedure).
SystemState sample_equilibrium(const EnsembleConfig& cfg, class Rng& rng);

}  // namespace hsc

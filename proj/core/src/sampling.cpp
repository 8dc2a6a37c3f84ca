#include "hsc/sampling.hpp"

#include <cmath>
#include <stdexcept>

#include "hsc/rng.hpp"

namespace hsc {

namespace {

void validate(const EnsembleConfig& cfg) {
    if (cfg.n_particles < 1) {
        throw std::invalid_argument("EnsembleConfig: need at least one particle");
    }
    if (!(cfg.beta > 0.0)) {
        throw std::invalid_argument("EnsembleConfig: beta must be positive");
    }
    if (!(cfg.eps > 0.0) || !(cfg.eps < kPi / 2.0)) {
        throw std::invalid_argument("EnsembleConfig: eps must lie in (0, pi/2)");
    }
    if (cfg.packing_fraction() >= 0.01) {
        throw std::invalid_argument("EnsembleConfig: packing fraction breaks the dilute-regime guard");
    }
}

}  // namespace

EnsembleConfig EnsembleConfig::boltzmann_grad(int n, double beta, std::uint64_t seed) {
    EnsembleConfig cfg;
    cfg.n_particles = n;
    cfg.beta = beta;
    cfg.seed = seed;
    cfg.eps = 1.0 / std::sqrt(static_cast<double>(n));
    validate(cfg);
    return cfg;
}

EnsembleConfig EnsembleConfig::with_eps(int n, double beta, std::uint64_t seed, double eps) {
    EnsembleConfig cfg;
    cfg.n_particles = n;
    cfg.beta = beta;
    cfg.seed = seed;
    cfg.eps = eps;
    validate(cfg);
    return cfg;
}

double EnsembleConfig::packing_fraction() const {
    const double volume = kTwoPi * kTwoPi * kTwoPi;
    return n_particles * (kPi / 6.0) * eps * eps * eps / volume;
}

SystemState sample_equilibrium(const EnsembleConfig& cfg, Rng& rng) {
    validate(cfg);
    const int n = cfg.n_particles;
    const double sigma = 1.0 / std::sqrt(cfg.beta);

    SystemState state;
    state.eps = cfg.eps;
    state.current_time = 0.0;
    state.particles.resize(n);
    state.collision_counts.assign(n, 0);

    for (auto& p : state.particles) {
        p.velocity = rng.gaussian_vec3(sigma);
        p.last_update = 0.0;
    }

    const double eps2 = cfg.eps * cfg.eps;
    const std::uint64_t max_attempts = 1000000ULL * static_cast<std::uint64_t>(n);
    std::uint64_t attempts = 0;
    for (int i = 0; i < n; ++i) {
        for (;;) {
            if (attempts++ >= max_attempts) {
                throw std::runtime_error("sample_equilibrium: rejection sampling failed (misconfigured ensemble?)");
            }
            const TorusVector x = wrap(Vec3{rng.uniform(0.0, kTwoPi),
                                            rng.uniform(0.0, kTwoPi),
                                            rng.uniform(0.0, kTwoPi)});
            bool ok = true;
            for (int j = 0; j < i; ++j) {
                if (minimal_image(x, state.particles[j].position).norm2() <= eps2) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                state.particles[i].position = x;
                break;
            }
        }
    }
    return state;
}

SystemState sample_equilibrium(const EnsembleConfig& cfg) {
    Rng rng(splitmix64(cfg.seed));
    return sample_equilibrium(cfg, rng);
}

}  // namespace hsc

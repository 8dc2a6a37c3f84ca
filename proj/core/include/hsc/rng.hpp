#pragma once

#include <cstdint>
#include <random>

#include "hsc/vec3.hpp"

namespace hsc {

/// splitmix64 finalizer, used to whiten seeds before they reach the engine.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Engine seed for trajectory `index` of an ensemble with master seed `seed`:
/// seed XOR index, whitened once so that neighbouring indices do not give
/// correlated engine states.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ index);
}

/// Deterministic random stream. All randomness in the project flows through
/// this type so runs are reproducible given a seed:
///  - the engine is std::mt19937_64 (fully specified by the standard),
///  - uniform doubles are the top 53 bits of one engine draw, mapped to [0,1),
///  - gaussians use the Marsaglia polar transform, spares cached in order.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [lo, hi] (inclusive).
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(static_cast<std::uint64_t>(uniform() * static_cast<double>(span)));
    }

    /// Standard normal via the Marsaglia polar method.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u, v, r2;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            r2 = u * u + v * v;
        } while (r2 >= 1.0 || r2 == 0.0);
        const double f = std::sqrt(-2.0 * std::log(r2) / r2);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
    }

    double gaussian(double sigma) { return sigma * gaussian(); }

    Vec3 gaussian_vec3(double sigma) {
        const double gx = gaussian(sigma);
        const double gy = gaussian(sigma);
        const double gz = gaussian(sigma);
        return {gx, gy, gz};
    }

    /// Uniform direction on the unit sphere (Marsaglia 1972).
    Vec3 unit_vector() {
        double u, v, r2;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            r2 = u * u + v * v;
        } while (r2 >= 1.0);
        const double f = 2.0 * std::sqrt(1.0 - r2);
        return {u * f, v * f, 1.0 - 2.0 * r2};
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hsc

#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "hsc/torus.hpp"
#include "hsc/vec3.hpp"

namespace hsc {

/// State of one sphere. Positions are synchronized lazily: `position` is the
/// wrapped position at time `last_update`, and the particle moves ballistically
/// with `velocity` after that.
struct ParticleState {
    TorusVector position;
    Vec3 velocity;
    double last_update = 0.0;
};

/// Full system configuration for the event-driven flow.
struct SystemState {
    std::vector<ParticleState> particles;
    double eps = 0.0;            ///< sphere diameter
    double current_time = 0.0;   ///< simulation clock
    std::vector<std::uint64_t> collision_counts;  ///< per-particle event counters

    int size() const { return static_cast<int>(particles.size()); }

    /// Position of particle i extrapolated to time t (>= last_update).
    Vec3 position_at(int i, double t) const {
        const ParticleState& p = particles[i];
        return p.position.as_vec() + p.velocity * (t - p.last_update);
    }

    Vec3 total_momentum() const;
    double kinetic_energy() const;

    /// Wrapped positions and update stamps brought to `t` for all particles.
    void synchronize(double t);

    /// Smallest pairwise torus distance (O(N^2); positions must be synchronized).
    double min_pair_distance() const;
};

/// One elastic collision. `omega` is the unit contact normal (x_i - x_j)/eps
/// with i < j; pre velocities are incoming, post are outgoing.
struct CollisionEvent {
    double time = 0.0;
    int i = 0;
    int j = 0;
    Vec3 omega;
    Vec3 vi_pre, vj_pre;
    Vec3 vi_post, vj_post;
};

bool operator==(const CollisionEvent& a, const CollisionEvent& b);

/// Time-ordered record of all collisions of one trajectory; the substrate for
/// cluster analysis. Event times are absolute and lie in [t_begin, t_begin + duration].
struct CollisionLog {
    std::vector<CollisionEvent> events;
    int n_particles = 0;
    double eps = 0.0;
    double t_begin = 0.0;
    double duration = 0.0;
};

/// Elastic reflection of an incoming pair: the normal component of the
/// relative velocity flips, tangential components are unchanged.
/// Throws if |omega| deviates from 1 beyond 1e-12 or the pair is not incoming.
std::pair<Vec3, Vec3> reflect(const Vec3& v_i, const Vec3& v_j, const Vec3& omega);

namespace detail {
/// The collision transform without the incoming-pair check. It is an
/// involution, which is what the interacting-backwards construction relies on.
inline std::pair<Vec3, Vec3> scatter(const Vec3& v_i, const Vec3& v_j, const Vec3& omega) {
    const double lam = omega.dot(v_i - v_j);
    return {v_i - omega * lam, v_j + omega * lam};
}
}  // namespace detail

/// Neighbor bookkeeping strategy for collision prediction.
///  - AllPairs: every pair is tracked directly; pairs with no contact within
///    one relative period get a recheck entry at the horizon, so wrap-around
///    contacts that outlive the horizon are still found. Simple, O(N^2) queue.
///  - CellList: linked-cell grid with cell-crossing events; predictions are
///    restricted to the 27 neighboring cells. Produces the identical event
///    log (collision times and normals are computed from the same canonical
///    pair states in both modes).
///  - Auto: CellList when N is large enough for it to pay off, else AllPairs.
enum class NeighborMode { AllPairs, CellList, Auto };

struct EvolveOptions {
    NeighborMode neighbor_mode = NeighborMode::AllPairs;
    std::uint64_t max_events = 0;    ///< stop after this many collisions (0 = no cap)
    double cell_target = 0.35;       ///< preferred cell side for CellList
    bool check_exclusion_at_end = true;  ///< O(N^2) hard-core scan after the run
};

/// Advance the state to t_end by event-driven integration and return the
/// complete collision log. Throws std::runtime_error with a diagnostic dump
/// if an overlap beyond eps*(1 - 1e-6) is detected at an event.
CollisionLog evolve(SystemState& state, double t_end, const EvolveOptions& options = {});

/// Equivalent to flipping all velocities, evolving for `duration`, and
/// flipping back. Log times are on the backward clock: tau in [0, duration]
/// means absolute time current_time - tau, and logged velocities are those of
/// the time-reversed frame. The state ends at current_time - duration.
CollisionLog evolve_backward(SystemState& state, double duration,
                             const EvolveOptions& options = {});

}  // namespace hsc

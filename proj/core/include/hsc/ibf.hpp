#pragma once

#include <stdexcept>
#include <vector>

#include "hsc/dynamics.hpp"

namespace hsc {

/// Tree variables of an interacting backwards flow: the root state at the
/// upper time, the creation times (strictly decreasing inside (t_end, t_start)),
/// the contact normals, and the velocities of the created particles.
/// parents[r] is 1-based: creation r+1 attaches to cluster particle
/// parents[r] in creation order (1 = root).
struct IbfVariables {
    TorusVector root_position;
    Vec3 root_velocity;
    double t_start = 0.0;  ///< upper time, where the root state is given
    double t_end = 0.0;    ///< lower time, where the flow stops
    std::vector<int> parents;
    std::vector<double> creation_times;
    std::vector<Vec3> omegas;
    std::vector<Vec3> velocities;

    int n() const { return static_cast<int>(parents.size()); }
};

/// A creation whose placement overlaps an existing sphere (violating the
/// non-overlap indicator). `creation_index` is 1-based.
class CreationOverlapError : public std::runtime_error {
public:
    CreationOverlapError(int index, const std::string& what)
        : std::runtime_error(what), creation_index(index) {}
    int creation_index;
};

/// The reconstructed cluster trajectory. Particle 0 is the root; particle r
/// is the r-th created sphere. Event velocities are in the forward-time frame.
struct IbfTrajectory {
    SystemState final_state;                 ///< configuration at t_end
    std::vector<CollisionEvent> creations;   ///< the n creation collisions
    std::vector<CollisionEvent> recollisions;
};

/// Build the interacting backwards flow: starting from the root state at
/// t_start and going down in time, insert particle r+1 at time
/// creation_times[r] in contact with its parent (offset omega * eps), apply
/// the instantaneous backward collision, and run hard-sphere dynamics between
/// creations. Returns the full piecewise trajectory and the configuration at
/// t_end.
/// Throws CreationOverlapError if a creation overlaps an existing sphere and
/// std::invalid_argument if the variables violate their invariants (ordering,
/// parents range, post-collisional condition).
IbfTrajectory construct_ibf(const IbfVariables& vars, double eps);

/// Outcome of one randomized reconstruction check (the invertibility of the
/// tree-variable map).
struct IbfRoundTripReport {
    bool ok = false;
    bool ambiguous = false;  ///< extra collisions above a creation time; retried by callers
    int n = 0;
    double max_time_error = 0.0;
    std::string detail;
};

/// Draw valid tree variables with 1..n_max creations, build the backwards
/// flow, embed its final configuration among far-away spectator spheres,
/// run the hard-sphere dynamics forward to the root time, and compare the
/// extracted backward cluster (parents, member order, creation times within
/// tol) against the prescribed variables.
IbfRoundTripReport ibf_round_trip(std::uint64_t seed, int n_max = 4, double eps = 0.15,
                                  double tol = 1e-8);

}  // namespace hsc

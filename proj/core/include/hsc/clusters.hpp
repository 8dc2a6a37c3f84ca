#pragma once

#include <vector>

#include "hsc/dynamics.hpp"

namespace hsc {

/// A backward (or forward) collisional cluster of one tagged particle, with
/// its ordered tree structure.
///
/// `members` lists the fresh particles in discovery order; `parents[r]` is
/// the 1-based position, within the ordered set {root, members[0], ...}, of
/// the cluster particle the r-th fresh particle collided with, so
/// parents[r] <= r + 1. `creation_times` are absolute event times, strictly
/// decreasing for backward clusters and strictly increasing for forward ones.
/// `recollisions` counts logged collisions internal to the cluster.
struct ClusterTree {
    int root = 0;
    int n = 0;
    std::vector<int> parents;
    std::vector<int> members;
    std::vector<double> creation_times;
    int recollisions = 0;
};

/// Partition of all particles into maximal groups with no collisions between
/// groups during [t_begin, t]. `block_of[p]` identifies the block of p.
struct DynamicalPartition {
    std::vector<std::vector<int>> blocks;
    std::vector<int> block_of;
    int largest_size = 0;
};

/// Backward cluster of `root` at query time `t`, restricted to events in
/// [t_star, t]. Scans the log once, backward in time: an event with exactly
/// one endpoint inside the growing set appends the outside endpoint; an event
/// with both endpoints inside counts as a recollision.
/// Throws on root out of range or t outside the log.
ClusterTree backward_cluster(const CollisionLog& log, int root, double t, double t_star = 0.0);

/// Same construction scanning forward from the start of the log up to t.
ClusterTree forward_cluster(const CollisionLog& log, int root, double t);

/// Union-find over all collision pairs with event time <= t.
DynamicalPartition dynamical_clusters(const CollisionLog& log, double t);

/// Reusable scanner for extracting many clusters from one log without
/// reallocation (the per-root, per-time loops of the harness).
class ClusterScanner {
public:
    explicit ClusterScanner(const CollisionLog& log);

    ClusterTree backward(int root, double t, double t_star = 0.0);
    ClusterTree forward(int root, double t);

    /// Cardinality |BC(root)| only, skipping tree assembly.
    int backward_size(int root, double t, double t_star = 0.0);

private:
    template <bool Backward, bool SizeOnly>
    ClusterTree scan(int root, double t, double t_star);

    const CollisionLog& log_;
    std::vector<int> position_;  // 1-based position in the ordered set, epoch-guarded
    std::vector<int> epoch_seen_;
    int epoch_ = 0;
};

}  // namespace hsc

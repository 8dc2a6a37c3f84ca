#include "hsc/clusters.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hsc {

namespace {

void validate_query(const CollisionLog& log, int root, double t, double t_star) {
    if (root < 0 || root >= log.n_particles) {
        throw std::invalid_argument("cluster query: root out of range");
    }
    const double t_lo = log.t_begin;
    const double t_hi = log.t_begin + log.duration;
    if (t < t_lo || t > t_hi) {
        throw std::invalid_argument("cluster query: t outside the log duration");
    }
    if (t_star < t_lo || t_star > t) {
        throw std::invalid_argument("cluster query: t_star outside [t_begin, t]");
    }
}

struct UnionFind {
    std::vector<int> parent;
    std::vector<int> rank_;

    explicit UnionFind(int n) : parent(n), rank_(n, 0) {
        std::iota(parent.begin(), parent.end(), 0);
    }

    int find(int a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a == b) return;
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }
};

}  // namespace

ClusterScanner::ClusterScanner(const CollisionLog& log)
    : log_(log), position_(log.n_particles, 0), epoch_seen_(log.n_particles, -1) {}

template <bool Backward, bool SizeOnly>
ClusterTree ClusterScanner::scan(int root, double t, double t_star) {
    validate_query(log_, root, t, t_star);
    ++epoch_;

    ClusterTree tree;
    tree.root = root;
    epoch_seen_[root] = epoch_;
    position_[root] = 1;
    int count = 0;

    auto member_pos = [&](int p) -> int {
        return epoch_seen_[p] == epoch_ ? position_[p] : 0;
    };

    const auto& events = log_.events;
    auto time_less = [](const CollisionEvent& e, double value) { return e.time < value; };

    auto process = [&](const CollisionEvent& ev) {
        const int pi = member_pos(ev.i);
        const int pj = member_pos(ev.j);
        if (pi != 0 && pj != 0) {
            ++tree.recollisions;
            return;
        }
        if (pi == 0 && pj == 0) return;
        const int fresh = (pi != 0) ? ev.j : ev.i;
        const int parent = (pi != 0) ? pi : pj;
        ++count;
        epoch_seen_[fresh] = epoch_;
        position_[fresh] = count + 1;
        if constexpr (!SizeOnly) {
            tree.members.push_back(fresh);
            tree.parents.push_back(parent);
            tree.creation_times.push_back(ev.time);
        }
    };

    if constexpr (Backward) {
        // first event with time > t, scanned downward to time >= t_star
        auto it = std::upper_bound(events.begin(), events.end(), t,
                                   [](double value, const CollisionEvent& e) { return value < e.time; });
        while (it != events.begin()) {
            --it;
            if (it->time < t_star) break;
            process(*it);
        }
    } else {
        auto it = std::lower_bound(events.begin(), events.end(), t_star, time_less);
        for (; it != events.end() && it->time <= t; ++it) process(*it);
    }

    tree.n = count;
    return tree;
}

ClusterTree ClusterScanner::backward(int root, double t, double t_star) {
    return scan<true, false>(root, t, t_star);
}

ClusterTree ClusterScanner::forward(int root, double t) {
    return scan<false, false>(root, t, log_.t_begin);
}

int ClusterScanner::backward_size(int root, double t, double t_star) {
    return scan<true, true>(root, t, t_star).n;
}

ClusterTree backward_cluster(const CollisionLog& log, int root, double t, double t_star) {
    ClusterScanner scanner(log);
    return scanner.backward(root, t, t_star);
}

ClusterTree forward_cluster(const CollisionLog& log, int root, double t) {
    ClusterScanner scanner(log);
    return scanner.forward(root, t);
}

DynamicalPartition dynamical_clusters(const CollisionLog& log, double t) {
    const int n = log.n_particles;
    UnionFind uf(n);
    for (const auto& ev : log.events) {
        if (ev.time > t) break;
        uf.unite(ev.i, ev.j);
    }

    DynamicalPartition part;
    part.block_of.assign(n, -1);
    std::vector<int> block_index(n, -1);
    for (int p = 0; p < n; ++p) {
        const int r = uf.find(p);
        if (block_index[r] < 0) {
            block_index[r] = static_cast<int>(part.blocks.size());
            part.blocks.emplace_back();
        }
        part.block_of[p] = block_index[r];
        part.blocks[block_index[r]].push_back(p);
    }
    part.largest_size = 0;
    for (const auto& b : part.blocks) {
        part.largest_size = std::max(part.largest_size, static_cast<int>(b.size()));
    }
    return part;
}

}  // namespace hsc

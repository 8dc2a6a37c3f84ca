#include "doctest.h"

#include <algorithm>

#include "hsc/clusters.hpp"
#include "hsc/dynamics.hpp"
#include "hsc/rng.hpp"
#include "hsc/sampling.hpp"
#include "oracles.hpp"

using namespace hsc;

namespace {

CollisionLog scripted_log(int n_particles, double duration,
                          const std::vector<std::pair<double, std::pair<int, int>>>& events) {
    CollisionLog log;
    log.n_particles = n_particles;
    log.eps = 0.1;
    log.duration = duration;
    for (const auto& [t, pair] : events) {
        CollisionEvent ev;
        ev.time = t;
        ev.i = std::min(pair.first, pair.second);
        ev.j = std::max(pair.first, pair.second);
        log.events.push_back(ev);
    }
    std::sort(log.events.begin(), log.events.end(),
              [](const CollisionEvent& a, const CollisionEvent& b) { return a.time < b.time; });
    return log;
}

bool same_tree(const ClusterTree& a, const ClusterTree& b) {
    return a.root == b.root && a.n == b.n && a.parents == b.parents && a.members == b.members &&
           a.creation_times == b.creation_times && a.recollisions == b.recollisions;
}

}  // namespace

TEST_SUITE_BEGIN("clusters");

TEST_CASE("backward cluster hand trace") {
    // events (t=3: {0,1}), (t=2: {1,2}), (t=1: {0,3}); root 0 queried at t=4
    const CollisionLog log = scripted_log(5, 4.0, {{3.0, {0, 1}}, {2.0, {1, 2}}, {1.0, {0, 3}}});
    const ClusterTree tree = backward_cluster(log, 0, 4.0);
    CHECK(tree.n == 3);
    CHECK(tree.members == std::vector<int>{1, 2, 3});
    CHECK(tree.parents == std::vector<int>{1, 2, 1});
    CHECK(tree.creation_times == std::vector<double>{3.0, 2.0, 1.0});
    CHECK(tree.recollisions == 0);
}

TEST_CASE("backward cluster counts recollisions") {
    // second event between members adds nobody
    const CollisionLog log = scripted_log(4, 4.0, {{3.0, {0, 1}}, {2.0, {0, 1}}});
    const ClusterTree tree = backward_cluster(log, 0, 4.0);
    CHECK(tree.n == 1);
    CHECK(tree.members == std::vector<int>{1});
    CHECK(tree.parents == std::vector<int>{1});
    CHECK(tree.recollisions == 1);
}

TEST_CASE("empty log gives the empty cluster") {
    const CollisionLog log = scripted_log(3, 2.0, {});
    const ClusterTree tree = backward_cluster(log, 0, 2.0);
    CHECK(tree.n == 0);
    CHECK(tree.members.empty());
    CHECK(tree.recollisions == 0);
}

TEST_CASE("the pictured three-particle tree structure (1,1,2) with one recollision") {
    const CollisionLog log = scripted_log(
        5, 10.0, {{8.0, {0, 1}}, {6.0, {0, 2}}, {4.0, {1, 3}}, {3.0, {2, 3}}});
    const ClusterTree tree = backward_cluster(log, 0, 10.0);
    CHECK(tree.n == 3);
    CHECK(tree.parents == std::vector<int>{1, 1, 2});
    CHECK(tree.members == std::vector<int>{1, 2, 3});
    CHECK(tree.recollisions == 1);
}

TEST_CASE("forward cluster hand trace and duality") {
    const CollisionLog log = scripted_log(4, 3.0, {{1.0, {0, 1}}, {2.0, {1, 2}}});
    const ClusterTree fwd = forward_cluster(log, 0, 3.0);
    CHECK(fwd.n == 2);
    CHECK(fwd.members == std::vector<int>{1, 2});
    CHECK(fwd.parents == std::vector<int>{1, 2});

    // forward on a log equals backward on the time-reversed log
    Rng rng(5150);
    for (int it = 0; it < 50; ++it) {
        CollisionLog log2 = oracle::random_synthetic_log(rng, 12, 40, 10.0);
        CollisionLog reversed = log2;
        for (auto& ev : reversed.events) ev.time = 10.0 - ev.time;
        std::sort(reversed.events.begin(), reversed.events.end(),
                  [](const CollisionEvent& a, const CollisionEvent& b) { return a.time < b.time; });
        const ClusterTree f = forward_cluster(log2, 3, 10.0);
        const ClusterTree b = backward_cluster(reversed, 3, 10.0);
        CHECK(f.n == b.n);
        CHECK(f.members == b.members);
        CHECK(f.parents == b.parents);
        CHECK(f.recollisions == b.recollisions);
    }
}

TEST_CASE("queries outside the log are rejected") {
    const CollisionLog log = scripted_log(3, 2.0, {});
    CHECK_THROWS_AS(backward_cluster(log, 7, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(backward_cluster(log, 0, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(backward_cluster(log, 0, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("dynamical clusters from union-find") {
    const CollisionLog log = scripted_log(6, 3.0, {{1.0, {0, 1}}, {2.0, {2, 3}}});
    const DynamicalPartition part = dynamical_clusters(log, 3.0);
    CHECK(part.largest_size == 2);
    CHECK(part.block_of[0] == part.block_of[1]);
    CHECK(part.block_of[2] == part.block_of[3]);
    CHECK(part.block_of[0] != part.block_of[2]);
    CHECK(part.block_of[4] != part.block_of[5]);
    CHECK(part.blocks.size() == 4);

    const CollisionLog chain =
        scripted_log(5, 4.0, {{1.0, {0, 1}}, {2.0, {1, 2}}, {3.0, {2, 3}}});
    CHECK(dynamical_clusters(chain, 4.0).largest_size == 4);
    // truncating the window splits the chain
    CHECK(dynamical_clusters(chain, 1.5).largest_size == 2);
}

TEST_CASE("single-pass extraction matches the fixed-point rescan oracle") {
    Rng rng(31415);
    for (int it = 0; it < 150; ++it) {
        const int n = 3 + rng.uniform_int(0, 47);
        const int m = rng.uniform_int(0, 200);
        const CollisionLog log = oracle::random_synthetic_log(rng, n, m, 10.0);
        const int root = rng.uniform_int(0, n - 1);
        const double t = rng.uniform(0.0, 10.0);
        const double t_star = rng.uniform(0.0, t);

        const ClusterTree mine = backward_cluster(log, root, t, t_star);
        const ClusterTree ref = oracle::backward_cluster_rescan(log, root, t, t_star);
        CHECK(same_tree(mine, ref));

        const ClusterTree fmine = forward_cluster(log, root, t);
        const ClusterTree fref = oracle::forward_cluster_rescan(log, root, t);
        CHECK(same_tree(fmine, fref));

        // parent validity and cardinality bound
        for (int r = 0; r < mine.n; ++r) {
            CHECK(mine.parents[r] >= 1);
            CHECK(mine.parents[r] <= r + 1);
        }
        CHECK(mine.n <= n - 1);
    }
}

TEST_CASE("monotone growth in the query time") {
    Rng rng(2718);
    for (int it = 0; it < 60; ++it) {
        const CollisionLog log = oracle::random_synthetic_log(rng, 20, 80, 10.0);
        const int root = rng.uniform_int(0, 19);
        int prev = -1;
        int jumps = 0;
        for (double t = 0.0; t <= 10.0; t += 0.25) {
            const int n = backward_cluster(log, root, t).n;
            if (prev >= 0) {
                CHECK(n >= prev);
                jumps += n - prev;
            }
            prev = n;
        }
        (void)jumps;
    }
}

TEST_CASE("clusters never leave their dynamical block") {
    Rng rng(161803);
    for (int it = 0; it < 40; ++it) {
        const CollisionLog log = oracle::random_synthetic_log(rng, 25, 100, 5.0);
        const DynamicalPartition part = dynamical_clusters(log, 5.0);
        for (int root = 0; root < 25; ++root) {
            const ClusterTree tree = backward_cluster(log, root, 5.0);
            for (int member : tree.members) {
                CHECK(part.block_of[member] == part.block_of[root]);
            }
        }
    }
}

TEST_CASE("containment on a simulated ensemble") {
    const EnsembleConfig cfg = EnsembleConfig::boltzmann_grad(200, 1.0, 8);
    SystemState st = sample_equilibrium(cfg);
    const CollisionLog log = evolve(st, 60.0, EvolveOptions{NeighborMode::Auto, 0, 0.35, true});
    REQUIRE(log.events.size() > 50);
    const DynamicalPartition part = dynamical_clusters(log, 60.0);
    ClusterScanner scanner(log);
    for (int root = 0; root < 200; ++root) {
        const ClusterTree tree = scanner.backward(root, 60.0);
        for (int member : tree.members) {
            CHECK(part.block_of[member] == part.block_of[root]);
        }
    }
}

TEST_SUITE_END();

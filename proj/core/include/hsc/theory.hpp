#pragma once

#include <cstdint>
#include <vector>

namespace hsc::theory {

/// Parameters of the cluster-cardinality tail bound: an elapsed time in
/// mean-free-time units, the bound constant C, and the validity threshold k0
/// below which the bound is not asserted. C and k0 are user-supplied; the
/// bound only claims their existence.
struct TheoryParams {
    double t = 0.0;
    double C = 1.0;
    int k0 = 0;
};

/// Heuristic cluster-size law: P(|BC| = k) = e^{-t} (1 - e^{-t})^k.
/// Time is in units where the per-particle collision rate is 1.
double wild_cluster_pmf(int k, double t);

/// Mean cluster size e^t - 1 (the first moment of the pmf above).
double wild_mean_size(double t);

/// Weight of one ordered collision tree: the closed form
/// e^{-t} (1 - e^{-t})^k / k! of the k-fold time-ordered integral.
/// Every valid tree of size k carries the same weight; `parents` is
/// validated (parents[r] in {1..r+1}) and its length sets k.
double tree_weight(const std::vector<int>& parents, double t);

/// Number of ordered collision trees with k creations: k!.
/// Guarded at k <= 20 (overflow).
std::uint64_t count_trees(int k);

/// All k! parent sequences in lexicographic order. Guarded at k <= 8.
std::vector<std::vector<int>> enumerate_trees(int k);

/// Tail bound C t e^{-(1/4) k^{1/(C t)}} on P(|BC| = k), asserted only for
/// k > k0. Requires t > 0.
double theorem_tail_bound(int k, const TheoryParams& params);

/// Short-time estimate (C t)^k, kept for comparison plots; diverges in k for
/// C t > 1 where the refined law stays normalized.
double rough_bound(int k, double C, double t);

}  // namespace hsc::theory

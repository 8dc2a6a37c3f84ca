#include "hsc/theory.hpp"

#include <cmath>
#include <stdexcept>

namespace hsc::theory {

double wild_cluster_pmf(int k, double t) {
    if (k < 0) throw std::invalid_argument("wild_cluster_pmf: negative k");
    if (t < 0.0) throw std::invalid_argument("wild_cluster_pmf: negative t");
    if (k == 0) return std::exp(-t);
    return std::exp(-t) * std::pow(1.0 - std::exp(-t), k);
}

double wild_mean_size(double t) {
    if (t < 0.0) throw std::invalid_argument("wild_mean_size: negative t");
    return std::expm1(t);
}

double tree_weight(const std::vector<int>& parents, double t) {
    if (t < 0.0) throw std::invalid_argument("tree_weight: negative t");
    const int k = static_cast<int>(parents.size());
    for (int r = 0; r < k; ++r) {
        if (parents[r] < 1 || parents[r] > r + 1) {
            throw std::invalid_argument("tree_weight: invalid parents list");
        }
    }
    double factorial = 1.0;
    for (int r = 2; r <= k; ++r) factorial *= r;
    return wild_cluster_pmf(k, t) / factorial;
}

std::uint64_t count_trees(int k) {
    if (k < 0) throw std::invalid_argument("count_trees: negative k");
    if (k > 20) throw std::invalid_argument("count_trees: k > 20 overflows");
    std::uint64_t f = 1;
    for (int r = 2; r <= k; ++r) f *= static_cast<std::uint64_t>(r);
    return f;
}

std::vector<std::vector<int>> enumerate_trees(int k) {
    if (k < 0) throw std::invalid_argument("enumerate_trees: negative k");
    if (k > 8) throw std::invalid_argument("enumerate_trees: k > 8 is too many trees");
    std::vector<std::vector<int>> out;
    out.reserve(count_trees(k));
    std::vector<int> current(k, 1);
    // odometer over k_r in {1..r}, least-significant digit last keeps the
    // output lexicographic
    for (;;) {
        out.push_back(current);
        int r = k - 1;
        while (r >= 0 && current[r] == r + 1) {
            current[r] = 1;
            --r;
        }
        if (r < 0) break;
        ++current[r];
    }
    return out;
}

double theorem_tail_bound(int k, const TheoryParams& params) {
    if (!(params.t > 0.0)) throw std::invalid_argument("theorem_tail_bound: t must be positive");
    if (!(params.C > 0.0)) throw std::invalid_argument("theorem_tail_bound: C must be positive");
    if (k <= params.k0) {
        throw std::invalid_argument("theorem_tail_bound: bound not asserted for k <= k0");
    }
    const double ct = params.C * params.t;
    return ct * std::exp(-0.25 * std::pow(static_cast<double>(k), 1.0 / ct));
}

double rough_bound(int k, double C, double t) {
    if (k < 0) throw std::invalid_argument("rough_bound: negative k");
    return std::pow(C * t, k);
}

}  // namespace hsc::theory

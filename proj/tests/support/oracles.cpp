#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracle {

using hsc::CollisionEvent;
using hsc::CollisionLog;
using hsc::ClusterTree;
using hsc::Vec3;

std::optional<double> collision_time_stepping(const Vec3& x_rel, const Vec3& v_rel, double eps) {
    const Vec3 d0 = hsc::fold(x_rel);
    const double speed = v_rel.norm();
    if (speed == 0.0) return std::nullopt;
    const double horizon = hsc::kTwoPi / speed;
    const double dt = 1e-4 * eps / speed;

    auto gap = [&](double s) { return hsc::fold(d0 + v_rel * s).norm() - eps; };

    double prev_s = 0.0;
    double prev_gap = gap(0.0);
    if (prev_gap <= 0.0) return 0.0;  // at contact already
    for (double s = dt; s <= horizon + dt; s += dt) {
        const double cur_s = std::min(s, horizon);
        const double cur_gap = gap(cur_s);
        if (cur_gap <= 0.0) {
            double lo = prev_s, hi = cur_s;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (gap(mid) <= 0.0) {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
        prev_s = cur_s;
        prev_gap = cur_gap;
        if (cur_s >= horizon) break;
    }
    (void)prev_gap;
    return std::nullopt;
}

namespace {

struct Entry {
    int position;      // 1-based position in the ordered set
    double entry_time;
};

template <bool Backward>
ClusterTree cluster_rescan(const CollisionLog& log, int root, double t, double t_star) {
    if (root < 0 || root >= log.n_particles) {
        throw std::invalid_argument("rescan oracle: root out of range");
    }
    std::vector<std::optional<Entry>> members(log.n_particles);
    members[root] = Entry{1, Backward ? t : t_star};
    int count = 1;

    // events inside [t_star, t], ordered so that the first addable event found
    // in a fresh scan is the one the true construction would take next
    std::vector<CollisionEvent> window;
    for (const auto& ev : log.events) {
        if (ev.time >= t_star && ev.time <= t) window.push_back(ev);
    }
    if (Backward) {
        std::reverse(window.begin(), window.end());
    }

    auto active = [&](int p, double time) {
        if (!members[p]) return false;
        return Backward ? time <= members[p]->entry_time : time >= members[p]->entry_time;
    };

    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& ev : window) {
            const bool ai = active(ev.i, ev.time);
            const bool aj = active(ev.j, ev.time);
            if (ai && !members[ev.j]) {
                members[ev.j] = Entry{++count, ev.time};
            } else if (aj && !members[ev.i]) {
                members[ev.i] = Entry{++count, ev.time};
            } else {
                continue;
            }
            changed = true;
            break;  // restart the scan from the top after every addition
        }
    }

    ClusterTree tree;
    tree.root = root;
    tree.n = count - 1;
    tree.members.resize(tree.n);
    tree.parents.resize(tree.n);
    tree.creation_times.resize(tree.n);
    for (int p = 0; p < log.n_particles; ++p) {
        if (!members[p] || p == root) continue;
        const int r = members[p]->position - 2;
        tree.members[r] = p;
        tree.creation_times[r] = members[p]->entry_time;
    }
    // the parent of member r is the position of the other endpoint of its
    // entry event
    for (int r = 0; r < tree.n; ++r) {
        const int fresh = tree.members[r];
        for (const auto& ev : window) {
            if (ev.time != tree.creation_times[r]) continue;
            if (ev.i != fresh && ev.j != fresh) continue;
            const int other = (ev.i == fresh) ? ev.j : ev.i;
            if (!members[other]) continue;
            tree.parents[r] = members[other]->position;
            break;
        }
    }
    // recollisions: events with both endpoints active
    for (const auto& ev : window) {
        if (active(ev.i, ev.time) && active(ev.j, ev.time)) {
            bool is_entry = false;
            for (int r = 0; r < tree.n; ++r) {
                if (tree.creation_times[r] == ev.time &&
                    (tree.members[r] == ev.i || tree.members[r] == ev.j)) {
                    is_entry = true;
                    break;
                }
            }
            if (!is_entry) ++tree.recollisions;
        }
    }
    return tree;
}

}  // namespace

ClusterTree backward_cluster_rescan(const CollisionLog& log, int root, double t, double t_star) {
    return cluster_rescan<true>(log, root, t, t_star);
}

ClusterTree forward_cluster_rescan(const CollisionLog& log, int root, double t) {
    return cluster_rescan<false>(log, root, t, log.t_begin);
}

double tree_weight_quadrature(int k, double t) {
    if (k < 0 || k > 3) throw std::invalid_argument("quadrature oracle: k must be in [0, 3]");
    if (k == 0) return std::exp(-t);

    // 48-point Gauss-Legendre on [0, 1]
    constexpr int kNodes = 48;
    static double nodes[kNodes], weights[kNodes];
    static bool ready = false;
    if (!ready) {
        // Newton iteration on Legendre polynomials
        for (int i = 0; i < kNodes; ++i) {
            double x = std::cos(hsc::kPi * (i + 0.75) / (kNodes + 0.5));
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int n = 2; n <= kNodes; ++n) {
                    const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = kNodes * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            double p0 = 1.0, p1 = x;
            for (int n = 2; n <= kNodes; ++n) {
                const double p2 = ((2 * n - 1) * x * p1 - (n - 1) * p0) / n;
                p0 = p1;
                p1 = p2;
            }
            const double dp = kNodes * (x * p1 - p0) / (x * x - 1.0);
            nodes[i] = 0.5 * (1.0 - x);  // map [-1,1] -> [0,1], descending -> ascending
            weights[i] = 0.5 * 2.0 / ((1.0 - x * x) * dp * dp);
        }
        ready = true;
    }

    auto integrand = [&](const std::vector<double>& times) {
        double upper = t;
        double acc = 1.0;
        for (int r = 0; r < k; ++r) {
            acc *= std::exp(-(r + 1) * (upper - times[r]));
            upper = times[r];
        }
        acc *= std::exp(-(k + 1) * times[k - 1]);
        return acc;
    };

    std::vector<double> times(k);
    double total = 0.0;
    if (k == 1) {
        for (int a = 0; a < kNodes; ++a) {
            times[0] = t * nodes[a];
            total += t * weights[a] * integrand(times);
        }
    } else if (k == 2) {
        for (int a = 0; a < kNodes; ++a) {
            times[0] = t * nodes[a];
            for (int b = 0; b < kNodes; ++b) {
                times[1] = times[0] * nodes[b];
                total += t * weights[a] * times[0] * weights[b] * integrand(times);
            }
        }
    } else {
        for (int a = 0; a < kNodes; ++a) {
            times[0] = t * nodes[a];
            for (int b = 0; b < kNodes; ++b) {
                times[1] = times[0] * nodes[b];
                for (int c = 0; c < kNodes; ++c) {
                    times[2] = times[1] * nodes[c];
                    total += t * weights[a] * times[0] * weights[b] * times[1] * weights[c] *
                             integrand(times);
                }
            }
        }
    }
    return total;
}

CollisionLog random_synthetic_log(hsc::Rng& rng, int n_particles, int n_events, double duration) {
    CollisionLog log;
    log.n_particles = n_particles;
    log.eps = 0.1;
    log.t_begin = 0.0;
    log.duration = duration;
    std::vector<double> times(n_events);
    for (auto& tm : times) tm = rng.uniform(0.0, duration);
    std::sort(times.begin(), times.end());
    for (int e = 0; e < n_events; ++e) {
        CollisionEvent ev;
        ev.time = times[e];
        ev.i = rng.uniform_int(0, n_particles - 1);
        do {
            ev.j = rng.uniform_int(0, n_particles - 1);
        } while (ev.j == ev.i);
        if (ev.i > ev.j) std::swap(ev.i, ev.j);
        ev.omega = rng.unit_vector();
        log.events.push_back(ev);
    }
    return log;
}

hsc::SystemState dense_equilibrium_state(int n, double eps, double beta, std::uint64_t seed) {
    hsc::Rng rng(hsc::splitmix64(seed));
    hsc::SystemState st;
    st.eps = eps;
    st.particles.resize(n);
    st.collision_counts.assign(n, 0);
    const double sigma = 1.0 / std::sqrt(beta);
    for (int i = 0; i < n; ++i) {
        st.particles[i].velocity = rng.gaussian_vec3(sigma);
        for (;;) {
            const hsc::TorusVector x = hsc::wrap(hsc::Vec3{rng.uniform(0.0, hsc::kTwoPi),
                                                           rng.uniform(0.0, hsc::kTwoPi),
                                                           rng.uniform(0.0, hsc::kTwoPi)});
            bool ok = true;
            for (int j = 0; j < i && ok; ++j) {
                ok = hsc::torus_distance(x, st.particles[j].position) > eps * 1.001;
            }
            if (ok) {
                st.particles[i].position = x;
                break;
            }
        }
    }
    return st;
}

double ks_two_sample_pvalue(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        const double x = std::min(a[ia], b[ib]);
        while (ia < a.size() && a[ia] <= x) ++ia;
        while (ib < b.size() && b[ib] <= x) ++ib;
        d = std::max(d, std::abs(ia / na - ib / nb));
    }
    const double en = std::sqrt(na * nb / (na + nb));
    const double lambda = (en + 0.12 + 0.11 / en) * d;
    double p = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        p += sign * 2.0 * std::exp(-2.0 * j * j * lambda * lambda);
        sign = -sign;
    }
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace oracle

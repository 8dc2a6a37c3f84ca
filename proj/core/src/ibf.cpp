#include "hsc/ibf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hsc/clusters.hpp"
#include "hsc/rng.hpp"

namespace hsc {

namespace {

void validate(const IbfVariables& vars, double eps) {
    const int n = vars.n();
    if (!(eps > 0.0) || !(eps < kPi / 2.0)) {
        throw std::invalid_argument("construct_ibf: eps must lie in (0, pi/2)");
    }
    if (!(vars.t_end <= vars.t_start)) {
        throw std::invalid_argument("construct_ibf: t_end must not exceed t_start");
    }
    if (static_cast<int>(vars.creation_times.size()) != n ||
        static_cast<int>(vars.omegas.size()) != n ||
        static_cast<int>(vars.velocities.size()) != n) {
        throw std::invalid_argument("construct_ibf: variable lists must have equal length");
    }
    double prev = vars.t_start;
    for (int r = 0; r < n; ++r) {
        if (vars.parents[r] < 1 || vars.parents[r] > r + 1) {
            throw std::invalid_argument("construct_ibf: parent index out of range");
        }
        const double tr = vars.creation_times[r];
        if (!(tr < prev) || !(tr > vars.t_end)) {
            throw std::invalid_argument("construct_ibf: creation times must decrease strictly inside (t_end, t_start)");
        }
        prev = tr;
        if (std::abs(vars.omegas[r].norm() - 1.0) > 1e-12) {
            throw std::invalid_argument("construct_ibf: omega is not a unit vector");
        }
    }
}

/// Convert one segment's backward-clock log to forward-frame events.
void append_forward_events(const CollisionLog& segment, double segment_upper_time,
                           std::vector<CollisionEvent>& out) {
    for (const auto& ev : segment.events) {
        CollisionEvent fwd;
        fwd.time = segment_upper_time - ev.time;
        fwd.i = ev.i;
        fwd.j = ev.j;
        fwd.omega = ev.omega;
        fwd.vi_pre = -ev.vi_post;
        fwd.vj_pre = -ev.vj_post;
        fwd.vi_post = -ev.vi_pre;
        fwd.vj_post = -ev.vj_pre;
        out.push_back(fwd);
    }
}

}  // namespace

IbfTrajectory construct_ibf(const IbfVariables& vars, double eps) {
    validate(vars, eps);
    const int n = vars.n();

    SystemState state;
    state.eps = eps;
    state.current_time = vars.t_start;
    state.particles.push_back(ParticleState{vars.root_position, vars.root_velocity, vars.t_start});
    state.collision_counts.assign(1, 0);

    IbfTrajectory out;

    for (int r = 0; r < n; ++r) {
        const double t_r = vars.creation_times[r];
        CollisionLog seg = evolve_backward(state, state.current_time - t_r);
        append_forward_events(seg, t_r + seg.duration, out.recollisions);

        // place particle r+1 in contact with its parent
        const int parent = vars.parents[r] - 1;
        const Vec3 xi_parent = state.particles[parent].position.as_vec();
        const TorusVector x_new = wrap(xi_parent + vars.omegas[r] * eps);

        for (int k = 0; k < state.size(); ++k) {
            if (k == parent) continue;
            const double d = torus_distance(x_new, state.particles[k].position);
            if (!(d > eps)) {
                std::ostringstream os;
                os << "construct_ibf: creation " << (r + 1)
                   << " overlaps existing sphere " << k << " (distance " << d << ")";
                throw CreationOverlapError(r + 1, os.str());
            }
        }

        const Vec3 eta_parent = state.particles[parent].velocity;  // velocity at t_r^+
        const Vec3 v_new = vars.velocities[r];
        const double lam = vars.omegas[r].dot(v_new - eta_parent);
        if (lam < 0.0) {
            throw std::invalid_argument("construct_ibf: creation is not post-collisional");
        }

        // The pair (created, parent) is post-collisional with normal omega_r,
        // so going below t_r it performs an instantaneous backward collision.
        const auto [v_new_below, v_parent_below] = detail::scatter(v_new, eta_parent, vars.omegas[r]);

        const int id_new = state.size();
        state.particles.push_back(ParticleState{x_new, v_new_below, t_r});
        state.collision_counts.push_back(0);
        state.particles[parent].velocity = v_parent_below;

        CollisionEvent creation;
        creation.time = t_r;
        creation.i = parent;
        creation.j = id_new;
        creation.omega = -vars.omegas[r];  // (x_i - x_j)/eps with i = parent
        creation.vi_pre = v_parent_below;
        creation.vj_pre = v_new_below;
        creation.vi_post = eta_parent;
        creation.vj_post = v_new;
        out.creations.push_back(creation);
    }

    CollisionLog tail = evolve_backward(state, state.current_time - vars.t_end);
    append_forward_events(tail, vars.t_end + tail.duration, out.recollisions);

    out.final_state = std::move(state);
    return out;
}

IbfRoundTripReport ibf_round_trip(std::uint64_t seed, int n_max, double eps, double tol) {
    Rng rng(derive_seed(seed, 0x1BFULL));
    IbfRoundTripReport report;

    const double t_start = 0.5;
    const double sigma = 0.5;
    const int n = n_max <= 1 ? 1 : 1 + rng.uniform_int(0, n_max - 1);
    report.n = n;

    IbfVariables vars;
    vars.t_start = t_start;
    vars.t_end = 0.0;
    vars.root_position = wrap(Vec3{rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi),
                                   rng.uniform(0.0, kTwoPi)});
    vars.root_velocity = rng.gaussian_vec3(sigma);

    // build the variables incrementally: the configuration at the next
    // creation time fixes the parent velocity the constraint refers to
    for (int r = 1; r <= n; ++r) {
        const double lo = t_start * (n - r + 0.25) / (n + 1.0);
        const double hi = (r == 1) ? t_start * (1.0 - 0.05)
                                   : vars.creation_times.back() * (1.0 - 0.05);
        const double t_r = rng.uniform(lo, std::max(lo + 1e-3, hi));

        IbfVariables prefix = vars;
        prefix.t_end = t_r;
        const IbfTrajectory partial = construct_ibf(prefix, eps);
        const SystemState& at_tr = partial.final_state;

        const int parent = 1 + rng.uniform_int(0, r - 1);
        const Vec3 eta = at_tr.particles[parent - 1].velocity;

        bool placed = false;
        for (int attempt = 0; attempt < 64 && !placed; ++attempt) {
            const Vec3 omega = rng.unit_vector();
            Vec3 v_new = rng.gaussian_vec3(sigma);
            double lam = omega.dot(v_new - eta);
            if (lam < 0.0) {
                v_new = v_new - omega * (2.0 * lam);  // mirror into the admissible half-space
                lam = -lam;
            }
            if (lam < 0.1) continue;  // avoid grazing creations
            const TorusVector x_new =
                wrap(at_tr.particles[parent - 1].position.as_vec() + omega * eps);
            bool overlap = false;
            for (int k = 0; k < at_tr.size(); ++k) {
                if (k == parent - 1) continue;
                if (torus_distance(x_new, at_tr.particles[k].position) <= eps) {
                    overlap = true;
                    break;
                }
            }
            if (overlap) continue;
            vars.parents.push_back(parent);
            vars.creation_times.push_back(t_r);
            vars.omegas.push_back(omega);
            vars.velocities.push_back(v_new);
            placed = true;
        }
        if (!placed) {
            report.ambiguous = true;
            report.detail = "could not place a creation without overlap";
            return report;
        }
    }

    const IbfTrajectory traj = construct_ibf(vars, eps);

    // embed among resting spectators placed outside the reach of the cluster
    SystemState embedded = traj.final_state;
    double energy = 0.0;
    for (const auto& p : embedded.particles) energy += p.velocity.norm2();
    const double margin = eps + std::sqrt(energy) * t_start + 0.05;
    Rng spec_rng(derive_seed(seed, 0x5BECULL));
    int placed_specs = 0;
    for (int attempt = 0; attempt < 200 && placed_specs < 3; ++attempt) {
        const TorusVector x = wrap(Vec3{spec_rng.uniform(0.0, kTwoPi),
                                        spec_rng.uniform(0.0, kTwoPi),
                                        spec_rng.uniform(0.0, kTwoPi)});
        bool ok = true;
        for (int k = 0; k <= n && ok; ++k) {
            ok = torus_distance(x, embedded.particles[k].position) > margin;
        }
        for (int k = n + 1; k < embedded.size() && ok; ++k) {
            ok = torus_distance(x, embedded.particles[k].position) > eps * 1.5;
        }
        if (!ok) continue;
        embedded.particles.push_back(ParticleState{x, Vec3{}, embedded.current_time});
        embedded.collision_counts.push_back(0);
        ++placed_specs;
    }

    const CollisionLog log = evolve(embedded, t_start);

    // ambiguity filter: no event may involve a particle above its creation time
    auto creation_of = [&](int p) {
        if (p == 0) return t_start;
        if (p <= n) return vars.creation_times[p - 1];
        return 0.0;  // spectators: any event involving them is disqualifying
    };
    for (const auto& ev : log.events) {
        if (ev.i > n || ev.j > n) {
            report.ambiguous = true;
            report.detail = "spectator was hit";
            return report;
        }
        if (ev.time > creation_of(ev.i) + tol || ev.time > creation_of(ev.j) + tol) {
            report.ambiguous = true;
            report.detail = "collision above a creation time";
            return report;
        }
    }

    const ClusterTree tree = backward_cluster(log, 0, t_start, 0.0);
    report.ok = true;
    if (tree.n != n) {
        report.ok = false;
        report.detail = "cardinality mismatch";
    }
    if (report.ok && tree.parents != vars.parents) {
        report.ok = false;
        report.detail = "tree structure mismatch";
    }
    for (int r = 0; report.ok && r < n; ++r) {
        if (tree.members[r] != r + 1) {
            report.ok = false;
            report.detail = "member order mismatch";
            break;
        }
        report.max_time_error =
            std::max(report.max_time_error, std::abs(tree.creation_times[r] - vars.creation_times[r]));
    }
    if (report.ok && report.max_time_error > tol) {
        report.ok = false;
        report.detail = "creation time beyond tolerance";
    }
    return report;
}

}  // namespace hsc

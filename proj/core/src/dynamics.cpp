#include "hsc/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace hsc {

Vec3 SystemState::total_momentum() const {
    Vec3 p;
    for (const auto& part : particles) p += part.velocity;
    return p;
}

double SystemState::kinetic_energy() const {
    double e = 0.0;
    for (const auto& part : particles) e += part.velocity.norm2();
    return 0.5 * e;
}

void SystemState::synchronize(double t) {
    for (auto& p : particles) {
        p.position = wrap(p.position.as_vec() + p.velocity * (t - p.last_update));
        p.last_update = t;
    }
    current_time = t;
}

double SystemState::min_pair_distance() const {
    double best = std::numeric_limits<double>::infinity();
    const int n = size();
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            best = std::min(best, torus_distance(particles[i].position, particles[j].position));
        }
    }
    return best;
}

bool operator==(const CollisionEvent& a, const CollisionEvent& b) {
    return a.time == b.time && a.i == b.i && a.j == b.j && a.omega == b.omega &&
           a.vi_pre == b.vi_pre && a.vj_pre == b.vj_pre &&
           a.vi_post == b.vi_post && a.vj_post == b.vj_post;
}

std::pair<Vec3, Vec3> reflect(const Vec3& v_i, const Vec3& v_j, const Vec3& omega) {
    if (std::abs(omega.norm() - 1.0) > 1e-12) {
        throw std::invalid_argument("reflect: omega is not a unit vector");
    }
    if (!(omega.dot(v_i - v_j) < 0.0)) {
        throw std::invalid_argument("reflect: pair is not incoming");
    }
    return detail::scatter(v_i, v_j, omega);
}

namespace {

enum EventKind : int { kCollision = 0, kRecheck = 1, kCrossing = 2 };

struct QueuedEvent {
    double time = 0.0;
    int kind = kCollision;
    int i = -1;
    int j = -1;  // partner for pair events, axis for crossings
    std::uint64_t count_i = 0;
    std::uint64_t count_j = 0;
    Vec3 omega;  // canonical contact normal, collisions only
};

struct LaterEvent {
    bool operator()(const QueuedEvent& a, const QueuedEvent& b) const {
        if (a.time != b.time) return a.time > b.time;
        if (a.kind != b.kind) return a.kind > b.kind;
        if (a.i != b.i) return a.i > b.i;
        return a.j > b.j;
    }
};

[[noreturn]] void throw_overlap(const SystemState& st, int i, int j, double t, double dist) {
    std::ostringstream os;
    os.precision(17);
    os << "evolve: overlap detected at t=" << t << " pair (" << i << "," << j
       << ") distance=" << dist << " eps=" << st.eps << "\n";
    const Vec3 xi = st.position_at(i, t);
    const Vec3 xj = st.position_at(j, t);
    os << "  particle " << i << ": x=" << xi << " v=" << st.particles[i].velocity << "\n";
    os << "  particle " << j << ": x=" << xj << " v=" << st.particles[j].velocity;
    throw std::runtime_error(os.str());
}

class Engine {
public:
    Engine(SystemState& st, const EvolveOptions& opt) : st_(st), opt_(opt) {
        n_ = st_.size();
        eps_ = st_.eps;
        eps2_ = eps_ * eps_;
        use_cells_ = decide_cells();
    }

    CollisionLog run(double t_end) {
        const double t0 = st_.current_time;
        st_.synchronize(t0);

        CollisionLog log;
        log.n_particles = n_;
        log.eps = eps_;
        log.t_begin = t0;

        if (use_cells_) {
            init_cells(t0);
        } else {
            for (int i = 0; i < n_; ++i) {
                for (int j = i + 1; j < n_; ++j) predict_pair(i, j, t0);
            }
        }

        double t_final = t_end;
        while (!queue_.empty()) {
            if (queue_.top().time > t_end) break;
            const QueuedEvent ev = queue_.top();
            queue_.pop();
            if (ev.kind == kCrossing) {
                if (st_.collision_counts[ev.i] != ev.count_i) continue;
                handle_crossing(ev);
                continue;
            }
            if (st_.collision_counts[ev.i] != ev.count_i ||
                st_.collision_counts[ev.j] != ev.count_j) {
                continue;
            }
            if (ev.kind == kRecheck) {
                predict_pair(ev.i, ev.j, ev.time);
                continue;
            }
            execute_collision(ev, log);
            if (opt_.max_events != 0 && log.events.size() >= opt_.max_events) {
                t_final = ev.time;
                break;
            }
        }

        st_.synchronize(t_final);
        log.duration = t_final - t0;
        std::sort(log.events.begin(), log.events.end(), [](const CollisionEvent& a, const CollisionEvent& b) {
            if (a.time != b.time) return a.time < b.time;
            if (a.i != b.i) return a.i < b.i;
            return a.j < b.j;
        });

        if (opt_.check_exclusion_at_end && n_ > 1) {
            const double lo = eps_ * (1.0 - kOverlapSlack);
            const double d = st_.min_pair_distance();
            if (d < lo) {
                std::ostringstream os;
                os.precision(17);
                os << "evolve: exclusion violated at t_end=" << t_final
                   << " min pair distance=" << d << " eps=" << eps_;
                throw std::runtime_error(os.str());
            }
        }
        return log;
    }

private:
    bool decide_cells() {
        if (n_ < 2) return false;
        NeighborMode mode = opt_.neighbor_mode;
        if (mode == NeighborMode::Auto) {
            if (n_ < 64) return false;
            mode = NeighborMode::CellList;
        }
        if (mode != NeighborMode::CellList) return false;
        // Correctness of the 9-cell crossing update needs at least 7 cells per
        // side, and cells may not be smaller than the sphere diameter.
        const double side = std::max(eps_, opt_.cell_target);
        const int m = static_cast<int>(kTwoPi / side);
        if (m < 7) return false;
        m_ = m;
        cell_side_ = kTwoPi / m_;
        return true;
    }

    // ---- pair prediction -------------------------------------------------

    void predict_pair(int a, int b, double t_now) {
        const int i = std::min(a, b);
        const int j = std::max(a, b);
        const ParticleState& pi = st_.particles[i];
        const ParticleState& pj = st_.particles[j];
        const Vec3 v_rel = pi.velocity - pj.velocity;
        const Vec3 d_now = fold(st_.position_at(i, t_now) - st_.position_at(j, t_now));

        const double lo = eps_ * (1.0 - kOverlapSlack);
        if (d_now.norm2() < lo * lo) {
            throw_overlap(st_, i, j, t_now, d_now.norm());
        }

        const double a2 = v_rel.norm2();
        if (a2 == 0.0) return;  // relative rest: constant separation forever
        const double horizon = kTwoPi / std::sqrt(a2);

        const auto hit = detail::first_contact(d_now, v_rel, eps_, horizon);
        if (!hit) {
            if (!use_cells_) {
                queue_.push(QueuedEvent{t_now + horizon, kRecheck, i, j,
                                        st_.collision_counts[i], st_.collision_counts[j], Vec3{}});
            }
            return;
        }

        // Re-express the contact relative to the pair's last state change, so
        // that the scheduled time and normal do not depend on when the
        // prediction was made (this is what makes the AllPairs and CellList
        // logs identical).
        const double t_base = std::max(pi.last_update, pj.last_update);
        const Vec3 d_base = st_.position_at(i, t_base) - st_.position_at(j, t_base);
        const double sigma_guess = (t_now - t_base) + hit->s;
        const Vec3 diff = hit->delta_contact - d_base - v_rel * sigma_guess;
        const Vec3 image{kTwoPi * std::nearbyint(diff.x / kTwoPi),
                         kTwoPi * std::nearbyint(diff.y / kTwoPi),
                         kTwoPi * std::nearbyint(diff.z / kTwoPi)};
        const Vec3 g = d_base + image;
        const double bq = g.dot(v_rel);
        double cq = g.norm2() - eps2_;
        if (cq < 0.0) cq = 0.0;
        double disc = bq * bq - a2 * cq;
        if (disc < 0.0) disc = 0.0;
        double sigma = sigma_guess;
        const double denom = -bq + std::sqrt(disc);
        if (bq < 0.0 && denom > 0.0) sigma = cq / denom;
        double t_c = t_base + sigma;
        if (t_c < t_now) t_c = t_now;

        queue_.push(QueuedEvent{t_c, kCollision, i, j,
                                st_.collision_counts[i], st_.collision_counts[j],
                                normalized(g + v_rel * sigma)});
    }

    void execute_collision(const QueuedEvent& ev, CollisionLog& log) {
        const double t = ev.time;
        ParticleState& pi = st_.particles[ev.i];
        ParticleState& pj = st_.particles[ev.j];
        pi.position = wrap(pi.position.as_vec() + pi.velocity * (t - pi.last_update));
        pj.position = wrap(pj.position.as_vec() + pj.velocity * (t - pj.last_update));
        pi.last_update = t;
        pj.last_update = t;

        const double dist = torus_distance(pi.position, pj.position);
        if (dist < eps_ * (1.0 - kOverlapSlack)) {
            throw_overlap(st_, ev.i, ev.j, t, dist);
        }

        const double lam = ev.omega.dot(pi.velocity - pj.velocity);
        if (!(lam < 0.0)) {
            throw std::logic_error("evolve: scheduled pair is not incoming (scheduling bug)");
        }
        const auto [vi_post, vj_post] = detail::scatter(pi.velocity, pj.velocity, ev.omega);

        log.events.push_back(CollisionEvent{t, ev.i, ev.j, ev.omega,
                                            pi.velocity, pj.velocity, vi_post, vj_post});
        pi.velocity = vi_post;
        pj.velocity = vj_post;
        ++st_.collision_counts[ev.i];
        ++st_.collision_counts[ev.j];

        if (use_cells_) {
            refresh_after_collision(ev.i, t);
            refresh_after_collision(ev.j, t);
            predict_cell_neighbors(ev.i, t, -1);
            predict_cell_neighbors(ev.j, t, ev.i);
        } else {
            for (int b = 0; b < n_; ++b) {
                if (b != ev.i) predict_pair(ev.i, b, t);
            }
            for (int b = 0; b < n_; ++b) {
                if (b != ev.j && b != ev.i) predict_pair(ev.j, b, t);
            }
        }
    }

    // ---- linked-cell machinery -------------------------------------------

    int cell_index(int cx, int cy, int cz) const { return cx + m_ * (cy + m_ * cz); }

    static int mod_cell(int c, int m) {
        c %= m;
        return c < 0 ? c + m : c;
    }

    int coord_cell(double x) const {
        int c = static_cast<int>(x / cell_side_);
        if (c >= m_) c = m_ - 1;
        if (c < 0) c = 0;
        return c;
    }

    void link(int p) {
        const auto& cc = cell_of_[p];
        const int c = cell_index(cc[0], cc[1], cc[2]);
        cell_next_[p] = cell_head_[c];
        cell_prev_[p] = -1;
        if (cell_head_[c] >= 0) cell_prev_[cell_head_[c]] = p;
        cell_head_[c] = p;
    }

    void unlink(int p) {
        const auto& cc = cell_of_[p];
        const int c = cell_index(cc[0], cc[1], cc[2]);
        if (cell_prev_[p] >= 0) {
            cell_next_[cell_prev_[p]] = cell_next_[p];
        } else {
            cell_head_[c] = cell_next_[p];
        }
        if (cell_next_[p] >= 0) cell_prev_[cell_next_[p]] = cell_prev_[p];
    }

    void init_cells(double t0) {
        cell_head_.assign(static_cast<std::size_t>(m_) * m_ * m_, -1);
        cell_next_.assign(n_, -1);
        cell_prev_.assign(n_, -1);
        cell_of_.resize(n_);
        boundary_next_.resize(n_);
        for (int p = 0; p < n_; ++p) {
            derive_cell_state(p);
            link(p);
        }
        for (int p = 0; p < n_; ++p) schedule_crossing(p);
        // initial predictions: each particle against its 27 neighbor cells,
        // counting each pair once
        for (int p = 0; p < n_; ++p) {
            const auto cc = cell_of_[p];
            for (int dx = -1; dx <= 1; ++dx) {
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dz = -1; dz <= 1; ++dz) {
                        const int c = cell_index(mod_cell(cc[0] + dx, m_),
                                                 mod_cell(cc[1] + dy, m_),
                                                 mod_cell(cc[2] + dz, m_));
                        for (int q = cell_head_[c]; q >= 0; q = cell_next_[q]) {
                            if (q > p) predict_pair(p, q, t0);
                        }
                    }
                }
            }
        }
    }

    /// Reset tracked cell and next boundary indices from the particle's
    /// synchronized state (after a collision changed its velocity).
    void derive_cell_state(int p) {
        const ParticleState& ps = st_.particles[p];
        const double pos[3] = {ps.position.x, ps.position.y, ps.position.z};
        const double vel[3] = {ps.velocity.x, ps.velocity.y, ps.velocity.z};
        for (int ax = 0; ax < 3; ++ax) {
            const int ix = coord_cell(pos[ax]);
            cell_of_[p][ax] = ix;
            if (vel[ax] > 0.0) {
                boundary_next_[p][ax] = ix + 1;
            } else if (vel[ax] < 0.0) {
                boundary_next_[p][ax] = ix;
            } else {
                boundary_next_[p][ax] = std::numeric_limits<long long>::min();  // never crosses
            }
        }
    }

    void refresh_after_collision(int p, double) {
        unlink(p);
        derive_cell_state(p);
        link(p);
        schedule_crossing(p);
    }

    void predict_cell_neighbors(int p, double t, int skip) {
        const auto cc = cell_of_[p];
        for (int dx = -1; dx <= 1; ++dx) {
            for (int dy = -1; dy <= 1; ++dy) {
                for (int dz = -1; dz <= 1; ++dz) {
                    const int c = cell_index(mod_cell(cc[0] + dx, m_),
                                             mod_cell(cc[1] + dy, m_),
                                             mod_cell(cc[2] + dz, m_));
                    for (int q = cell_head_[c]; q >= 0; q = cell_next_[q]) {
                        if (q != p && q != skip) predict_pair(p, q, t);
                    }
                }
            }
        }
    }

    double crossing_time(int p, int ax) const {
        const long long k = boundary_next_[p][ax];
        if (k == std::numeric_limits<long long>::min()) {
            return std::numeric_limits<double>::infinity();
        }
        const ParticleState& ps = st_.particles[p];
        const double pos[3] = {ps.position.x, ps.position.y, ps.position.z};
        const double vel[3] = {ps.velocity.x, ps.velocity.y, ps.velocity.z};
        return ps.last_update + (cell_side_ * static_cast<double>(k) - pos[ax]) / vel[ax];
    }

    void schedule_crossing(int p) {
        double best = std::numeric_limits<double>::infinity();
        int best_ax = -1;
        for (int ax = 0; ax < 3; ++ax) {
            const double t = crossing_time(p, ax);
            if (t < best) {
                best = t;
                best_ax = ax;
            }
        }
        if (best_ax < 0) return;
        queue_.push(QueuedEvent{best, kCrossing, p, best_ax,
                                st_.collision_counts[p], 0, Vec3{}});
    }

    void handle_crossing(const QueuedEvent& ev) {
        const int p = ev.i;
        const int ax = ev.j;
        const double v_ax = (ax == 0)   ? st_.particles[p].velocity.x
                            : (ax == 1) ? st_.particles[p].velocity.y
                                        : st_.particles[p].velocity.z;
        const int dir = v_ax > 0.0 ? 1 : -1;
        boundary_next_[p][ax] += dir;
        unlink(p);
        cell_of_[p][ax] = mod_cell(cell_of_[p][ax] + dir, m_);
        link(p);
        schedule_crossing(p);

        // predict against the occupants of the 9 newly adjacent cells
        const auto cc = cell_of_[p];
        const int lead = mod_cell(cc[ax] + dir, m_);
        const int au = (ax + 1) % 3;
        const int av = (ax + 2) % 3;
        for (int du = -1; du <= 1; ++du) {
            for (int dv = -1; dv <= 1; ++dv) {
                int coords[3];
                coords[ax] = lead;
                coords[au] = mod_cell(cc[au] + du, m_);
                coords[av] = mod_cell(cc[av] + dv, m_);
                const int c = cell_index(coords[0], coords[1], coords[2]);
                for (int q = cell_head_[c]; q >= 0; q = cell_next_[q]) {
                    if (q != p) predict_pair(p, q, ev.time);
                }
            }
        }
    }

    // ---- members -----------------------------------------------------------

    SystemState& st_;
    EvolveOptions opt_;
    int n_ = 0;
    double eps_ = 0.0;
    double eps2_ = 0.0;
    bool use_cells_ = false;

    std::priority_queue<QueuedEvent, std::vector<QueuedEvent>, LaterEvent> queue_;

    int m_ = 0;
    double cell_side_ = 0.0;
    std::vector<int> cell_head_;
    std::vector<int> cell_next_;
    std::vector<int> cell_prev_;
    std::vector<std::array<int, 3>> cell_of_;
    std::vector<std::array<long long, 3>> boundary_next_;
};

}  // namespace

CollisionLog evolve(SystemState& state, double t_end, const EvolveOptions& options) {
    const int n = state.size();
    if (t_end < state.current_time) {
        throw std::invalid_argument("evolve: t_end precedes the current time");
    }
    if (n >= 2 && (!(state.eps > 0.0) || !(state.eps < kPi / 2.0))) {
        throw std::invalid_argument("evolve: eps must lie in (0, pi/2)");
    }
    if (state.collision_counts.size() != static_cast<std::size_t>(n)) {
        state.collision_counts.assign(n, 0);
    }
    Engine engine(state, options);
    return engine.run(t_end);
}

CollisionLog evolve_backward(SystemState& state, double duration, const EvolveOptions& options) {
    if (duration < 0.0) {
        throw std::invalid_argument("evolve_backward: negative duration");
    }
    state.synchronize(state.current_time);
    const double t0 = state.current_time;
    for (auto& p : state.particles) {
        p.velocity = -p.velocity;
        p.last_update = 0.0;
    }
    state.current_time = 0.0;
    CollisionLog log = evolve(state, duration, options);
    const double elapsed = log.duration;
    for (auto& p : state.particles) p.velocity = -p.velocity;
    state.current_time = t0 - elapsed;
    for (auto& p : state.particles) p.last_update = state.current_time;
    return log;
}

}  // namespace hsc

#include "hsc/torus.hpp"

#include <cmath>
#include <stdexcept>

namespace hsc {

TorusVector wrap(const Vec3& p) {
    if (!is_finite(p)) {
        throw std::invalid_argument("wrap: non-finite coordinate");
    }
    auto reduce = [](double x) {
        double r = std::fmod(x, kTwoPi);
        if (r < 0.0) r += kTwoPi;
        if (r >= kTwoPi) r -= kTwoPi;  // r == 2pi can appear after the add
        return r;
    };
    return {reduce(p.x), reduce(p.y), reduce(p.z)};
}

double fold_coord(double d) {
    // round-to-nearest-even multiple of 2pi, then clamp the half-open edge
    double r = d - kTwoPi * std::nearbyint(d * (1.0 / kTwoPi));
    if (r >= kPi) r -= kTwoPi;
    if (r < -kPi) r += kTwoPi;
    return r;
}

Vec3 fold(const Vec3& d) {
    return {fold_coord(d.x), fold_coord(d.y), fold_coord(d.z)};
}

Vec3 minimal_image(const TorusVector& a, const TorusVector& b) {
    return fold(a.as_vec() - b.as_vec());
}

double torus_distance(const TorusVector& a, const TorusVector& b) {
    return minimal_image(a, b).norm();
}

namespace detail {

std::optional<Contact> first_contact(const Vec3& x_rel, const Vec3& v_rel,
                                     double eps, double horizon) {
    const double a = v_rel.norm2();
    if (a == 0.0) return std::nullopt;

    // Only images within reach of one period of relative travel can produce
    // a contact: |delta| <= 2pi + eps. Build per-component candidates first.
    const double comp_max = kTwoPi + eps;
    double cand[3][3];
    int n_cand[3];
    const double base[3] = {x_rel.x, x_rel.y, x_rel.z};
    for (int c = 0; c < 3; ++c) {
        int m = 0;
        cand[c][m++] = base[c];
        if (std::abs(base[c] - kTwoPi) <= comp_max) cand[c][m++] = base[c] - kTwoPi;
        if (std::abs(base[c] + kTwoPi) <= comp_max) cand[c][m++] = base[c] + kTwoPi;
        n_cand[c] = m;
    }

    const double reach2 = comp_max * comp_max;
    const double eps2 = eps * eps;
    std::optional<Contact> best;

    for (int ix = 0; ix < n_cand[0]; ++ix) {
        for (int iy = 0; iy < n_cand[1]; ++iy) {
            for (int iz = 0; iz < n_cand[2]; ++iz) {
                const Vec3 delta{cand[0][ix], cand[1][iy], cand[2][iz]};
                const double d2 = delta.norm2();
                if (d2 > reach2) continue;
                const double b = delta.dot(v_rel);  // half the linear coefficient
                if (b >= 0.0) continue;             // receding on this image
                const double c = d2 - eps2;
                const double disc = b * b - a * c;
                if (disc <= kGrazingTol) continue;  // grazing counts as a miss
                // smaller root, stable form (b < 0 so no cancellation)
                double s = c / (-b + std::sqrt(disc));
                if (c <= 0.0) s = 0.0;  // at contact and approaching
                if (s < 0.0 || s > horizon) continue;
                if (!best || s < best->s) {
                    best = Contact{s, delta - x_rel, delta + v_rel * s};
                }
            }
        }
    }
    return best;
}

}  // namespace detail

std::optional<double> collision_time(const Vec3& x_rel, const Vec3& v_rel, double eps) {
    if (!is_finite(x_rel) || !is_finite(v_rel)) {
        throw std::invalid_argument("collision_time: non-finite input");
    }
    if (!(eps > 0.0) || !(eps < kPi / 2.0)) {
        throw std::invalid_argument("collision_time: eps must lie in (0, pi/2)");
    }
    const Vec3 d = fold(x_rel);
    const double dist2 = d.norm2();
    const double lo = eps * (1.0 - kOverlapSlack);
    if (dist2 < lo * lo) {
        throw std::runtime_error("collision_time: overlapping spheres (corrupted state)");
    }
    const double speed = v_rel.norm();
    if (speed == 0.0) return std::nullopt;
    auto hit = detail::first_contact(d, v_rel, eps, kTwoPi / speed);
    if (!hit) return std::nullopt;
    return hit->s;
}

}  // namespace hsc

#pragma once

#include <numbers>
#include <optional>

#include "hsc/vec3.hpp"

namespace hsc {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kPi = std::numbers::pi;

/// Grazing guard: quadratics whose (quarter-)discriminant is below this are
/// treated as misses. Grazing contacts transfer no momentum and are a
/// measure-zero event.
inline constexpr double kGrazingTol = 1e-12;

/// Relative slack under the sphere diameter before a configuration counts as
/// overlapping (as opposed to round-off at contact).
inline constexpr double kOverlapSlack = 1e-6;

/// A point on the flat 3-torus [0, 2pi)^3. Always produced by wrap(), so
/// every coordinate is reduced.
struct TorusVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3 as_vec() const { return {x, y, z}; }
};

/// Reduce a raw position modulo 2pi into [0, 2pi)^3.
/// Throws std::invalid_argument on non-finite input.
TorusVector wrap(const Vec3& p);

/// Reduce one coordinate of a displacement into [-pi, pi).
double fold_coord(double d);

/// Reduce a raw displacement into [-pi, pi)^3; the result is the minimal
/// periodic representative, so its Euclidean norm is the torus distance.
Vec3 fold(const Vec3& d);

/// Minimal-image representative of a - b, components in [-pi, pi).
Vec3 minimal_image(const TorusVector& a, const TorusVector& b);

/// Torus distance between two wrapped points.
double torus_distance(const TorusVector& a, const TorusVector& b);

namespace detail {

/// First sphere-sphere contact within a time window, resolved over the 27
/// periodic images of the relative displacement.
struct Contact {
    double s = 0.0;       ///< time to contact, s >= 0
    Vec3 image_shift;     ///< 2pi * n of the winning image
    Vec3 delta_contact;   ///< relative displacement at contact, |.| == eps
};

/// Solve |(x_rel + shift) + v_rel s| = eps over images shift = 2pi n,
/// n in {-1,0,1}^3, for the smallest root s in [0, horizon] with the
/// approach condition (radial derivative < 0). `x_rel` must be folded.
/// Images that cannot reach contact within a travel of one period are
/// skipped; this does not change the result.
std::optional<Contact> first_contact(const Vec3& x_rel, const Vec3& v_rel,
                                     double eps, double horizon);

}  // namespace detail

/// Earliest time s at which two spheres of diameter eps, with relative
/// displacement x_rel (any periodic representative) and relative velocity
/// v_rel, reach torus distance eps while approaching. Capped at one relative
/// period (horizon 2pi/|v_rel|); nullopt if no such contact exists there.
/// Throws on overlapping input (|x_rel| < eps beyond the contact slack) and
/// on eps outside (0, pi/2).
std::optional<double> collision_time(const Vec3& x_rel, const Vec3& v_rel, double eps);

}  // namespace hsc

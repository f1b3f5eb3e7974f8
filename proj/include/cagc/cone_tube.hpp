#pragma once

#include "cagc/convex_kernel.hpp"

namespace cagc {

// Proper convex cone C = { t (s, 1) : s in section, t > 0 }. The section is
// the dual side; the tube domain is its polar.
struct ProperCone {
    PlanarDomain section;

    PlanarDomain tube_domain() const { return section.dual(); }

    // Support function of the tube domain at y, which is the gauge of the
    // section (exact for presets and polygons).
    double tube_support(const Vec2& y) const { return section.gauge(y); }

    static ProperCone light_cone(std::size_t samples = 512) { return {PlanarDomain::disk(samples)}; }
};

enum class Locus { Interior, Boundary };

// Point (x, xi) of the closed tube domain; encodes the plane
// graph(y -> x.y - xi), which is C-spacelike for interior x and C-null on the
// boundary.
struct TubePoint {
    Vec2 x = Vec2::Zero();
    double xi = 0.0;
    Locus locus = Locus::Interior;

    static TubePoint at(const PlanarDomain& omega, const Vec2& x, double xi) {
        const double tol = omega.snap_tolerance();
        if (omega.on_boundary(x, tol)) return {x, xi, Locus::Boundary};
        if (!omega.contains(x)) throw Error("outside_domain", "tube point lies outside the closed domain");
        return {x, xi, Locus::Interior};
    }
};

struct AffinePoint {
    Vec2 y = Vec2::Zero();
    double eta = 0.0;
    Vec3 vec() const { return Vec3(y.x(), y.y(), eta); }
    static AffinePoint from(const Vec3& v) { return {Vec2(v.x(), v.y()), v.z()}; }
};

enum class Membership { Inside, Boundary, Outside };

inline const char* to_string(Membership m) {
    switch (m) {
        case Membership::Inside: return "inside";
        case Membership::Boundary: return "boundary";
        case Membership::Outside: return "outside";
    }
    return "?";
}

// Inside iff eta > h_Omega(y); the band |eta - h_Omega(y)| <= tol*(1+|y|+|eta|)
// is reported as boundary.
inline Membership cone_membership(const ProperCone& c, const AffinePoint& p, double tol = 1e-9) {
    const double gap = p.eta - c.tube_support(p.y);
    const double band = tol * (1.0 + p.y.norm() + std::abs(p.eta));
    if (gap > band) return Membership::Inside;
    if (gap < -band) return Membership::Outside;
    return Membership::Boundary;
}

enum class PlaneClass { Spacelike, Null };

inline const char* to_string(PlaneClass c) { return c == PlaneClass::Spacelike ? "spacelike" : "null"; }

struct PlaneClassification {
    PlaneClass kind = PlaneClass::Spacelike;
    bool near_band = false;     // within a few snap tolerances of the boundary
    bool rays_agree = true;     // direct test against sampled rays of the closed cone
};

// Direct test: the direction space {(v, x.v)} of the plane meets the closed
// cone away from 0 iff some section ray (s, 1) has x.s >= 1. Returns the
// largest x.s over the sampled rays.
inline double plane_ray_contact(const ProperCone& c, const Vec2& x) {
    double m = -kInf;
    for (const auto& s : c.section.boundary()) m = std::max(m, x.dot(s));
    return m;
}

// Relative shortfall of the sampled rays against the true section: the
// largest gap between a sample chord and the section boundary, as measured by
// the section gauge at chord midpoints (0 for polygons).
inline double ray_resolution(const ProperCone& c) {
    const auto& b = c.section.boundary();
    double worst = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i)
        worst = std::max(worst, 1.0 - c.section.gauge(0.5 * (b[i] + b[(i + 1) % b.size()])));
    return worst;
}

inline PlaneClassification classify_plane(const ProperCone& c, const TubePoint& t) {
    const PlanarDomain omega = c.tube_domain();
    const double tol = omega.snap_tolerance();
    const double g = omega.gauge(t.x);
    const double dev = (g - 1.0) * omega.gauge_scale();
    if (dev > tol) throw Error("plane_crosses_cone", "plane is neither C-spacelike nor C-null",
                               "gauge " + std::to_string(g));
    PlaneClassification r;
    r.kind = dev >= -tol ? PlaneClass::Null : PlaneClass::Spacelike;
    r.near_band = std::abs(dev) <= 1e3 * tol;
    // Sampled rays under-resolve the section between samples, so the direct
    // test uses the polygon's own resolution as its band.
    const double contact = plane_ray_contact(c, t.x);
    const bool ray_null = contact >= 1.0 - std::max(1e-9, 2.0 * ray_resolution(c));
    r.rays_agree = (r.kind == PlaneClass::Null) == ray_null;
    return r;
}

// D = strict epigraph of the conjugate of the envelope of phi.
inline bool regular_domain_membership(const ConvexEnvelope& env, const AffinePoint& p) {
    return env.conjugate(p.y) < p.eta;
}

}  // namespace cagc

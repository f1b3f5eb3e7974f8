#pragma once

#include "cagc/core.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace cagc {

enum class DomainKind { Disk, Ellipse, Polygon };

inline const char* to_string(DomainKind k) {
    switch (k) {
        case DomainKind::Disk: return "disk";
        case DomainKind::Ellipse: return "ellipse";
        case DomainKind::Polygon: return "polygon";
    }
    return "?";
}

// Bounded strictly convex planar domain containing the origin, stored as a
// counterclockwise boundary sample polygon. Disk and ellipse presets keep their
// analytic gauge so membership and ray exits are exact; everything else uses
// the sample polygon.
class PlanarDomain {
public:
    PlanarDomain() = default;

    static PlanarDomain disk(std::size_t samples = 512) {
        return ellipse_impl(DomainKind::Disk, 1.0, 1.0, samples);
    }

    static PlanarDomain ellipse(double a, double b, std::size_t samples = 512) {
        if (!(a > 0.0) || !(b > 0.0)) throw Error("invalid_domain", "ellipse semi-axes must be positive");
        return ellipse_impl(DomainKind::Ellipse, a, b, samples);
    }

    static PlanarDomain polygon(std::vector<Vec2> vertices) {
        PlanarDomain d;
        d.kind_ = DomainKind::Polygon;
        d.boundary_ = std::move(vertices);
        d.finalize();
        return d;
    }

    DomainKind kind() const { return kind_; }
    double semi_a() const { return a_; }
    double semi_b() const { return b_; }
    const std::vector<Vec2>& boundary() const { return boundary_; }
    std::size_t size() const { return boundary_.size(); }
    const Vec2& sample(std::size_t i) const { return boundary_[i]; }

    // Same analytic shape with a different sample set (e.g. with extra points
    // inserted on the curve). The samples must lie on the curve for presets.
    PlanarDomain with_samples(std::vector<Vec2> samples) const {
        PlanarDomain d = *this;
        d.boundary_ = std::move(samples);
        if (kind_ != DomainKind::Polygon) {
            for (const auto& p : d.boundary_)
                if (std::abs(analytic_gauge(p) - 1.0) > 1e-9)
                    throw Error("invalid_domain", "sample is not on the preset curve");
        }
        d.finalize();
        return d;
    }

    // Minkowski functional: < 1 inside, 1 on the boundary.
    double gauge(const Vec2& x) const {
        if (kind_ != DomainKind::Polygon) return analytic_gauge(x);
        double g = -kInf;
        for (const auto& n : edge_normals_) g = std::max(g, n.dot(x));
        return g;
    }

    bool contains(const Vec2& x) const { return gauge(x) < 1.0; }

    double snap_tolerance() const { return 1e-9 * diameter_; }

    bool on_boundary(const Vec2& x, double tol) const {
        return std::abs(gauge(x) - 1.0) * gauge_scale() <= tol;
    }

    // Conversion factor from gauge deviation to a length, used by tolerances.
    double gauge_scale() const { return 0.5 * diameter_; }

    double diameter() const { return diameter_; }

    // Largest s > 0 with x + s*dir still in the closed domain (x inside).
    double ray_exit(const Vec2& x, const Vec2& dir) const {
        if (kind_ != DomainKind::Polygon) {
            const Vec2 xs(x.x() / a_, x.y() / b_);
            const Vec2 ds(dir.x() / a_, dir.y() / b_);
            const double qa = ds.squaredNorm();
            const double qb = 2.0 * xs.dot(ds);
            const double qc = xs.squaredNorm() - 1.0;
            const double disc = std::max(0.0, qb * qb - 4.0 * qa * qc);
            // Stable root for the positive exit.
            const double q = -0.5 * (qb - std::sqrt(disc));
            if (qb <= 0.0) return q / qa;
            return qc / (-0.5 * (qb + std::sqrt(disc)));
        }
        double s = kInf;
        for (const auto& n : edge_normals_) {
            const double nd = n.dot(dir);
            if (nd > 0.0) s = std::min(s, (1.0 - n.dot(x)) / nd);
        }
        return s;
    }

    // Edge normals scaled so that n_i . v_i = n_i . v_{i+1} = 1; these are the
    // vertices of the polar dual polygon.
    const std::vector<Vec2>& edge_normals() const { return edge_normals_; }

    // Locates the boundary edge hit by the ray from the origin through x.
    // Returns (edge index i, fraction along v_i -> v_{i+1}).
    std::pair<std::size_t, double> locate(const Vec2& x) const {
        const double a = normalized_angle(std::atan2(x.y(), x.x()));
        auto it = std::upper_bound(angles_.begin(), angles_.end(), a);
        std::size_t i = (it == angles_.begin()) ? boundary_.size() - 1
                                                 : static_cast<std::size_t>(it - angles_.begin()) - 1;
        const std::size_t j = (i + 1) % boundary_.size();
        const Vec2& p = boundary_[i];
        const Vec2& q = boundary_[j];
        const Vec2 e = q - p;
        const double den = cross2(x, e);
        double lam = den != 0.0 ? -cross2(x, p) / den : 0.0;
        lam = std::clamp(lam, 0.0, 1.0);
        return {i, lam};
    }

    // Cumulative polygon arc length at each sample, starting at sample 0.
    std::vector<double> arc_lengths() const {
        std::vector<double> s(boundary_.size(), 0.0);
        for (std::size_t i = 1; i < boundary_.size(); ++i)
            s[i] = s[i - 1] + (boundary_[i] - boundary_[i - 1]).norm();
        return s;
    }

    PlanarDomain dual() const {
        if (kind_ == DomainKind::Disk) return disk(boundary_.size());
        if (kind_ == DomainKind::Ellipse) return ellipse(1.0 / a_, 1.0 / b_, boundary_.size());
        return polygon(edge_normals_);
    }

    std::string describe() const {
        std::ostringstream os;
        os << to_string(kind_);
        if (kind_ == DomainKind::Ellipse) os << "(" << a_ << "," << b_ << ")";
        os << " samples=" << boundary_.size();
        return os.str();
    }

private:
    static PlanarDomain ellipse_impl(DomainKind kind, double a, double b, std::size_t samples) {
        if (samples < 3) throw Error("invalid_domain", "need at least 3 boundary samples");
        PlanarDomain d;
        d.kind_ = kind;
        d.a_ = a;
        d.b_ = b;
        d.boundary_.reserve(samples);
        for (std::size_t k = 0; k < samples; ++k) {
            const double th = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(samples);
            d.boundary_.emplace_back(a * std::cos(th), b * std::sin(th));
        }
        d.finalize();
        return d;
    }

    double analytic_gauge(const Vec2& x) const { return std::hypot(x.x() / a_, x.y() / b_); }

    double normalized_angle(double a) const {
        while (a < angles_.front()) a += 2.0 * std::numbers::pi;
        while (a >= angles_.front() + 2.0 * std::numbers::pi) a -= 2.0 * std::numbers::pi;
        return a;
    }

    void finalize() {
        const std::size_t m = boundary_.size();
        if (m < 3) throw Error("invalid_domain", "need at least 3 boundary samples");
        for (const auto& p : boundary_)
            if (!p.allFinite()) throw Error("invalid_domain", "boundary sample is not finite");
        edge_normals_.resize(m);
        for (std::size_t i = 0; i < m; ++i) {
            const Vec2& p = boundary_[i];
            const Vec2& q = boundary_[(i + 1) % m];
            const Vec2& r = boundary_[(i + 2) % m];
            if (!(cross2(q - p, r - q) > 0.0))
                throw Error("invalid_domain", "boundary is not strictly convex and counterclockwise",
                            "sample " + std::to_string((i + 1) % m));
            const double c = cross2(p, q);
            if (!(c > 0.0)) throw Error("origin_outside", "origin is not strictly inside the domain");
            // Solve n.p = n.q = 1.
            edge_normals_[i] = Vec2(q.y() - p.y(), p.x() - q.x()) / c;
        }
        angles_.resize(m);
        double prev = std::atan2(boundary_[0].y(), boundary_[0].x());
        angles_[0] = prev;
        for (std::size_t i = 1; i < m; ++i) {
            double a = std::atan2(boundary_[i].y(), boundary_[i].x());
            while (a <= prev) a += 2.0 * std::numbers::pi;
            angles_[i] = prev = a;
        }
        if (angles_.back() - angles_.front() >= 2.0 * std::numbers::pi)
            throw Error("invalid_domain", "boundary winds more than once around the origin");
        diameter_ = 0.0;
        if (kind_ != DomainKind::Polygon) {
            diameter_ = 2.0 * std::max(a_, b_);
        } else {
            for (std::size_t i = 0; i < m; ++i)
                for (std::size_t j = i + 1; j < m; ++j)
                    diameter_ = std::max(diameter_, (boundary_[i] - boundary_[j]).norm());
        }
    }

    DomainKind kind_ = DomainKind::Polygon;
    double a_ = 1.0;
    double b_ = 1.0;
    std::vector<Vec2> boundary_;
    std::vector<Vec2> edge_normals_;
    std::vector<double> angles_;
    double diameter_ = 0.0;
};

inline PlanarDomain dual_domain(const PlanarDomain& d) { return d.dual(); }

inline double support_function(const PlanarDomain& d, const Vec2& y) {
    double s = -kInf;
    for (const auto& x : d.boundary()) s = std::max(s, x.dot(y));
    return s;
}

// Symmetric Hausdorff distance between the two sample polygons (vertex-based).
inline double hausdorff_distance(const PlanarDomain& a, const PlanarDomain& b) {
    auto one_sided = [](const PlanarDomain& p, const PlanarDomain& q) {
        double worst = 0.0;
        const auto& qb = q.boundary();
        for (const auto& x : p.boundary()) {
            double best = kInf;
            for (std::size_t i = 0; i < qb.size(); ++i) {
                const Vec2& s = qb[i];
                const Vec2& e = qb[(i + 1) % qb.size()];
                const Vec2 d = e - s;
                const double t = std::clamp((x - s).dot(d) / d.squaredNorm(), 0.0, 1.0);
                best = std::min(best, (s + t * d - x).norm());
            }
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

// Extended-real data on the boundary samples of a domain.
struct BoundaryFunction {
    PlanarDomain domain;
    std::vector<double> values;

    BoundaryFunction() = default;
    BoundaryFunction(PlanarDomain d, std::vector<double> v) : domain(std::move(d)), values(std::move(v)) {
        validate();
    }

    void validate() const {
        if (values.size() != domain.size())
            throw Error("size_mismatch", "boundary values do not match the sample count");
        bool any = false;
        for (double v : values) {
            if (std::isnan(v) || v == -kInf) throw Error("invalid_boundary", "boundary values must be finite or +inf");
            any = any || is_finite_value(v);
        }
        if (!any) throw Error("all_infinite", "boundary function is +inf everywhere");
    }

    // Value at a boundary point, linear along the sample polygon edge that the
    // ray from the origin through x hits.
    double at(const Vec2& x) const {
        const auto [i, lam] = domain.locate(x);
        const std::size_t j = (i + 1) % domain.size();
        if (lam <= 0.0) return values[i];
        if (lam >= 1.0) return values[j];
        if (!is_finite_value(values[i]) || !is_finite_value(values[j])) return kInf;
        return (1.0 - lam) * values[i] + lam * values[j];
    }
};

}  // namespace cagc

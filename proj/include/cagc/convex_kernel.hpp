#pragma once

#include "cagc/grid.hpp"

#include <algorithm>
#include <array>
#include <map>

namespace cagc {

// Lower convex envelope of extended-real boundary data: the largest convex
// function whose boundary values stay below phi. The finite samples are in
// convex position, so the envelope is piecewise linear over a regular
// triangulation of them, found by Lawson flips from a fan.
class ConvexEnvelope {
public:
    ConvexEnvelope() = default;

    explicit ConvexEnvelope(const BoundaryFunction& phi) {
        phi.validate();
        for (std::size_t i = 0; i < phi.values.size(); ++i) {
            if (!is_finite_value(phi.values[i])) continue;
            pts_.push_back(phi.domain.sample(i));
            z_.push_back(phi.values[i]);
        }
        double zmax = 0.0;
        for (double v : z_) zmax = std::max(zmax, std::abs(v));
        ztol_ = 1e-12 * (1.0 + zmax);
        lo_ = hi_ = pts_.front();
        for (const auto& p : pts_) {
            lo_ = lo_.cwiseMin(p);
            hi_ = hi_.cwiseMax(p);
        }
        if (pts_.size() >= 3) {
            triangulate();
            build_buckets();
        }
    }

    // True when the finite data spans a full-dimensional hull.
    bool proper() const { return !tris_.empty(); }
    const std::vector<Vec2>& points() const { return pts_; }
    const std::vector<double>& heights() const { return z_; }
    const std::vector<std::array<int, 3>>& triangles() const { return tris_; }

    // Envelope value; +inf outside the hull of the finite data.
    double operator()(const Vec2& x) const { return value(x); }

    double value(const Vec2& x) const {
        if (tris_.empty()) return degenerate_value(x);
        const double ext = (hi_ - lo_).maxCoeff();
        const double tol = 1e-11;
        const Vec2 q = ((x - lo_) / ext) * static_cast<double>(nb_);
        const int bi = std::clamp(static_cast<int>(std::floor(q.x())), 0, nb_ - 1);
        const int bj = std::clamp(static_cast<int>(std::floor(q.y())), 0, nb_ - 1);
        if (x.x() < lo_.x() - tol * ext || x.y() < lo_.y() - tol * ext || x.x() > hi_.x() + tol * ext ||
            x.y() > hi_.y() + tol * ext)
            return kInf;
        double best = kInf;
        double near_score = -kInf;
        double near_value = kInf;
        for (int t : buckets_[static_cast<std::size_t>(bj * nb_ + bi)]) {
            double la, lb, lc;
            barycentric(t, x, la, lb, lc);
            const auto& tr = tris_[static_cast<std::size_t>(t)];
            const double v = la * z_[tr[0]] + lb * z_[tr[1]] + lc * z_[tr[2]];
            const double s = std::min({la, lb, lc});
            if (s >= 0.0) best = std::min(best, v);
            else if (s > near_score) {
                near_score = s;
                near_value = v;
            }
        }
        if (best < kInf) return best;
        // Points on the hull boundary can miss every triangle by rounding.
        if (near_score > -tol) return near_value;
        return kInf;
    }

    GridFunction on_grid(GridPtr g) const {
        std::vector<double> v(g->size());
        for (std::size_t k = 0; k < g->size(); ++k) v[k] = value(g->node(k));
        std::vector<double> bv;
        bv.reserve(g->domain().size());
        for (const auto& p : g->domain().boundary()) bv.push_back(value(p));
        return GridFunction(std::move(g), std::move(v), std::move(bv), true);
    }

    // Legendre transform of the envelope. It is piecewise linear on
    // triangles with sample vertices, so the sup is attained at a sample.
    double conjugate(const Vec2& y) const {
        double s = -kInf;
        for (std::size_t i = 0; i < pts_.size(); ++i) s = std::max(s, pts_[i].dot(y) - z_[i]);
        return s;
    }

private:
    using Edge = std::pair<int, int>;

    static Edge key(int a, int b) { return a < b ? Edge{a, b} : Edge{b, a}; }

    void barycentric(int t, const Vec2& x, double& la, double& lb, double& lc) const {
        const auto& tr = tris_[static_cast<std::size_t>(t)];
        const Vec2& a = pts_[tr[0]];
        const Vec2 e1 = pts_[tr[1]] - a;
        const Vec2 e2 = pts_[tr[2]] - a;
        const Vec2 r = x - a;
        const double det = cross2(e1, e2);
        lb = cross2(r, e2) / det;
        lc = cross2(e1, r) / det;
        la = 1.0 - lb - lc;
    }

    // Height of the plane through the lifted triangle (a,b,c) above point d.
    double plane_height(int a, int b, int c, int d) const {
        const Vec2 e1 = pts_[b] - pts_[a];
        const Vec2 e2 = pts_[c] - pts_[a];
        const Vec2 r = pts_[d] - pts_[a];
        const double det = cross2(e1, e2);
        const double lb = cross2(r, e2) / det;
        const double lc = cross2(e1, r) / det;
        return z_[a] + lb * (z_[b] - z_[a]) + lc * (z_[c] - z_[a]);
    }

    void triangulate() {
        const int m = static_cast<int>(pts_.size());
        for (int i = 1; i + 1 < m; ++i) tris_.push_back({0, i, i + 1});
        std::map<Edge, std::array<int, 2>> adj;
        auto attach = [&](int t) {
            const auto& tr = tris_[static_cast<std::size_t>(t)];
            for (int e = 0; e < 3; ++e) {
                auto& slot = adj.try_emplace(key(tr[e], tr[(e + 1) % 3]), std::array<int, 2>{-1, -1}).first->second;
                (slot[0] < 0 ? slot[0] : slot[1]) = t;
            }
        };
        auto detach = [&](int t) {
            const auto& tr = tris_[static_cast<std::size_t>(t)];
            for (int e = 0; e < 3; ++e) {
                auto& slot = adj[key(tr[e], tr[(e + 1) % 3])];
                if (slot[0] == t) slot[0] = slot[1];
                slot[1] = -1;
            }
        };
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) attach(t);
        std::vector<Edge> stack;
        for (const auto& [e, s] : adj)
            if (s[1] >= 0) stack.push_back(e);
        auto opposite = [&](int t, const Edge& e) {
            for (int v : tris_[static_cast<std::size_t>(t)])
                if (v != e.first && v != e.second) return v;
            return -1;
        };
        while (!stack.empty()) {
            const Edge e = stack.back();
            stack.pop_back();
            const auto it = adj.find(e);
            if (it == adj.end() || it->second[1] < 0) continue;
            const int t1 = it->second[0], t2 = it->second[1];
            const int b = opposite(t1, e), d = opposite(t2, e);
            // Orient so that (a, b, c) is counterclockwise.
            int a = e.first, c = e.second;
            if (cross2(pts_[b] - pts_[a], pts_[c] - pts_[a]) < 0.0) std::swap(a, c);
            if (!(z_[d] < plane_height(a, b, c, d) - ztol_)) continue;
            detach(t1);
            detach(t2);
            adj.erase(e);
            tris_[static_cast<std::size_t>(t1)] = {a, b, d};
            tris_[static_cast<std::size_t>(t2)] = {b, c, d};
            attach(t1);
            attach(t2);
            for (const Edge& f : {key(a, b), key(b, c), key(c, d), key(d, a)}) stack.push_back(f);
        }
    }

    void build_buckets() {
        nb_ = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(tris_.size()))));
        buckets_.assign(static_cast<std::size_t>(nb_ * nb_), {});
        const double ext = (hi_ - lo_).maxCoeff();
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            Vec2 lo = pts_[tris_[t][0]], hi = lo;
            for (int v : tris_[t]) {
                lo = lo.cwiseMin(pts_[v]);
                hi = hi.cwiseMax(pts_[v]);
            }
            const Vec2 qlo = ((lo - lo_) / ext) * static_cast<double>(nb_);
            const Vec2 qhi = ((hi - lo_) / ext) * static_cast<double>(nb_);
            const int i0 = std::clamp(static_cast<int>(std::floor(qlo.x())) - 1, 0, nb_ - 1);
            const int i1 = std::clamp(static_cast<int>(std::floor(qhi.x())) + 1, 0, nb_ - 1);
            const int j0 = std::clamp(static_cast<int>(std::floor(qlo.y())) - 1, 0, nb_ - 1);
            const int j1 = std::clamp(static_cast<int>(std::floor(qhi.y())) + 1, 0, nb_ - 1);
            for (int j = j0; j <= j1; ++j)
                for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j * nb_ + i)].push_back(t);
        }
    }

    double degenerate_value(const Vec2& x) const {
        const double tol = 1e-11 * (1.0 + (hi_ - lo_).norm());
        if (pts_.size() == 1) return (x - pts_[0]).norm() <= tol ? z_[0] : kInf;
        const Vec2 d = pts_[1] - pts_[0];
        const double s = (x - pts_[0]).dot(d) / d.squaredNorm();
        if (s < -1e-12 || s > 1.0 + 1e-12 || std::abs(cross2(d.normalized(), x - pts_[0])) > tol) return kInf;
        return (1.0 - s) * z_[0] + s * z_[1];
    }

    std::vector<Vec2> pts_;
    std::vector<double> z_;
    std::vector<std::array<int, 3>> tris_;
    std::vector<std::vector<int>> buckets_;
    int nb_ = 1;
    Vec2 lo_ = Vec2::Zero(), hi_ = Vec2::Zero();
    double ztol_ = 0.0;
};

inline GridFunction convex_envelope(const BoundaryFunction& phi, GridPtr g) {
    return ConvexEnvelope(phi).on_grid(std::move(g));
}

// Exact discrete Legendre transform: u*(y) = max_i (x_i . y - u_i) over the
// finite samples.
inline double legendre_at(const SampleSet& u, const Vec2& y) {
    double s = -kInf;
    for (std::size_t i = 0; i < u.points.size(); ++i) {
        if (!is_finite_value(u.values[i])) continue;
        s = std::max(s, u.points[i].dot(y) - u.values[i]);
    }
    return s;
}

inline SampleSet legendre_transform(const SampleSet& u, const std::vector<Vec2>& queries) {
    std::size_t n = 0;
    for (double v : u.values) n += is_finite_value(v) ? 1 : 0;
    if (n == 0) throw Error("all_infinite", "Legendre transform of a function that is +inf everywhere");
    Eigen::Matrix2Xd p(2, static_cast<Eigen::Index>(n));
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0, c = 0; i < u.points.size(); ++i) {
        if (!is_finite_value(u.values[i])) continue;
        p.col(static_cast<Eigen::Index>(c)) = u.points[i];
        v(static_cast<Eigen::Index>(c++)) = u.values[i];
    }
    SampleSet out;
    out.points = queries;
    out.values.resize(queries.size());
    Eigen::VectorXd buf(static_cast<Eigen::Index>(n));
    for (std::size_t q = 0; q < queries.size(); ++q) {
        buf.noalias() = p.transpose() * queries[q];
        out.values[q] = (buf - v).maxCoeff();
    }
    return out;
}

inline SampleSet legendre_transform(const GridFunction& u, const std::vector<Vec2>& queries) {
    return legendre_transform(u.samples(true), queries);
}

// Lattice of query points covering [lo, hi] with the given spacing.
inline std::vector<Vec2> query_grid(const Vec2& lo, const Vec2& hi, double spacing) {
    if (!(spacing > 0.0)) throw Error("invalid_config", "query spacing must be positive");
    std::vector<Vec2> q;
    const int nx = static_cast<int>(std::floor((hi.x() - lo.x()) / spacing + 1e-9));
    const int ny = static_cast<int>(std::floor((hi.y() - lo.y()) / spacing + 1e-9));
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) q.emplace_back(lo.x() + i * spacing, lo.y() + j * spacing);
    return q;
}

// Nonnegative second differences along the axes and diagonals at every node
// whose 3x3 neighbourhood is complete.
inline bool discretely_convex(const GridFunction& u, double tol) {
    const Grid& g = *u.grid;
    static constexpr int dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto [i, j] = g.lattice_index(k);
        const double c = u.values[k];
        if (!is_finite_value(c)) continue;
        for (const auto& d : dirs) {
            const int p = g.at(i + d[0], j + d[1]);
            const int m = g.at(i - d[0], j - d[1]);
            if (p < 0 || m < 0) continue;
            const double vp = u.values[static_cast<std::size_t>(p)], vm = u.values[static_cast<std::size_t>(m)];
            if (!is_finite_value(vp) || !is_finite_value(vm)) continue;
            if (vp + vm - 2.0 * c < -tol) return false;
        }
    }
    return true;
}

namespace detail {

// Interior-only view: evaluation near the boundary must not read the
// boundary data being estimated.
inline GridFunction without_boundary(const GridFunction& u) { return GridFunction(u.grid, u.values, {}, u.convex_flag); }

inline double convexity_tolerance(const GridFunction& u) {
    double m = 0.0;
    for (double v : u.values)
        if (is_finite_value(v)) m = std::max(m, std::abs(v));
    return 1e-8 * (1.0 + m);
}

// Values of u at distances 2h, 4h, 8h, 16h from x0 toward the anchor, with
// the corresponding segment parameters s.
inline void segment_samples(const GridFunction& interior, const Vec2& x0, const Vec2& anchor,
                            std::array<double, 4>& s, std::array<double, 4>& f) {
    const double len = (anchor - x0).norm();
    if (!(len > 0.0)) throw Error("invalid_anchor", "anchor coincides with the boundary point");
    const double h = interior.grid->h();
    for (int k = 0; k < 4; ++k) {
        s[static_cast<std::size_t>(k)] = std::min(1.0, 2.0 * h * std::ldexp(1.0, k) / len);
        f[static_cast<std::size_t>(k)] = interior.evaluate(x0 + s[static_cast<std::size_t>(k)] * (anchor - x0));
    }
}

// Extrapolation model on the dyadic abscissae t = 1, 2, 4, 8 with exponents
// e: the residual projector of the three-term fit and the limit weights of
// the four-term fit.
struct DyadicModel {
    Eigen::Matrix4d residual;
    Eigen::RowVector4d limit;

    explicit DyadicModel(const std::array<double, 4>& e) {
        Eigen::Matrix4d m;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) m(i, j) = std::pow(std::ldexp(1.0, i), e[static_cast<std::size_t>(j)]);
        const Eigen::Matrix<double, 4, 3> m3 = m.leftCols<3>();
        residual = Eigen::Matrix4d::Identity() - m3 * (m3.transpose() * m3).inverse() * m3.transpose();
        limit = m.inverse().row(0);
    }
};

// Limit at s = 0 from the four dyadic samples (finest first). The profile is
// classified as smooth (powers 0, 1, 2, 3) or square-root type (powers 0, 1/2,
// 1, 3/2) by which three-term fit leaves the smaller residual. Convexity
// along the segment makes 2 f0 - f1 a lower bound for the limit.
inline double dyadic_limit(const std::array<double, 4>& f) {
    for (double v : f)
        if (!is_finite_value(v)) return kInf;
    if (std::abs(f[1] - f[0]) <= 1e-13 * (1.0 + std::abs(f[0]))) return f[0];
    static const DyadicModel smooth({0.0, 1.0, 2.0, 3.0});
    static const DyadicModel root({0.0, 0.5, 1.0, 1.5});
    const Eigen::Vector4d v(f[0], f[1], f[2], f[3]);
    const DyadicModel& m = (smooth.residual * v).norm() <= (root.residual * v).norm() ? smooth : root;
    return std::max(m.limit.dot(v), 2.0 * f[0] - f[1]);
}

}  // namespace detail

// Boundary value at one boundary point via the monotone segment sequence
// toward an interior anchor.
inline double boundary_value_at(const GridFunction& interior, const Vec2& x0, const Vec2& anchor) {
    std::array<double, 4> s, f;
    detail::segment_samples(interior, x0, anchor, s, f);
    return detail::dyadic_limit(f);
}

inline BoundaryFunction boundary_value(const GridFunction& u, const Vec2& anchor = Vec2::Zero()) {
    if (!discretely_convex(u, detail::convexity_tolerance(u)))
        throw Error("not_convex", "boundary values need a convex grid function");
    const GridFunction interior = detail::without_boundary(u);
    const auto& d = u.grid->domain();
    if (!d.contains(anchor)) throw Error("invalid_anchor", "anchor is not inside the domain");
    std::vector<double> v(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) v[i] = boundary_value_at(interior, d.sample(i), anchor);
    return BoundaryFunction(d, std::move(v));
}

// Largest difference between two anchors' boundary value estimates.
inline double boundary_value_anchor_gap(const GridFunction& u, const Vec2& a1, const Vec2& a2) {
    const BoundaryFunction b1 = boundary_value(u, a1);
    const BoundaryFunction b2 = boundary_value(u, a2);
    double gap = 0.0;
    for (std::size_t i = 0; i < b1.values.size(); ++i) {
        if (!is_finite_value(b1.values[i]) || !is_finite_value(b2.values[i])) continue;
        gap = std::max(gap, std::abs(b1.values[i] - b2.values[i]));
    }
    return gap;
}

struct InnerDerivativeReport {
    bool infinite = false;
    double threshold = 0.0;
    double growth_ratio = 0.0;        // (q1 - q0) / (q2 - q1), finest first
    std::array<double, 4> quotients{};  // finest first
};

struct InnerDerivativeOptions {
    double threshold = 50.0;  // quotient below -threshold at the finest scale counts as blowup
    double growth = 0.75;     // increment ratio above this counts as blowup (0.5 for smooth data)
    Vec2 anchor = Vec2::Zero();
};

// Detects an infinite inner derivative at boundary sample `sample`: the
// difference quotients toward the anchor decrease as s -> 0 and either fall
// below -threshold or keep growing geometrically.
inline InnerDerivativeReport has_infinite_inner_derivatives(const GridFunction& u, std::size_t sample,
                                                            const InnerDerivativeOptions& opt = {}) {
    const auto& d = u.grid->domain();
    if (sample >= d.size()) throw Error("not_boundary_sample", "index is not a boundary sample", std::to_string(sample));
    const Vec2& x0 = d.sample(sample);
    const GridFunction interior = detail::without_boundary(u);
    std::array<double, 4> s, f;
    detail::segment_samples(interior, x0, opt.anchor, s, f);
    const double u0 = u.has_boundary_values() ? u.boundary_values[sample] : detail::dyadic_limit(f);
    InnerDerivativeReport r;
    r.threshold = opt.threshold;
    if (!is_finite_value(u0)) return r;
    for (std::size_t k = 0; k < 4; ++k) r.quotients[k] = (f[k] - u0) / s[k];
    const auto& q = r.quotients;
    const bool decreasing = q[0] < q[1] && q[1] < q[2] && q[2] < q[3];
    r.growth_ratio = (q[1] - q[0]) / (q[2] - q[1]);
    r.infinite = decreasing && (q[0] < -opt.threshold || r.growth_ratio > opt.growth);
    return r;
}

}  // namespace cagc

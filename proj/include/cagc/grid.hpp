#pragma once

#include "cagc/domain.hpp"

#include <array>
#include <memory>

namespace cagc {

// Scattered extended-real samples; the common currency of the Legendre transform.
struct SampleSet {
    std::vector<Vec2> points;
    std::vector<double> values;
};

// Square lattice of spacing h restricted to the interior of a domain. Lattice
// points closer than margin*h to the boundary are dropped so that every
// stencil arm that leaves the node set ends at a boundary point at a
// non-degenerate distance.
class Grid {
public:
    Grid(PlanarDomain domain, double h, double margin = 0.05) : domain_(std::move(domain)), h_(h) {
        if (!(h > 0.0)) throw Error("invalid_config", "grid spacing must be positive");
        double lo_x = kInf, lo_y = kInf, hi_x = -kInf, hi_y = -kInf;
        for (const auto& p : domain_.boundary()) {
            lo_x = std::min(lo_x, p.x());
            lo_y = std::min(lo_y, p.y());
            hi_x = std::max(hi_x, p.x());
            hi_y = std::max(hi_y, p.y());
        }
        imin_ = static_cast<int>(std::floor(lo_x / h)) - 1;
        jmin_ = static_cast<int>(std::floor(lo_y / h)) - 1;
        nx_ = static_cast<int>(std::ceil(hi_x / h)) + 2 - imin_;
        ny_ = static_cast<int>(std::ceil(hi_y / h)) + 2 - jmin_;
        lattice_.assign(static_cast<std::size_t>(nx_) * ny_, -1);
        const double min_gap = margin * h;
        for (int j = 0; j < ny_; ++j) {
            for (int i = 0; i < nx_; ++i) {
                const Vec2 x((imin_ + i) * h, (jmin_ + j) * h);
                if (!domain_.contains(x)) continue;
                if (boundary_distance_estimate(x) < min_gap) continue;
                lattice_[static_cast<std::size_t>(j) * nx_ + i] = static_cast<int>(nodes_.size());
                nodes_.push_back(x);
                ij_.push_back({imin_ + i, jmin_ + j});
            }
        }
        if (nodes_.empty()) throw Error("empty_grid", "no grid node inside the domain");
    }

    const PlanarDomain& domain() const { return domain_; }
    double h() const { return h_; }
    std::size_t size() const { return nodes_.size(); }
    const std::vector<Vec2>& nodes() const { return nodes_; }
    const Vec2& node(std::size_t k) const { return nodes_[k]; }
    std::array<int, 2> lattice_index(std::size_t k) const { return ij_[k]; }

    // Node id at lattice coordinates, or -1.
    int at(int i, int j) const {
        const int a = i - imin_;
        const int b = j - jmin_;
        if (a < 0 || b < 0 || a >= nx_ || b >= ny_) return -1;
        return lattice_[static_cast<std::size_t>(b) * nx_ + a];
    }

    // Approximate Euclidean distance to the boundary (min over 16 ray exits).
    double boundary_distance_estimate(const Vec2& x) const {
        double d = kInf;
        for (int k = 0; k < 16; ++k) {
            const double th = 2.0 * std::numbers::pi * k / 16.0;
            d = std::min(d, domain_.ray_exit(x, Vec2(std::cos(th), std::sin(th))));
        }
        return d;
    }

    bool same_as(const Grid& o) const {
        return this == &o || (h_ == o.h_ && nodes_.size() == o.nodes_.size() && imin_ == o.imin_ &&
                              jmin_ == o.jmin_ && domain_.size() == o.domain_.size());
    }

private:
    PlanarDomain domain_;
    double h_;
    int imin_ = 0, jmin_ = 0, nx_ = 0, ny_ = 0;
    std::vector<int> lattice_;
    std::vector<Vec2> nodes_;
    std::vector<std::array<int, 2>> ij_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(const PlanarDomain& d, double h) { return std::make_shared<const Grid>(d, h); }

// Extended-real function on the nodes of a grid, optionally with known values
// on the boundary samples of the grid's domain.
struct GridFunction {
    GridPtr grid;
    std::vector<double> values;
    std::vector<double> boundary_values;  // empty when unknown
    bool convex_flag = false;

    GridFunction() = default;
    GridFunction(GridPtr g, std::vector<double> v, std::vector<double> bv = {}, bool convex = false)
        : grid(std::move(g)), values(std::move(v)), boundary_values(std::move(bv)), convex_flag(convex) {
        if (values.size() != grid->size()) throw Error("size_mismatch", "values do not match the node count");
        if (!boundary_values.empty() && boundary_values.size() != grid->domain().size())
            throw Error("size_mismatch", "boundary values do not match the sample count");
    }

    template <class F>
    static GridFunction sample(GridPtr g, F&& f, bool with_boundary = true, bool convex = false) {
        std::vector<double> v(g->size());
        for (std::size_t k = 0; k < g->size(); ++k) v[k] = f(g->node(k));
        std::vector<double> bv;
        if (with_boundary) {
            for (const auto& p : g->domain().boundary()) bv.push_back(f(p));
        }
        return GridFunction(g, std::move(v), std::move(bv), convex);
    }

    bool has_boundary_values() const { return !boundary_values.empty(); }

    // Interior nodes plus boundary samples (when known), finite values only.
    SampleSet samples(bool include_boundary = true) const {
        SampleSet s;
        for (std::size_t k = 0; k < values.size(); ++k) {
            if (!is_finite_value(values[k])) continue;
            s.points.push_back(grid->node(k));
            s.values.push_back(values[k]);
        }
        if (include_boundary && has_boundary_values()) {
            const auto& b = grid->domain().boundary();
            for (std::size_t i = 0; i < b.size(); ++i) {
                if (!is_finite_value(boundary_values[i])) continue;
                s.points.push_back(b[i]);
                s.values.push_back(boundary_values[i]);
            }
        }
        return s;
    }

    // Dirichlet value at an arbitrary boundary point (linear along the sample
    // polygon edge).
    double boundary_at(const Vec2& x) const {
        if (!has_boundary_values()) throw Error("no_boundary_values", "grid function has no boundary data");
        const auto& d = grid->domain();
        const auto [i, lam] = d.locate(x);
        const std::size_t j = (i + 1) % d.size();
        if (!is_finite_value(boundary_values[i]) || !is_finite_value(boundary_values[j])) {
            if (lam <= 0.0) return boundary_values[i];
            if (lam >= 1.0) return boundary_values[j];
            return kInf;
        }
        return (1.0 - lam) * boundary_values[i] + lam * boundary_values[j];
    }

    // Interpolated value at an arbitrary point of the closed domain. Inside
    // complete lattice cells this is bilinear; in the boundary strip it is the
    // local lower convex interpolant of nearby nodes and boundary samples.
    double evaluate(const Vec2& x) const {
        const Grid& g = *grid;
        const double h = g.h();
        const int i0 = static_cast<int>(std::floor(x.x() / h));
        const int j0 = static_cast<int>(std::floor(x.y() / h));
        const int a = g.at(i0, j0), b = g.at(i0 + 1, j0), c = g.at(i0, j0 + 1), d = g.at(i0 + 1, j0 + 1);
        if (a >= 0 && b >= 0 && c >= 0 && d >= 0) {
            const double s = x.x() / h - i0;
            const double t = x.y() / h - j0;
            return (1 - s) * (1 - t) * values[a] + s * (1 - t) * values[b] + (1 - s) * t * values[c] +
                   s * t * values[d];
        }
        return local_hull_value(x, i0, j0);
    }

    // Central-difference gradient at a node; arms leaving the node set end at
    // the boundary (when boundary data is known) with the nonuniform formula.
    Vec2 gradient(std::size_t k) const {
        const Grid& g = *grid;
        const auto [i, j] = g.lattice_index(k);
        Vec2 grad;
        for (int axis = 0; axis < 2; ++axis) {
            const int di = axis == 0 ? 1 : 0;
            const int dj = axis == 0 ? 0 : 1;
            Vec2 e = Vec2::Zero();
            e(axis) = 1.0;
            double sp, sm, up, um;
            arm(k, g.at(i + di, j + dj), g.at(i - di, j - dj), e, sp, up);
            arm(k, g.at(i - di, j - dj), g.at(i + di, j + dj), -e, sm, um);
            const double u0 = values[k];
            grad(axis) = (sm * sm * (up - u0) + sp * sp * (u0 - um)) / (sp * sm * (sp + sm));
        }
        return grad;
    }

private:
    // One arm of the gradient stencil. Without boundary data a missing arm is
    // mirrored through the node from the opposite one.
    void arm(std::size_t k, int nb, int opp, const Vec2& e, double& s, double& v) const {
        const double h = grid->h();
        if (nb >= 0) {
            s = h;
            v = values[static_cast<std::size_t>(nb)];
            return;
        }
        if (has_boundary_values()) {
            const Vec2& x = grid->node(k);
            s = grid->domain().ray_exit(x, e);
            v = boundary_at(x + s * e);
            return;
        }
        s = h;
        v = opp >= 0 ? 2.0 * values[k] - values[static_cast<std::size_t>(opp)] : values[k];
    }

    double local_hull_value(const Vec2& x, int i0, int j0) const {
        const Grid& g = *grid;
        std::vector<Vec2> pts;
        std::vector<double> vals;
        for (int dj = -2; dj <= 3; ++dj) {
            for (int di = -2; di <= 3; ++di) {
                const int k = g.at(i0 + di, j0 + dj);
                if (k < 0 || !is_finite_value(values[static_cast<std::size_t>(k)])) continue;
                pts.push_back(g.node(static_cast<std::size_t>(k)));
                vals.push_back(values[static_cast<std::size_t>(k)]);
            }
        }
        if (has_boundary_values()) {
            const auto& dom = g.domain();
            const std::size_t m = dom.size();
            const auto loc = dom.locate(x);
            const double reach = 3.0 * g.h();
            for (std::size_t step = 0; step < m; ++step) {
                bool added = false;
                for (int sgn : {1, -1}) {
                    const std::size_t idx = sgn > 0 ? (loc.first + 1 + step) % m : (loc.first + m - step) % m;
                    if ((dom.sample(idx) - x).norm() <= reach || step == 0) {
                        if (is_finite_value(boundary_values[idx])) {
                            pts.push_back(dom.sample(idx));
                            vals.push_back(boundary_values[idx]);
                        }
                        added = true;
                    }
                }
                if (!added) break;
            }
        }
        const std::size_t n = pts.size();
        double best = kInf;
        double fallback = 0.0, fallback_score = -kInf;
        for (std::size_t a = 0; a < n; ++a) {
            for (std::size_t b = a + 1; b < n; ++b) {
                for (std::size_t c = b + 1; c < n; ++c) {
                    const Vec2 e1 = pts[b] - pts[a];
                    const Vec2 e2 = pts[c] - pts[a];
                    const double det = cross2(e1, e2);
                    if (std::abs(det) < 1e-14 * g.h() * g.h()) continue;
                    const Vec2 r = x - pts[a];
                    const double lb = cross2(r, e2) / det;
                    const double lc = cross2(e1, r) / det;
                    const double la = 1.0 - lb - lc;
                    const double val = la * vals[a] + lb * vals[b] + lc * vals[c];
                    const double score = std::min({la, lb, lc});
                    if (score >= -1e-12) {
                        best = std::min(best, val);
                    } else if (score > fallback_score) {
                        fallback_score = score;
                        fallback = val;
                    }
                }
            }
        }
        if (best < kInf) return best;
        if (has_boundary_values() && !g.domain().contains(x)) return boundary_at(x);
        return fallback;
    }
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (!a.grid || !b.grid || !a.grid->same_as(*b.grid)) throw Error("grid_mismatch", "grid functions live on different grids");
}

}  // namespace cagc

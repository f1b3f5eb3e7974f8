#pragma once

#include "cagc/convex_kernel.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <chrono>
#include <functional>
#include <memory>
#include <numeric>

namespace cagc {

struct MAConfig {
    double h = 0.0;               // <= 0: diameter / 128
    double tol = 1e-10;           // relative nodal residual
    int max_iter = 100;
    int stencil_dirs = 4;         // orthogonal direction pairs at h = diameter / 128
    bool refine_dirs = true;      // grow the pair count like h^-3/2 on finer grids
    double boundary_clamp = 1e-3; // <= 0: 2h * max|Dw| over nodes with a full axis stencil
    double damping = 0.5;         // backtracking factor of the line search

    void validate() const {
        if (!(tol > 0.0) || max_iter <= 0 || !(damping > 0.0 && damping <= 1.0))
            throw Error("invalid_config", "tolerance, iteration cap and damping must be positive (damping <= 1)");
        if (stencil_dirs < 4) throw Error("invalid_config", "at least 4 stencil direction pairs are required");
    }

    double spacing_for(const PlanarDomain& d) const { return h > 0.0 ? h : d.diameter() / 128.0; }

    // Direction pairs used on a grid of spacing h. Convergence of the wide
    // stencil needs the angular resolution to shrink with h.
    int pairs_for(const PlanarDomain& d, double spacing) const {
        if (!refine_dirs) return stencil_dirs;
        const double ratio = d.diameter() / 128.0 / spacing;
        if (ratio <= 1.0) return stencil_dirs;
        return std::max(stencil_dirs, static_cast<int>(std::ceil(stencil_dirs * std::pow(ratio, 1.5) - 1e-9)));
    }
};

struct MASolution {
    GridFunction u;
    double residual_max = kInf;
    int iterations = 0;
    bool converged = false;
    int pairs = 0;
    double boundary_clamp = 0.0;
    double factor = 1.0;
    double seconds = 0.0;
    // Fraction of probed boundary samples with detected gradient blowup
    // (negative when not probed).
    double blowup_fraction = -1.0;
};

// Lattice direction pairs (e, e_perp) ordered by stencil width, then angle.
inline std::vector<std::array<int, 2>> stencil_directions(int pairs) {
    std::vector<std::array<int, 2>> dirs;
    for (int w = 1; static_cast<int>(dirs.size()) < pairs; ++w) {
        std::vector<std::array<int, 2>> ring;
        for (int a = 1; a <= w; ++a) {
            for (int b = 0; b <= w; ++b) {
                if (std::max(a, b) != w || std::gcd(a, b) != 1) continue;
                ring.push_back({a, b});
            }
        }
        std::sort(ring.begin(), ring.end(), [](const auto& p, const auto& q) {
            return std::atan2(p[1], p[0]) < std::atan2(q[1], q[0]);
        });
        for (const auto& r : ring)
            if (static_cast<int>(dirs.size()) < pairs) dirs.push_back(r);
    }
    return dirs;
}

// Wide stencil with boundary-aware arms. Each direction has a + and - arm that
// ends either at a node or at the boundary intersection, where Dirichlet data
// is sampled once at construction. Arms with +inf data disable their pair.
class WideStencil {
public:
    struct Arm {
        int node;     // -1: boundary point
        double dist;  // Euclidean length
        double value; // Dirichlet value when node < 0
    };

    WideStencil(GridPtr grid, int pairs, const std::function<double(const Vec2&)>& dirichlet)
        : grid_(std::move(grid)), pairs_(pairs) {
        const auto dirs = stencil_directions(pairs);
        const std::size_t n = grid_->size();
        arms_.resize(n * static_cast<std::size_t>(4 * pairs));
        boundary_layer_.assign(n, false);
        const double h = grid_->h();
        for (std::size_t k = 0; k < n; ++k) {
            const auto [i, j] = grid_->lattice_index(k);
            const Vec2& x = grid_->node(k);
            for (int p = 0; p < pairs; ++p) {
                const int a = dirs[static_cast<std::size_t>(p)][0], b = dirs[static_cast<std::size_t>(p)][1];
                const std::array<std::array<int, 2>, 2> pair{{{a, b}, {-b, a}}};
                for (int q = 0; q < 2; ++q) {
                    const Vec2 e(pair[q][0], pair[q][1]);
                    const double len = e.norm() * h;
                    for (int sgn = 0; sgn < 2; ++sgn) {
                        const int s = sgn == 0 ? 1 : -1;
                        Arm& arm = arms_[index(k, 2 * p + q, sgn)];
                        const int nb = grid_->at(i + s * pair[q][0], j + s * pair[q][1]);
                        if (nb >= 0) {
                            arm = {nb, len, 0.0};
                        } else {
                            const Vec2 dir = s * e.normalized();
                            const double t = grid_->domain().ray_exit(x, dir);
                            arm = {-1, t, dirichlet(x + t * dir)};
                            boundary_layer_[k] = true;
                        }
                    }
                }
            }
        }
    }

    const Grid& grid() const { return *grid_; }
    int pairs() const { return pairs_; }
    const Arm& arm(std::size_t node, int dir, int sgn) const { return arms_[index(node, dir, sgn)]; }

    // Nodes where some arm ends on the boundary instead of a node.
    bool boundary_layer(std::size_t node) const { return boundary_layer_[node]; }

    // Second difference along direction dir; optionally reports the weights.
    double second_difference(const std::vector<double>& u, std::size_t k, int dir, double* wp = nullptr,
                             double* wm = nullptr, double* w0 = nullptr) const {
        const Arm& p = arm(k, dir, 0);
        const Arm& m = arm(k, dir, 1);
        const double up = p.node >= 0 ? u[static_cast<std::size_t>(p.node)] : p.value;
        const double um = m.node >= 0 ? u[static_cast<std::size_t>(m.node)] : m.value;
        const double cp = 2.0 / (p.dist * (p.dist + m.dist));
        const double cm = 2.0 / (m.dist * (p.dist + m.dist));
        if (wp) *wp = cp;
        if (wm) *wm = cm;
        if (w0) *w0 = cp + cm;
        return cp * up + cm * um - (cp + cm) * u[k];
    }

    // min over pairs of max(D_e u, 0) * max(D_e' u, 0)
    // Same stencil with every Dirichlet value multiplied by s.
    WideStencil scaled(double s) const {
        WideStencil out = *this;
        for (auto& a : out.arms_)
            if (a.node < 0) a.value *= s;
        return out;
    }

    double det(const std::vector<double>& u, std::size_t k) const {
        double best = kInf;
        for (int p = 0; p < pairs_; ++p) {
            const double a = std::max(second_difference(u, k, 2 * p), 0.0);
            const double b = std::max(second_difference(u, k, 2 * p + 1), 0.0);
            best = std::min(best, a * b);
        }
        return best;
    }

private:
    std::size_t index(std::size_t k, int dir, int sgn) const {
        return (k * static_cast<std::size_t>(2 * pairs_) + static_cast<std::size_t>(dir)) * 2 + static_cast<std::size_t>(sgn);
    }

    GridPtr grid_;
    int pairs_;
    std::vector<Arm> arms_;
    std::vector<bool> boundary_layer_;
};

inline double ma_det(const WideStencil& st, const GridFunction& u, std::size_t node) {
    return st.det(u.values, node);
}

// Stand-alone evaluation with Dirichlet data taken from u's boundary values.
inline double ma_det(const GridFunction& u, std::size_t node, int pairs = 4) {
    if (!u.has_boundary_values()) throw Error("no_boundary_values", "ma_det needs boundary data on the grid function");
    WideStencil st(u.grid, pairs, [&](const Vec2& q) { return u.boundary_at(q); });
    return st.det(u.values, node);
}

namespace detail {

// Right-hand side c * max(-w, eps)^-4 and its derivative in w.
struct ClampedPower {
    double c;
    double eps;
    double value(double w) const { return c * std::pow(std::max(-w, eps), -4.0); }
    double derivative(double w) const { return -w > eps ? 4.0 * c * std::pow(-w, -5.0) : 0.0; }
};

// Max gradient norm over nodes with a complete axis-neighbour stencil.
inline double interior_gradient_max(const Grid& g, const std::vector<double>& w) {
    double m = 0.0;
    const double h = g.h();
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto [i, j] = g.lattice_index(k);
        const int e = g.at(i + 1, j), wst = g.at(i - 1, j), n = g.at(i, j + 1), s = g.at(i, j - 1);
        if (e < 0 || wst < 0 || n < 0 || s < 0) continue;
        const double gx = (w[static_cast<std::size_t>(e)] - w[static_cast<std::size_t>(wst)]) / (2 * h);
        const double gy = (w[static_cast<std::size_t>(n)] - w[static_cast<std::size_t>(s)]) / (2 * h);
        m = std::max(m, std::hypot(gx, gy));
    }
    return m;
}

// Regularised pair product, equal to a*b when both exceed delta and
// increasing in each argument everywhere.
inline double pair_value(double a, double b, double delta, double& da, double& db) {
    const double ma = std::max(a, delta), mb = std::max(b, delta);
    da = a > delta ? mb : 1.0;
    db = b > delta ? ma : 1.0;
    return ma * mb + std::min(a, delta) + std::min(b, delta) - 2.0 * delta;
}

// Nodal equation det = rhs(k, u_k) solved by the Newton driver.
struct Equation {
    std::function<double(std::size_t, double)> rhs;
    std::function<double(std::size_t, double)> rhs_derivative;
    // Keeps iterates admissible (e.g. strictly negative); may be empty.
    std::function<bool(const std::vector<double>&)> admissible;
    // Called after an accepted step; may update rhs parameters.
    std::function<void(const std::vector<double>&)> after_step;
};

inline double residual(const WideStencil& st, const Equation& eq, const std::vector<double>& u,
                       double* mean_square = nullptr) {
    double worst = 0.0, sq = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double f = eq.rhs(k, u[k]);
        const double r = std::abs(st.det(u, k) - f) / (1.0 + f);
        worst = std::max(worst, r);
        sq += r * r;
    }
    if (mean_square) *mean_square = sq / static_cast<double>(std::max<std::size_t>(1, u.size()));
    return worst;
}

inline bool solve_linear(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double>, Eigen::IncompleteLUT<double>> it;
    it.preconditioner().setDroptol(1e-4);
    it.preconditioner().setFillfactor(10);
    it.setTolerance(1e-12);
    it.compute(a);
    if (it.info() == Eigen::Success) {
        x = it.solve(b);
        if (it.info() == Eigen::Success && x.allFinite()) return true;
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success) return false;
    x = lu.solve(b);
    return x.allFinite();
}

// Newton iteration on the min-over-pairs system with a backtracking line
// search on the relative sup residual.
inline void newton(const WideStencil& st, const Equation& eq, std::vector<double>& u, const MAConfig& cfg,
                   MASolution& sol) {
    const std::size_t n = u.size();
    const int pairs = st.pairs();
    double scale = 0.0;
    for (std::size_t k = 0; k < n; ++k) scale = std::max(scale, eq.rhs(k, u[k]));
    const double delta = 1e-8 * std::sqrt(std::max(scale, 1e-300));
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd f(static_cast<Eigen::Index>(n));
    std::vector<double> trial(n);
    sol.converged = false;
    double msq = 0.0;
    double fnorm = residual(st, eq, u, &msq);
    for (int it = 1; it <= cfg.max_iter && fnorm > cfg.tol; ++it) {
        trip.clear();
        trip.reserve(n * 5);
        for (std::size_t k = 0; k < n; ++k) {
            double best = kInf, bda = 0.0, bdb = 0.0;
            int arg = -1;
            for (int p = 0; p < pairs; ++p) {
                const double a = st.second_difference(u, k, 2 * p);
                const double b = st.second_difference(u, k, 2 * p + 1);
                double da, db;
                const double v = pair_value(a, b, delta, da, db);
                if (v < best) {
                    best = v;
                    arg = p;
                    bda = da;
                    bdb = db;
                }
            }
            if (arg < 0) throw Error("infeasible", "every stencil direction at a node sees +inf boundary data",
                                     "node " + std::to_string(k));
            const double rhs = eq.rhs(k, u[k]);
            f(static_cast<Eigen::Index>(k)) = best - rhs;
            double diag = -eq.rhs_derivative(k, u[k]);
            for (int q = 0; q < 2; ++q) {
                const int dir = 2 * arg + q;
                const double coef = q == 0 ? bda : bdb;
                double wp, wm, w0;
                st.second_difference(u, k, dir, &wp, &wm, &w0);
                diag -= coef * w0;
                const auto& ap = st.arm(k, dir, 0);
                const auto& am = st.arm(k, dir, 1);
                if (ap.node >= 0) trip.emplace_back(static_cast<int>(k), ap.node, coef * wp);
                if (am.node >= 0) trip.emplace_back(static_cast<int>(k), am.node, coef * wm);
            }
            trip.emplace_back(static_cast<int>(k), static_cast<int>(k), diag);
        }
        Eigen::SparseMatrix<double> jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        jac.setFromTriplets(trip.begin(), trip.end());
        jac.makeCompressed();
        Eigen::VectorXd step;
        if (!solve_linear(jac, -f, step)) break;
        const double step_sup = step.cwiseAbs().maxCoeff();
        // Accept when either the sup or the mean-square residual drops; the
        // sup alone stalls when the active pair switches at a few nodes.
        double lambda = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 30; ++ls) {
            for (std::size_t k = 0; k < n; ++k) trial[k] = u[k] + lambda * step(static_cast<Eigen::Index>(k));
            if (!eq.admissible || eq.admissible(trial)) {
                double tsq = 0.0;
                const double r = residual(st, eq, trial, &tsq);
                if (r < fnorm || tsq < msq) {
                    accepted = true;
                    break;
                }
            }
            lambda *= cfg.damping;
        }
        if (!accepted) break;
        u.swap(trial);
        sol.iterations = it;
        if (eq.after_step) eq.after_step(u);
        fnorm = residual(st, eq, u, &msq);
        // Stagnation: the update no longer moves the iterate.
        if (step_sup * lambda < 1e-3 * cfg.tol) break;
    }
    sol.residual_max = fnorm;
    sol.converged = fnorm <= cfg.tol;
}

// Solves on the final stencil, warm-started from the 4-pair solve when the
// stencil is wider (the wide system stalls from a crude start).
inline void solve_continued(const GridPtr& grid, int pairs, const std::function<double(const Vec2&)>& dirichlet,
                            const Equation& eq, std::vector<double>& u, const MAConfig& cfg, MASolution& sol,
                            std::unique_ptr<WideStencil>& stencil) {
    if (pairs > 4) {
        const WideStencil coarse(grid, 4, dirichlet);
        MASolution pre;
        newton(coarse, eq, u, cfg, pre);
    }
    stencil = std::make_unique<WideStencil>(grid, pairs, dirichlet);
    newton(*stencil, eq, u, cfg, sol);
    sol.pairs = pairs;
}

// Poisson solve D_e1 u + D_e2 u = 2 with the stencil's Dirichlet data.
inline std::vector<double> poisson_guess(const WideStencil& st) {
    const std::size_t n = st.grid().size();
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 2.0);
    std::vector<double> zero(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double diag = 0.0;
        for (int dir = 0; dir < 2; ++dir) {
            double wp, wm, w0;
            st.second_difference(zero, k, dir, &wp, &wm, &w0);
            diag -= w0;
            const auto& ap = st.arm(k, dir, 0);
            const auto& am = st.arm(k, dir, 1);
            if (ap.node >= 0) trip.emplace_back(static_cast<int>(k), ap.node, wp);
            else b(static_cast<Eigen::Index>(k)) -= wp * ap.value;
            if (am.node >= 0) trip.emplace_back(static_cast<int>(k), am.node, wm);
            else b(static_cast<Eigen::Index>(k)) -= wm * am.value;
        }
        trip.emplace_back(static_cast<int>(k), static_cast<int>(k), diag);
    }
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
    lu.compute(a);
    const Eigen::VectorXd x = lu.solve(b);
    return std::vector<double>(x.data(), x.data() + x.size());
}

inline bool stencil_convex(const WideStencil& st, const std::vector<double>& u, double tol) {
    for (std::size_t k = 0; k < u.size(); ++k)
        for (int dir = 0; dir < 2 * st.pairs(); ++dir)
            if (st.second_difference(u, k, dir) < -tol) return false;
    return true;
}

inline double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace detail

// Cheng-Yau support function: det D^2 w = w^-4 in the domain, w = 0 on the
// boundary, negative convex branch.
inline MASolution cheng_yau(const PlanarDomain& d, const MAConfig& cfg = {}) {
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const double h = cfg.spacing_for(d);
    auto grid = make_grid(d, h);
    const std::function<double(const Vec2&)> zero = [](const Vec2&) { return 0.0; };
    std::vector<double> w;
    {
        const WideStencil axis(grid, 4, zero);
        w = detail::poisson_guess(axis);
        // Scale the Poisson profile so that the equation balances at the median node.
        std::vector<double> ratio;
        for (std::size_t k = 0; k < w.size(); ++k) {
            const double det = axis.det(w, k);
            if (det > 0.0 && w[k] < 0.0) ratio.push_back(std::pow(-w[k], -4.0) / det);
        }
        if (ratio.empty()) throw Error("solver_failure", "degenerate initial guess");
        std::nth_element(ratio.begin(), ratio.begin() + static_cast<long>(ratio.size() / 2), ratio.end());
        const double alpha = std::pow(ratio[ratio.size() / 2], 1.0 / 6.0);
        for (auto& v : w) v *= alpha;
    }
    double eps = cfg.boundary_clamp > 0.0 ? cfg.boundary_clamp : 2.0 * h * detail::interior_gradient_max(*grid, w);
    detail::Equation eq;
    eq.rhs = [&](std::size_t, double v) { return detail::ClampedPower{1.0, eps}.value(v); };
    eq.rhs_derivative = [&](std::size_t, double v) { return detail::ClampedPower{1.0, eps}.derivative(v); };
    eq.admissible = [](const std::vector<double>& u) {
        for (double v : u)
            if (!(v < 0.0)) return false;
        return true;
    };
    if (cfg.boundary_clamp <= 0.0)
        eq.after_step = [&](const std::vector<double>& u) { eps = 2.0 * h * detail::interior_gradient_max(*grid, u); };
    MASolution sol;
    std::unique_ptr<WideStencil> st;
    detail::solve_continued(grid, cfg.pairs_for(d, h), zero, eq, w, cfg, sol, st);
    sol.boundary_clamp = eps;
    const bool convex = detail::stencil_convex(*st, w, 1e-9);
    sol.u = GridFunction(grid, std::move(w), std::vector<double>(d.size(), 0.0), convex);
    sol.seconds = detail::elapsed(t0);
    return sol;
}

// CAGC Dirichlet problem det D^2 u = c * max(-w, eps)^-4 with boundary data
// phi, on the grid of the Cheng-Yau solution w. Boundary arms read phi
// linearly along the sample polygon, which is the envelope on the boundary.
inline MASolution cagc_solve(const PlanarDomain& d, const MASolution& w, const BoundaryFunction& phi, double c,
                             const MAConfig& cfg = {}) {
    cfg.validate();
    if (!(c > 0.0) || !std::isfinite(c)) throw Error("invalid_config", "curvature factor must be positive and finite");
    if (!w.u.grid) throw Error("invalid_input", "Cheng-Yau solution has no grid");
    if (!w.converged) throw Error("not_converged", "Cheng-Yau solution did not converge");
    const GridPtr grid = w.u.grid;
    if (grid->domain().size() != d.size() || grid->domain().kind() != d.kind())
        throw Error("grid_mismatch", "domain does not match the Cheng-Yau grid");
    const auto t0 = std::chrono::steady_clock::now();
    const ConvexEnvelope env(phi);
    std::vector<double> u(grid->size());
    const double root_c = std::sqrt(c);
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double e = env.value(grid->node(k));
        if (!is_finite_value(e))
            throw Error("unsupported_boundary_data", "boundary data must have a finite envelope at every grid node",
                        "node " + std::to_string(k));
        u[k] = e + root_c * w.u.values[k];
    }
    const double eps = cfg.boundary_clamp > 0.0 ? cfg.boundary_clamp : w.boundary_clamp;
    std::vector<double> rhs(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) rhs[k] = detail::ClampedPower{c, eps}.value(w.u.values[k]);
    detail::Equation eq;
    eq.rhs = [&](std::size_t k, double) { return rhs[k]; };
    eq.rhs_derivative = [](std::size_t, double) { return 0.0; };
    const std::function<double(const Vec2&)> dirichlet = [&](const Vec2& q) { return phi.at(q); };
    MASolution sol;
    std::unique_ptr<WideStencil> st;
    const std::vector<double> start = u;
    detail::solve_continued(grid, w.pairs > 0 ? w.pairs : cfg.pairs_for(d, grid->h()), dirichlet, eq, u, cfg, sol, st);
    if (!sol.converged) {
        // Data homotopy: zero data is solved by sqrt(c) w, so ramp the data
        // from 0 to phi, each stage warm-started from the last one shifted by
        // the (linear in the data) envelope increment.
        std::vector<double> env_nodes(u.size()), cur(u.size()), trial;
        for (std::size_t k = 0; k < u.size(); ++k) {
            env_nodes[k] = start[k] - root_c * w.u.values[k];
            cur[k] = root_c * w.u.values[k];
        }
        double s = 0.0, ds = 0.25;
        int total = sol.iterations;
        MASolution stage;
        while (s < 1.0 && ds >= 1.0 / 1024.0) {
            const double next = std::min(1.0, s + ds);
            trial = cur;
            for (std::size_t k = 0; k < u.size(); ++k) trial[k] += (next - s) * env_nodes[k];
            const WideStencil part = st->scaled(next);
            detail::newton(part, eq, trial, cfg, stage);
            total += stage.iterations;
            if (stage.converged) {
                cur.swap(trial);
                s = next;
                ds *= 1.5;
            } else {
                ds *= 0.5;
            }
        }
        if (s >= 1.0) {
            u = cur;
            sol.residual_max = stage.residual_max;
            sol.converged = true;
        }
        sol.iterations = total;
    }
    sol.boundary_clamp = eps;
    sol.factor = c;
    const bool convex = detail::stencil_convex(*st, u, 1e-9 * (1.0 + c));
    std::vector<double> bv(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) bv[i] = phi.at(d.sample(i));
    sol.u = GridFunction(grid, std::move(u), std::move(bv), convex);
    // Probe the gradient blowup at evenly spaced boundary samples.
    int probed = 0, blown = 0;
    for (std::size_t i = 0; i < d.size(); i += std::max<std::size_t>(1, d.size() / 8)) {
        if (!is_finite_value(sol.u.boundary_values[i])) continue;
        ++probed;
        if (has_infinite_inner_derivatives(sol.u, i).infinite) ++blown;
    }
    sol.blowup_fraction = probed ? static_cast<double>(blown) / probed : -1.0;
    sol.seconds = detail::elapsed(t0);
    return sol;
}

struct BarrierReport {
    double lower = 0.0;  // max of (env + e^{-t/3} w - u)+
    double upper = 0.0;  // max of (u - env)+
    double max() const { return std::max(lower, upper); }
};

// Checks env + e^{-t/3} w <= u_t <= env nodewise (e^{-2t/3} parameterization).
inline BarrierReport barrier_check(const GridFunction& w, const GridFunction& env, const GridFunction& u, double t) {
    require_same_grid(w, env);
    require_same_grid(w, u);
    const double s = std::exp(-t / 3.0);
    BarrierReport r;
    for (std::size_t k = 0; k < u.values.size(); ++k) {
        if (!is_finite_value(env.values[k])) continue;
        r.lower = std::max(r.lower, env.values[k] + s * w.values[k] - u.values[k]);
        r.upper = std::max(r.upper, u.values[k] - env.values[k]);
    }
    return r;
}

}  // namespace cagc

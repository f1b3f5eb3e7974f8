#pragma once

#include "cagc/group_actions.hpp"
#include "cagc/monge_ampere.hpp"

#include <algorithm>
#include <cstdint>
#include <mutex>
#include <numbers>
#include <optional>
#include <set>
#include <thread>

namespace cagc {

// ---------------------------------------------------------------------------
// Word enumeration

struct EnumeratedWord {
    Word word;
    AffineMap map;
};

// Breadth-first reduced words over the free generators up to max_len, with
// duplicates (equal affine maps at 1e-9 resolution) pruned together with
// their extensions.
inline std::vector<EnumeratedWord> enumerate_words(const GroupData& gd, int max_len) {
    if (max_len < 0) throw Error("invalid_config", "word length must be nonnegative");
    const auto gens = gd.pres.free_generators();
    std::vector<Letter> letters;
    for (int g : gens) {
        letters.push_back({g, false});
        letters.push_back({g, true});
    }
    std::set<std::vector<std::int64_t>> seen;
    auto key = [](const AffineMap& m) {
        std::vector<std::int64_t> k;
        k.reserve(12);
        for (int i = 0; i < 9; ++i) k.push_back(std::llround(m.A.data()[i] * 1e9));
        for (int i = 0; i < 3; ++i) k.push_back(std::llround(m.X(i) * 1e9));
        return k;
    };
    std::vector<EnumeratedWord> out;
    std::vector<EnumeratedWord> frontier{{{}, AffineMap{}}};
    seen.insert(key(AffineMap{}));
    out.push_back(frontier.front());
    for (int len = 1; len <= max_len; ++len) {
        std::vector<EnumeratedWord> next;
        for (const auto& w : frontier) {
            for (const auto& l : letters) {
                if (!w.word.empty() && w.word.back().gen == l.gen && w.word.back().inv != l.inv) continue;
                EnumeratedWord e{w.word, w.map * gd.generator(l)};
                e.word.push_back(l);
                if (!e.map.A.allFinite() || !seen.insert(key(e.map)).second) continue;
                next.push_back(e);
            }
        }
        out.insert(out.end(), next.begin(), next.end());
        frontier.swap(next);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Invariant curve

struct CurveSample {
    Vec2 p;
    double xi = 0.0;
    std::string word;
    double arc = 0.0;  // arc-length position on the boundary polygon
};

struct InvariantCurve {
    PlanarDomain omega;
    std::vector<CurveSample> samples;  // sorted by arc
    double continuity_gap = 0.0;       // max height jump between adjacent samples
    double duplicate_gap = 0.0;        // max height spread among samples at the same point
    double fixed_residual = 0.0;       // max |T(p, xi) - (p, xi)| over samples

    std::vector<double> arcs;          // arc length at each sample of omega
    double perimeter = 0.0;

    void set_domain(PlanarDomain d) {
        omega = std::move(d);
        arcs = omega.arc_lengths();
        perimeter = arcs.back() + (omega.sample(0) - omega.boundary().back()).norm();
    }

    // Arc-length position of a boundary point along the sample polygon.
    double arc_position(const Vec2& p) const {
        const auto [i, lam] = omega.locate(p);
        const std::size_t j = (i + 1) % omega.size();
        return arcs[i] + lam * (omega.sample(j) - omega.sample(i)).norm();
    }

    // Piecewise-linear interpolation in arc length (periodic).
    double at(const Vec2& p) const {
        if (samples.empty()) throw Error("empty_curve", "invariant curve has no samples");
        if (samples.size() == 1) return samples.front().xi;
        const double s = arc_position(p);
        const double per = perimeter;
        auto it = std::upper_bound(samples.begin(), samples.end(), s,
                                   [](double v, const CurveSample& c) { return v < c.arc; });
        const CurveSample& hi = it == samples.end() ? samples.front() : *it;
        const CurveSample& lo = it == samples.begin() ? samples.back() : *(it - 1);
        double a = lo.arc, b = hi.arc, x = s;
        if (b <= a) b += per;
        if (x < a) x += per;
        const double lam = b > a ? (x - a) / (b - a) : 0.0;
        return (1.0 - lam) * lo.xi + lam * hi.xi;
    }
};

// Applies a word letter by letter (rightmost first). Much better conditioned
// than acting with the product matrix, whose entries grow with word length.
inline TubePoint act_word(const std::vector<TubeAut>& letters, const Word& w, TubePoint p) {
    for (auto it = w.rbegin(); it != w.rend(); ++it)
        p = tube_action(letters[static_cast<std::size_t>(2 * it->gen + (it->inv ? 1 : 0))], p);
    return p;
}

// Tube automorphisms of every generator and its inverse, indexed 2*gen+inv.
inline std::vector<TubeAut> letter_tubes(const GroupData& gd) {
    std::vector<TubeAut> out;
    for (int g = 0; g < gd.pres.generators(); ++g) {
        out.push_back(affine_to_tube(gd.generator({g, false})));
        out.push_back(affine_to_tube(gd.generator({g, true})));
    }
    return out;
}

// Splits w = W c W^-1 with c cyclically reduced.
inline std::pair<Word, Word> cyclic_split(const Word& w) {
    std::size_t a = 0, b = w.size();
    while (b - a >= 2 && w[a].gen == w[b - 1].gen && w[a].inv != w[b - 1].inv) {
        ++a;
        --b;
    }
    return {Word(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(a)),
            Word(w.begin() + static_cast<std::ptrdiff_t>(a), w.begin() + static_cast<std::ptrdiff_t>(b))};
}

// Boundary fixed point of a single group element, if any.
inline std::optional<BoundaryFixedPoint> element_fixed_point(const TubeAut& t, const PlanarDomain& omega) {
    const FixedPointResult r = fixed_points_on_tube_boundary(t, omega, true);
    if (r.points.empty()) return std::nullopt;
    return r.points.front();
}

inline InvariantCurve sample_invariant_curve(const GroupData& gd, int max_word_len) {
    gd.check_shape();
    for (int j = 0; j < gd.pres.n; ++j) {
        const Word w{{2 * gd.pres.g + j, false}};
        if (!is_admissible(gd, w))
            throw Error("no_invariant_curve", "cocycle is not admissible at a puncture", gd.pres.name(w[0].gen));
    }
    InvariantCurve c;
    c.set_domain(gd.cone.tube_domain());
    const auto words = enumerate_words(gd, max_word_len);
    // Puncture generators are not in the free set when n > 0 only for the
    // last one; add them all explicitly so every cusp is sampled.
    std::vector<std::pair<Word, AffineMap>> items;
    for (const auto& w : words)
        if (!w.word.empty()) items.emplace_back(w.word, w.map);
    for (int j = 0; j < gd.pres.n; ++j) {
        const Word w{{2 * gd.pres.g + j, false}};
        items.emplace_back(w, gd.affine(w));
    }
    const auto letters = letter_tubes(gd);
    for (const auto& [w, m] : items) {
        const TubeAut t = affine_to_tube(m);
        SL3Class kind;
        try {
            kind = classify_sl3(t.B).kind;
        } catch (const Error&) {
            continue;
        }
        if (kind != SL3Class::Hyperbolic && kind != SL3Class::Parabolic) continue;
        std::optional<BoundaryFixedPoint> fp;
        if (kind == SL3Class::Parabolic) {
            // Fixed point of the short cyclic core, carried out by the
            // conjugator; the long product loses the height to rounding.
            const auto [outer, core] = cyclic_split(w);
            fp = element_fixed_point(affine_to_tube(gd.affine(core)), c.omega);
            if (fp) {
                const TubePoint q = act_word(letters, outer, {fp->p, fp->xi, Locus::Boundary});
                fp->p = q.x / c.omega.gauge(q.x);
                fp->xi = q.xi;
            }
        } else {
            fp = element_fixed_point(t, c.omega);
        }
        if (!fp) continue;
        CurveSample s{fp->p, fp->xi, gd.pres.format(w), 0.0};
        s.arc = c.arc_position(s.p);
        const TubePoint img = act_word(letters, w, {s.p, s.xi, Locus::Boundary});
        c.fixed_residual = std::max(c.fixed_residual, std::max((img.x - s.p).norm(), std::abs(img.xi - s.xi)));
        c.samples.push_back(std::move(s));
    }
    if (c.samples.empty()) throw Error("empty_curve", "no boundary fixed points found; increase the word length");
    std::sort(c.samples.begin(), c.samples.end(), [](const auto& a, const auto& b) { return a.arc < b.arc; });
    // Merge samples at the same boundary point.
    std::vector<CurveSample> merged;
    for (auto& s : c.samples) {
        if (!merged.empty() && (merged.back().p - s.p).norm() <= 1e-9) {
            c.duplicate_gap = std::max(c.duplicate_gap, std::abs(merged.back().xi - s.xi));
            continue;
        }
        merged.push_back(std::move(s));
    }
    if (merged.size() > 1 && (merged.front().p - merged.back().p).norm() <= 1e-9) {
        c.duplicate_gap = std::max(c.duplicate_gap, std::abs(merged.front().xi - merged.back().xi));
        merged.pop_back();
    }
    c.samples = std::move(merged);
    for (std::size_t i = 0; i < c.samples.size(); ++i) {
        const auto& a = c.samples[i];
        const auto& b = c.samples[(i + 1) % c.samples.size()];
        c.continuity_gap = std::max(c.continuity_gap, std::abs(a.xi - b.xi));
    }
    return c;
}

// Fixed points of the puncture generators (the cusps p_1..p_n).
inline std::vector<Vec2> parabolic_points(const GroupData& gd) {
    std::vector<Vec2> pts;
    const PlanarDomain omega = gd.cone.tube_domain();
    for (int j = 0; j < gd.pres.n; ++j) {
        const TubeAut t = gd.tube(Word{{2 * gd.pres.g + j, false}});
        const FixedPointResult r = fixed_points_on_tube_boundary(t, omega);
        if (r.points.empty()) throw Error("no_fixed_point", "puncture generator has no boundary fixed point", gd.pres.name(2 * gd.pres.g + j));
        pts.push_back(r.points.front().p);
    }
    return pts;
}

// ---------------------------------------------------------------------------
// Modified boundary data phi_mu

// phi on the boundary samples, then the orbit points of each cusp inserted as
// extra samples carrying the transported heights of (p_j, phi(p_j) - mu_j).
// The inserted positions do not depend on mu, so sweeps over mu share one
// sample set.
inline BoundaryFunction build_phi_mu(const InvariantCurve& curve, const std::vector<Vec2>& cusps,
                                     const std::vector<double>& mu, const std::vector<TubeAut>& transports) {
    if (cusps.size() != mu.size()) throw Error("size_mismatch", "one mu per parabolic point required");
    for (double m : mu)
        if (!(m >= 0.0)) throw Error("invalid_mu", "mu must be nonnegative");
    const PlanarDomain& omega = curve.omega;
    const bool preset = omega.kind() != DomainKind::Polygon;
    struct Item {
        double angle;
        Vec2 p;
        double value;
        bool orbit;
    };
    std::vector<Item> items;
    for (const auto& s : omega.boundary())
        items.push_back({std::atan2(s.y(), s.x()), s, curve.at(s), false});
    std::vector<Item> orbit;
    for (std::size_t j = 0; j < cusps.size(); ++j) {
        const double base = curve.at(cusps[j]) - mu[j];
        orbit.push_back({std::atan2(cusps[j].y(), cusps[j].x()), cusps[j], base, true});
        for (const auto& t : transports) {
            const Vec3 v = t.B * Vec3(cusps[j].x(), cusps[j].y(), -1.0);
            const double d = -v.z();
            if (!(d > 0.0) || 1.0 / d < 1e-4) continue;
            TubePoint img = tube_action(t, {cusps[j], base, Locus::Boundary});
            if (preset) img.x /= omega.gauge(img.x);
            orbit.push_back({std::atan2(img.x.y(), img.x.x()), img.x, img.xi, true});
        }
    }
    // Merge orbit points closer than 1e-4 rad (keeping the lowest height);
    // an orbit point replaces any regular sample within that distance.
    const double gap = 1e-4;
    auto wrap = [](double a) {
        while (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
        while (a > std::numbers::pi) a -= 2.0 * std::numbers::pi;
        return a;
    };
    std::sort(orbit.begin(), orbit.end(), [](const Item& a, const Item& b) { return a.angle < b.angle; });
    std::vector<Item> kept;
    for (const auto& o : orbit) {
        bool merged = false;
        for (auto& k : kept) {
            if (std::abs(wrap(k.angle - o.angle)) < gap) {
                k.value = std::min(k.value, o.value);
                merged = true;
                break;
            }
        }
        if (!merged) kept.push_back(o);
    }
    std::vector<Item> all;
    for (const auto& it : items) {
        bool near = false;
        for (const auto& k : kept)
            if (std::abs(wrap(k.angle - it.angle)) < gap) near = true;
        if (!near) all.push_back(it);
    }
    all.insert(all.end(), kept.begin(), kept.end());
    // Keep the counterclockwise order starting from the first regular sample.
    const double a0 = items.front().angle;
    std::sort(all.begin(), all.end(), [&](const Item& a, const Item& b) {
        return wrap(a.angle - a0) + (wrap(a.angle - a0) < 0 ? 2 * std::numbers::pi : 0) <
               wrap(b.angle - a0) + (wrap(b.angle - a0) < 0 ? 2 * std::numbers::pi : 0);
    });
    std::vector<Vec2> pts;
    std::vector<double> vals;
    for (const auto& it : all) {
        pts.push_back(it.p);
        vals.push_back(it.value);
    }
    return BoundaryFunction(omega.with_samples(std::move(pts)), std::move(vals));
}

inline BoundaryFunction build_phi_mu(const GroupData& gd, const InvariantCurve& curve, const std::vector<double>& mu,
                                     int max_word_len) {
    std::vector<TubeAut> transports;
    for (const auto& w : enumerate_words(gd, max_word_len))
        if (!w.word.empty()) transports.push_back(affine_to_tube(w.map));
    return build_phi_mu(curve, parabolic_points(gd), mu, transports);
}

// ---------------------------------------------------------------------------
// CAGC family

struct FoliationFamily {
    std::vector<double> t_grid;
    std::vector<MASolution> solutions;
    BoundaryFunction phi_mu;
    GridFunction envelope;
    ConvexEnvelope envelope_data;
    bool monotone = true;             // u_t strictly increasing in t at every node
    double monotone_fraction = 1.0;   // share of nodes where it holds
    double max_t_second_difference = -kInf;  // max over nodes of second differences in t
    bool partial = false;
    std::vector<std::string> failures;
};

inline double cagc_factor(double t) { return std::exp(-2.0 * t / 3.0); }

// One CAGC solve per t (factor e^{-2t/3}), run on up to `threads` workers.
inline FoliationFamily foliate(const PlanarDomain& d, const MASolution& w, const BoundaryFunction& phi_mu,
                               std::vector<double> t_grid, const MAConfig& cfg = {}, int threads = 1) {
    if (t_grid.empty()) throw Error("invalid_config", "empty t grid");
    for (std::size_t i = 1; i < t_grid.size(); ++i)
        if (!(t_grid[i] > t_grid[i - 1])) throw Error("invalid_config", "t grid must be strictly increasing");
    FoliationFamily fam;
    fam.t_grid = std::move(t_grid);
    fam.phi_mu = phi_mu;
    fam.envelope_data = ConvexEnvelope(phi_mu);
    fam.envelope = fam.envelope_data.on_grid(w.u.grid);
    const std::size_t m = fam.t_grid.size();
    fam.solutions.resize(m);
    std::vector<std::string> errors(m);
    std::size_t next = 0;
    std::mutex lock;
    auto worker = [&]() {
        for (;;) {
            std::size_t i;
            {
                std::lock_guard<std::mutex> g(lock);
                if (next >= m) return;
                i = next++;
            }
            try {
                fam.solutions[i] = cagc_solve(d, w, phi_mu, cagc_factor(fam.t_grid[i]), cfg);
                if (!fam.solutions[i].converged) errors[i] = "not converged";
            } catch (const Error& e) {
                errors[i] = e.code() + ": " + e.what();
            }
        }
    };
    const int nt = std::max(1, std::min<int>(threads, static_cast<int>(m)));
    std::vector<std::thread> pool;
    for (int k = 1; k < nt; ++k) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < m; ++i)
        if (!errors[i].empty()) {
            fam.partial = true;
            fam.failures.push_back("t=" + std::to_string(fam.t_grid[i]) + " " + errors[i]);
        }
    if (fam.partial) return fam;
    const std::size_t n = w.u.grid->size();
    std::size_t good = 0;
    for (std::size_t k = 0; k < n; ++k) {
        bool ok = true;
        for (std::size_t i = 1; i < m; ++i)
            if (!(fam.solutions[i].u.values[k] > fam.solutions[i - 1].u.values[k])) ok = false;
        good += ok ? 1 : 0;
        for (std::size_t i = 1; i + 1 < m; ++i) {
            // Second difference on a possibly nonuniform t grid.
            const double h0 = fam.t_grid[i] - fam.t_grid[i - 1], h1 = fam.t_grid[i + 1] - fam.t_grid[i];
            const double a = fam.solutions[i - 1].u.values[k], b = fam.solutions[i].u.values[k],
                         c = fam.solutions[i + 1].u.values[k];
            const double sd = 2.0 * (h0 * c - (h0 + h1) * b + h1 * a) / (h0 * h1 * (h0 + h1)) * h0 * h1;
            fam.max_t_second_difference = std::max(fam.max_t_second_difference, sd);
        }
    }
    fam.monotone_fraction = static_cast<double>(good) / static_cast<double>(n);
    fam.monotone = good == n;
    return fam;
}

namespace detail {

inline std::pair<std::size_t, double> bracket(const FoliationFamily& f, double t) {
    const auto& g = f.t_grid;
    if (t < g.front() || t > g.back()) throw Error("t_out_of_range", "t outside the family range", std::to_string(t));
    if (g.size() == 1) return {0, 0.0};
    std::size_t i = static_cast<std::size_t>(std::upper_bound(g.begin(), g.end(), t) - g.begin());
    i = std::clamp<std::size_t>(i, 1, g.size() - 1) - 1;
    return {i, (t - g[i]) / (g[i + 1] - g[i])};
}

}  // namespace detail

// Nodes whose four axis neighbours are nodes, i.e. where the gradient is a
// plain central difference.
inline std::vector<std::size_t> central_nodes(const Grid& g) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const auto [i, j] = g.lattice_index(k);
        if (g.at(i + 1, j) >= 0 && g.at(i - 1, j) >= 0 && g.at(i, j + 1) >= 0 && g.at(i, j - 1) >= 0)
            out.push_back(k);
    }
    return out;
}

// Leaf points (Du, x.Du - u) over the central-difference nodes.
inline std::vector<AffinePoint> surface_points(const GridFunction& u) {
    const auto nodes = central_nodes(*u.grid);
    std::vector<AffinePoint> pts;
    pts.reserve(nodes.size());
    for (std::size_t k : nodes) {
        const Vec2 du = u.gradient(k);
        pts.push_back({du, u.grid->node(k).dot(du) - u.values[k]});
    }
    return pts;
}

inline std::vector<AffinePoint> surface_points(const MASolution& s) { return surface_points(s.u); }

// F(x, u_t(x)) with u_t linear in t between family members.
inline AffinePoint map_F(const FoliationFamily& f, std::size_t node, double t) {
    const auto [i, lam] = detail::bracket(f, t);
    const auto& a = f.solutions[i].u;
    const auto& b = f.solutions[std::min(i + 1, f.solutions.size() - 1)].u;
    if (node >= a.grid->size()) throw Error("invalid_node", "node index out of range");
    const double u = (1.0 - lam) * a.values[node] + lam * b.values[node];
    const Vec2 du = (1.0 - lam) * a.gradient(node) + lam * b.gradient(node);
    return {du, a.grid->node(node).dot(du) - u};
}

struct TimeValue {
    double t = 0.0;
    bool saturated = false;  // clamped to an end of the family's t range
    double residual = 0.0;   // |u_t*(y) - eta| at the returned t
};

namespace detail {

// Conjugate of the t-interpolated member at y (boundary samples included).
inline double family_conjugate(const FoliationFamily& f, double t, const Vec2& y) {
    const auto [i, lam] = bracket(f, t);
    const auto& a = f.solutions[i].u;
    const auto& b = f.solutions[std::min(i + 1, f.solutions.size() - 1)].u;
    const Grid& g = *a.grid;
    double s = -kInf;
    for (std::size_t k = 0; k < g.size(); ++k)
        s = std::max(s, g.node(k).dot(y) - ((1.0 - lam) * a.values[k] + lam * b.values[k]));
    return std::max(s, f.envelope_data.conjugate(y));
}

}  // namespace detail

// Leaf label t of a point of D: the root of u_t*(y) = eta, which is
// decreasing in t. Clamped to the family range, never extrapolated.
inline TimeValue time_function_K(const FoliationFamily& f, const AffinePoint& p, double tol = 1e-10) {
    if (f.partial) throw Error("partial_family", "family has failed solves");
    if (!regular_domain_membership(f.envelope_data, p))
        throw Error("not_in_domain", "point is not in the regular domain");
    double lo = f.t_grid.front(), hi = f.t_grid.back();
    const double glo = detail::family_conjugate(f, lo, p.y) - p.eta;
    const double ghi = detail::family_conjugate(f, hi, p.y) - p.eta;
    if (glo <= 0.0) return {lo, true, std::abs(glo)};
    if (ghi >= 0.0) return {hi, true, std::abs(ghi)};
    double g = glo;
    double mid = lo;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * (1.0 + std::abs(hi)); ++it) {
        mid = 0.5 * (lo + hi);
        g = detail::family_conjugate(f, mid, p.y) - p.eta;
        if (std::abs(g) <= tol) break;
        (g > 0.0 ? lo : hi) = mid;
    }
    return {mid, false, std::abs(g)};
}

// max |u(x') - xi'| over nodes x at distance >= margin from the boundary whose
// image (x', xi') = t.(x, u(x)) also lies at distance >= margin.
inline double invariance_residual(const GridFunction& u, const TubeAut& t, double margin,
                                  std::size_t* tested = nullptr) {
    const Grid& g = *u.grid;
    double worst = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < g.size(); ++k) {
        const Vec2& x = g.node(k);
        if (g.boundary_distance_estimate(x) < margin) continue;
        TubePoint img;
        try {
            img = tube_action(t, {x, u.values[k], Locus::Interior});
        } catch (const Error&) {
            continue;
        }
        if (!g.domain().contains(img.x) || g.boundary_distance_estimate(img.x) < margin) continue;
        worst = std::max(worst, std::abs(u.evaluate(img.x) - img.xi));
        ++count;
    }
    if (tested) *tested = count;
    return worst;
}

// Boundary analogue: max |phi(p') - xi'| over the curve samples.
inline double invariance_residual(const InvariantCurve& c, const TubeAut& t) {
    double worst = 0.0;
    for (const auto& s : c.samples) {
        const TubePoint img = tube_action(t, {s.p, s.xi, Locus::Boundary});
        worst = std::max(worst, std::abs(c.at(img.x) - img.xi));
    }
    return worst;
}

// Per member: max of env - u_t over the outermost node ring.
inline std::vector<double> asymptotics_check(const FoliationFamily& f) {
    std::vector<double> gaps;
    for (const auto& s : f.solutions) {
        const Grid& g = *s.u.grid;
        double gap = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const auto [i, j] = g.lattice_index(k);
            if (g.at(i + 1, j) >= 0 && g.at(i - 1, j) >= 0 && g.at(i, j + 1) >= 0 && g.at(i, j - 1) >= 0) continue;
            gap = std::max(gap, f.envelope.values[k] - s.u.values[k]);
        }
        gaps.push_back(gap);
    }
    return gaps;
}

}  // namespace cagc

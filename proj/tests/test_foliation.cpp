#include "cagc/foliation.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <map>

using namespace cagc;

namespace {

MAConfig coarse() {
    MAConfig c;
    c.h = 1.0 / 32;
    return c;
}

const MASolution& disk_w() {
    static const MASolution w = cheng_yau(PlanarDomain::disk(), coarse());
    return w;
}

BoundaryFunction zero_data() {
    const auto& d = disk_w().u.grid->domain();
    return BoundaryFunction(d, std::vector<double>(d.size(), 0.0));
}

// Disk family with zero data; u_t = e^{-t/3} w exactly on the grid.
const FoliationFamily& disk_family() {
    static const FoliationFamily f = [] {
        std::vector<double> ts;
        for (int i = 0; i <= 12; ++i) ts.push_back(-1.0 + 0.25 * i);
        return foliate(disk_w().u.grid->domain(), disk_w(), zero_data(), ts, coarse(), 1);
    }();
    return f;
}

GroupData deformed_torus(double scale = 0.2) {
    auto gd = punctured_torus_preset();
    gd.tau = admissible_non_coboundary(gd.pres, gd.rho, 0, scale);
    return gd;
}

std::size_t origin_node(const Grid& g) {
    for (std::size_t k = 0; k < g.size(); ++k)
        if (g.node(k).norm() < 1e-12) return k;
    return g.size();
}

}  // namespace

TEST(Words, ReducedAndDeduplicated) {
    const auto gd = punctured_torus_preset();
    const auto words = enumerate_words(gd, 3);
    // Free group of rank 2: 1 + 4 + 12 + 36 reduced words.
    EXPECT_EQ(words.size(), 53u);
    EXPECT_TRUE(words.front().word.empty());
    for (const auto& w : words) {
        for (std::size_t i = 1; i < w.word.size(); ++i)
            EXPECT_FALSE(w.word[i].gen == w.word[i - 1].gen && w.word[i].inv != w.word[i - 1].inv);
        const AffineMap m = gd.affine(w.word);
        EXPECT_LE((m.A - w.map.A).norm(), 1e-10 * m.A.norm());
    }
    EXPECT_THROW(enumerate_words(gd, -1), Error);
}

TEST(Curve, ZeroCocycleIsFlat) {
    const auto c = sample_invariant_curve(punctured_torus_preset(), 6);
    ASSERT_GT(c.samples.size(), 100u);
    for (const auto& s : c.samples) EXPECT_NEAR(s.xi, 0.0, 1e-12);
    EXPECT_LE(c.fixed_residual, 1e-8);
    for (std::size_t i = 1; i < c.samples.size(); ++i) EXPECT_LE(c.samples[i - 1].arc, c.samples[i].arc);
}

TEST(Curve, CoboundaryIsAffine) {
    auto gd = punctured_torus_preset();
    const Vec3 x(0.3, -0.25, 0.4);
    gd.tau = coboundary(gd.rho, x);
    const auto c = sample_invariant_curve(gd, 6);
    for (const auto& s : c.samples) EXPECT_NEAR(s.xi, x.head<2>().dot(s.p) - x.z(), 1e-8) << s.word;
}

TEST(Curve, NonCoboundaryIsConsistent) {
    const auto gd = deformed_torus();
    const auto c = sample_invariant_curve(gd, 7);
    EXPECT_LE(c.fixed_residual, 1e-8);
    EXPECT_LE(c.duplicate_gap, 1e-6);
    // Not affine: the best affine fit leaves a visible residual.
    Eigen::MatrixXd a(static_cast<Eigen::Index>(c.samples.size()), 3);
    Eigen::VectorXd b(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        const auto& s = c.samples[static_cast<std::size_t>(i)];
        a.row(i) << s.p.x(), s.p.y(), 1.0;
        b(i) = s.xi;
    }
    const Eigen::VectorXd fit = a.colPivHouseholderQr().solve(b);
    EXPECT_GT((a * fit - b).cwiseAbs().maxCoeff(), 1e-3);
    // Each sample is fixed by the element it came from.
    const auto omega = gd.cone.tube_domain();
    for (std::size_t i = 0; i < c.samples.size(); i += 97) {
        const auto& s = c.samples[i];
        const TubePoint img = tube_action(gd.tube(gd.pres.parse(s.word)), {s.p, s.xi, Locus::Boundary});
        EXPECT_LE((img.x - s.p).norm(), 1e-6) << s.word;
    }
    (void)omega;
}

TEST(Curve, WordLengthsAgree) {
    const auto gd = deformed_torus();
    const auto a = sample_invariant_curve(gd, 5);
    const auto b = sample_invariant_curve(gd, 7);
    std::map<std::string, double> by_word;
    for (const auto& s : b.samples) by_word[s.word] = s.xi;
    int shared = 0;
    for (const auto& s : a.samples) {
        const auto it = by_word.find(s.word);
        if (it == by_word.end()) continue;
        ++shared;
        EXPECT_NEAR(it->second, s.xi, 1e-6) << s.word;
    }
    EXPECT_GT(shared, 50);
}

TEST(Curve, GeneratorInvariance) {
    const auto gd = deformed_torus();
    const auto c = sample_invariant_curve(gd, 7);
    for (int g = 0; g < 3; ++g) {
        // Interpolation between neighbouring samples bounds the residual.
        EXPECT_LE(invariance_residual(c, gd.tube(Word{{g, false}})), 4.0 * c.continuity_gap) << g;
    }
}

TEST(Curve, InadmissibleRejected) {
    auto gd = deformed_torus();
    gd.tau[2] += Vec3(0.0, 0.0, 0.5);
    try {
        sample_invariant_curve(gd, 4);
        FAIL() << "expected an error";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), "no_invariant_curve");
    }
}

TEST(PhiMu, ZeroMuKeepsCurve) {
    const auto gd = deformed_torus();
    const auto c = sample_invariant_curve(gd, 6);
    const auto phi = build_phi_mu(gd, c, {0.0}, 4);
    std::size_t regular = 0;
    for (std::size_t i = 0; i < phi.domain.size(); ++i) {
        const Vec2& p = phi.domain.sample(i);
        bool is_regular = false;
        for (const auto& s : c.omega.boundary())
            if ((s - p).norm() == 0.0) is_regular = true;
        // Orbit samples carry exact transported heights; the curve between its
        // samples is only interpolated.
        if (is_regular) {
            ++regular;
            EXPECT_NEAR(phi.values[i], c.at(p), 1e-12);
        } else {
            EXPECT_NEAR(phi.values[i], c.at(p), c.continuity_gap);
        }
    }
    EXPECT_GT(regular, c.omega.size() / 2);
}

TEST(PhiMu, UndeformedCuspOrbit) {
    const auto gd = punctured_torus_preset();
    const auto c = sample_invariant_curve(gd, 6);
    const auto phi = build_phi_mu(gd, c, {1.0}, 4);
    const Vec2 cusp = parabolic_points(gd).front();
    // Independent orbit of (cusp, -1) under the linear parts.
    std::vector<std::pair<Vec2, double>> orbit{{cusp, -1.0}};
    for (const auto& w : enumerate_words(gd, 4)) {
        const auto [x, xi] = oracle::plane_transport(w.map.A, Vec3::Zero(), cusp, -1.0);
        if (std::isfinite(xi)) orbit.push_back({x, xi});
    }
    int dips = 0;
    bool cusp_seen = false;
    for (std::size_t i = 0; i < phi.values.size(); ++i) {
        const double v = phi.values[i];
        const Vec2& p = phi.domain.sample(i);
        if (std::abs(v) < 1e-12) continue;
        ++dips;
        EXPECT_LT(v, 0.0);
        bool matched = false;
        for (const auto& [x, xi] : orbit)
            if ((x - p).norm() < 1e-8 && std::abs(xi - v) < 1e-8 * (1 + std::abs(v))) matched = true;
        EXPECT_TRUE(matched) << p.transpose() << " " << v;
        if ((p - cusp).norm() < 1e-12) {
            cusp_seen = true;
            EXPECT_NEAR(v, -1.0, 1e-12);
        }
    }
    EXPECT_TRUE(cusp_seen);
    EXPECT_GT(dips, 10);
}

TEST(PhiMu, RejectsBadMu) {
    const auto gd = punctured_torus_preset();
    const auto c = sample_invariant_curve(gd, 4);
    EXPECT_THROW(build_phi_mu(gd, c, {-0.5}, 3), Error);
    EXPECT_THROW(build_phi_mu(gd, c, {0.5, 0.5}, 3), Error);
}

TEST(PhiMu, SingleCuspEnvelopeMatchesClosedForm) {
    InvariantCurve flat;
    flat.set_domain(PlanarDomain::disk(1024));
    flat.samples.push_back({Vec2(1, 0), 0.0, "", 0.0});
    const Vec2 p(std::cos(2.0), std::sin(2.0));
    const auto phi = build_phi_mu(flat, {p}, {0.6}, {});
    const ConvexEnvelope env(phi);
    const auto f = parabolic_invariant_function(0.6, p);
    std::mt19937_64 rng(83);
    for (int i = 0; i < 200; ++i) {
        const Vec2 x = oracle::random_in_disk(rng, 0.9);
        EXPECT_NEAR(env(x), f(x), 2e-3);
    }
}

TEST(PhiMu, OrderingTransport) {
    const auto gd = deformed_torus();
    const auto c = sample_invariant_curve(gd, 6);
    const std::vector<double> mus = {0.0, 0.5, 1.0};
    std::vector<BoundaryFunction> phis;
    for (double m : mus) phis.push_back(build_phi_mu(gd, c, {m}, 4));
    const auto g = make_grid(c.omega, 1.0 / 16);
    std::vector<ConvexEnvelope> envs;
    for (const auto& p : phis) envs.emplace_back(p);
    for (std::size_t k = 1; k < mus.size(); ++k) {
        ASSERT_EQ(phis[k].values.size(), phis[k - 1].values.size());
        for (std::size_t i = 0; i < phis[k].values.size(); ++i) EXPECT_LE(phis[k].values[i], phis[k - 1].values[i]);
        for (std::size_t n = 0; n < g->size(); ++n) EXPECT_LE(envs[k](g->node(n)), envs[k - 1](g->node(n)) + 1e-12);
    }
    std::mt19937_64 rng(89);
    std::uniform_real_distribution<double> u(-2.0, 2.0), e(-1.0, 3.0);
    int strict = 0;
    for (int i = 0; i < 5000; ++i) {
        const AffinePoint p{{u(rng), u(rng)}, e(rng)};
        for (std::size_t k = 1; k < mus.size(); ++k) {
            const bool inner = regular_domain_membership(envs[k], p);
            const bool outer = regular_domain_membership(envs[k - 1], p);
            if (inner) EXPECT_TRUE(outer);
            if (outer && !inner) ++strict;
        }
    }
    EXPECT_GT(strict, 0);
}

TEST(Family, DiskClosedForm) {
    const auto fam = foliate(disk_w().u.grid->domain(), disk_w(), zero_data(), {0.0, 3.0 * std::log(2.0)}, coarse(), 1);
    ASSERT_FALSE(fam.partial);
    const std::size_t o = origin_node(*disk_w().u.grid);
    ASSERT_LT(o, disk_w().u.grid->size());
    EXPECT_NEAR(fam.solutions[0].u.values[o], -1.0, 2e-2);
    EXPECT_NEAR(fam.solutions[1].u.values[o], -0.5, 1e-2);
    EXPECT_NEAR(fam.solutions[1].u.values[o] / fam.solutions[0].u.values[o], 0.5, 1e-9);
}

TEST(Family, MonotoneAndConcave) {
    const auto& fam = disk_family();
    ASSERT_FALSE(fam.partial);
    EXPECT_TRUE(fam.monotone);
    EXPECT_EQ(fam.monotone_fraction, 1.0);
    EXPECT_LE(fam.max_t_second_difference, 1e-6);
    for (std::size_t i = 1; i < fam.solutions.size(); ++i)
        for (std::size_t k = 0; k < fam.solutions[i].u.values.size(); ++k)
            EXPECT_LT(fam.solutions[i - 1].u.values[k], fam.solutions[i].u.values[k]);
}

TEST(Family, PartialOnFailedSolve) {
    MAConfig c = coarse();
    c.max_iter = 1;
    std::vector<double> v(zero_data().values.size(), 0.0);
    for (std::size_t i = 0; i < v.size(); i += 7) v[i] = 0.3;
    const BoundaryFunction rough(zero_data().domain, v);
    const auto fam = foliate(disk_w().u.grid->domain(), disk_w(), rough, {0.0, 1.0}, c, 1);
    EXPECT_TRUE(fam.partial);
    EXPECT_FALSE(fam.failures.empty());
    EXPECT_THROW(time_function_K(fam, {{0, 0}, 2.0}), Error);
}

TEST(Family, MapFAtOrigin) {
    const auto& fam = disk_family();
    const std::size_t o = origin_node(*disk_w().u.grid);
    for (double t : {-1.0, -0.3, 0.0, 1.1, 2.0}) {
        const AffinePoint p = map_F(fam, o, t);
        EXPECT_LE(p.y.norm(), 1e-12);
        EXPECT_NEAR(p.eta, std::exp(-t / 3.0), 2e-2);
    }
    EXPECT_THROW(map_F(fam, o, 2.5), Error);
    EXPECT_THROW(map_F(fam, o, -1.5), Error);
}

TEST(Family, MapFOnLeaf) {
    const auto& fam = disk_family();
    const auto& u = fam.solutions[4];
    const auto pts = surface_points(u);
    const auto nodes = central_nodes(*u.u.grid);
    for (std::size_t i = 0; i < nodes.size(); i += 13) {
        const AffinePoint p = map_F(fam, nodes[i], fam.t_grid[4]);
        EXPECT_LE((p.vec() - pts[i].vec()).norm(), 1e-12);
    }
}

TEST(TimeFunction, InvertsClosedForm) {
    const auto& fam = disk_family();
    const std::size_t o = origin_node(*disk_w().u.grid);
    const double w0 = -disk_w().u.values[o];
    for (double t0 : {-0.6, 0.0, 0.8, 1.7}) {
        const auto r = time_function_K(fam, {{0, 0}, w0 * std::exp(-t0 / 3.0)});
        EXPECT_FALSE(r.saturated);
        // Linear interpolation of e^{-t/3} between members.
        EXPECT_NEAR(r.t, t0, 1e-2);
    }
    const auto on = time_function_K(fam, {{0, 0}, -fam.solutions[6].u.values[o]});
    EXPECT_NEAR(on.t, fam.t_grid[6], 1e-8);
    EXPECT_NEAR(time_function_K(fam, {{0, 0}, std::exp(-0.5 / 3.0)}).t, 0.5, 0.05);
}

TEST(TimeFunction, ClampsOutsideRange) {
    const auto& fam = disk_family();
    const auto hi = time_function_K(fam, {{0, 0}, 1e-3});
    EXPECT_TRUE(hi.saturated);
    EXPECT_EQ(hi.t, fam.t_grid.back());
    const auto lo = time_function_K(fam, {{0, 0}, 10.0});
    EXPECT_TRUE(lo.saturated);
    EXPECT_EQ(lo.t, fam.t_grid.front());
    EXPECT_THROW(time_function_K(fam, {{0, 0}, -1.0}), Error);
}

TEST(TimeFunction, DeeperPointsHaveSmallerTime) {
    const auto& fam = disk_family();
    for (double y1 : {0.0, 0.3, -0.7}) {
        const Vec2 y(y1, 0.2);
        double prev = kInf;
        for (double eta : {1.0, 1.2, 1.5, 2.0}) {
            const double t = time_function_K(fam, {y, eta}).t;
            EXPECT_LE(t, prev);
            prev = t;
        }
    }
}

TEST(TimeFunction, ConvexAlongSegments) {
    const auto& fam = disk_family();
    const auto nodes = central_nodes(*disk_w().u.grid);
    std::mt19937_64 rng(97);
    std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
    std::uniform_real_distribution<double> ut(-1.0, 2.0);
    int ok = 0;
    for (int i = 0; i < 50; ++i) {
        const AffinePoint a = map_F(fam, nodes[pick(rng)], ut(rng));
        const AffinePoint b = map_F(fam, nodes[pick(rng)], ut(rng));
        const AffinePoint m{0.5 * (a.y + b.y), 0.5 * (a.eta + b.eta)};
        const double ka = time_function_K(fam, a).t, kb = time_function_K(fam, b).t, km = time_function_K(fam, m).t;
        if (km <= 0.5 * (ka + kb) + 1e-6) ++ok;
    }
    EXPECT_GE(ok, 49);
}

TEST(Surface, HyperboloidFromHemisphere) {
    const auto g = make_grid(PlanarDomain::disk(), 1.0 / 64);
    const auto u = GridFunction::sample(g, [](const Vec2& x) { return oracle::cheng_yau_disk(x); });
    const auto nodes = central_nodes(*g);
    const auto pts = surface_points(u);
    ASSERT_EQ(pts.size(), nodes.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (g->node(nodes[i]).norm() > 0.8) continue;
        EXPECT_NEAR(pts[i].eta * pts[i].eta - pts[i].y.squaredNorm(), 1.0, 2e-2);
    }
}

TEST(Surface, AffineCollapsesToPoint) {
    const auto g = make_grid(PlanarDomain::disk(), 1.0 / 16);
    const Vec2 a(0.4, -0.3);
    const auto u = GridFunction::sample(g, [&](const Vec2& x) { return a.dot(x) + 0.25; });
    for (const auto& p : surface_points(u)) {
        EXPECT_LE((p.y - a).norm(), 1e-12);
        EXPECT_NEAR(p.eta, -0.25, 1e-12);
    }
}

TEST(Surface, FamilyLeavesOnScaledHyperboloids) {
    const auto& fam = disk_family();
    const auto nodes = central_nodes(*disk_w().u.grid);
    const ConvexEnvelope& env = fam.envelope_data;
    for (std::size_t m = 0; m < fam.solutions.size(); m += 4) {
        const double t = fam.t_grid[m];
        const auto pts = surface_points(fam.solutions[m]);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            EXPECT_TRUE(regular_domain_membership(env, pts[i]));
            if (disk_w().u.grid->node(nodes[i]).norm() > 0.8) continue;
            EXPECT_NEAR(pts[i].eta, std::sqrt(std::exp(-2.0 * t / 3.0) + pts[i].y.squaredNorm()), 3e-2);
        }
    }
}

TEST(Surface, LeavesAreDisjoint) {
    const auto& fam = disk_family();
    const auto a = surface_points(fam.solutions[2]);
    const auto b = surface_points(fam.solutions[3]);
    double closest = kInf;
    for (const auto& p : a)
        for (const auto& q : b) closest = std::min(closest, (p.vec() - q.vec()).norm());
    EXPECT_GT(closest, 1e-6);
}

TEST(Invariance, RotationOfRadialFunction) {
    const auto& u = disk_family().solutions[0].u;
    Mat3 quarter = Mat3::Identity();
    quarter.topLeftCorner<2, 2>() << 0, -1, 1, 0;
    std::size_t tested = 0;
    EXPECT_LE(invariance_residual(u, {quarter, Vec3::Zero()}, 0.05, &tested), 1e-12);
    EXPECT_GT(tested, 100u);
}

TEST(Invariance, WrongElementDetected) {
    const auto& u = disk_family().solutions[4].u;
    // A translation moves every height by a fixed affine amount.
    const TubeAut shift = affine_to_tube({Mat3::Identity(), Vec3(0.0, 0.0, -0.5)});
    EXPECT_GE(invariance_residual(u, shift, 0.05), 0.1);
}

TEST(Asymptotics, DiskGapMatchesClosedForm) {
    const auto& fam = disk_family();
    const auto gaps = asymptotics_check(fam);
    ASSERT_EQ(gaps.size(), fam.t_grid.size());
    const Grid& g = *disk_w().u.grid;
    for (std::size_t m = 0; m < gaps.size(); ++m) {
        double expect = 0.0;
        for (std::size_t k = 0; k < g.size(); ++k) {
            const auto [i, j] = g.lattice_index(k);
            if (g.at(i + 1, j) >= 0 && g.at(i - 1, j) >= 0 && g.at(i, j + 1) >= 0 && g.at(i, j - 1) >= 0) continue;
            expect = std::max(expect, -oracle::cagc_disk(fam.t_grid[m], g.node(k)));
        }
        EXPECT_NEAR(gaps[m], expect, 3.0 * g.h());
        if (m > 0) EXPECT_LT(gaps[m], gaps[m - 1]);
    }
}

TEST(Asymptotics, GapShrinksTowardBoundary) {
    const auto& u = disk_family().solutions[4].u;
    const Grid& g = *u.grid;
    double prev = kInf;
    for (int i = 0; i <= 31; ++i) {
        const int k = g.at(i, 0);
        if (k < 0) break;
        const double gap = -u.values[static_cast<std::size_t>(k)];
        EXPECT_LT(gap, prev);
        prev = gap;
    }
}

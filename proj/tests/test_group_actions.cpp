#include "cagc/group_actions.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace cagc;

namespace {

Mat3 rotation(double th) {
    Mat3 r = Mat3::Identity();
    r(0, 0) = std::cos(th);
    r(0, 1) = -std::sin(th);
    r(1, 0) = std::sin(th);
    r(1, 1) = std::cos(th);
    return r;
}

Word random_word(std::mt19937_64& rng, int gens, int len) {
    std::uniform_int_distribution<int> g(0, gens - 1), b(0, 1);
    Word w;
    for (int i = 0; i < len; ++i) w.push_back({g(rng), b(rng) == 1});
    return w;
}

}  // namespace

TEST(Classify, Examples) {
    EXPECT_EQ(classify_sl3(Mat3::Identity()).kind, SL3Class::Identity);
    EXPECT_EQ(classify_sl3(parabolic_a0()).kind, SL3Class::Parabolic);
    EXPECT_EQ(classify_sl3(Vec3(2.0, 1.0, 0.5).asDiagonal().toDenseMatrix()).kind, SL3Class::Hyperbolic);
    EXPECT_EQ(classify_sl3(rotation(0.7)).kind, SL3Class::EllipticLike);
    EXPECT_THROW(classify_sl3(2.0 * Mat3::Identity()), Error);
}

TEST(Classify, QuasiHyperbolicNamed) {
    Mat3 a;
    a << 2, 1, 0, 0, 2, 0, 0, 0, 0.25;
    EXPECT_EQ(classify_sl3(a).kind, SL3Class::QuasiHyperbolic);
}

TEST(Classify, ParabolicKernelRanks) {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 50; ++i) {
        const Mat3 p = oracle::random_sl3(rng);
        const Mat3 a = p * parabolic_a0() * p.inverse();
        ASSERT_EQ(classify_sl3(a).kind, SL3Class::Parabolic);
        const Mat3 n = a - Mat3::Identity();
        EXPECT_EQ(numerical_rank(n, 1e-7), 2);
        EXPECT_EQ(numerical_rank(n * n, 1e-7), 1);
    }
}

TEST(Classify, PresetGeneratorsHyperbolic) {
    const auto gd = punctured_torus_preset();
    EXPECT_EQ(classify_sl3(gd.rho[0]).kind, SL3Class::Hyperbolic);
    EXPECT_EQ(classify_sl3(gd.rho[1]).kind, SL3Class::Hyperbolic);
    EXPECT_EQ(classify_sl3(gd.rho[2]).kind, SL3Class::Parabolic);
}

TEST(Tube, AffineToTubeExamples) {
    const TubeAut id = affine_to_tube({});
    EXPECT_EQ(id.B, Mat3::Identity());
    EXPECT_EQ(id.Y, Vec3::Zero());
    const Mat3 a = Vec3(2.0, 1.0, 0.5).asDiagonal();
    EXPECT_LE((affine_to_tube({a, Vec3::Zero()}).B - a.inverse().transpose()).norm(), 1e-15);
    const TubeAut t = affine_to_tube({parabolic_a0(), Vec3::UnitX()});
    EXPECT_LE((t.B - parabolic_a0().inverse().transpose()).norm(), 1e-15);
    EXPECT_LE((t.Y - Vec3::UnitX()).norm(), 1e-15);
    EXPECT_THROW(affine_to_tube({Mat3::Zero(), Vec3::Zero()}), Error);
}

TEST(Tube, RoundTrip) {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 50; ++i) {
        const AffineMap m{oracle::random_lorentz(rng), oracle::random_vec(rng)};
        const AffineMap back = tube_to_affine(affine_to_tube(m));
        EXPECT_LE((back.A - m.A).norm(), 1e-12 * m.A.norm());
        EXPECT_LE((back.X - m.X).norm(), 1e-12 * (1 + m.X.norm()) * m.A.norm());
    }
}

TEST(Tube, IdentityAndTranslation) {
    const TubePoint p{{0.3, -0.4}, 0.7};
    const TubePoint q = tube_action({}, p);
    EXPECT_EQ(q.x, p.x);
    EXPECT_EQ(q.xi, p.xi);
    const Vec3 x(0.5, -1.0, 2.0);
    const TubePoint r = tube_action(affine_to_tube({Mat3::Identity(), x}), p);
    EXPECT_LE((r.x - p.x).norm(), 1e-15);
    EXPECT_NEAR(r.xi, p.xi + x.head<2>().dot(p.x) - x.z(), 1e-14);
}

TEST(Tube, MatchesPlaneTransport) {
    std::mt19937_64 rng(47);
    for (int i = 0; i < 200; ++i) {
        const AffineMap m{oracle::random_lorentz(rng), oracle::random_vec(rng, 2.0)};
        const Vec2 x = oracle::random_in_disk(rng, 0.95);
        const double xi = std::uniform_real_distribution<double>(-2, 2)(rng);
        const TubePoint img = tube_action(affine_to_tube(m), {x, xi});
        const auto [x2, xi2] = oracle::plane_transport(m.A, m.X, x, xi);
        EXPECT_LE((img.x - x2).norm(), 1e-10 * (1 + x2.norm()));
        EXPECT_NEAR(img.xi, xi2, 1e-10 * (1 + std::abs(xi2)));
    }
}

TEST(Tube, Homomorphism) {
    std::mt19937_64 rng(53);
    for (int i = 0; i < 100; ++i) {
        const AffineMap a{oracle::random_lorentz(rng), oracle::random_vec(rng)};
        const AffineMap b{oracle::random_lorentz(rng), oracle::random_vec(rng)};
        const Mat4 lhs = affine_to_tube(a * b).matrix();
        const Mat4 rhs = (affine_to_tube(a) * affine_to_tube(b)).matrix();
        EXPECT_LE((lhs - rhs).norm(), 1e-12 * lhs.norm());
    }
}

TEST(Tube, VerticallyAffine) {
    std::mt19937_64 rng(59);
    for (int i = 0; i < 50; ++i) {
        const TubeAut t = affine_to_tube({oracle::random_lorentz(rng), oracle::random_vec(rng)});
        const Vec2 x = oracle::random_in_disk(rng, 0.9);
        const double a = -1.0, b = 2.0, s = 0.3;
        const TubePoint pa = tube_action(t, {x, a}), pb = tube_action(t, {x, b});
        const TubePoint ps = tube_action(t, {x, (1 - s) * a + s * b});
        EXPECT_NEAR(ps.xi, (1 - s) * pa.xi + s * pb.xi, 1e-12 * (1 + std::abs(ps.xi)));
        EXPECT_LE((ps.x - pa.x).norm(), 1e-15);
    }
}

TEST(Tube, DifferenceIsSliceCovariant) {
    // For two tube images over the same x, the height difference moves by the
    // linear part only.
    std::mt19937_64 rng(61);
    for (int i = 0; i < 50; ++i) {
        const AffineMap m{oracle::random_lorentz(rng), oracle::random_vec(rng)};
        const TubeAut t = affine_to_tube(m);
        const Vec2 x = oracle::random_in_disk(rng, 0.9);
        const double x1 = 0.4, x2 = -1.3;
        const double diff = tube_action(t, {x, x1}).xi - tube_action(t, {x, x2}).xi;
        const TubePoint s = slice_action(t.B, {x, x1 - x2});
        EXPECT_NEAR(diff, s.xi, 1e-12);
    }
}

TEST(Slice, Examples) {
    const TubePoint p{{0.3, 0.1}, 0.0};
    const TubePoint q = slice_action(Mat3::Identity(), p);
    EXPECT_EQ(q.x, p.x);
    std::mt19937_64 rng(67);
    EXPECT_EQ(slice_action(oracle::random_lorentz(rng).inverse().transpose(), p).xi, 0.0);
    const TubePoint r = slice_action(rotation(0.9), {{0.3, 0.1}, 0.5});
    EXPECT_LE((r.x - rotation(0.9).topLeftCorner<2, 2>() * p.x).norm(), 1e-15);
    EXPECT_NEAR(r.xi, 0.5, 1e-15);
}

TEST(Tube, LeftChartRejected) {
    Mat3 flip = Mat3::Identity();
    flip(2, 2) = -1.0;
    flip(0, 0) = -1.0;
    EXPECT_THROW(tube_action({flip, Vec3::Zero()}, {{0, 0}, 0}), Error);
}

TEST(Cocycle, Evaluation) {
    auto gd = punctured_torus_preset();
    gd.tau = admissible_non_coboundary(gd.pres, gd.rho, 0, 1.0);
    EXPECT_EQ(cocycle_eval(gd, {}), Vec3::Zero());
    EXPECT_EQ(cocycle_eval(gd, gd.pres.parse("alpha1")), gd.tau[0]);
    EXPECT_LE(relator_defect(gd).norm(), 1e-10);
    EXPECT_THROW(gd.pres.parse("delta7"), Error);
    std::mt19937_64 rng(71);
    for (int i = 0; i < 50; ++i) {
        const Word a = random_word(rng, 3, 4), b = random_word(rng, 3, 5);
        const Vec3 lhs = cocycle_eval(gd, concat(a, b));
        const Vec3 rhs = cocycle_eval(gd, a) + gd.linear(a) * cocycle_eval(gd, b);
        EXPECT_LE((lhs - rhs).norm(), 1e-10 * (1 + lhs.norm()));
    }
}

TEST(Cocycle, WordFormatting) {
    const Presentation p{2, 1};
    const Word w = p.parse("alpha1 beta2^-1 gamma1");
    ASSERT_EQ(w.size(), 3u);
    EXPECT_EQ(w[1].gen, 3);
    EXPECT_TRUE(w[1].inv);
    EXPECT_EQ(p.parse(p.format(w)), w);
    EXPECT_EQ(inverse_word(inverse_word(w)), w);
}

TEST(Admissible, Examples) {
    EXPECT_TRUE(is_admissible(parabolic_a0(), Vec3::UnitX()));
    EXPECT_FALSE(is_admissible(parabolic_a0(), Vec3::UnitZ()));
    EXPECT_THROW(is_admissible(Mat3::Identity(), Vec3::UnitX()), Error);
}

TEST(Admissible, CoboundariesAreAdmissible) {
    std::mt19937_64 rng(73);
    for (int i = 0; i < 50; ++i) {
        const Mat3 p = oracle::random_sl3(rng);
        const Mat3 a = p * parabolic_a0() * p.inverse();
        const Vec3 x = oracle::random_vec(rng, 3.0);
        EXPECT_TRUE(is_admissible(a, (Mat3::Identity() - a) * x));
    }
}

TEST(Moduli, PresetRanks) {
    const auto pt = punctured_torus_preset();
    const auto r1 = moduli_rank(pt.pres, pt.rho);
    EXPECT_EQ(r1.dim_ker_L, 5);
    EXPECT_EQ(r1.rank_H1_admissible, 2);
    EXPECT_EQ(r1.expected, 2);
    const auto g2 = genus2_preset();
    EXPECT_LE(g2.relator_defect_linear(), 1e-8);
    const auto r2 = moduli_rank(g2.pres, g2.rho);
    EXPECT_EQ(r2.dim_ker_L, 9);
    EXPECT_EQ(r2.rank_H1_admissible, 6);
    const auto tt = torus_preset();
    EXPECT_EQ(moduli_rank(tt.pres, tt.rho).rank_H1_admissible, 0);
}

TEST(Moduli, RejectsNonParabolicPuncture) {
    auto gd = punctured_torus_preset();
    gd.rho[2] = Mat3::Identity();
    EXPECT_THROW(moduli_rank(gd.pres, gd.rho), Error);
}

TEST(Moduli, NonCoboundaryCocycleSatisfiesRelator) {
    for (auto gd : {punctured_torus_preset(), genus2_preset()}) {
        const int count = moduli_rank(gd.pres, gd.rho).rank_H1_admissible;
        for (int k = 0; k < count; ++k) {
            gd.tau = admissible_non_coboundary(gd.pres, gd.rho, k, 1.0);
            EXPECT_LE(relator_defect(gd).norm(), 1e-10);
            EXPECT_TRUE(is_admissible(gd));
        }
        EXPECT_THROW(admissible_non_coboundary(gd.pres, gd.rho, count, 1.0), Error);
    }
}

TEST(FixedPoints, SliceHyperbolicHasZeroHeights) {
    const auto gd = punctured_torus_preset();
    const auto omega = gd.cone.tube_domain();
    const auto r = fixed_points_on_tube_boundary(gd.tube(gd.pres.parse("alpha1")), omega);
    ASSERT_EQ(r.points.size(), 2u);
    for (const auto& p : r.points) EXPECT_NEAR(p.xi, 0.0, 1e-14);
}

TEST(FixedPoints, TranslateConjugateHeights) {
    const auto gd = punctured_torus_preset();
    const auto omega = gd.cone.tube_domain();
    const Vec3 x(0.3, -0.2, 0.5);
    const AffineMap shift{Mat3::Identity(), x};
    const AffineMap conj = shift * gd.affine(gd.pres.parse("beta1")) * shift.inverse();
    const auto r = fixed_points_on_tube_boundary(affine_to_tube(conj), omega);
    ASSERT_EQ(r.points.size(), 2u);
    for (const auto& p : r.points) EXPECT_NEAR(p.xi, x.head<2>().dot(p.p) - x.z(), 1e-12);
}

TEST(FixedPoints, ParabolicWithoutFixedPoint) {
    const auto omega = PlanarDomain::disk();
    const Vec2 p(-1.0, 0.0);
    const Mat3 a = disk_parabolic(p);
    // (-p, 1) is not Lorentz-orthogonal to the fixed null vector (p, 1), so
    // it lies off the null plane of a.
    const Vec3 bad = Vec3(-p.x(), -p.y(), 1.0);
    ASSERT_FALSE(is_admissible(a, bad));
    const auto r = fixed_points_on_tube_boundary(affine_to_tube({a, bad}), omega);
    EXPECT_TRUE(r.points.empty());
    EXPECT_TRUE(r.parabolic_unfixed);
    const auto ok = fixed_points_on_tube_boundary(affine_to_tube({a, Vec3::Zero()}), omega);
    ASSERT_EQ(ok.points.size(), 1u);
}

TEST(FixedPoints, PointsAreFixed) {
    auto gd = punctured_torus_preset();
    gd.tau = admissible_non_coboundary(gd.pres, gd.rho, 1, 0.5);
    const auto omega = gd.cone.tube_domain();
    for (const char* w : {"alpha1", "beta1", "alpha1 beta1", "gamma1", "alpha1 gamma1 alpha1^-1"}) {
        const TubeAut t = gd.tube(gd.pres.parse(w));
        const auto r = fixed_points_on_tube_boundary(t, omega);
        ASSERT_FALSE(r.points.empty()) << w;
        for (const auto& p : r.points) {
            const TubePoint q = tube_action(t, {p.p, p.xi, Locus::Boundary});
            EXPECT_LE((q.x - p.p).norm(), 1e-8) << w;
            EXPECT_NEAR(q.xi, p.xi, 1e-8) << w;
        }
    }
}

TEST(ParabolicFunction, Examples) {
    const Vec2 p(-1.0, 0.0);
    const auto zero = parabolic_invariant_function(0.0, p);
    EXPECT_EQ(zero({0.3, 0.2}), 0.0);
    EXPECT_NEAR(parabolic_invariant_function(1.0, p)({0, 0}), -0.5, 1e-15);
    EXPECT_NEAR(parabolic_invariant_function(2.0, p)(p), -2.0, 1e-15);
    EXPECT_THROW(parabolic_invariant_function(-1.0, p), Error);
}

TEST(Presets, RelatorsHold) {
    for (const auto& gd : {punctured_torus_preset(), genus2_preset(), torus_preset()})
        EXPECT_LE(gd.relator_defect_linear(), 1e-8);
}

#pragma once

#include "cagc/cone_tube.hpp"

#include <Eigen/Eigenvalues>

#include <complex>
#include <map>
#include <optional>
#include <sstream>

namespace cagc {

// ---------------------------------------------------------------------------
// Classification of SL(3,R) elements

enum class SL3Class { Identity, Parabolic, Hyperbolic, QuasiHyperbolic, EllipticLike };

inline const char* to_string(SL3Class c) {
    switch (c) {
        case SL3Class::Identity: return "identity";
        case SL3Class::Parabolic: return "parabolic";
        case SL3Class::Hyperbolic: return "hyperbolic";
        case SL3Class::QuasiHyperbolic: return "quasi_hyperbolic";
        case SL3Class::EllipticLike: return "elliptic_like";
    }
    return "?";
}

struct Classification {
    SL3Class kind = SL3Class::Identity;
    bool confident = true;  // no decision fell within 100x of its tolerance
    std::array<std::complex<double>, 3> eigenvalues{};
    int rank_minus_identity = 0;
};

namespace detail {

// Rank decision against a relative singular value cut, also reporting
// whether some singular value sits close to the cut.
inline int rank_with_margin(const Mat3& m, double cut, bool& marginal) {
    Eigen::JacobiSVD<Mat3> svd(m);
    const Vec3 s = svd.singularValues();
    int r = 0;
    for (int i = 0; i < 3; ++i) {
        if (s(i) > cut) ++r;
        if (s(i) > cut / 100.0 && s(i) < cut * 100.0) marginal = true;
    }
    return r;
}

}  // namespace detail

// Unipotence is decided from the characteristic polynomial (trace and second
// invariant both equal 3), which stays well conditioned where the eigenvalues
// of a Jordan block do not.
inline Classification classify_sl3(const Mat3& a, double rel = 1e-7) {
    const double det = a.determinant();
    const double norm = std::max(1.0, a.norm());
    if (std::abs(det - 1.0) > 1e-6 * norm * norm * norm)
        throw Error("not_sl3", "determinant is not 1", "det " + std::to_string(det));
    Classification c;
    Eigen::EigenSolver<Mat3> es(a, false);
    for (int i = 0; i < 3; ++i) c.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
    std::sort(c.eigenvalues.begin(), c.eigenvalues.end(),
              [](const auto& p, const auto& q) { return p.real() < q.real(); });
    const double tr = a.trace();
    const double s2 = 0.5 * (tr * tr - (a * a).trace());
    const double utol = rel * norm * norm;
    bool marginal = false;
    const double dev = std::max(std::abs(tr - 3.0), std::abs(s2 - 3.0));
    if (dev <= utol) {
        if (dev > utol / 100.0) marginal = true;
        c.rank_minus_identity = detail::rank_with_margin(a - Mat3::Identity(), rel * norm, marginal);
        c.kind = c.rank_minus_identity == 0   ? SL3Class::Identity
                 : c.rank_minus_identity == 2 ? SL3Class::Parabolic
                                              : SL3Class::QuasiHyperbolic;
        c.confident = !marginal;
        return c;
    }
    if (dev <= 100.0 * utol) marginal = true;
    c.rank_minus_identity = detail::rank_with_margin(a - Mat3::Identity(), rel * norm, marginal);
    double imag = 0.0;
    for (const auto& l : c.eigenvalues) imag = std::max(imag, std::abs(l.imag()));
    const double etol = std::sqrt(rel) * norm;
    if (imag > etol) {
        c.kind = SL3Class::EllipticLike;
        c.confident = imag > 100.0 * etol && !marginal;
        return c;
    }
    std::array<double, 3> l{c.eigenvalues[0].real(), c.eigenvalues[1].real(), c.eigenvalues[2].real()};
    bool diagonalizable = true;
    for (int i = 0; i < 2; ++i) {
        const double gap = std::abs(l[static_cast<std::size_t>(i + 1)] - l[static_cast<std::size_t>(i)]);
        if (gap > etol * std::max(1.0, std::abs(l[static_cast<std::size_t>(i)]))) continue;
        // Repeated eigenvalue: diagonalizable iff the eigenspace is 2-dimensional.
        const double lam = 0.5 * (l[static_cast<std::size_t>(i)] + l[static_cast<std::size_t>(i + 1)]);
        const int r = detail::rank_with_margin(a - lam * Mat3::Identity(), std::sqrt(rel) * norm, marginal);
        if (r > 1) diagonalizable = false;
    }
    const bool positive = l[0] > 0.0;
    c.kind = diagonalizable && positive ? SL3Class::Hyperbolic : SL3Class::QuasiHyperbolic;
    c.confident = !marginal;
    return c;
}

// ---------------------------------------------------------------------------
// Affine maps and tube automorphisms

// Y -> A Y + X on the affine space containing the cone.
struct AffineMap {
    Mat3 A = Mat3::Identity();
    Vec3 X = Vec3::Zero();

    AffineMap operator*(const AffineMap& o) const { return {A * o.A, A * o.X + X}; }
    AffineMap inverse() const {
        const Mat3 ai = A.inverse();
        return {ai, -ai * X};
    }
    Vec3 apply(const Vec3& y) const { return A * y + X; }

    void validate() const {
        if (!A.allFinite() || !X.allFinite()) throw Error("invalid_affine_map", "non-finite entries");
        if (std::abs(A.determinant() - 1.0) > 1e-10 * std::max(1.0, std::pow(A.norm(), 3.0)))
            throw Error("invalid_affine_map", "linear part must have determinant 1");
    }
};

// 4x4 block matrix [B 0; Y^T 1] acting on the tube domain.
struct TubeAut {
    Mat3 B = Mat3::Identity();
    Vec3 Y = Vec3::Zero();

    Mat4 matrix() const {
        Mat4 m = Mat4::Zero();
        m.topLeftCorner<3, 3>() = B;
        m.block<1, 3>(3, 0) = Y.transpose();
        m(3, 3) = 1.0;
        return m;
    }

    TubeAut operator*(const TubeAut& o) const { return {B * o.B, o.B.transpose() * Y + o.Y}; }
};

inline TubeAut affine_to_tube(const AffineMap& m) {
    if (std::abs(m.A.determinant()) < 1e-300) throw Error("singular_matrix", "linear part is singular");
    const Mat3 ai = m.A.inverse();
    return {ai.transpose(), ai * m.X};
}

inline AffineMap tube_to_affine(const TubeAut& t) {
    if (std::abs(t.B.determinant()) < 1e-300) throw Error("singular_matrix", "linear part is singular");
    const Mat3 a = t.B.transpose().inverse();
    return {a, a * t.Y};
}

namespace detail {

inline double chart_denominator(const Mat3& b, const Vec2& x) {
    const double d = -(b * Vec3(x.x(), x.y(), -1.0))(2);
    if (!(d > 0.0)) throw Error("left_chart", "point left the chart", "denominator " + std::to_string(d));
    return d;
}

}  // namespace detail

// (x, xi) -> (v_12 / d, (xi + Y.(x,-1)) / d) with v = B (x,-1), d = -v_3.
inline TubePoint tube_action(const TubeAut& t, const TubePoint& p) {
    const Vec3 h(p.x.x(), p.x.y(), -1.0);
    const Vec3 v = t.B * h;
    const double d = detail::chart_denominator(t.B, p.x);
    return {v.head<2>() / d, (p.xi + t.Y.dot(h)) / d, p.locus};
}

// Linear part only: preserves the zero slice and the ratio structure.
inline TubePoint slice_action(const Mat3& b, const TubePoint& p) {
    const Vec3 v = b * Vec3(p.x.x(), p.x.y(), -1.0);
    const double d = detail::chart_denominator(b, p.x);
    return {v.head<2>() / d, p.xi / d, p.locus};
}

// ---------------------------------------------------------------------------
// Presentations, words, cocycles

struct Letter {
    int gen = 0;
    bool inv = false;
    bool operator==(const Letter&) const = default;
};

using Word = std::vector<Letter>;

// Surface group <alpha_i, beta_i, gamma_j | [alpha_1,beta_1]...[alpha_g,beta_g] gamma_1...gamma_n>.
// Generator order: alpha_1, beta_1, ..., alpha_g, beta_g, gamma_1, ..., gamma_n.
struct Presentation {
    int g = 1;
    int n = 1;

    int generators() const { return 2 * g + n; }
    bool torus_case() const { return g == 1 && n == 0; }

    void validate() const {
        if (g < 0 || n < 0) throw Error("invalid_presentation", "genus and puncture count must be nonnegative");
        if (2 - 2 * g - n >= 0 && !torus_case())
            throw Error("invalid_presentation", "Euler characteristic must be negative (or the torus case g=1, n=0)");
    }

    std::string name(int gen) const {
        if (gen < 2 * g) return std::string(gen % 2 == 0 ? "alpha" : "beta") + std::to_string(gen / 2 + 1);
        return "gamma" + std::to_string(gen - 2 * g + 1);
    }

    int index(const std::string& s) const {
        for (int i = 0; i < generators(); ++i)
            if (name(i) == s) return i;
        return -1;
    }

    Word relator() const {
        Word w;
        for (int i = 0; i < g; ++i) {
            const int a = 2 * i, b = 2 * i + 1;
            w.insert(w.end(), {{a, false}, {b, false}, {a, true}, {b, true}});
        }
        for (int j = 0; j < n; ++j) w.push_back({2 * g + j, false});
        return w;
    }

    // Free generating set used for orbit enumeration: with punctures the last
    // gamma is redundant.
    std::vector<int> free_generators() const {
        std::vector<int> v;
        const int count = n > 0 ? generators() - 1 : generators();
        for (int i = 0; i < count; ++i) v.push_back(i);
        return v;
    }

    // Words are whitespace-separated generator names, each optionally
    // followed by ^-1.
    Word parse(const std::string& text) const {
        std::istringstream is(text);
        std::string tok;
        Word w;
        while (is >> tok) {
            bool inv = false;
            if (tok.size() > 3 && tok.compare(tok.size() - 3, 3, "^-1") == 0) {
                inv = true;
                tok.resize(tok.size() - 3);
            }
            const int i = index(tok);
            if (i < 0) throw Error("unknown_generator", "word uses an undeclared generator", tok);
            w.push_back({i, inv});
        }
        return w;
    }

    std::string format(const Word& w) const {
        std::string s;
        for (const auto& l : w) {
            if (!s.empty()) s += ' ';
            s += name(l.gen);
            if (l.inv) s += "^-1";
        }
        return s;
    }
};

inline Word inverse_word(const Word& w) {
    Word r(w.rbegin(), w.rend());
    for (auto& l : r) l.inv = !l.inv;
    return r;
}

inline Word concat(const Word& a, const Word& b) {
    Word r = a;
    r.insert(r.end(), b.begin(), b.end());
    return r;
}

// Representation with a cocycle, i.e. the affine action of each generator.
struct GroupData {
    Presentation pres;
    std::vector<Mat3> rho;
    std::vector<Vec3> tau;
    ProperCone cone = ProperCone::light_cone();

    AffineMap generator(const Letter& l) const {
        const AffineMap m{rho[static_cast<std::size_t>(l.gen)], tau[static_cast<std::size_t>(l.gen)]};
        return l.inv ? m.inverse() : m;
    }

    AffineMap affine(const Word& w) const {
        AffineMap m;
        for (const auto& l : w) m = m * generator(l);
        return m;
    }

    Mat3 linear(const Word& w) const { return affine(w).A; }
    TubeAut tube(const Word& w) const { return affine_to_tube(affine(w)); }

    void check_shape() const {
        pres.validate();
        const auto k = static_cast<std::size_t>(pres.generators());
        if (rho.size() != k || tau.size() != k) throw Error("invalid_group_data", "one matrix and one vector per generator required");
    }

    double relator_defect_linear() const { return (linear(pres.relator()) - Mat3::Identity()).norm(); }
};

// tau(w) via the cocycle rule tau(uv) = tau(u) + rho(u) tau(v).
inline Vec3 cocycle_eval(const GroupData& gd, const Word& w) { return gd.affine(w).X; }

inline Vec3 relator_defect(const GroupData& gd) { return cocycle_eval(gd, gd.pres.relator()); }

// Coboundary tau_X(g) = (I - rho(g)) X on every generator.
inline std::vector<Vec3> coboundary(const std::vector<Mat3>& rho, const Vec3& x) {
    std::vector<Vec3> t;
    t.reserve(rho.size());
    for (const auto& m : rho) t.push_back((Mat3::Identity() - m) * x);
    return t;
}

// ---------------------------------------------------------------------------
// Admissibility and moduli rank

// tau lies in the null plane preserved by the parabolic a, which is the
// kernel of (a - I)^2.
inline bool is_admissible(const Mat3& a, const Vec3& tau, double tol = 1e-8) {
    const Classification c = classify_sl3(a);
    if (c.kind != SL3Class::Parabolic)
        throw Error("admissibility_undefined", "linear part is not parabolic", to_string(c.kind));
    const Mat3 n = a - Mat3::Identity();
    const double scale = std::max(1.0, (n * n).norm());
    return (n * n * tau).norm() <= tol * scale * (1.0 + tau.norm());
}

inline bool is_admissible(const GroupData& gd, const Word& w, double tol = 1e-8) {
    const AffineMap m = gd.affine(w);
    return is_admissible(m.A, m.X, tol);
}

// Admissible at every puncture generator.
inline bool is_admissible(const GroupData& gd, double tol = 1e-8) {
    for (int j = 0; j < gd.pres.n; ++j)
        if (!is_admissible(gd, Word{{2 * gd.pres.g + j, false}}, tol)) return false;
    return true;
}

struct ModuliRank {
    int dim_ker_L = 0;
    int coboundary_rank = 0;
    int rank_H1_admissible = -1;  // -1 when the coboundary map is degenerate
    int expected = 0;             // 6g - 6 + 2n
    Eigen::MatrixXd L;            // 3 x (6g + 2n)
    std::vector<Eigen::MatrixXd> puncture_bases;  // 3 x 2 basis of V_j
};

namespace detail {

inline Eigen::MatrixXd null_plane_basis(const Mat3& a) {
    const Mat3 n = a - Mat3::Identity();
    const Eigen::MatrixXd k = kernel_basis(n * n, 1e-8);
    if (k.cols() != 2) throw Error("not_parabolic", "puncture generator does not have a 2-dimensional null plane");
    return k;
}

// Column offsets of each generator's block in the unknown vector.
inline std::vector<int> block_offsets(const Presentation& p) {
    std::vector<int> off;
    int c = 0;
    for (int i = 0; i < p.generators(); ++i) {
        off.push_back(c);
        c += i < 2 * p.g ? 3 : 2;
    }
    off.push_back(c);
    return off;
}

}  // namespace detail

// Linearized relator L_rho on (R^3)^{2g} + V_1 + ... + V_n, its kernel
// dimension, and the admissible H^1 rank after removing coboundaries.
inline ModuliRank moduli_rank(const Presentation& pres, const std::vector<Mat3>& rho) {
    pres.validate();
    if (static_cast<int>(rho.size()) != pres.generators())
        throw Error("invalid_group_data", "one matrix per generator required");
    ModuliRank r;
    for (int j = 0; j < pres.n; ++j) {
        const Mat3& a = rho[static_cast<std::size_t>(2 * pres.g + j)];
        if (classify_sl3(a).kind != SL3Class::Parabolic)
            throw Error("not_parabolic", "puncture generator is not parabolic", pres.name(2 * pres.g + j));
        r.puncture_bases.push_back(detail::null_plane_basis(a));
    }
    const auto off = detail::block_offsets(pres);
    const int dim = off.back();
    r.L = Eigen::MatrixXd::Zero(3, dim);
    Mat3 prefix = Mat3::Identity();
    for (const auto& l : pres.relator()) {
        const Mat3& m = rho[static_cast<std::size_t>(l.gen)];
        const Mat3 coef = l.inv ? Mat3(-prefix * m.inverse()) : prefix;
        const int o = off[static_cast<std::size_t>(l.gen)];
        if (l.gen < 2 * pres.g) r.L.block(0, o, 3, 3) += coef;
        else r.L.block(0, o, 3, 2) += coef * r.puncture_bases[static_cast<std::size_t>(l.gen - 2 * pres.g)];
        prefix = l.inv ? Mat3(prefix * m.inverse()) : Mat3(prefix * m);
    }
    r.dim_ker_L = dim - numerical_rank(r.L);
    Eigen::MatrixXd cob = Eigen::MatrixXd::Zero(dim, 3);
    for (int i = 0; i < pres.generators(); ++i) {
        const Mat3 d = Mat3::Identity() - rho[static_cast<std::size_t>(i)];
        const int o = off[static_cast<std::size_t>(i)];
        if (i < 2 * pres.g) cob.block(o, 0, 3, 3) = d;
        else cob.block(o, 0, 2, 3) = r.puncture_bases[static_cast<std::size_t>(i - 2 * pres.g)].transpose() * d;
    }
    r.coboundary_rank = numerical_rank(cob);
    if (r.coboundary_rank == 3) r.rank_H1_admissible = r.dim_ker_L - 3;
    r.expected = 6 * pres.g - 6 + 2 * pres.n;
    return r;
}

// Admissible cocycle from coordinates on ker L_rho orthogonal to the
// coboundaries; index selects the basis vector. The result is scaled to
// unit norm over the generator values and then by `scale`.
inline std::vector<Vec3> admissible_non_coboundary(const Presentation& pres, const std::vector<Mat3>& rho,
                                                   int index = 0, double scale = 1.0) {
    const ModuliRank mr = moduli_rank(pres, rho);
    const auto off = detail::block_offsets(pres);
    const int dim = off.back();
    const Eigen::MatrixXd ker = kernel_basis(mr.L, 1e-8);
    // Coboundary directions expressed in the same coordinates.
    Eigen::MatrixXd cob = Eigen::MatrixXd::Zero(dim, 3);
    for (int i = 0; i < pres.generators(); ++i) {
        const Mat3 d = Mat3::Identity() - rho[static_cast<std::size_t>(i)];
        const int o = off[static_cast<std::size_t>(i)];
        if (i < 2 * pres.g) cob.block(o, 0, 3, 3) = d;
        else cob.block(o, 0, 2, 3) = mr.puncture_bases[static_cast<std::size_t>(i - 2 * pres.g)].transpose() * d;
    }
    const Eigen::MatrixXd q = Eigen::JacobiSVD<Eigen::MatrixXd>(cob, Eigen::ComputeThinU).matrixU();
    Eigen::MatrixXd rest = ker - q * (q.transpose() * ker);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(rest, Eigen::ComputeThinU);
    const int count = numerical_rank(rest);
    if (index < 0 || index >= count) throw Error("no_cocycle", "no admissible non-coboundary cocycle with that index");
    Eigen::VectorXd v = svd.matrixU().col(index);
    std::vector<Vec3> tau(static_cast<std::size_t>(pres.generators()));
    for (int i = 0; i < pres.generators(); ++i) {
        const int o = off[static_cast<std::size_t>(i)];
        if (i < 2 * pres.g) tau[static_cast<std::size_t>(i)] = v.segment<3>(o);
        else tau[static_cast<std::size_t>(i)] = mr.puncture_bases[static_cast<std::size_t>(i - 2 * pres.g)] * v.segment<2>(o);
    }
    double norm = 0.0;
    for (const auto& t : tau) norm += t.squaredNorm();
    norm = std::sqrt(norm);
    for (auto& t : tau) t *= scale / norm;
    return tau;
}

// ---------------------------------------------------------------------------
// Fixed points on the tube boundary

struct BoundaryFixedPoint {
    Vec2 p;
    double xi = 0.0;
    double lambda = 1.0;
};

struct FixedPointResult {
    std::vector<BoundaryFixedPoint> points;
    bool parabolic_unfixed = false;  // lambda = 1 line has no fixed point
};

namespace detail {

// Height fixed by a parabolic (A, X) at its boundary point p: X = (I - A) X0
// has a solution for admissible X, and the zero-slice translate by X0 passes
// through the fixed line at X0_12 . p - X0_3 (independent of the choice of X0).
inline double parabolic_height(const AffineMap& m, const Vec2& p) {
    const Mat3 d = Mat3::Identity() - m.A;
    const Vec3 x0 = d.jacobiSvd(Eigen::ComputeFullU | Eigen::ComputeFullV).solve(m.X);
    return x0.head<2>().dot(p) - x0.z();
}

}  // namespace detail

// Fixed points of a tube automorphism on boundary(Omega) x R. With
// `attracting_only` only the eigenvector of the largest eigenvalue is used,
// which is the best conditioned one.
inline FixedPointResult fixed_points_on_tube_boundary(const TubeAut& t, const PlanarDomain& omega,
                                                      bool attracting_only = false, double snap = 1e-7) {
    FixedPointResult out;
    const Classification cls = classify_sl3(t.B);
    if (cls.kind == SL3Class::Parabolic) {
        // For a single Jordan block (B - I)^2 has rank one and its image is
        // the fixed line; this stays accurate for long conjugated words where
        // the SVD kernel of B - I does not.
        const Mat3 n = t.B - Mat3::Identity();
        const Mat3 n2 = n * n;
        Eigen::Index col = 0;
        n2.colwise().norm().maxCoeff(&col);
        const Vec3 v = n2.col(col);
        if (!(v.norm() > 0.0)) return out;
        if (std::abs(v.z()) < 1e-12) return out;
        const Vec3 u = v / -v.z();
        const Vec2 p = u.head<2>();
        if (std::abs(omega.gauge(p) - 1.0) > snap) return out;
        if (std::abs(t.Y.dot(u)) > 1e-8 * (1.0 + t.Y.norm())) {
            out.parabolic_unfixed = true;
            return out;
        }
        out.points.push_back({p, detail::parabolic_height(tube_to_affine(t), p), 1.0});
        return out;
    }
    Eigen::EigenSolver<Mat3> es(t.B);
    int best = -1;
    for (int i = 0; i < 3; ++i) {
        const auto lam = es.eigenvalues()(i);
        if (std::abs(lam.imag()) > 1e-9 * std::abs(lam)) continue;
        if (attracting_only && (best < 0 || lam.real() > es.eigenvalues()(best).real())) best = i;
    }
    for (int i = 0; i < 3; ++i) {
        if (attracting_only && i != best) continue;
        const auto lam = es.eigenvalues()(i);
        if (std::abs(lam.imag()) > 1e-9 * std::abs(lam)) continue;
        const double l = lam.real();
        if (std::abs(l - 1.0) < 1e-9) continue;
        const Vec3 v = es.eigenvectors().col(i).real();
        if (std::abs(v.z()) < 1e-14 * v.norm()) continue;
        const Vec3 u = v / -v.z();
        const Vec2 p = u.head<2>();
        if (std::abs(omega.gauge(p) - 1.0) > snap) continue;
        out.points.push_back({p, t.Y.dot(u) / (l - 1.0), l});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Explicit invariant function of a parabolic fixing p on the disk

class ParabolicInvariantFunction {
public:
    ParabolicInvariantFunction(double mu, const Vec2& p) : mu_(mu) {
        if (!(mu >= 0.0)) throw Error("invalid_mu", "mu must be nonnegative");
        if (std::abs(p.norm() - 1.0) > 1e-9) throw Error("not_boundary_point", "p must lie on the unit circle");
        // Rotation taking p to (-1, 0).
        const double th = std::numbers::pi - std::atan2(p.y(), p.x());
        rot_ << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
        p_ = p;
    }

    double operator()(const Vec2& x) const {
        if ((x - p_).norm() < 1e-14) return -mu_;
        const Vec2 r = rot_ * x;
        const double s = r.x() + 1.0;
        return mu_ * (s * s + r.y() * r.y()) / (2.0 * s) - mu_;
    }

private:
    double mu_;
    Vec2 p_;
    Eigen::Matrix2d rot_;
};

inline ParabolicInvariantFunction parabolic_invariant_function(double mu, const Vec2& p) { return {mu, p}; }

// ---------------------------------------------------------------------------
// Presets

namespace detail {

// Adjoint action of SL(2,R) on sl2 in the basis diag(1,-1), [[0,1],[1,0]],
// [[0,1],[-1,0]]; the invariant form is a^2 + u^2 - v^2, so the image lies in
// SO(2,1) and preserves the light cone over the unit disk.
inline Mat3 adjoint(const Eigen::Matrix2d& g) {
    std::array<Eigen::Matrix2d, 3> e;
    e[0] << 1, 0, 0, -1;
    e[1] << 0, 1, 1, 0;
    e[2] << 0, 1, -1, 0;
    const Eigen::Matrix2d gi = g.inverse();
    Mat3 m;
    for (int j = 0; j < 3; ++j) {
        const Eigen::Matrix2d y = g * e[static_cast<std::size_t>(j)] * gi;
        // y = a e0 + u e1 + v e2 with y = [[a, u+v],[u-v, -a]].
        m(0, j) = y(0, 0);
        m(1, j) = 0.5 * (y(0, 1) + y(1, 0));
        m(2, j) = 0.5 * (y(0, 1) - y(1, 0));
    }
    return m;
}

inline Eigen::Matrix2d commutator(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
    return a * b * a.inverse() * b.inverse();
}

}  // namespace detail

inline Mat3 parabolic_a0() {
    Mat3 a;
    a << 1, 1, 0, 0, 1, 1, 0, 0, 1;
    return a;
}

// Once-punctured torus: alpha, beta from [[1,1],[1,2]] and [[1,-1],[-1,2]]
// (commutator trace -2), gamma = [alpha, beta]^-1.
inline GroupData punctured_torus_preset() {
    Eigen::Matrix2d a, b;
    a << 1, 1, 1, 2;
    b << 1, -1, -1, 2;
    GroupData gd;
    gd.pres = {1, 1};
    gd.rho = {detail::adjoint(a), detail::adjoint(b), detail::adjoint(detail::commutator(a, b).inverse())};
    gd.tau.assign(3, Vec3::Zero());
    return gd;
}

// Closed genus 2 as the double of a one-holed torus with traces (3, 4, 4):
// alpha2 = M beta1 M^-1, beta2 = M alpha1 M^-1 with M the reflection in the
// axis of K = [alpha1, beta1], so [alpha2, beta2] = K^-1.
inline GroupData genus2_preset() {
    const double x = 3.0, y = 4.0, z = 4.0;
    const double lam = 0.5 * (x + std::sqrt(x * x - 4.0));
    // alpha1 = diag(lam, 1/lam); beta1 = [[p, q],[q, s]] with p + s = y and
    // lam p + s / lam = z.
    const double p = (z - y / lam) / (lam - 1.0 / lam);
    const double s = y - p;
    const double q = std::sqrt(p * s - 1.0);
    Eigen::Matrix2d a1, b1;
    a1 << lam, 0, 0, 1.0 / lam;
    b1 << p, q, q, s;
    const Eigen::Matrix2d k = detail::commutator(a1, b1);
    // Reflection with the eigenvectors of K: M^2 = I, det M = -1.
    const double half = 0.5 * k.trace();
    const Eigen::Matrix2d m = (k - half * Eigen::Matrix2d::Identity()) / std::sqrt(half * half - 1.0);
    const Eigen::Matrix2d mi = m.inverse();
    GroupData gd;
    gd.pres = {2, 0};
    gd.rho = {detail::adjoint(a1), detail::adjoint(b1), detail::adjoint(m * b1 * mi), detail::adjoint(m * a1 * mi)};
    gd.tau.assign(4, Vec3::Zero());
    return gd;
}

// Z^2 acting diagonally on the cone over a triangle (g = 1, n = 0).
inline GroupData torus_preset() {
    Mat3 pm;
    const double r = std::sqrt(3.0) / 2.0;
    pm << 1.0, -0.5, -0.5, 0.0, r, -r, 1.0, 1.0, 1.0;
    const Vec3 da(2.0, 0.8, 1.0 / 1.6), db(0.7, 1.5, 1.0 / 1.05);
    GroupData gd;
    gd.pres = {1, 0};
    gd.rho = {pm * da.asDiagonal() * pm.inverse(), pm * db.asDiagonal() * pm.inverse()};
    gd.tau.assign(2, Vec3::Zero());
    gd.cone.section = PlanarDomain::polygon({Vec2(1.0, 0.0), Vec2(-0.5, r), Vec2(-0.5, -r)});
    return gd;
}

// Parabolic element of SO(2,1) fixing the boundary point p of the disk, as
// a linear map of the cone side; N v = n <m,v> - m <n,v> with the Lorentz
// form <a,b> = a1 b1 + a2 b2 - a3 b3, n = (p, 1) null and m orthogonal.
inline Mat3 disk_parabolic(const Vec2& p, double s = 1.0) {
    const Vec3 n(p.x(), p.y(), 1.0);
    const Vec3 m(-p.y(), p.x(), 0.0);
    const Eigen::DiagonalMatrix<double, 3> j(1.0, 1.0, -1.0);
    const Mat3 nn = s * (n * (j * m).transpose() - m * (j * n).transpose());
    return Mat3::Identity() + nn + 0.5 * nn * nn;
}

}  // namespace cagc

#pragma once

// Independent reference computations used by the tests. Nothing here calls
// into the library's solvers; closed forms and brute-force constructions only.

#include "cagc/core.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace oracle {

using cagc::Mat3;
using cagc::Vec2;
using cagc::Vec3;

// Cheng-Yau solution on the ellipse x1^2/a^2 + x2^2/b^2 < 1.
inline double cheng_yau_ellipse(double a, double b, const Vec2& x) {
    const double q = 1.0 - x.x() * x.x() / (a * a) - x.y() * x.y() / (b * b);
    return -std::cbrt(a * b) * std::sqrt(std::max(0.0, q));
}

inline double cheng_yau_disk(const Vec2& x) { return cheng_yau_ellipse(1.0, 1.0, x); }

// u_t on the disk with zero boundary data.
inline double cagc_disk(double t, const Vec2& x) { return std::exp(-t / 3.0) * cheng_yau_disk(x); }

// Envelope of the single-cusp data at p = (-1, 0) on the disk.
inline double parabolic_envelope(double mu, const Vec2& x) {
    const double s = x.x() + 1.0;
    return mu * (s * s + x.y() * x.y()) / (2.0 * s) - mu;
}

// Transports the plane graph(y -> x.y - xi) through Y -> A Y + X by pushing
// three of its points and refitting; returns (x', xi').
inline std::pair<Vec2, double> plane_transport(const Mat3& a, const Vec3& shift, const Vec2& x, double xi) {
    const Vec2 ys[3] = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
    Mat3 lhs;
    Vec3 rhs;
    for (int i = 0; i < 3; ++i) {
        const Vec3 p(ys[i].x(), ys[i].y(), x.dot(ys[i]) - xi);
        const Vec3 q = a * p + shift;
        lhs.row(i) << q.x(), q.y(), 1.0;
        rhs(i) = q.z();
    }
    const Vec3 sol = lhs.fullPivLu().solve(rhs);
    return {Vec2(sol(0), sol(1)), -sol(2)};
}

// Random element of SO(2,1) (identity component) as a boost times rotations.
inline Mat3 random_lorentz(std::mt19937_64& rng, double max_rapidity = 1.5) {
    std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi), rap(-max_rapidity, max_rapidity);
    auto rot = [](double th) {
        Mat3 r = Mat3::Identity();
        r(0, 0) = std::cos(th);
        r(0, 1) = -std::sin(th);
        r(1, 0) = std::sin(th);
        r(1, 1) = std::cos(th);
        return r;
    };
    const double s = rap(rng);
    Mat3 boost = Mat3::Identity();
    boost(0, 0) = std::cosh(s);
    boost(0, 2) = std::sinh(s);
    boost(2, 0) = std::sinh(s);
    boost(2, 2) = std::cosh(s);
    return rot(ang(rng)) * boost * rot(ang(rng));
}

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng)};
}

// Random matrix of determinant 1 with entries of moderate size.
inline Mat3 random_sl3(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Mat3 m;
    do {
        for (int i = 0; i < 9; ++i) m.data()[i] = u(rng);
        m += 1.5 * Mat3::Identity();
    } while (std::abs(m.determinant()) < 0.2);
    const double d = m.determinant();
    if (d < 0) m.col(0) *= -1.0;
    return m / std::cbrt(std::abs(d));
}

// Random point of the open unit disk with |x| <= rmax.
inline Vec2 random_in_disk(std::mt19937_64& rng, double rmax = 1.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0), ang(-std::numbers::pi, std::numbers::pi);
    const double r = rmax * std::sqrt(u(rng));
    const double a = ang(rng);
    return {r * std::cos(a), r * std::sin(a)};
}

}  // namespace oracle

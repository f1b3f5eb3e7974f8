#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cagc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

// Marker for +infinity in extended-real data. Excluded from every sup and hull.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool is_finite_value(double v) { return std::isfinite(v); }

// Every failure carries a stable machine-readable code plus free-form context.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, std::string context = {})
        : std::runtime_error(message), code_(std::move(code)), context_(std::move(context)) {}

    const std::string& code() const { return code_; }
    const std::string& context() const { return context_; }

private:
    std::string code_;
    std::string context_;
};

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Numerical rank with the relative singular value cut sigma > rel * sigma_max.
inline int numerical_rank(const Eigen::MatrixXd& m, double rel = 1e-8) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) > rel * s(0)) ++r;
    return r;
}

// Orthonormal basis of the numerical kernel, one column per kernel direction.
inline Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& m, double rel = 1e-8) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const int n = static_cast<int>(m.cols());
    int r = 0;
    const double top = s.size() ? s(0) : 0.0;
    for (int i = 0; i < s.size(); ++i)
        if (top > 0.0 && s(i) > rel * top) ++r;
    return svd.matrixV().rightCols(n - r);
}

}  // namespace cagc

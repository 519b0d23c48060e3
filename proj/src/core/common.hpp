#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>

namespace hmfem {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

enum class ErrorKind { Argument, Config, Mesh, Numerical, Io };

/// Single exception type for the core; the kind drives C status codes and
/// CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Symmetric 2x2 tensor stored by its three independent components.
struct Sym2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  static Sym2 from_matrix(const Mat2& m) { return {m(0, 0), 0.5 * (m(0, 1) + m(1, 0)), m(1, 1)}; }
  static Sym2 identity() { return {1.0, 0.0, 1.0}; }

  Mat2 matrix() const {
    Mat2 m;
    m << xx, xy, xy, yy;
    return m;
  }
  double trace() const { return xx + yy; }
  /// Frobenius inner product.
  double dot(const Sym2& o) const { return xx * o.xx + 2.0 * xy * o.xy + yy * o.yy; }
  Vec2 apply(const Vec2& v) const { return {xx * v.x() + xy * v.y(), xy * v.x() + yy * v.y()}; }

  Sym2 operator+(const Sym2& o) const { return {xx + o.xx, xy + o.xy, yy + o.yy}; }
  Sym2 operator-(const Sym2& o) const { return {xx - o.xx, xy - o.xy, yy - o.yy}; }
  Sym2 operator*(double s) const { return {xx * s, xy * s, yy * s}; }
};

inline Sym2 operator*(double s, const Sym2& t) { return t * s; }

}  // namespace hmfem

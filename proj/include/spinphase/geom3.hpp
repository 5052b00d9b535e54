#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>

#include "spinphase/errors.hpp"

namespace spinphase {

namespace tol {
/// Orthogonality residual accepted when validating a rotation matrix.
inline constexpr double orth = 1e-9;
/// Skew-symmetry residual accepted by vee().
inline constexpr double skew = 1e-10;
/// Residual accepted for linear-solve identities (I * I^-1 = Id).
inline constexpr double lin = 1e-10;
/// Smallest eigenvalue below which a particle inertia tensor counts as
/// collinear.
inline constexpr double spd = 1e-10;
/// Rotation angle below which exp/log switch to their series branches.
inline constexpr double angle_eps = 1e-8;
}  // namespace tol

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

struct Vec3 {
  double x{0.0};
  double y{0.0};
  double z{0.0};

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  Vec3& operator*=(double s) {
    x *= s;
    y *= s;
    z *= s;
    return *this;
  }

  double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double dot(const Vec3& a, const Vec3& b) {
  return a.x * b.x + a.y * b.y + a.z * b.z;
}

inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z,
          a.x * b.y - a.y * b.x};
}

inline double norm2(const Vec3& v) { return dot(v, v); }
inline double norm(const Vec3& v) { return std::sqrt(norm2(v)); }

inline Vec3 normalized(const Vec3& v) {
  const double n = norm(v);
  if (n == 0.0) throw DegenerateError("cannot normalize a zero vector");
  return v / n;
}

inline std::ostream& operator<<(std::ostream& os, const Vec3& v) {
  return os << "(" << v.x << ", " << v.y << ", " << v.z << ")";
}

/// Dense 3x3 matrix, row-major.
struct Mat3 {
  std::array<double, 9> a{};

  static Mat3 zero() { return Mat3{}; }

  static Mat3 identity() {
    Mat3 m;
    m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return m;
  }

  static Mat3 diag(double d0, double d1, double d2) {
    Mat3 m;
    m.a = {d0, 0, 0, 0, d1, 0, 0, 0, d2};
    return m;
  }

  static Mat3 from_rows(const Vec3& r0, const Vec3& r1, const Vec3& r2) {
    Mat3 m;
    m.a = {r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z};
    return m;
  }

  double operator()(int r, int c) const { return a[3 * r + c]; }
  double& operator()(int r, int c) { return a[3 * r + c]; }

  Mat3 operator+(const Mat3& o) const {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.a[i] = a[i] + o.a[i];
    return m;
  }

  Mat3 operator-(const Mat3& o) const {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.a[i] = a[i] - o.a[i];
    return m;
  }

  Mat3 operator*(double s) const {
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.a[i] = a[i] * s;
    return m;
  }

  Mat3 operator*(const Mat3& o) const {
    Mat3 m;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        m(r, c) = (*this)(r, 0) * o(0, c) + (*this)(r, 1) * o(1, c) +
                  (*this)(r, 2) * o(2, c);
    return m;
  }

  Vec3 operator*(const Vec3& v) const {
    return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
            a[3] * v.x + a[4] * v.y + a[5] * v.z,
            a[6] * v.x + a[7] * v.y + a[8] * v.z};
  }

  Mat3 transposed() const {
    Mat3 m;
    m.a = {a[0], a[3], a[6], a[1], a[4], a[7], a[2], a[5], a[8]};
    return m;
  }

  double trace() const { return a[0] + a[4] + a[8]; }

  double det() const {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) -
           a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
  }

  /// Inverse by adjugate. Throws DegenerateError when the determinant is
  /// negligible relative to the matrix scale.
  Mat3 inverse() const {
    const double d = det();
    const double scale = max_abs();
    if (std::abs(d) <= 1e-300 || std::abs(d) < 1e-14 * scale * scale * scale)
      throw DegenerateError("matrix is numerically singular");
    const double inv_d = 1.0 / d;
    Mat3 m;
    m.a[0] = (a[4] * a[8] - a[5] * a[7]) * inv_d;
    m.a[1] = (a[2] * a[7] - a[1] * a[8]) * inv_d;
    m.a[2] = (a[1] * a[5] - a[2] * a[4]) * inv_d;
    m.a[3] = (a[5] * a[6] - a[3] * a[8]) * inv_d;
    m.a[4] = (a[0] * a[8] - a[2] * a[6]) * inv_d;
    m.a[5] = (a[2] * a[3] - a[0] * a[5]) * inv_d;
    m.a[6] = (a[3] * a[7] - a[4] * a[6]) * inv_d;
    m.a[7] = (a[1] * a[6] - a[0] * a[7]) * inv_d;
    m.a[8] = (a[0] * a[4] - a[1] * a[3]) * inv_d;
    return m;
  }
};

inline Mat3 operator*(double s, const Mat3& m) { return m * s; }

inline Mat3 symmetric_part(const Mat3& m) {
  return (m + m.transposed()) * 0.5;
}

/// Outer product a b^T.
inline Mat3 outer(const Vec3& a, const Vec3& b) {
  Mat3 m;
  m.a = {a.x * b.x, a.x * b.y, a.x * b.z, a.y * b.x, a.y * b.y,
         a.y * b.z, a.z * b.x, a.z * b.y, a.z * b.z};
  return m;
}

/// hat: R^3 -> so(3), hat(v) w = v x w.
inline Mat3 hat(const Vec3& v) {
  Mat3 m;
  m.a = {0, -v.z, v.y, v.z, 0, -v.x, -v.y, v.x, 0};
  return m;
}

/// vee: so(3) -> R^3, inverse of hat. Throws NotSkewError when the symmetric
/// part of S exceeds the tolerance relative to the matrix scale.
inline Vec3 vee(const Mat3& S, double tol_skew = tol::skew) {
  const double scale = std::max(1.0, S.max_abs());
  const Mat3 sym = symmetric_part(S);
  if (sym.max_abs() > tol_skew * scale)
    throw NotSkewError("matrix is not skew-symmetric");
  return {0.5 * (S(2, 1) - S(1, 2)), 0.5 * (S(0, 2) - S(2, 0)),
          0.5 * (S(1, 0) - S(0, 1))};
}

/// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi sweeps, ascending.
inline std::array<double, 3> sym_eigenvalues(const Mat3& S) {
  Mat3 m = symmetric_part(S);
  const double scale = std::max(1.0, m.max_abs());
  for (int sweep = 0; sweep < 50; ++sweep) {
    const double off = std::sqrt(m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) +
                                 m(1, 2) * m(1, 2));
    if (off < 1e-15 * scale) break;
    for (int p = 0; p < 2; ++p) {
      for (int q = p + 1; q < 3; ++q) {
        if (m(p, q) == 0.0) continue;
        const double theta = (m(q, q) - m(p, p)) / (2.0 * m(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        Mat3 g = Mat3::identity();
        g(p, p) = c;
        g(q, q) = c;
        g(p, q) = s;
        g(q, p) = -s;
        m = g.transposed() * m * g;
        m = symmetric_part(m);
      }
    }
  }
  std::array<double, 3> ev = {m(0, 0), m(1, 1), m(2, 2)};
  std::sort(ev.begin(), ev.end());
  return ev;
}

/// Cholesky solve A x = b for symmetric positive definite A.
/// Throws NotPositiveDefiniteError when a pivot fails.
inline Vec3 cholesky_solve(const Mat3& A, const Vec3& b) {
  const double d0 = A(0, 0);
  if (d0 <= 0.0) throw NotPositiveDefiniteError("pivot 0 is not positive");
  const double l00 = std::sqrt(d0);
  const double l10 = A(1, 0) / l00;
  const double l20 = A(2, 0) / l00;
  const double d1 = A(1, 1) - l10 * l10;
  if (d1 <= 0.0) throw NotPositiveDefiniteError("pivot 1 is not positive");
  const double l11 = std::sqrt(d1);
  const double l21 = (A(2, 1) - l20 * l10) / l11;
  const double d2 = A(2, 2) - l20 * l20 - l21 * l21;
  if (d2 <= 0.0) throw NotPositiveDefiniteError("pivot 2 is not positive");
  const double l22 = std::sqrt(d2);
  // forward substitution L y = b
  const double y0 = b.x / l00;
  const double y1 = (b.y - l10 * y0) / l11;
  const double y2 = (b.z - l20 * y0 - l21 * y1) / l22;
  // back substitution L^T x = y
  const double x2 = y2 / l22;
  const double x1 = (y1 - l21 * x2) / l11;
  const double x0 = (y0 - l10 * x1 - l20 * x2) / l00;
  return {x0, x1, x2};
}

/// Inverse of a symmetric positive definite matrix via Cholesky solves,
/// symmetrized to keep the result exactly symmetric.
inline Mat3 spd_inverse(const Mat3& A) {
  const Vec3 c0 = cholesky_solve(A, {1, 0, 0});
  const Vec3 c1 = cholesky_solve(A, {0, 1, 0});
  const Vec3 c2 = cholesky_solve(A, {0, 0, 1});
  Mat3 m;
  m.a = {c0.x, c1.x, c2.x, c0.y, c1.y, c2.y, c0.z, c1.z, c2.z};
  return symmetric_part(m);
}

/// Proper rotation matrix. Construction goes through validated or
/// structure-preserving paths only.
struct Rotation {
  Mat3 m = Mat3::identity();

  static Rotation identity() { return Rotation{}; }

  /// Wraps a matrix after checking orthogonality and det = +1.
  static Rotation from_matrix(const Mat3& M, double tol_orth = tol::orth) {
    const Mat3 r = M.transposed() * M - Mat3::identity();
    if (r.max_abs() > tol_orth)
      throw DegenerateError("matrix is not orthogonal within tolerance");
    if (M.det() <= 0.0)
      throw DegenerateError("matrix is orientation-reversing");
    Rotation R;
    R.m = M;
    return R;
  }

  Rotation operator*(const Rotation& o) const {
    Rotation r;
    r.m = m * o.m;
    return r;
  }

  Vec3 operator*(const Vec3& v) const { return m * v; }

  Rotation transposed() const {
    Rotation r;
    r.m = m.transposed();
    return r;
  }

  /// max |R^T R - Id| entry, a cheap orthogonality diagnostic.
  double orthogonality_residual() const {
    return (m.transposed() * m - Mat3::identity()).max_abs();
  }
};

/// Rodrigues formula. Uses the quadratic series for angles below
/// tol::angle_eps so the small-angle limit stays smooth.
inline Rotation exp_rotation(const Vec3& v) {
  const double theta2 = norm2(v);
  const double theta = std::sqrt(theta2);
  double s, c;  // sin(theta)/theta and (1 - cos(theta))/theta^2
  if (theta < tol::angle_eps) {
    s = 1.0 - theta2 / 6.0;
    c = 0.5 - theta2 / 24.0;
  } else {
    s = std::sin(theta) / theta;
    c = (1.0 - std::cos(theta)) / theta2;
  }
  const Mat3 K = hat(v);
  Rotation R;
  R.m = Mat3::identity() + s * K + c * (K * K);
  return R;
}

/// Inverse of exp_rotation with angle in [0, pi]. Near angle pi the rotation
/// axis is recovered from the dominant column of R + Id; at exactly pi the
/// axis sign is conventional.
inline Vec3 log_rotation(const Rotation& R) {
  const Mat3& m = R.m;
  const double cos_theta =
      std::min(1.0, std::max(-1.0, (m.trace() - 1.0) * 0.5));
  const double theta = std::acos(cos_theta);
  const Vec3 w{0.5 * (m(2, 1) - m(1, 2)), 0.5 * (m(0, 2) - m(2, 0)),
               0.5 * (m(1, 0) - m(0, 1))};  // sin(theta) * axis
  if (theta < tol::angle_eps) {
    // theta/sin(theta) ~ 1 + theta^2/6
    return w * (1.0 + theta * theta / 6.0);
  }
  if (kPi - theta > 1e-6) {
    return w * (theta / std::sin(theta));
  }
  // Near pi: R + Id = 2 axis axis^T + O(pi - theta); take the largest column.
  const Mat3 B = m + Mat3::identity();
  Vec3 axis{B(0, 0), B(1, 0), B(2, 0)};
  double best = norm2(axis);
  for (int c = 1; c < 3; ++c) {
    const Vec3 col{B(0, c), B(1, c), B(2, c)};
    const double n2 = norm2(col);
    if (n2 > best) {
      best = n2;
      axis = col;
    }
  }
  axis = normalized(axis);
  // Align with the skew part when it still carries sign information.
  if (dot(axis, w) < 0.0) axis = -axis;
  return axis * theta;
}

/// Closest rotation in the Frobenius norm, i.e. the orthogonal polar factor,
/// by the Newton iteration X <- (X + X^-T) / 2. Throws DegenerateError for
/// singular or orientation-reversing input.
inline Rotation project_to_rotation(const Mat3& M) {
  const double scale = M.max_abs();
  if (scale == 0.0) throw DegenerateError("cannot project the zero matrix");
  if (M.det() <= 0.0)
    throw DegenerateError("matrix determinant is not positive");
  Mat3 X = M * (1.0 / scale);
  for (int it = 0; it < 60; ++it) {
    const Mat3 Xn = (X + X.inverse().transposed()) * 0.5;
    const double delta = (Xn - X).max_abs();
    X = Xn;
    if (delta < 1e-15) break;
  }
  Rotation R;
  R.m = X;
  return R;
}

/// Symmetric positive definite inertia tensor.
class InertiaTensor {
 public:
  /// Symmetrizes the input and validates positive definiteness.
  explicit InertiaTensor(const Mat3& M) : m_(symmetric_part(M)) {
    cholesky_solve(m_, {1, 1, 1});  // throws NotPositiveDefiniteError
    const auto ev = sym_eigenvalues(m_);
    triangle_violation_ = ev[0] + ev[1] < ev[2] * (1.0 - 1e-12);
  }

  static InertiaTensor diag(double i1, double i2, double i3) {
    return InertiaTensor(Mat3::diag(i1, i2, i3));
  }

  const Mat3& matrix() const { return m_; }

  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// Principal moments, ascending.
  std::array<double, 3> principal_moments() const {
    return sym_eigenvalues(m_);
  }

  double smallest_moment() const { return principal_moments()[0]; }

  /// True when the principal moments fail I1 + I2 >= I3. Physical mass
  /// distributions always satisfy it; synthetic tensors may not, which is
  /// allowed but flagged.
  bool triangle_violation() const { return triangle_violation_; }

 private:
  Mat3 m_;
  bool triangle_violation_ = false;
};

/// Solves I x = v through the SPD factorization, without forming I^-1.
inline Vec3 apply_inverse(const InertiaTensor& I, const Vec3& v) {
  return cholesky_solve(I.matrix(), v);
}

/// Wraps an angle to the representative in (-pi, pi].
inline double wrap_angle(double a) {
  double w = std::remainder(a, kTwoPi);
  if (w <= -kPi) w += kTwoPi;
  return w;
}

/// Distance between two angles on the circle, in [0, pi].
inline double circle_distance(double a, double b) {
  return std::abs(std::remainder(a - b, kTwoPi));
}

}  // namespace spinphase

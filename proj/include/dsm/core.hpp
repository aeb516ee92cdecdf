#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace dsm {

using complex = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double four_pi = 4.0 * pi;

/// Thrown when an input violates a documented precondition.
struct validation_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Thrown on malformed or unreadable files.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown when a numerical procedure fails to converge or degenerates.
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Vec3 {
  double x = 0, y = 0, z = 0;

  Vec3() = default;
  Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }
  Vec3 operator-() const { return {-x, -y, -z}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm2() const { return dot(*this); }
  double norm() const { return std::sqrt(norm2()); }
  Vec3 normalized() const {
    double n = norm();
    if (n == 0) throw validation_error("cannot normalize zero vector");
    return *this / n;
  }
};

inline Vec3 operator*(double s, const Vec3& v) { return v * s; }

/// Complex 3-vector (field amplitude at one observation direction).
struct CVec3 {
  complex x{}, y{}, z{};

  CVec3() = default;
  CVec3(complex x_, complex y_, complex z_) : x(x_), y(y_), z(z_) {}
  explicit CVec3(const Vec3& v) : x(v.x), y(v.y), z(v.z) {}

  CVec3 operator+(const CVec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  CVec3 operator-(const CVec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  CVec3 operator*(complex s) const { return {x * s, y * s, z * s}; }
  CVec3 operator-() const { return {-x, -y, -z}; }
  CVec3& operator+=(const CVec3& o) { x += o.x; y += o.y; z += o.z; return *this; }
  CVec3& operator-=(const CVec3& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }

  /// Bilinear dot product (no conjugation).
  complex dot(const CVec3& o) const { return x * o.x + y * o.y + z * o.z; }
  /// Hermitian pairing: this . conj(other).
  complex dotc(const CVec3& o) const {
    return x * std::conj(o.x) + y * std::conj(o.y) + z * std::conj(o.z);
  }
  CVec3 conj() const { return {std::conj(x), std::conj(y), std::conj(z)}; }
  double norm2() const { return std::norm(x) + std::norm(y) + std::norm(z); }
  double norm() const { return std::sqrt(norm2()); }
};

inline CVec3 operator*(complex s, const CVec3& v) { return v * s; }
inline CVec3 operator*(double s, const CVec3& v) { return v * complex(s, 0); }

/// Row-major 3x3 real matrix; enough linear algebra for rotations.
struct Mat3 {
  std::array<double, 9> a{};

  static Mat3 identity() {
    Mat3 m;
    m.a = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    return m;
  }

  double& operator()(int i, int j) { return a[3 * i + j]; }
  double operator()(int i, int j) const { return a[3 * i + j]; }

  Vec3 operator*(const Vec3& v) const {
    return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
            a[3] * v.x + a[4] * v.y + a[5] * v.z,
            a[6] * v.x + a[7] * v.y + a[8] * v.z};
  }
  CVec3 operator*(const CVec3& v) const {
    return {a[0] * v.x + a[1] * v.y + a[2] * v.z,
            a[3] * v.x + a[4] * v.y + a[5] * v.z,
            a[6] * v.x + a[7] * v.y + a[8] * v.z};
  }
  Mat3 operator*(const Mat3& o) const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int k = 0; k < 3; ++k) s += (*this)(i, k) * o(k, j);
        r(i, j) = s;
      }
    return r;
  }
  Mat3 transpose() const {
    Mat3 r;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) r(i, j) = (*this)(j, i);
    return r;
  }
  double det() const {
    return a[0] * (a[4] * a[8] - a[5] * a[7]) - a[1] * (a[3] * a[8] - a[5] * a[6]) +
           a[2] * (a[3] * a[7] - a[4] * a[6]);
  }
};

}  // namespace dsm

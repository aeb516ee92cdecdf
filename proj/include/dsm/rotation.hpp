#pragma once

#include <vector>

#include "dsm/core.hpp"

namespace dsm {

/// Rotation about a coordinate axis.
inline Mat3 rot_x(double a) {
  Mat3 m = Mat3::identity();
  m(1, 1) = std::cos(a); m(1, 2) = -std::sin(a);
  m(2, 1) = std::sin(a); m(2, 2) = std::cos(a);
  return m;
}
inline Mat3 rot_y(double a) {
  Mat3 m = Mat3::identity();
  m(0, 0) = std::cos(a); m(0, 2) = std::sin(a);
  m(2, 0) = -std::sin(a); m(2, 2) = std::cos(a);
  return m;
}
inline Mat3 rot_z(double a) {
  Mat3 m = Mat3::identity();
  m(0, 0) = std::cos(a); m(0, 1) = -std::sin(a);
  m(1, 0) = std::sin(a); m(1, 1) = std::cos(a);
  return m;
}

/// Orientation matrix in the x1-x2-x3 convention:
/// U(theta, phi, psi) = Rz(psi) * Ry(theta) * Rx(phi).
inline Mat3 euler_matrix(double theta, double phi, double psi) {
  return rot_z(psi) * rot_y(theta) * rot_x(phi);
}

/// z-y-z Euler angles (alpha, beta, gamma) with R = Rz(alpha) Ry(beta) Rz(gamma).
struct ZyzAngles {
  double alpha, beta, gamma;
};

inline ZyzAngles zyz_angles(const Mat3& R) {
  ZyzAngles a{};
  const double sb = std::sqrt(R(0, 2) * R(0, 2) + R(1, 2) * R(1, 2));
  a.beta = std::atan2(sb, R(2, 2));
  if (sb > 1e-12) {
    a.alpha = std::atan2(R(1, 2), R(0, 2));
    a.gamma = std::atan2(R(2, 1), -R(2, 0));
  } else if (R(2, 2) > 0) {  // beta = 0: R = Rz(alpha + gamma)
    a.alpha = std::atan2(R(1, 0), R(0, 0));
    a.gamma = 0;
  } else {  // beta = pi: R = Rz(alpha - gamma) Ry(pi)
    a.alpha = std::atan2(-R(1, 0), -R(0, 0));
    a.gamma = 0;
  }
  return a;
}

namespace detail {

inline double factorial(int n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(171);
    t[0] = 1;
    for (int i = 1; i <= 170; ++i) t[i] = t[i - 1] * i;
    return t;
  }();
  return table[n];
}

/// Wigner small-d matrix element d^n_{mp,m}(beta).
inline double wigner_small_d(int n, int mp, int m, double beta) {
  const double cb = std::cos(beta / 2), sb = std::sin(beta / 2);
  const double pref = std::sqrt(factorial(n + mp) * factorial(n - mp) *
                                factorial(n + m) * factorial(n - m));
  double sum = 0;
  const int smin = std::max(0, m - mp);
  const int smax = std::min(n - mp, n + m);
  for (int s = smin; s <= smax; ++s) {
    double term = std::pow(cb, 2 * n + m - mp - 2 * s) *
                  std::pow(sb, mp - m + 2 * s) /
                  (factorial(n + m - s) * factorial(s) *
                   factorial(mp - m + s) * factorial(n - mp - s));
    sum += ((mp - m + s) % 2 ? -1.0 : 1.0) * term;
  }
  return pref * sum;
}

}  // namespace detail

/// Dense (2n+1) x (2n+1) rotation matrix acting on the order-n harmonic
/// coefficients; rows/columns indexed by m + n.
using WignerBlock = std::vector<complex>;

/// Blocks D^n for n = 0..order such that, for the rotation R,
///   Y_n^m(R^T xhat) = sum_{m'} D^n[m' + n][m + n] * Y_n^{m'}(xhat),
/// and identically for the vector harmonics U, V composed with R:
///   R U_n^m(R^T xhat) = sum_{m'} D^n_{m'm} U_n^{m'}(xhat).
inline std::vector<WignerBlock> wigner_blocks(int order, const Mat3& R) {
  const ZyzAngles a = zyz_angles(R);
  std::vector<WignerBlock> D(order + 1);
  for (int n = 0; n <= order; ++n) {
    const int dim = 2 * n + 1;
    D[n].assign(dim * dim, complex{});
    for (int mp = -n; mp <= n; ++mp)
      for (int m = -n; m <= n; ++m) {
        const double d = detail::wigner_small_d(n, mp, m, a.beta);
        D[n][(mp + n) * dim + (m + n)] =
            std::exp(complex(0, -mp * a.alpha)) * d *
            std::exp(complex(0, -m * a.gamma));
      }
  }
  return D;
}

}  // namespace dsm

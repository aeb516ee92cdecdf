#pragma once

#include <vector>

#include "dsm/core.hpp"
#include "dsm/quadrature.hpp"

namespace dsm {

/// Flat index of the (n, m) scalar-harmonic slot, n >= 0, |m| <= n.
inline int sh_index(int n, int m) { return n * n + n + m; }
inline int sh_count(int order) { return (order + 1) * (order + 1); }

namespace detail {

/// Normalized associated Legendre values for one polar angle.
/// For 0 <= m <= n <= order:
///   p[idx(n,m)]  = normalized P_n^m(cos t) with Condon-Shortley phase,
///                  scaled so that Y_n^m = p * exp(i m phi)
///   q[idx(n,m)]  = p / sin t evaluated by recurrence (finite at the poles),
///                  stored for m >= 1 only
///   dp[idx(n,m)] = d/dt of p
struct LegendreTables {
  int order;
  std::vector<double> p, q, dp;
  int idx(int n, int m) const { return n * (n + 1) / 2 + m; }
};

inline LegendreTables legendre_tables(int order, double cos_t, double sin_t) {
  LegendreTables t;
  t.order = order;
  const int sz = (order + 1) * (order + 2) / 2;
  t.p.assign(sz, 0.0);
  t.q.assign(sz, 0.0);
  t.dp.assign(sz, 0.0);
  auto id = [&](int n, int m) { return n * (n + 1) / 2 + m; };

  t.p[id(0, 0)] = std::sqrt(1.0 / four_pi);
  // diagonal terms: p(m,m) = -sqrt((2m+1)/(2m)) * sin_t * p(m-1,m-1)
  // q carries one factor of sin_t less, so the same recurrence applies with
  // one sin_t dropped at m = 1.
  for (int m = 1; m <= order; ++m) {
    const double f = -std::sqrt((2.0 * m + 1.0) / (2.0 * m));
    t.p[id(m, m)] = f * sin_t * t.p[id(m - 1, m - 1)];
    t.q[id(m, m)] = (m == 1) ? f * t.p[id(0, 0)] : f * sin_t * t.q[id(m - 1, m - 1)];
  }
  // first off-diagonal: p(m+1,m) = sqrt(2m+3) * cos_t * p(m,m)
  for (int m = 0; m + 1 <= order; ++m) {
    const double f = std::sqrt(2.0 * m + 3.0);
    t.p[id(m + 1, m)] = f * cos_t * t.p[id(m, m)];
    if (m >= 1) t.q[id(m + 1, m)] = f * cos_t * t.q[id(m, m)];
  }
  // general recurrence in n
  for (int n = 2; n <= order; ++n)
    for (int m = 0; m + 2 <= n; ++m) {
      const double a = std::sqrt((4.0 * n * n - 1.0) / (double(n) * n - double(m) * m));
      const double b =
          std::sqrt((double(n - 1) * (n - 1) - double(m) * m) /
                    (4.0 * double(n - 1) * (n - 1) - 1.0));
      t.p[id(n, m)] = a * (cos_t * t.p[id(n - 1, m)] - b * t.p[id(n - 2, m)]);
      if (m >= 1)
        t.q[id(n, m)] = a * (cos_t * t.q[id(n - 1, m)] - b * t.q[id(n - 2, m)]);
    }
  // dp(n,m) = m * cos_t * q(n,m) + sqrt((n-m)(n+m+1)) * p(n,m+1)
  for (int n = 0; n <= order; ++n)
    for (int m = 0; m <= n; ++m) {
      double v = 0.0;
      if (m >= 1) v += m * cos_t * t.q[id(n, m)];
      if (m + 1 <= n)
        v += std::sqrt(double(n - m) * (n + m + 1)) * t.p[id(n, m + 1)];
      t.dp[id(n, m)] = v;
    }
  return t;
}

struct SphericalAngles {
  double cos_t, sin_t;  // polar angle
  Vec3 theta_hat, phi_hat;
  std::vector<complex> eimphi;  // exp(i m phi), m = 0..order
};

inline SphericalAngles spherical_frame(const Vec3& xhat, int order) {
  SphericalAngles s;
  s.cos_t = xhat.z;
  s.sin_t = std::sqrt(xhat.x * xhat.x + xhat.y * xhat.y);
  double cphi = 1.0, sphi = 0.0;
  if (s.sin_t > 0) {
    cphi = xhat.x / s.sin_t;
    sphi = xhat.y / s.sin_t;
  }
  s.theta_hat = {s.cos_t * cphi, s.cos_t * sphi, -s.sin_t};
  s.phi_hat = {-sphi, cphi, 0.0};
  s.eimphi.resize(order + 1);
  s.eimphi[0] = 1.0;
  const complex e1(cphi, sphi);
  for (int m = 1; m <= order; ++m) s.eimphi[m] = s.eimphi[m - 1] * e1;
  return s;
}

}  // namespace detail

/// All scalar harmonics Y and vector harmonics U, V at one direction,
/// for every (n, m) with n <= order; flat layout via sh_index.
/// U_n^m is the normalized surface gradient of Y_n^m; V_n^m = xhat x U_n^m.
/// Slots with n = 0 hold Y only (U, V zero there).
struct VshValues {
  int order;
  std::vector<complex> Y;
  std::vector<CVec3> U, V;
};

inline VshValues vsh_all(int order, const Vec3& xhat) {
  if (order < 0) throw validation_error("vsh_all: negative order");
  if (std::abs(xhat.norm() - 1.0) > 1e-9)
    throw validation_error("vsh_all: direction must be a unit vector");
  const auto ang = detail::spherical_frame(xhat, order);
  const auto tab = detail::legendre_tables(order, ang.cos_t, ang.sin_t);
  VshValues out;
  out.order = order;
  out.Y.assign(sh_count(order), complex{});
  out.U.assign(sh_count(order), CVec3{});
  out.V.assign(sh_count(order), CVec3{});
  const CVec3 th(ang.theta_hat), ph(ang.phi_hat);
  const complex iunit(0, 1);
  for (int n = 0; n <= order; ++n)
    for (int m = 0; m <= n; ++m) {
      const int li = tab.idx(n, m);
      const complex e = ang.eimphi[m];
      const complex y = tab.p[li] * e;
      out.Y[sh_index(n, m)] = y;
      if (m > 0)
        out.Y[sh_index(n, -m)] = (m % 2 ? -1.0 : 1.0) * std::conj(y);
      if (n >= 1) {
        // Grad Y = dP/dt * e^{imphi} theta_hat + i m (P/sin t) e^{imphi} phi_hat
        CVec3 grad = (tab.dp[li] * e) * th;
        if (m >= 1) grad += (iunit * double(m) * tab.q[li] * e) * ph;
        const double scale = 1.0 / std::sqrt(double(n) * (n + 1));
        CVec3 u = scale * grad;
        out.U[sh_index(n, m)] = u;
        if (m > 0)
          out.U[sh_index(n, -m)] = (m % 2 ? -1.0 : 1.0) * u.conj();
      }
    }
  const CVec3 x(xhat);
  for (int n = 1; n <= order; ++n)
    for (int m = -n; m <= n; ++m) {
      const CVec3& u = out.U[sh_index(n, m)];
      out.V[sh_index(n, m)] = {x.y * u.z - x.z * u.y, x.z * u.x - x.x * u.z,
                               x.x * u.y - x.y * u.x};
    }
  return out;
}

inline complex sph_harmonic(int n, int m, const Vec3& xhat) {
  if (n < 0 || std::abs(m) > n)
    throw validation_error("sph_harmonic: require n >= 0 and |m| <= n");
  return vsh_all(n, xhat).Y[sh_index(n, m)];
}

inline CVec3 vsh_U(int n, int m, const Vec3& xhat) {
  if (n < 1) throw validation_error("vsh_U: require n >= 1");
  if (std::abs(m) > n) throw validation_error("vsh_U: require |m| <= n");
  return vsh_all(n, xhat).U[sh_index(n, m)];
}

inline CVec3 vsh_V(int n, int m, const Vec3& xhat) {
  if (n < 1) throw validation_error("vsh_V: require n >= 1");
  if (std::abs(m) > n) throw validation_error("vsh_V: require |m| <= n");
  return vsh_all(n, xhat).V[sh_index(n, m)];
}

/// Vector-harmonic values cached at every node of a quadrature rule.
struct VshBasis {
  int order = 0;
  int rule_id = 0;
  std::vector<VshValues> at_node;  // one entry per quadrature node
};

inline VshBasis vsh_basis(const QuadratureRule& rule, int order) {
  VshBasis b;
  b.order = order;
  b.rule_id = rule.size();
  b.at_node.reserve(rule.nodes.size());
  for (const Vec3& x : rule.nodes) b.at_node.push_back(vsh_all(order, x));
  return b;
}

/// TangentialField holding U_n^m (sigma = 1) or V_n^m (sigma = 2) sampled on
/// the rule; convenient for inner-product tests and indicator construction.
inline TangentialField vsh_field(const QuadratureRule& rule, int sigma, int n,
                                 int m, const VshBasis* basis = nullptr) {
  if (sigma != 1 && sigma != 2) throw validation_error("sigma must be 1 or 2");
  TangentialField f;
  f.rule_id = rule.size();
  f.values.reserve(rule.nodes.size());
  for (int q = 0; q < rule.size(); ++q) {
    const VshValues v = basis ? VshValues{} : vsh_all(n, rule.nodes[q]);
    const VshValues& vv = basis ? basis->at_node[q] : v;
    f.values.push_back(sigma == 1 ? vv.U[sh_index(n, m)] : vv.V[sh_index(n, m)]);
  }
  return f;
}

}  // namespace dsm

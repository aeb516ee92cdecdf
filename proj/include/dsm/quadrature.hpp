#pragma once

#include <vector>

#include "dsm/core.hpp"

namespace dsm {

/// Quadrature rule on the unit sphere. Weights are stored pre-multiplied so
/// that they sum to 4*pi; sums over nodes then approximate surface integrals
/// directly.
struct QuadratureRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
  int exactness = 0;  // highest polynomial degree integrated exactly

  int size() const { return static_cast<int>(nodes.size()); }
};

namespace detail {

// Octahedral point generators for the Lebedev-Laikov grids. Each appends the
// full symmetry orbit of its seed point with a common weight (normalized to
// unit sphere measure 1; converted to 4*pi at the end of lebedev_rule).
inline void oh_vertices(QuadratureRule& r, double w) {
  for (int dir = 0; dir < 3; ++dir)
    for (int s = -1; s <= 1; s += 2) {
      Vec3 v;
      (&v.x)[dir] = s;
      r.nodes.push_back(v);
      r.weights.push_back(w);
    }
}

inline void oh_edge_midpoints(QuadratureRule& r, double w) {
  const double q = std::sqrt(0.5);
  for (int dir = 0; dir < 3; ++dir)
    for (int s1 = -1; s1 <= 1; s1 += 2)
      for (int s2 = -1; s2 <= 1; s2 += 2) {
        Vec3 v;
        (&v.x)[(dir + 1) % 3] = s1 * q;
        (&v.x)[(dir + 2) % 3] = s2 * q;
        r.nodes.push_back(v);
        r.weights.push_back(w);
      }
}

inline void oh_cube_corners(QuadratureRule& r, double w) {
  const double q = std::sqrt(1.0 / 3.0);
  for (int s3 = -1; s3 <= 1; s3 += 2)
    for (int s2 = -1; s2 <= 1; s2 += 2)
      for (int s1 = -1; s1 <= 1; s1 += 2) {
        r.nodes.push_back({q * s1, q * s2, q * s3});
        r.weights.push_back(w);
      }
}

// orbit of (a, a, b) with b = sqrt(1 - 2 a^2)
inline void oh_aab(QuadratureRule& r, double w, double a) {
  const double b = std::sqrt(1.0 - 2.0 * a * a);
  for (int dir = 0; dir < 3; ++dir)
    for (int s3 = -1; s3 <= 1; s3 += 2)
      for (int s2 = -1; s2 <= 1; s2 += 2)
        for (int s1 = -1; s1 <= 1; s1 += 2) {
          Vec3 v;
          (&v.x)[dir] = b * s3;
          (&v.x)[(dir + 1) % 3] = a * s1;
          (&v.x)[(dir + 2) % 3] = a * s2;
          r.nodes.push_back(v);
          r.weights.push_back(w);
        }
}

// orbit of (a, b, 0) with b = sqrt(1 - a^2)
inline void oh_ab0(QuadratureRule& r, double w, double a) {
  double b = std::sqrt(1.0 - a * a);
  double u = a, v = b;
  for (int swap = 0; swap < 2; ++swap) {
    for (int dir = 0; dir < 3; ++dir)
      for (int s2 = -1; s2 <= 1; s2 += 2)
        for (int s1 = -1; s1 <= 1; s1 += 2) {
          Vec3 p;
          (&p.x)[(dir + 1) % 3] = u * s1;
          (&p.x)[(dir + 2) % 3] = v * s2;
          r.nodes.push_back(p);
          r.weights.push_back(w);
        }
    std::swap(u, v);
  }
}

// orbit of (a, b, c) with c = sqrt(1 - a^2 - b^2)
inline void oh_abc(QuadratureRule& r, double w, double a, double b) {
  const double c = std::sqrt(1.0 - a * a - b * b);
  const double cyc[2][5] = {{a, b, c, a, b}, {b, a, c, b, a}};
  for (int rev = 0; rev < 2; ++rev)
    for (int dir = 0; dir < 3; ++dir)
      for (int s3 = -1; s3 <= 1; s3 += 2)
        for (int s2 = -1; s2 <= 1; s2 += 2)
          for (int s1 = -1; s1 <= 1; s1 += 2) {
            r.nodes.push_back({cyc[rev][dir] * s1, cyc[rev][dir + 1] * s2,
                               cyc[rev][dir + 2] * s3});
            r.weights.push_back(w);
          }
}

}  // namespace detail

/// Lebedev-Laikov quadrature rule with the given node count.
/// Supported counts: 6, 26, 110, 302, 590.
inline QuadratureRule lebedev_rule(int point_count) {
  using namespace detail;
  QuadratureRule r;
  switch (point_count) {
    case 6:
      r.exactness = 3;
      oh_vertices(r, 1.0 / 6.0);
      break;
    case 26:
      r.exactness = 7;
      oh_vertices(r, 0.04761904761904762);
      oh_edge_midpoints(r, 0.03809523809523810);
      oh_cube_corners(r, 0.03214285714285714);
      break;
    case 110:
      r.exactness = 17;
      oh_vertices(r, 0.003828270494937162);
      oh_cube_corners(r, 0.009793737512487512);
      oh_aab(r, 0.008211737283191111, 0.1851156353447362);
      oh_aab(r, 0.009942814891178103, 0.6904210483822922);
      oh_aab(r, 0.009595471336070963, 0.3956894730559419);
      oh_ab0(r, 0.009694996361663028, 0.4783690288121502);
      break;
    case 302:
      r.exactness = 29;
      oh_vertices(r, 0.8545911725128148e-3);
      oh_cube_corners(r, 0.3599119285025571e-2);
      oh_aab(r, 0.3449788424305883e-2, 0.3515640345570105);
      oh_aab(r, 0.3604822601419882e-2, 0.6566329410219612);
      oh_aab(r, 0.3576729661743367e-2, 0.4729054132581005);
      oh_aab(r, 0.2352101413689164e-2, 0.0961830852261478);
      oh_aab(r, 0.3108953122413675e-2, 0.2219645236294178);
      oh_aab(r, 0.3650045807677255e-2, 0.7011766416089545);
      oh_ab0(r, 0.2982344963171804e-2, 0.2644152887060663);
      oh_ab0(r, 0.3600820932216460e-2, 0.5718955891878961);
      oh_abc(r, 0.3571540554273387e-2, 0.2510034751770465, 0.8000727494073951);
      oh_abc(r, 0.3392312205006170e-2, 0.1233548532583327, 0.4127724083168531);
      break;
    case 590:
      r.exactness = 41;
      oh_vertices(r, 0.3095121295306187e-3);
      oh_cube_corners(r, 0.1852379698597489e-2);
      oh_aab(r, 0.1871790639277744e-2, 0.7040954938227469);
      oh_aab(r, 0.1858812585438317e-2, 0.6807744066455244);
      oh_aab(r, 0.1852028828296213e-2, 0.6372546939258752);
      oh_aab(r, 0.1846715956151242e-2, 0.5044419707800358);
      oh_aab(r, 0.1818471778162769e-2, 0.4215761784010967);
      oh_aab(r, 0.1749564657281154e-2, 0.3317920736472123);
      oh_aab(r, 0.1617210647254411e-2, 0.2384736701421887);
      oh_aab(r, 0.1384737234851692e-2, 0.1459036449157763);
      oh_aab(r, 0.9764331165051050e-3, 0.0609503411550720);
      oh_ab0(r, 0.1857161196774078e-2, 0.6116843442009876);
      oh_ab0(r, 0.1705153996395864e-2, 0.3964755348199858);
      oh_ab0(r, 0.1300321685886048e-2, 0.1724782009907724);
      oh_abc(r, 0.1842866472905286e-2, 0.5610263808622060, 0.3518280927733519);
      oh_abc(r, 0.1802658934377451e-2, 0.4742392842551980, 0.2634716655937950);
      oh_abc(r, 0.1849830560443660e-2, 0.5984126497885380, 0.1816640840360209);
      oh_abc(r, 0.1713904507106709e-2, 0.3791035407695563, 0.1720795225656878);
      oh_abc(r, 0.1555213603396808e-2, 0.2778673190586244, 0.0821302158193251);
      oh_abc(r, 0.1802239128008525e-2, 0.5033564271075117, 0.0899920584207488);
      break;
    default:
      throw validation_error("unsupported rule: Lebedev point count " +
                             std::to_string(point_count) +
                             " (supported: 6, 26, 110, 302, 590)");
  }
  for (double& w : r.weights) w *= four_pi;
  return r;
}

/// Tangential complex vector field sampled at the nodes of a quadrature rule.
/// rule_id is the node count of the generating rule.
struct TangentialField {
  std::vector<CVec3> values;
  int rule_id = 0;
};

inline void check_same_rule(const TangentialField& a, const TangentialField& b,
                            const QuadratureRule& rule) {
  if (a.rule_id != b.rule_id || a.values.size() != b.values.size() ||
      static_cast<int>(a.values.size()) != rule.size())
    throw validation_error("tangential fields sampled on different rules");
}

/// T^2(S^2) inner product; the second argument is conjugated.
inline complex t2_inner(const TangentialField& a, const TangentialField& b,
                        const QuadratureRule& rule) {
  check_same_rule(a, b, rule);
  complex s = 0;
  for (int q = 0; q < rule.size(); ++q)
    s += rule.weights[q] * a.values[q].dotc(b.values[q]);
  return s;
}

inline double t2_norm(const TangentialField& a, const QuadratureRule& rule) {
  if (static_cast<int>(a.values.size()) != rule.size())
    throw validation_error("field size does not match rule");
  double s = 0;
  for (int q = 0; q < rule.size(); ++q)
    s += rule.weights[q] * a.values[q].norm2();
  return std::sqrt(s);
}

/// Removes the radial component at every node.
inline void project_tangential(TangentialField& f, const QuadratureRule& rule) {
  for (int q = 0; q < rule.size(); ++q) {
    const Vec3& n = rule.nodes[q];
    CVec3& v = f.values[q];
    complex radial = v.dot(CVec3(n));
    v -= radial * CVec3(n);
  }
}

}  // namespace dsm

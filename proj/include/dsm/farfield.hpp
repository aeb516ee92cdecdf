#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "dsm/core.hpp"
#include "dsm/quadrature.hpp"

namespace dsm {

/// Time-harmonic incident plane wave: wavenumber k, propagation direction d,
/// polarization p orthogonal to d.
struct IncidentWave {
  double k;
  Vec3 d;
  Vec3 p;

  IncidentWave(double k_, const Vec3& d_, const Vec3& p_) : k(k_), d(d_), p(p_) {
    if (!(k > 0)) throw validation_error("incident wave: k must be positive");
    if (std::abs(d.norm() - 1.0) > 1e-12)
      throw validation_error("incident wave: d must be a unit vector");
    if (std::abs(p.dot(d)) > 1e-12 * p.norm())
      throw validation_error("incident wave: p must be orthogonal to d");
  }

  bool compatible(const IncidentWave& o) const {
    return k == o.k && d.x == o.d.x && d.y == o.d.y && d.z == o.d.z &&
           p.x == o.p.x && p.y == o.p.y && p.z == o.p.z;
  }
};

/// Electric far-field pattern sampled at the nodes of a quadrature rule.
struct FarFieldPattern {
  TangentialField field;
  IncidentWave wave;
  int rule_id = 0;

  FarFieldPattern(TangentialField f, IncidentWave w)
      : field(std::move(f)), wave(w), rule_id(field.rule_id) {}

  static FarFieldPattern zeros(const QuadratureRule& rule, const IncidentWave& w) {
    TangentialField f;
    f.rule_id = rule.size();
    f.values.assign(rule.nodes.size(), CVec3{});
    return FarFieldPattern(std::move(f), w);
  }
};

/// Multiplies each node value by e^{ik(d - xhat_q) . z}: the far field of the
/// same scatterer translated by z.
inline FarFieldPattern translate_phase(const FarFieldPattern& A, const Vec3& z,
                                       const QuadratureRule& rule) {
  FarFieldPattern out = A;
  const double k = A.wave.k;
  const complex phase_d = std::exp(complex(0, k * A.wave.d.dot(z)));
  for (int q = 0; q < rule.size(); ++q) {
    const complex ph = phase_d * std::exp(complex(0, -k * rule.nodes[q].dot(z)));
    out.field.values[q] = ph * out.field.values[q];
  }
  return out;
}

inline FarFieldPattern subtract(const FarFieldPattern& A, const FarFieldPattern& B) {
  if (A.rule_id != B.rule_id || A.field.values.size() != B.field.values.size())
    throw validation_error("subtract: patterns sampled on different rules");
  if (!A.wave.compatible(B.wave))
    throw validation_error("subtract: incident waves differ (k, d, p must match)");
  FarFieldPattern out = A;
  for (size_t q = 0; q < out.field.values.size(); ++q)
    out.field.values[q] -= B.field.values[q];
  return out;
}

inline FarFieldPattern scale_amplitude(const FarFieldPattern& A, complex c) {
  FarFieldPattern out = A;
  for (auto& v : out.field.values) v = c * v;
  return out;
}

namespace detail {

/// Deterministic uniform draw on [-1, 1] from a 64-bit Mersenne Twister,
/// independent of any library distribution implementation.
inline double uniform_pm1(std::mt19937_64& rng) {
  const double u01 = (rng() >> 11) * 0x1.0p-53;  // [0, 1)
  return 2.0 * u01 - 1.0;
}

}  // namespace detail

/// Additive relative noise: each Cartesian component of each node value gets
/// delta * zeta1 * max_q|A(xhat_q)| * exp(i 2 pi zeta2), zeta1 and zeta2
/// i.i.d. uniform on [-1, 1]; the result is re-projected onto the tangent
/// plane. Deterministic for a fixed seed.
inline FarFieldPattern apply_noise(const FarFieldPattern& A, double delta,
                                   std::uint64_t seed, const QuadratureRule& rule) {
  if (delta < 0) throw validation_error("apply_noise: delta must be >= 0");
  if (delta == 0) return A;
  double amax = 0;
  for (const auto& v : A.field.values) amax = std::max(amax, v.norm());
  FarFieldPattern out = A;
  std::mt19937_64 rng(seed);
  for (auto& v : out.field.values) {
    complex* comps[3] = {&v.x, &v.y, &v.z};
    for (complex* c : comps) {
      const double z1 = detail::uniform_pm1(rng);
      const double z2 = detail::uniform_pm1(rng);
      *c += delta * z1 * amax * std::exp(complex(0, 2 * pi * z2));
    }
  }
  project_tangential(out.field, rule);
  return out;
}

/// Plain-text serialization: header `k d1 d2 d3 p1 p2 p3 N`, then N lines
/// `x1 x2 x3 ReA1 ImA1 ReA2 ImA2 ReA3 ImA3` (17 significant digits).
inline void write_pattern(const FarFieldPattern& A, std::ostream& os,
                          const QuadratureRule& rule) {
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  put(A.wave.k);
  for (double v : {A.wave.d.x, A.wave.d.y, A.wave.d.z, A.wave.p.x, A.wave.p.y,
                   A.wave.p.z}) {
    os << ' ';
    put(v);
  }
  os << ' ' << rule.size() << '\n';
  for (int q = 0; q < rule.size(); ++q) {
    const Vec3& x = rule.nodes[q];
    const CVec3& v = A.field.values[q];
    bool first = true;
    for (double c : {x.x, x.y, x.z, v.x.real(), v.x.imag(), v.y.real(),
                     v.y.imag(), v.z.real(), v.z.imag()}) {
      if (!first) os << ' ';
      first = false;
      put(c);
    }
    os << '\n';
  }
  if (!os) throw io_error("write_pattern: stream write failed");
}

inline void write_pattern(const FarFieldPattern& A, const std::string& path,
                          const QuadratureRule& rule) {
  std::ofstream os(path);
  if (!os) throw io_error("write_pattern: cannot open '" + path + "'");
  write_pattern(A, os, rule);
}

/// Reads a pattern written by write_pattern. The node directions in the file
/// must match the supplied rule's nodes to 1e-12 (patterns are only meaningful
/// together with their quadrature rule).
inline FarFieldPattern read_pattern(std::istream& is, const QuadratureRule& rule) {
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> io_error {
    return io_error("read_pattern: line " + std::to_string(lineno) + ": " + msg);
  };
  if (!std::getline(is, line)) throw io_error("read_pattern: line 1: empty file");
  lineno = 1;
  std::istringstream hs(line);
  double k, dx, dy, dz, px, py, pz;
  long long n;
  if (!(hs >> k >> dx >> dy >> dz >> px >> py >> pz >> n))
    throw fail("malformed header (expect: k d1 d2 d3 p1 p2 p3 N)");
  if (n != rule.size())
    throw io_error("read_pattern: header node count " + std::to_string(n) +
                   " does not match rule size " + std::to_string(rule.size()));
  IncidentWave wave = [&] {
    try {
      return IncidentWave(k, {dx, dy, dz}, {px, py, pz});
    } catch (const validation_error& e) {
      throw fail(std::string("invalid incident wave: ") + e.what());
    }
  }();
  TangentialField f;
  f.rule_id = rule.size();
  f.values.reserve(rule.nodes.size());
  for (int q = 0; q < rule.size(); ++q) {
    if (!std::getline(is, line)) {
      lineno++;
      throw fail("unexpected end of file (fewer rows than header count)");
    }
    lineno++;
    std::istringstream ls(line);
    double x1, x2, x3, re1, im1, re2, im2, re3, im3;
    if (!(ls >> x1 >> x2 >> x3 >> re1 >> im1 >> re2 >> im2 >> re3 >> im3))
      throw fail("malformed data row (expect 9 numbers)");
    if ((Vec3{x1, x2, x3} - rule.nodes[q]).norm() > 1e-12)
      throw fail("node direction does not match quadrature rule");
    f.values.push_back({{re1, im1}, {re2, im2}, {re3, im3}});
  }
  if (std::getline(is, line) && !line.empty()) {
    lineno++;
    throw fail("trailing data beyond declared node count");
  }
  return FarFieldPattern(std::move(f), wave);
}

inline FarFieldPattern read_pattern(const std::string& path,
                                    const QuadratureRule& rule) {
  std::ifstream is(path);
  if (!is) throw io_error("read_pattern: cannot open '" + path + "'");
  return read_pattern(is, rule);
}

}  // namespace dsm

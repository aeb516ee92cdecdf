#pragma once

#include <algorithm>
#include <fstream>
#include <string>
#include <vector>

#include "dsm/dictionary.hpp"
#include "dsm/farfield.hpp"
#include "dsm/harmonics.hpp"
#include "dsm/quadrature.hpp"

namespace dsm {

/// Axis-aligned lattice of sampling points with a per-node active mask.
struct SamplingGrid {
  Vec3 lo, hi;
  double spacing;
  int nx, ny, nz;
  std::vector<char> active;

  SamplingGrid(const Vec3& lo_, const Vec3& hi_, double spacing_)
      : lo(lo_), hi(hi_), spacing(spacing_) {
    if (!(spacing > 0)) throw validation_error("grid: spacing must be > 0");
    if (hi.x < lo.x || hi.y < lo.y || hi.z < lo.z)
      throw validation_error("grid: empty box");
    nx = static_cast<int>(std::floor((hi.x - lo.x) / spacing + 1e-9)) + 1;
    ny = static_cast<int>(std::floor((hi.y - lo.y) / spacing + 1e-9)) + 1;
    nz = static_cast<int>(std::floor((hi.z - lo.z) / spacing + 1e-9)) + 1;
    active.assign(size_t(nx) * ny * nz, 1);
  }

  int count() const { return nx * ny * nz; }
  int active_count() const {
    int c = 0;
    for (char a : active) c += a;
    return c;
  }
  int index(int i, int j, int k) const { return (k * ny + j) * nx + i; }
  Vec3 point(int i, int j, int k) const {
    return {lo.x + i * spacing, lo.y + j * spacing, lo.z + k * spacing};
  }
  Vec3 point(int idx) const {
    const int i = idx % nx, j = (idx / nx) % ny, k = idx / (nx * ny);
    return point(i, j, k);
  }
};

/// Real-valued indicator samples over a grid.
struct IndicatorField {
  enum class Kind { S, RMatched };
  SamplingGrid grid;
  std::vector<double> values;  // one per grid node; meaningful where active
  Kind kind = Kind::S;
  bool normalized = false;
};

/// Strict local extremum of an indicator field.
struct Peak {
  Vec3 position;
  double value = 0;
  int cluster_id = 0;
};

namespace detail {

/// Tangential dipole test fields U_1^m, V_1^m (m = -1, 0, 1) on the rule.
inline std::vector<TangentialField> dipole_fields(const QuadratureRule& rule) {
  std::vector<TangentialField> B;
  for (int sigma = 1; sigma <= 2; ++sigma)
    for (int m = -1; m <= 1; ++m) B.push_back(vsh_field(rule, sigma, 1, m));
  return B;
}

/// Per-basis, per-node coefficients c_{b,q} = w_q A_q . conj(B_q); the
/// indicator's inner products reduce to sums of c against lattice phases.
inline std::vector<std::vector<complex>> basis_coefficients(
    const FarFieldPattern& A, const std::vector<const TangentialField*>& basis,
    const QuadratureRule& rule) {
  std::vector<std::vector<complex>> c(basis.size());
  for (size_t b = 0; b < basis.size(); ++b) {
    c[b].resize(rule.size());
    for (int q = 0; q < rule.size(); ++q)
      c[b][q] = rule.weights[q] * A.field.values[q].dotc(basis[b]->values[q]);
  }
  return c;
}

/// Sums S_b(z) = sum_q c_{b,q} e^{i k xhat_q . z} for one point z.
inline void phase_sums(const std::vector<std::vector<complex>>& c, double k,
                       const QuadratureRule& rule, const Vec3& z,
                       std::vector<complex>& out) {
  out.assign(c.size(), complex{});
  for (int q = 0; q < rule.size(); ++q) {
    const complex ph = std::exp(complex(0, k * rule.nodes[q].dot(z)));
    for (size_t b = 0; b < c.size(); ++b) out[b] += c[b][q] * ph;
  }
}

}  // namespace detail

/// Single-point sampling indicator (dipole projection):
/// (1/||A||^2) sum over the six degree-1 test fields of
/// |<A, e^{ik(d - xhat) . z} W_1^m>|^2.
inline double indicator_s(const FarFieldPattern& A, const Vec3& z,
                          const QuadratureRule& rule) {
  const double na = t2_norm(A.field, rule);
  if (na == 0) throw validation_error("indicator_s: zero pattern");
  const auto B = detail::dipole_fields(rule);
  double s = 0;
  for (const TangentialField& f : B) {
    complex ip{};
    for (int q = 0; q < rule.size(); ++q) {
      const complex ph =
          std::exp(complex(0, A.wave.k * (A.wave.d - rule.nodes[q]).dot(z)));
      ip += rule.weights[q] * A.field.values[q].dotc(ph * f.values[q]);
    }
    s += std::norm(ip);
  }
  return s / (na * na);
}

/// Single-point reference indicator: |<A, e^{ik(d - xhat) . z} A_entry>| /
/// ||A_entry||^2.
inline double indicator_r(const FarFieldPattern& A, const DictionaryEntry& entry,
                          const Vec3& z, const QuadratureRule& rule) {
  if (entry.norm <= 0) throw validation_error("indicator_r: zero entry norm");
  if (!A.wave.compatible(entry.pattern.wave))
    throw validation_error("indicator_r: wave mismatch between data and entry");
  complex ip{};
  for (int q = 0; q < rule.size(); ++q) {
    const complex ph =
        std::exp(complex(0, A.wave.k * (A.wave.d - rule.nodes[q]).dot(z)));
    ip += rule.weights[q] * A.field.values[q].dotc(ph * entry.pattern.field.values[q]);
  }
  return std::abs(ip) / (entry.norm * entry.norm);
}

namespace detail {

/// Shared grid sweep: evaluates |S_b(z)|^2 sums over the lattice using
/// separable per-axis phase tables (the e^{-ik d.z} factor has unit modulus
/// and drops out).
template <typename Reduce>
inline void sweep_grid(const std::vector<std::vector<complex>>& c, double k,
                       const QuadratureRule& rule, const SamplingGrid& g,
                       std::vector<double>& out, Reduce reduce) {
  const int Q = rule.size();
  const size_t B = c.size();
  std::vector<complex> px(size_t(Q) * g.nx), py(size_t(Q) * g.ny),
      pz(size_t(Q) * g.nz);
  for (int q = 0; q < Q; ++q) {
    const Vec3& xh = rule.nodes[q];
    const complex sx = std::exp(complex(0, k * xh.x * g.spacing));
    const complex sy = std::exp(complex(0, k * xh.y * g.spacing));
    const complex sz = std::exp(complex(0, k * xh.z * g.spacing));
    complex vx = std::exp(complex(0, k * xh.x * g.lo.x));
    // px is laid out node-major (index i * Q + q) for the inner sweep
    for (int i = 0; i < g.nx; ++i, vx *= sx) px[size_t(i) * Q + q] = vx;
    complex vy = std::exp(complex(0, k * xh.y * g.lo.y));
    for (int j = 0; j < g.ny; ++j, vy *= sy) py[size_t(q) * g.ny + j] = vy;
    complex vz = std::exp(complex(0, k * xh.z * g.lo.z));
    for (int l = 0; l < g.nz; ++l, vz *= sz) pz[size_t(q) * g.nz + l] = vz;
  }
  std::vector<complex> tq(size_t(B) * Q);
  std::vector<complex> s(B);
  for (int l = 0; l < g.nz; ++l)
    for (int j = 0; j < g.ny; ++j) {
      for (int q = 0; q < Q; ++q) {
        const complex yz = py[size_t(q) * g.ny + j] * pz[size_t(q) * g.nz + l];
        for (size_t b = 0; b < B; ++b) tq[b * Q + q] = c[b][q] * yz;
      }
      for (int i = 0; i < g.nx; ++i) {
        const int idx = g.index(i, j, l);
        if (!g.active[idx]) continue;
        const complex* xi = &px[size_t(i) * Q];
        for (size_t b = 0; b < B; ++b) {
          complex acc{};
          const complex* tb = &tq[b * Q];
          for (int q = 0; q < Q; ++q) acc += tb[q] * xi[q];
          s[b] = acc;
        }
        out[idx] = reduce(s);
      }
    }
}

}  // namespace detail

/// Sweeps the sampling indicator over all active grid nodes.
inline IndicatorField evaluate_grid_s(const FarFieldPattern& A,
                                      const SamplingGrid& grid,
                                      const QuadratureRule& rule,
                                      bool normalize = true) {
  const double na = t2_norm(A.field, rule);
  if (na == 0) throw validation_error("indicator_s: zero pattern");
  const auto B = detail::dipole_fields(rule);
  std::vector<const TangentialField*> bp;
  for (const auto& f : B) bp.push_back(&f);
  const auto c = detail::basis_coefficients(A, bp, rule);
  IndicatorField f{IndicatorField{grid, std::vector<double>(grid.count(), 0.0),
                                  IndicatorField::Kind::S, false}};
  const double inv = 1.0 / (na * na);
  detail::sweep_grid(c, A.wave.k, rule, grid, f.values,
                     [inv](const std::vector<complex>& s) {
                       double v = 0;
                       for (const complex& x : s) v += std::norm(x);
                       return v * inv;
                     });
  if (normalize) {
    double mx = 0;
    for (int i = 0; i < grid.count(); ++i)
      if (grid.active[i]) mx = std::max(mx, f.values[i]);
    if (mx > 0)
      for (double& v : f.values) v /= mx;
    f.normalized = true;
  }
  return f;
}

/// Sweeps the reference indicator for one dictionary entry over the grid.
inline IndicatorField evaluate_grid_r(const FarFieldPattern& A,
                                      const DictionaryEntry& entry,
                                      const SamplingGrid& grid,
                                      const QuadratureRule& rule) {
  if (entry.norm <= 0) throw validation_error("indicator_r: zero entry norm");
  if (!A.wave.compatible(entry.pattern.wave))
    throw validation_error("indicator_r: wave mismatch between data and entry");
  std::vector<const TangentialField*> bp{&entry.pattern.field};
  const auto c = detail::basis_coefficients(A, bp, rule);
  IndicatorField f{IndicatorField{grid, std::vector<double>(grid.count(), 0.0),
                                  IndicatorField::Kind::RMatched, false}};
  const double inv = 1.0 / (entry.norm * entry.norm);
  detail::sweep_grid(c, A.wave.k, rule, grid, f.values,
                     [inv](const std::vector<complex>& s) {
                       return std::abs(s[0]) * inv;
                     });
  return f;
}

namespace detail {

template <typename Better>
inline std::vector<Peak> local_extrema(const IndicatorField& f, Better better) {
  const SamplingGrid& g = f.grid;
  std::vector<Peak> found;
  for (int l = 0; l < g.nz; ++l)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const int idx = g.index(i, j, l);
        if (!g.active[idx]) continue;
        const double v = f.values[idx];
        bool strict = true;
        for (int dl = -1; dl <= 1 && strict; ++dl)
          for (int dj = -1; dj <= 1 && strict; ++dj)
            for (int di = -1; di <= 1 && strict; ++di) {
              if (di == 0 && dj == 0 && dl == 0) continue;
              const int ii = i + di, jj = j + dj, ll = l + dl;
              if (ii < 0 || jj < 0 || ll < 0 || ii >= g.nx || jj >= g.ny ||
                  ll >= g.nz)
                continue;
              const int nidx = g.index(ii, jj, ll);
              if (!g.active[nidx]) continue;
              if (!better(v, f.values[nidx])) strict = false;
            }
        if (strict) found.push_back({g.point(i, j, l), v, 0});
      }
  return found;
}

template <typename Better>
inline std::vector<Peak> merge_extrema(std::vector<Peak> peaks,
                                       double min_separation, Better better) {
  std::sort(peaks.begin(), peaks.end(), [&](const Peak& a, const Peak& b) {
    if (a.value != b.value) return better(a.value, b.value);
    return std::tie(a.position.x, a.position.y, a.position.z) <
           std::tie(b.position.x, b.position.y, b.position.z);
  });
  std::vector<Peak> kept;
  for (const Peak& p : peaks) {
    bool merged = false;
    for (const Peak& k : kept)
      if ((p.position - k.position).norm() < min_separation) {
        merged = true;
        break;
      }
    if (!merged) {
      Peak q = p;
      q.cluster_id = static_cast<int>(kept.size());
      kept.push_back(q);
    }
  }
  return kept;
}

}  // namespace detail

/// Strict 26-neighborhood local maxima with value >= threshold_frac * global
/// max; maxima closer than min_separation are merged to the highest one.
inline std::vector<Peak> find_peaks(const IndicatorField& f,
                                    double threshold_frac,
                                    double min_separation) {
  if (!(threshold_frac > 0) || threshold_frac > 1)
    throw validation_error("find_peaks: threshold_frac must be in (0, 1]");
  auto better = [](double a, double b) { return a > b; };
  std::vector<Peak> peaks = detail::local_extrema(f, better);
  double gmax = 0;
  for (int i = 0; i < f.grid.count(); ++i)
    if (f.grid.active[i]) gmax = std::max(gmax, f.values[i]);
  std::vector<Peak> sig;
  for (const Peak& p : peaks)
    if (p.value >= threshold_frac * gmax) sig.push_back(p);
  return detail::merge_extrema(std::move(sig), min_separation, better);
}

/// Strict local minima with value <= tol (used on |I - 1| fields); minima
/// closer than min_separation are merged to the lowest one.
inline std::vector<Peak> find_minima(const IndicatorField& f, double tol,
                                     double min_separation) {
  auto better = [](double a, double b) { return a < b; };
  std::vector<Peak> mins = detail::local_extrema(f, better);
  std::vector<Peak> sig;
  for (const Peak& p : mins)
    if (p.value <= tol) sig.push_back(p);
  return detail::merge_extrema(std::move(sig), min_separation, better);
}

/// Deactivates all nodes within radius + margin of center; returns the
/// trimmed grid.
inline SamplingGrid trim(const SamplingGrid& grid, const Vec3& center,
                         double radius, double margin = 0) {
  SamplingGrid g = grid;
  const double r = radius + margin;
  for (int l = 0; l < g.nz; ++l)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if ((g.point(i, j, l) - center).norm() <= r)
          g.active[g.index(i, j, l)] = 0;
  return g;
}

/// Text dump `x y z value` per active node, for external plotting.
inline void write_indicator_field(const IndicatorField& f, std::ostream& os) {
  char buf[128];
  const SamplingGrid& g = f.grid;
  for (int l = 0; l < g.nz; ++l)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const int idx = g.index(i, j, l);
        if (!g.active[idx]) continue;
        const Vec3 p = g.point(i, j, l);
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", p.x, p.y,
                      p.z, f.values[idx]);
        os << buf;
      }
  if (!os) throw io_error("write_indicator_field: stream write failed");
}

}  // namespace dsm

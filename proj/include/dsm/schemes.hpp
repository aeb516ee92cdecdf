#pragma once

#include <algorithm>
#include <cstdint>
#include <chrono>
#include <string>
#include <thread>
#include <vector>

#include "dsm/dictionary.hpp"
#include "dsm/indicators.hpp"

namespace dsm {

/// One reconstructed scene component. Regular components carry the matched
/// dictionary pose and entry index; point-like finds use shape_id "small".
struct FoundComponent {
  Vec3 position;
  std::string shape_id;
  double theta = 0, phi = 0, psi = 0;
  double tau = 1;
  double score = 0;  // sampling indicator value in [0,1], or |I - 1| >= 0
  int entry_index = -1;
};

/// Output of a scheme driver.
struct ReconstructionReport {
  std::string scheme;
  std::vector<IncidentWave> waves;
  std::vector<FoundComponent> components;
  std::vector<double> residual_norms;  // data/residual T2 norms per stage
  double seconds = 0;                  // wall time; excluded from serialization
};

/// Peak-extraction knobs for the sampling-indicator stages. A nonpositive
/// min_separation means "half the wavelength of the data in use".
struct PeakParams {
  double threshold_frac = 0.8;
  double min_separation = 0;
};

/// Knobs for the dictionary stage. The optional crop stage restricts the
/// grid to neighborhoods of the coarse sampling-indicator peaks of crop_data
/// before any dictionary sweep (it may use data at a different wavenumber).
struct ArParams {
  double tol = 0.2;            // accept the top indicator peak if |I - 1| <= tol
  int max_per_entry = 32;      // bound on accepted copies of one entry
  double trim_margin = 0;      // extra trim radius beyond tau * circumradius
  const FarFieldPattern* crop_data = nullptr;
  double crop_radius = 0;      // keep nodes within this distance of a crop peak
  double crop_threshold_frac = 0.5;
};

/// Local re-sampling configuration: a subdivisions^3 cube of side `side`
/// around each regular component. All tuple combinations are searched up to
/// `cap`; beyond it, greedy mode optimizes one component at a time.
struct ResampleConfig {
  int subdivisions = 10;
  double side = 1.0;
  std::uint64_t cap = 1000000;
  bool greedy = false;
  double presence = 0.3;  // minimal top indicator value to report a small find
  int threads = 1;

  void validate() const {
    if (subdivisions < 2)
      throw validation_error("resample: subdivisions must be >= 2");
    if (!(side > 0)) throw validation_error("resample: side must be > 0");
    if (threads < 1) throw validation_error("resample: threads must be >= 1");
  }
};

namespace detail {

inline double auto_separation(double requested, double k) {
  return requested > 0 ? requested : pi / k;  // lambda / 2
}

inline void put_g17(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

}  // namespace detail

/// Stable-key-order text serialization for diff-based regression tests
/// (timing deliberately omitted to keep output reproducible).
inline void write_report(const ReconstructionReport& r, std::ostream& os) {
  os << "scheme " << r.scheme << "\n";
  os << "waves " << r.waves.size() << "\n";
  for (const IncidentWave& w : r.waves) {
    os << "wave";
    for (double v : {w.k, w.d.x, w.d.y, w.d.z, w.p.x, w.p.y, w.p.z}) {
      os << ' ';
      detail::put_g17(os, v);
    }
    os << "\n";
  }
  os << "components " << r.components.size() << "\n";
  for (const FoundComponent& c : r.components) {
    os << "component";
    for (double v : {c.position.x, c.position.y, c.position.z}) {
      os << ' ';
      detail::put_g17(os, v);
    }
    os << ' ' << c.shape_id;
    for (double v : {c.theta, c.phi, c.psi, c.tau, c.score}) {
      os << ' ';
      detail::put_g17(os, v);
    }
    os << "\n";
  }
  os << "residual_norms " << r.residual_norms.size();
  for (double v : r.residual_norms) {
    os << ' ';
    detail::put_g17(os, v);
  }
  os << "\n";
  if (!os) throw io_error("write_report: stream write failed");
}

/// Point-scatterer search: sampling indicator over the grid, then peak
/// extraction. Scores are the normalized indicator values in [0, 1].
inline ReconstructionReport run_scheme_s(const FarFieldPattern& A,
                                         const SamplingGrid& grid,
                                         const QuadratureRule& rule,
                                         const PeakParams& params = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  ReconstructionReport rep;
  rep.scheme = "s";
  rep.waves.push_back(A.wave);
  rep.residual_norms.push_back(t2_norm(A.field, rule));
  const IndicatorField f = evaluate_grid_s(A, grid, rule, true);
  const double sep = detail::auto_separation(params.min_separation, A.wave.k);
  for (const Peak& p : find_peaks(f, params.threshold_frac, sep))
    rep.components.push_back({p.position, "small", 0, 0, 0, 1, p.value, -1});
  rep.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Dictionary search: iterates entries in descending-norm order, accepts the
/// top interior local maximum of the entry indicator when its value is within
/// tol of 1, records the matched pose, and trims a ball of radius
/// tau * circumradius + margin around each accepted position. The shapes list
/// supplies circumradii for trimming. An optional coarse localization pass on
/// a second (longer-wavelength) data set restricts the search to balls around
/// the coarse peaks before any entry is tested.
inline ReconstructionReport run_scheme_ar(const FarFieldPattern& A,
                                          const Dictionary& dict,
                                          const std::vector<ShapeModel>& shapes,
                                          const SamplingGrid& grid,
                                          const QuadratureRule& rule,
                                          const ArParams& params = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!A.wave.compatible(dict.wave))
    throw validation_error("run_scheme_ar: dictionary wave mismatch with data");
  auto radius_of = [&](const std::string& id) {
    for (const ShapeModel& s : shapes)
      if (s.id == id) return s.radius;
    throw validation_error("run_scheme_ar: no shape model for id '" + id + "'");
  };
  ReconstructionReport rep;
  rep.scheme = "ar";
  rep.waves.push_back(A.wave);
  rep.residual_norms.push_back(t2_norm(A.field, rule));

  SamplingGrid g = grid;
  if (params.crop_data) {
    if (!(params.crop_radius > 0))
      throw validation_error("run_scheme_ar: crop requires crop_radius > 0");
    const IndicatorField coarse = evaluate_grid_s(*params.crop_data, g, rule, true);
    const double csep =
        detail::auto_separation(0, params.crop_data->wave.k);
    const std::vector<Peak> rois =
        find_peaks(coarse, params.crop_threshold_frac, csep);
    for (int i = 0; i < g.count(); ++i) {
      if (!g.active[i]) continue;
      bool near = false;
      for (const Peak& p : rois)
        if ((g.point(i) - p.position).norm() <= params.crop_radius) {
          near = true;
          break;
        }
      if (!near) g.active[i] = 0;
    }
  }

  // Top strict local maximum of an entry's indicator over the active region.
  // Restricting to interior local maxima rejects the level-crossing shells
  // that under-normed entries produce (the indicator passes through 1
  // monotonically there, so no active-interior maximum forms). A maximum is
  // only trusted when every neighbour is available and lower: grid-edge and
  // trim/crop-boundary maxima are level-crossing artefacts, not matches.
  auto top_peak = [&](const IndicatorField& f) {
    double gmax = -1;
    int arg = -1;
    for (int kz = 0; kz < g.nz; ++kz)
      for (int jy = 0; jy < g.ny; ++jy)
        for (int ix = 0; ix < g.nx; ++ix) {
          const int idx = g.index(ix, jy, kz);
          if (!g.active[idx]) continue;
          const double v = f.values[idx];
          if (v <= gmax) continue;
          bool is_peak = true;
          for (int dz = -1; dz <= 1 && is_peak; ++dz)
            for (int dy = -1; dy <= 1 && is_peak; ++dy)
              for (int dx = -1; dx <= 1 && is_peak; ++dx) {
                if (dx == 0 && dy == 0 && dz == 0) continue;
                const int x = ix + dx, y = jy + dy, zc = kz + dz;
                if (x < 0 || y < 0 || zc < 0 || x >= g.nx || y >= g.ny ||
                    zc >= g.nz) {
                  is_peak = false;
                  continue;
                }
                const int n = g.index(x, y, zc);
                if (!g.active[n] || f.values[n] >= v) is_peak = false;
              }
          if (is_peak) {
            gmax = v;
            arg = idx;
          }
        }
    return std::pair<double, int>{gmax, arg};
  };

  // Entries with (numerically) equal pattern norm are the same shape at the
  // same scale in different orientations; the sort order between them is
  // arbitrary, so they compete for each detection by indicator deviation
  // rather than being examined first-come-first-served. Each accepted
  // component's predicted far field is subtracted from the working data so
  // that later entries see neither its sidelobes nor its cross-talk.
  FarFieldPattern work = A;
  const size_t total = dict.entries.size();
  for (size_t j0 = 0; j0 < total && g.active_count() > 0;) {
    size_t j1 = j0 + 1;
    const double n0 = dict.entries[j0].norm;
    while (j1 < total && std::abs(dict.entries[j1].norm - n0) <= 1e-9 * n0)
      ++j1;
    for (int copies = 0; copies < params.max_per_entry; ++copies) {
      if (g.active_count() == 0) break;
      double best_dev = std::numeric_limits<double>::infinity();
      size_t best_j = j0;
      int best_arg = -1;
      for (size_t j = j0; j < j1; ++j) {
        const IndicatorField f =
            evaluate_grid_r(work, dict.entries[j], g, rule);
        const auto [gmax, arg] = top_peak(f);
        if (arg < 0) continue;
        const double dev = std::abs(gmax - 1.0);
        if (dev < best_dev) {
          best_dev = dev;
          best_j = j;
          best_arg = arg;
        }
      }
      if (best_arg < 0 || best_dev > params.tol) break;
      const DictionaryEntry& e = dict.entries[best_j];
      const Vec3 z = g.point(best_arg);
      rep.components.push_back({z, e.shape_id, e.theta, e.phi, e.psi, e.tau,
                                best_dev, static_cast<int>(best_j)});
      work = subtract(work, translate_phase(e.pattern, z, rule));
      g = trim(g, z, e.tau * radius_of(e.shape_id), params.trim_margin);
    }
    j0 = j1;
  }
  rep.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Data minus the predicted superposition of the given dictionary entries
/// placed at the given positions.
inline FarFieldPattern resample_residual(
    const FarFieldPattern& A, const std::vector<const DictionaryEntry*>& entries,
    const std::vector<Vec3>& positions, const QuadratureRule& rule) {
  if (entries.size() != positions.size())
    throw validation_error("resample_residual: entries/positions size mismatch");
  FarFieldPattern R = A;
  for (size_t j = 0; j < entries.size(); ++j) {
    if (!A.wave.compatible(entries[j]->pattern.wave))
      throw validation_error("resample_residual: entry wave mismatch with data");
    R = subtract(R, translate_phase(entries[j]->pattern, positions[j], rule));
  }
  return R;
}

/// Result of the local re-sampling search.
struct ResampleResult {
  std::vector<Vec3> positions;   // refined regular-component positions
  std::vector<Peak> small_peaks; // point-like finds on the masked grid
  double score = 0;              // top indicator value of the best residual
  double residual_norm = 0;      // T2 norm of the best residual
};

namespace detail {

/// Max of the raw (un-rescaled) sampling indicator over active nodes; the
/// orthonormal dipole projections bound it by 1.
inline double top_indicator_value(const IndicatorField& f) {
  double mx = 0;
  for (int i = 0; i < f.grid.count(); ++i)
    if (f.grid.active[i]) mx = std::max(mx, f.values[i]);
  return mx;
}

struct TupleScore {
  double score = -1;
  double residual_norm = 0;
};

}  // namespace detail

/// Fine-grid position search around previously found regular components.
/// Every combination of candidate positions (one per component, from a
/// subdivisions^3 cube) is scored by the top sampling-indicator value of the
/// residual on the grid with the cubes masked out; ties are broken by the
/// smaller residual norm, then by enumeration order. Beyond `cap` candidate
/// tuples, greedy mode (one component at a time) must be enabled explicitly.
inline ResampleResult local_resample(const FarFieldPattern& A,
                                     const Dictionary& dict,
                                     const std::vector<FoundComponent>& regular,
                                     const SamplingGrid& grid,
                                     const QuadratureRule& rule,
                                     const ResampleConfig& cfg = {},
                                     const PeakParams& params = {}) {
  cfg.validate();
  if (regular.empty())
    throw validation_error("local_resample: requires at least one regular component");
  std::vector<const DictionaryEntry*> entries;
  std::vector<Vec3> centers;
  for (const FoundComponent& c : regular) {
    if (c.entry_index < 0 ||
        c.entry_index >= static_cast<int>(dict.entries.size()))
      throw validation_error("local_resample: component lacks a dictionary entry");
    entries.push_back(&dict.entries[c.entry_index]);
    centers.push_back(c.position);
  }
  const size_t l = regular.size();
  const int s = cfg.subdivisions;
  const std::uint64_t per = std::uint64_t(s) * s * s;

  // mask out the fine cubes from the search grid
  SamplingGrid g = grid;
  for (int i = 0; i < g.count(); ++i) {
    if (!g.active[i]) continue;
    for (const Vec3& c : centers) {
      const Vec3 d = g.point(i) - c;
      if (std::max({std::abs(d.x), std::abs(d.y), std::abs(d.z)}) <=
          cfg.side / 2 + 1e-12) {
        g.active[i] = 0;
        break;
      }
    }
  }

  const double step = cfg.side / (s - 1);
  auto offset = [&](std::uint64_t idx) {
    const int i = int(idx % s), j = int((idx / s) % s), k = int(idx / (per / s));
    return Vec3{-cfg.side / 2 + i * step, -cfg.side / 2 + j * step,
                -cfg.side / 2 + k * step};
  };
  const double data_norm = t2_norm(A.field, rule);
  // A tuple whose residual is numerically zero explains the whole measurement;
  // it outranks every genuine indicator value (which is bounded by 1).
  const double exhausted = 1e-10 * data_norm;
  auto score_positions = [&](const std::vector<Vec3>& zs) {
    const FarFieldPattern R = resample_residual(A, entries, zs, rule);
    const double rn = t2_norm(R.field, rule);
    detail::TupleScore ts;
    ts.residual_norm = rn;
    ts.score = rn <= exhausted ? 2.0
                               : detail::top_indicator_value(
                                     evaluate_grid_s(R, g, rule, false));
    return ts;
  };
  auto better = [](const detail::TupleScore& a, const detail::TupleScore& b) {
    const double tol = 1e-12 * std::max(std::abs(a.score), std::abs(b.score));
    if (std::abs(a.score - b.score) > tol) return a.score > b.score;
    return a.residual_norm < b.residual_norm;  // equal: keep earlier tuple
  };

  std::vector<Vec3> best = centers;
  double total_d = 1;
  for (size_t j = 0; j < l; ++j) total_d *= double(per);
  if (total_d <= double(cfg.cap)) {
    const std::uint64_t total = [&] {
      std::uint64_t t = 1;
      for (size_t j = 0; j < l; ++j) t *= per;
      return t;
    }();
    std::vector<detail::TupleScore> scores(total);
    auto worker = [&](std::uint64_t begin, std::uint64_t end) {
      std::vector<Vec3> zs(l);
      for (std::uint64_t t = begin; t < end; ++t) {
        std::uint64_t rem = t;
        for (size_t j = 0; j < l; ++j) {
          zs[j] = centers[j] + offset(rem % per);
          rem /= per;
        }
        scores[t] = score_positions(zs);
      }
    };
    if (cfg.threads == 1 || total < 2) {
      worker(0, total);
    } else {
      const int nt = std::min<std::uint64_t>(cfg.threads, total);
      std::vector<std::thread> pool;
      for (int w = 0; w < nt; ++w)
        pool.emplace_back(worker, total * w / nt, total * (w + 1) / nt);
      for (auto& th : pool) th.join();
    }
    std::uint64_t win = 0;
    for (std::uint64_t t = 1; t < total; ++t)
      if (better(scores[t], scores[win])) win = t;
    std::uint64_t rem = win;
    for (size_t j = 0; j < l; ++j) {
      best[j] = centers[j] + offset(rem % per);
      rem /= per;
    }
  } else if (cfg.greedy) {
    detail::TupleScore cur = score_positions(best);
    for (size_t j = 0; j < l; ++j) {
      std::vector<Vec3> zs = best;
      for (std::uint64_t o = 0; o < per; ++o) {
        zs[j] = centers[j] + offset(o);
        const detail::TupleScore ts = score_positions(zs);
        if (better(ts, cur)) {
          cur = ts;
          best[j] = zs[j];
        }
      }
    }
  } else {
    throw validation_error(
        "local_resample: candidate tuple count exceeds the cap; use coarser "
        "cubes (fewer subdivisions / fewer components) or enable greedy mode");
  }

  ResampleResult res;
  res.positions = best;
  const FarFieldPattern R = resample_residual(A, entries, best, rule);
  res.residual_norm = t2_norm(R.field, rule);
  if (res.residual_norm <= exhausted) {
    // nothing measurable is left over: refined positions, no small components
    res.score = 2.0;
    return res;
  }
  const IndicatorField f = evaluate_grid_s(R, g, rule, false);
  res.score = detail::top_indicator_value(f);
  if (res.score >= cfg.presence) {
    const double sep = detail::auto_separation(params.min_separation, A.wave.k);
    res.small_peaks = find_peaks(f, params.threshold_frac, sep);
  }
  if (res.score < cfg.presence) {
    // no point-like evidence in any residual: the maximizing tuple carries no
    // information, so the original positions are kept unrefined
    res.positions = centers;
    const FarFieldPattern R0 = resample_residual(A, entries, centers, rule);
    res.residual_norm = t2_norm(R0.field, rule);
    res.small_peaks.clear();
  }
  return res;
}

/// Two-stage multi-scale search: dictionary stage, then local re-sampling to
/// refine regular positions and expose point-like components in the residual.
/// With no dictionary detection the driver falls through to the plain
/// point-scatterer search on the full grid.
inline ReconstructionReport run_scheme_m(const FarFieldPattern& A,
                                         const Dictionary& dict,
                                         const std::vector<ShapeModel>& shapes,
                                         const SamplingGrid& grid,
                                         const QuadratureRule& rule,
                                         const ArParams& ar_params = {},
                                         const ResampleConfig& cfg = {},
                                         const PeakParams& s_params = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  ReconstructionReport rep =
      run_scheme_ar(A, dict, shapes, grid, rule, ar_params);
  rep.scheme = "m";
  if (rep.components.empty()) {
    ReconstructionReport s = run_scheme_s(A, grid, rule, s_params);
    rep.components = std::move(s.components);
  } else {
    const ResampleResult rr =
        local_resample(A, dict, rep.components, grid, rule, cfg, s_params);
    for (size_t j = 0; j < rep.components.size(); ++j)
      rep.components[j].position = rr.positions[j];
    for (const Peak& p : rr.small_peaks)
      rep.components.push_back({p.position, "small", 0, 0, 0, 1, p.value, -1});
    rep.residual_norms.push_back(rr.residual_norm);
  }
  rep.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0).count();
  return rep;
}

/// Two-wavenumber variant: the dictionary stage runs on the first data set,
/// the residual / point-scatterer stage on the second. Both data sets must
/// share the incident direction and polarization; with equal wavenumbers the
/// driver coincides with the single-frequency two-stage search.
inline ReconstructionReport run_enhanced_m(const FarFieldPattern& A1,
                                           const FarFieldPattern& A2,
                                           const Dictionary& dict1,
                                           const Dictionary& dict2,
                                           const std::vector<ShapeModel>& shapes,
                                           const SamplingGrid& grid,
                                           const QuadratureRule& rule,
                                           const ArParams& ar_params = {},
                                           const ResampleConfig& cfg = {},
                                           const PeakParams& s_params = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  if ((A1.wave.d - A2.wave.d).norm() > 1e-12 ||
      (A1.wave.p - A2.wave.p).norm() > 1e-12)
    throw validation_error(
        "run_enhanced_m: the two data sets must share d and p");
  ReconstructionReport rep =
      run_scheme_ar(A1, dict1, shapes, grid, rule, ar_params);
  rep.scheme = "enhanced-m";
  rep.waves.push_back(A2.wave);
  rep.residual_norms.push_back(t2_norm(A2.field, rule));
  if (rep.components.empty()) {
    ReconstructionReport s = run_scheme_s(A2, grid, rule, s_params);
    rep.components = std::move(s.components);
  } else {
    // re-key each matched pose into the second dictionary
    for (FoundComponent& c : rep.components) {
      int idx = -1;
      for (size_t j = 0; j < dict2.entries.size(); ++j) {
        const DictionaryEntry& e = dict2.entries[j];
        if (e.shape_id == c.shape_id && std::abs(e.theta - c.theta) <= 1e-12 &&
            std::abs(e.phi - c.phi) <= 1e-12 &&
            std::abs(e.psi - c.psi) <= 1e-12 && std::abs(e.tau - c.tau) <= 1e-12) {
          idx = static_cast<int>(j);
          break;
        }
      }
      if (idx < 0)
        throw validation_error(
            "run_enhanced_m: matched pose missing from the second dictionary");
      c.entry_index = idx;
    }
    const ResampleResult rr =
        local_resample(A2, dict2, rep.components, grid, rule, cfg, s_params);
    for (size_t j = 0; j < rep.components.size(); ++j)
      rep.components[j].position = rr.positions[j];
    for (const Peak& p : rr.small_peaks)
      rep.components.push_back({p.position, "small", 0, 0, 0, 1, p.value, -1});
    rep.residual_norms.push_back(rr.residual_norm);
  }
  rep.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace dsm

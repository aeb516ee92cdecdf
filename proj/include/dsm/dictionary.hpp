#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>
#include <vector>

#include "dsm/farfield.hpp"
#include "dsm/forward.hpp"

namespace dsm {

/// One reference far-field pattern: a shape at the origin in a specific
/// orientation and at a specific scale.
struct DictionaryEntry {
  std::string shape_id;
  double theta = 0, phi = 0, psi = 0;
  double tau = 1;
  FarFieldPattern pattern;
  double norm = 0;
};

/// Orientation sampling for dictionary construction.
struct OrientationGrid {
  enum class Kind {
    InPlane,  // azimuthal rotations about the vertical axis, step over [0, 2pi)
    Full3D,   // theta, phi over [0, 2pi), psi over [0, pi], common step
  };
  Kind kind = Kind::InPlane;
  double step = pi / 4;
};

/// Ordered reference space: entries sorted by descending pattern norm, ties
/// broken lexicographically by (shape id, theta, phi, psi, tau).
struct Dictionary {
  std::vector<DictionaryEntry> entries;
  IncidentWave wave;
  double angle_step = 0;
  std::vector<double> scales;
};

namespace detail {

inline double pattern_rel_distance(const FarFieldPattern& A,
                                   const FarFieldPattern& B,
                                   const QuadratureRule& rule) {
  double diff = 0, na = 0, nb = 0;
  for (int q = 0; q < rule.size(); ++q) {
    diff += rule.weights[q] * (A.field.values[q] - B.field.values[q]).norm2();
    na += rule.weights[q] * A.field.values[q].norm2();
    nb += rule.weights[q] * B.field.values[q].norm2();
  }
  const double denom = std::sqrt(std::max(na, nb));
  if (denom == 0) return 0;
  return std::sqrt(diff) / denom;
}

inline std::vector<Pose> orientation_poses(const OrientationGrid& grid) {
  if (!(grid.step > 0)) throw validation_error("orientation step must be > 0");
  const double turns = 2 * pi / grid.step;
  if (std::abs(turns - std::round(turns)) > 1e-9)
    throw validation_error("orientation step must divide 2 pi evenly");
  const int nstep = static_cast<int>(std::round(turns));
  std::vector<Pose> poses;
  if (grid.kind == OrientationGrid::Kind::InPlane) {
    for (int i = 0; i < nstep; ++i)
      poses.push_back(Pose::in_plane({0, 0, 0}, i * grid.step, 1.0));
  } else {
    for (int it = 0; it < nstep; ++it)
      for (int ip = 0; ip < nstep; ++ip)
        for (int is = 0; is * grid.step <= pi + 1e-12; ++is)
          poses.push_back(Pose({0, 0, 0}, it * grid.step, ip * grid.step,
                               std::min(is * grid.step, pi), 1.0));
  }
  return poses;
}

}  // namespace detail

/// Builds the reference space over shapes x orientations x scales at z = 0.
/// Orientations whose patterns coincide (relative distance < 1e-10, e.g. by
/// rotational symmetry of the shape) are collapsed to the first such
/// orientation; entries are then sorted by descending norm.
inline Dictionary build_dictionary(const std::vector<ShapeModel>& shapes,
                                   const OrientationGrid& grid,
                                   const std::vector<double>& scales,
                                   const IncidentWave& wave,
                                   const QuadratureRule& rule) {
  if (scales.empty()) throw validation_error("build_dictionary: empty scale set");
  for (double s : scales)
    if (!(s > 0))
      throw validation_error("build_dictionary: degenerate scale " +
                             std::to_string(s));
  const std::vector<Pose> poses = detail::orientation_poses(grid);
  Dictionary dict{std::vector<DictionaryEntry>{}, wave, grid.step, scales};
  for (const ShapeModel& shape : shapes)
    for (double tau : scales) {
      std::vector<DictionaryEntry> group;
      for (const Pose& base : poses) {
        Pose pose(base.z, base.theta, base.phi, base.psi, tau);
        FarFieldPattern pat = eval_far_field(shape, pose, wave, rule);
        DictionaryEntry e{shape.id,        pose.theta, pose.phi, pose.psi,
                          tau,             std::move(pat), 0};
        e.norm = t2_norm(e.pattern.field, rule);
        bool duplicate = false;
        for (const DictionaryEntry& kept : group)
          if (detail::pattern_rel_distance(kept.pattern, e.pattern, rule) < 1e-10) {
            duplicate = true;
            break;
          }
        if (!duplicate) group.push_back(std::move(e));
      }
      for (auto& e : group) dict.entries.push_back(std::move(e));
    }
  std::sort(dict.entries.begin(), dict.entries.end(),
            [](const DictionaryEntry& a, const DictionaryEntry& b) {
              if (a.norm != b.norm) return a.norm > b.norm;
              return std::tie(a.shape_id, a.theta, a.phi, a.psi, a.tau) <
                     std::tie(b.shape_id, b.theta, b.phi, b.psi, b.tau);
            });
  return dict;
}

/// Pairs of entries closer than the distinctness threshold.
struct DistinctReport {
  struct Pair {
    int i, j;
    double rel_distance;
  };
  std::vector<Pair> offenders;
};

inline DistinctReport verify_distinct(const Dictionary& dict,
                                      const QuadratureRule& rule,
                                      double delta_distinct = 0.01) {
  DistinctReport rep;
  for (size_t i = 0; i < dict.entries.size(); ++i)
    for (size_t j = i + 1; j < dict.entries.size(); ++j) {
      const double d = detail::pattern_rel_distance(dict.entries[i].pattern,
                                                    dict.entries[j].pattern, rule);
      if (d < delta_distinct)
        rep.offenders.push_back({static_cast<int>(i), static_cast<int>(j), d});
    }
  return rep;
}

/// Writes the dictionary as a manifest plus one pattern file per entry in
/// the given directory. Manifest line format:
///   shape_id theta phi psi tau pattern_file norm
inline void write_dictionary(const Dictionary& dict, const std::string& dir,
                             const QuadratureRule& rule) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream mf(fs::path(dir) / "manifest.txt");
  if (!mf) throw io_error("write_dictionary: cannot open manifest in '" + dir + "'");
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    mf << buf;
  };
  put(dict.wave.k);
  for (double v : {dict.wave.d.x, dict.wave.d.y, dict.wave.d.z, dict.wave.p.x,
                   dict.wave.p.y, dict.wave.p.z}) {
    mf << ' ';
    put(v);
  }
  mf << ' ' << dict.entries.size() << ' ';
  put(dict.angle_step);
  mf << ' ' << dict.scales.size();
  for (double s : dict.scales) {
    mf << ' ';
    put(s);
  }
  mf << '\n';
  for (size_t i = 0; i < dict.entries.size(); ++i) {
    const DictionaryEntry& e = dict.entries[i];
    std::snprintf(buf, sizeof buf, "entry_%04zu.pat", i);
    const std::string fname = buf;
    write_pattern(e.pattern, (fs::path(dir) / fname).string(), rule);
    mf << e.shape_id;
    for (double v : {e.theta, e.phi, e.psi, e.tau}) {
      mf << ' ';
      put(v);
    }
    mf << ' ' << fname << ' ';
    put(e.norm);
    mf << '\n';
  }
  if (!mf) throw io_error("write_dictionary: manifest write failed");
}

inline Dictionary read_dictionary(const std::string& dir,
                                  const QuadratureRule& rule) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "manifest.txt");
  if (!mf) throw io_error("read_dictionary: cannot open manifest in '" + dir + "'");
  double k, dx, dy, dz, px, py, pz, step;
  size_t nentries, nscales;
  if (!(mf >> k >> dx >> dy >> dz >> px >> py >> pz >> nentries >> step >> nscales))
    throw io_error("read_dictionary: malformed manifest header");
  std::vector<double> scales(nscales);
  for (double& s : scales)
    if (!(mf >> s)) throw io_error("read_dictionary: malformed scale list");
  Dictionary dict{std::vector<DictionaryEntry>{},
                  IncidentWave(k, {dx, dy, dz}, {px, py, pz}), step, scales};
  for (size_t i = 0; i < nentries; ++i) {
    DictionaryEntry e{std::string{}, 0, 0, 0, 1,
                      FarFieldPattern::zeros(rule, dict.wave), 0};
    std::string fname;
    if (!(mf >> e.shape_id >> e.theta >> e.phi >> e.psi >> e.tau >> fname >> e.norm))
      throw io_error("read_dictionary: malformed manifest record " +
                     std::to_string(i + 1));
    e.pattern = read_pattern((fs::path(dir) / fname).string(), rule);
    dict.entries.push_back(std::move(e));
  }
  return dict;
}

}  // namespace dsm

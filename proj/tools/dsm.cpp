// Command-line driver: forward synthesis of far-field data, reference
// dictionary construction, and execution of the locating schemes.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dsm/schemes.hpp"

namespace fs = std::filesystem;
using namespace dsm;

namespace {

Vec3 parse_triple(const std::string& s, const std::string& what) {
  Vec3 v;
  char c1, c2;
  std::istringstream is(s);
  if (!(is >> v.x >> c1 >> v.y >> c2 >> v.z) || c1 != ',' || c2 != ',')
    throw validation_error(what + ": expected three comma-separated numbers, got '" + s + "'");
  std::string rest;
  if (is >> rest)
    throw validation_error(what + ": trailing characters in '" + s + "'");
  return v;
}

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw validation_error(what + ": bad number '" + item + "'");
    }
  }
  if (out.empty()) throw validation_error(what + ": empty list");
  return out;
}

Material parse_material(const std::string& s) {
  if (s == "pec") return Material::pec();
  const std::string prefix = "medium:";
  if (s.rfind(prefix, 0) == 0) {
    const std::vector<double> v =
        parse_list(s.substr(prefix.size()), "material");
    if (v.size() != 3)
      throw validation_error("material: medium needs EPS,MU,SIGMA, got '" + s + "'");
    return Material::medium(v[0], v[1], v[2]);
  }
  throw validation_error("material: expected 'pec' or 'medium:EPS,MU,SIGMA', got '" + s + "'");
}

ShapeModel parse_shape(const std::string& shape, const Material& mat) {
  if (shape == "kite" || shape == "peanut") {
    if (mat.kind != Material::Kind::PEC)
      throw validation_error("shape '" + shape + "': only the pec material is supported");
    return shape == "kite" ? ShapeModel::synthetic_kite()
                           : ShapeModel::synthetic_peanut();
  }
  const std::string prefix = "ball:";
  if (shape.rfind(prefix, 0) == 0) {
    double radius = 0;
    try {
      size_t used = 0;
      const std::string num = shape.substr(prefix.size());
      radius = std::stod(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
    } catch (const std::exception&) {
      throw validation_error("shape: bad ball radius in '" + shape + "'");
    }
    return ShapeModel::ball(radius, mat);
  }
  throw validation_error("shape: expected 'kite', 'peanut' or 'ball:RADIUS', got '" + shape + "'");
}

/// Scene file: one component per line,
///   shape material z1 z2 z3 theta phi psi tau
/// with '#' comments and blank lines ignored.
Scene read_scene(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("scene file not found: '" + path + "'");
  Scene scene;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string shape, material;
    Vec3 z;
    double theta, phi, psi, tau;
    if (!(ls >> shape >> material >> z.x >> z.y >> z.z >> theta >> phi >> psi >> tau))
      throw io_error("scene file '" + path + "' line " + std::to_string(lineno) +
                     ": expected 'shape material z1 z2 z3 theta phi psi tau'");
    std::string rest;
    if (ls >> rest)
      throw io_error("scene file '" + path + "' line " + std::to_string(lineno) +
                     ": trailing token '" + rest + "'");
    scene.components.push_back(
        {parse_shape(shape, parse_material(material)), Pose(z, theta, phi, psi, tau)});
  }
  if (scene.components.empty())
    throw validation_error("scene file '" + path + "' contains no components");
  return scene;
}

/// Shape list for dictionary construction: comma-separated tokens
/// kite | peanut | ball:RADIUS[:pec|:medium:EPS,MU,SIGMA] (default pec).
std::vector<ShapeModel> parse_shapes_spec(const std::string& spec) {
  std::vector<ShapeModel> shapes;
  std::istringstream is(spec);
  std::string tok;
  while (std::getline(is, tok, ',')) {
    // for ball tokens the material follows the radius after a second colon
    std::string shape = tok, material = "pec";
    if (tok.rfind("ball:", 0) == 0) {
      const size_t second = tok.find(':', 5);
      if (second != std::string::npos) {
        shape = tok.substr(0, second);
        material = tok.substr(second + 1);
        // medium materials contain the commas that the outer split consumed
        if (material == "medium") {
          std::string nums;
          for (int i = 0; i < 3 && std::getline(is, nums, ','); ++i)
            material += (i ? "," : ":") + nums;
        }
      }
    }
    shapes.push_back(parse_shape(shape, parse_material(material)));
  }
  if (shapes.empty()) throw validation_error("--shapes: empty shape list");
  for (size_t i = 0; i < shapes.size(); ++i)
    for (size_t j = i + 1; j < shapes.size(); ++j)
      if (shapes[i].id == shapes[j].id)
        throw validation_error("--shapes: duplicate shape id '" + shapes[i].id + "'");
  return shapes;
}

/// Reads the node count from a pattern file header so the matching quadrature
/// rule can be constructed before the full parse.
int peek_node_count(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw io_error("pattern file not found: '" + path + "'");
  double k, d1, d2, d3, p1, p2, p3;
  int n;
  if (!(is >> k >> d1 >> d2 >> d3 >> p1 >> p2 >> p3 >> n))
    throw io_error("pattern file '" + path + "': malformed header");
  return n;
}

void write_field_file(const IndicatorField& f, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw io_error("cannot open '" + path.string() + "' for writing");
  write_indicator_field(f, os);
}

struct ForwardArgs {
  std::string scene_path, out_path;
  double k = 1;
  std::string d = "1,0,0", p = "0,0,1";
  int nodes = 590;
  double noise = 0;
  unsigned seed = 0;
};

int cmd_forward(const ForwardArgs& a) {
  const QuadratureRule rule = lebedev_rule(a.nodes);
  const IncidentWave wave(a.k, parse_triple(a.d, "--d"), parse_triple(a.p, "--p"));
  const Scene scene = read_scene(a.scene_path);
  FarFieldPattern A = scene_far_field(scene, wave, rule);
  if (a.noise > 0) A = apply_noise(A, a.noise, a.seed, rule);
  write_pattern(A, a.out_path, rule);
  std::cout << "nodes " << rule.size() << "\n"
            << "norm " << t2_norm(A.field, rule) << "\n";
  return 0;
}

struct DictArgs {
  std::string shapes, out_dir;
  double k = 1;
  std::string d = "1,0,0", p = "0,0,1";
  int nodes = 590;
  double step = pi / 4;
  std::string scales = "0.2,0.5,1,2,5";
  bool full3d = false;
  double distinct = 0.01;
};

int cmd_dict(const DictArgs& a) {
  const QuadratureRule rule = lebedev_rule(a.nodes);
  const IncidentWave wave(a.k, parse_triple(a.d, "--d"), parse_triple(a.p, "--p"));
  const std::vector<ShapeModel> shapes = parse_shapes_spec(a.shapes);
  const OrientationGrid grid{a.full3d ? OrientationGrid::Kind::Full3D
                                      : OrientationGrid::Kind::InPlane,
                             a.step};
  const Dictionary dict = build_dictionary(
      shapes, grid, parse_list(a.scales, "--scales"), wave, rule);
  const DistinctReport dr = verify_distinct(dict, rule, a.distinct);
  write_dictionary(dict, a.out_dir, rule);
  std::cout << "entries " << dict.entries.size() << "\n"
            << "distinctness_offenders " << dr.offenders.size() << "\n";
  for (const DistinctReport::Pair& p : dr.offenders)
    std::cout << "offender " << p.i << " " << p.j << " " << p.rel_distance << "\n";
  return 0;
}

struct RunArgs {
  std::string scheme, pattern, pattern2, dict_dir, dict2_dir, out_dir, shapes;
  std::string grid_lo = "-4,-4,-4", grid_hi = "4,4,4";
  double spacing = 0.5;
  double noise = 0;
  unsigned seed = 0;
  // scheme parameters
  double tol = 0.2, trim_margin = 0;
  int max_per_entry = 32;
  std::string crop_pattern;
  double crop_radius = 0, crop_threshold_frac = 0.5;
  double threshold_frac = 0.8, min_separation = 0;
  int subdivisions = 10;
  double side = 1.0;
  double cap = 1e6;
  bool greedy = false;
  double presence = 0.3;
  int threads = 1;
};

int cmd_run(const RunArgs& a) {
  if (a.scheme != "s" && a.scheme != "ar" && a.scheme != "m" &&
      a.scheme != "enhanced-m")
    throw validation_error("--scheme must be one of s|ar|m|enhanced-m");
  const bool needs_dict = a.scheme != "s";
  if (needs_dict && a.dict_dir.empty())
    throw validation_error("scheme " + a.scheme + " requires --dict DIR");
  if (a.scheme == "enhanced-m" && a.pattern2.empty())
    throw validation_error(
        "scheme enhanced-m requires --pattern2 FILE (second data set); "
        "usage: dsm run --scheme enhanced-m --pattern A1 --pattern2 A2 "
        "--dict D1 --dict2 D2 ...");
  if (a.scheme == "enhanced-m" && a.dict2_dir.empty())
    throw validation_error("scheme enhanced-m requires --dict2 DIR");

  const QuadratureRule rule = lebedev_rule(peek_node_count(a.pattern));
  FarFieldPattern A = read_pattern(a.pattern, rule);
  if (a.noise > 0) A = apply_noise(A, a.noise, a.seed, rule);
  const SamplingGrid grid(parse_triple(a.grid_lo, "--grid-lo"),
                          parse_triple(a.grid_hi, "--grid-hi"), a.spacing);

  PeakParams pp;
  pp.threshold_frac = a.threshold_frac;
  pp.min_separation = a.min_separation;
  ArParams ap;
  ap.tol = a.tol;
  ap.max_per_entry = a.max_per_entry;
  ap.trim_margin = a.trim_margin;
  std::optional<FarFieldPattern> crop;
  if (!a.crop_pattern.empty()) {
    crop = read_pattern(a.crop_pattern, rule);
    ap.crop_data = &*crop;
    ap.crop_radius = a.crop_radius;
    ap.crop_threshold_frac = a.crop_threshold_frac;
  }
  ResampleConfig cfg;
  cfg.subdivisions = a.subdivisions;
  cfg.side = a.side;
  cfg.cap = static_cast<std::uint64_t>(a.cap);
  cfg.greedy = a.greedy;
  cfg.presence = a.presence;
  cfg.threads = a.threads;

  fs::create_directories(a.out_dir);
  ReconstructionReport rep;
  const Dictionary* dump_dict = nullptr;  // dictionary the entry dumps use
  const FarFieldPattern* dump_data = &A;  // data set the dumps evaluate
  std::optional<Dictionary> dict, dict2;
  std::optional<FarFieldPattern> A2;
  if (a.scheme == "s") {
    rep = run_scheme_s(A, grid, rule, pp);
  } else {
    dict = read_dictionary(a.dict_dir, rule);
    // the manifest records only shape ids; synthetic shapes are recovered by
    // id, anything else (ball radii, materials) must come from --shapes
    std::vector<ShapeModel> shapes;
    if (!a.shapes.empty()) shapes = parse_shapes_spec(a.shapes);
    for (const DictionaryEntry& e : dict->entries) {
      bool seen = false;
      for (const ShapeModel& s : shapes) seen = seen || s.id == e.shape_id;
      if (seen) continue;
      if (e.shape_id == "kite-like")
        shapes.push_back(ShapeModel::synthetic_kite());
      else if (e.shape_id == "peanut-like")
        shapes.push_back(ShapeModel::synthetic_peanut());
      else
        throw validation_error("dictionary shape '" + e.shape_id +
                               "' needs --shapes (e.g. --shapes ball:RADIUS)");
    }
    if (a.scheme == "ar") {
      rep = run_scheme_ar(A, *dict, shapes, grid, rule, ap);
      dump_dict = &*dict;
    } else if (a.scheme == "m") {
      rep = run_scheme_m(A, *dict, shapes, grid, rule, ap, cfg, pp);
      dump_dict = &*dict;
    } else {
      const int n2 = peek_node_count(a.pattern2);
      if (n2 != rule.size())
        throw validation_error("the two pattern files use different rules");
      A2 = read_pattern(a.pattern2, rule);
      if (a.noise > 0) A2 = apply_noise(*A2, a.noise, a.seed + 1, rule);
      dict2 = read_dictionary(a.dict2_dir, rule);
      rep = run_enhanced_m(A, *A2, *dict, *dict2, shapes, grid, rule, ap, cfg, pp);
      dump_dict = &*dict2;  // entry indices are re-keyed to the second space
      dump_data = &*A2;
    }
  }

  // stage artifacts: sampling-indicator field for the point-scatterer stage,
  // one entry-indicator field per matched dictionary component
  if (a.scheme == "s") {
    write_field_file(evaluate_grid_s(A, grid, rule, true),
                     fs::path(a.out_dir) / "indicator_s.txt");
  } else {
    int i = 0;
    std::vector<const DictionaryEntry*> matched;
    std::vector<Vec3> positions;
    for (const FoundComponent& c : rep.components) {
      if (c.entry_index < 0) continue;
      const DictionaryEntry& e = dump_dict->entries[c.entry_index];
      matched.push_back(&e);
      positions.push_back(c.position);
      write_field_file(
          evaluate_grid_r(*dump_data, e, grid, rule),
          fs::path(a.out_dir) / ("indicator_entry_" + std::to_string(i++) + ".txt"));
    }
    if ((a.scheme == "m" || a.scheme == "enhanced-m") && !matched.empty()) {
      const FarFieldPattern R =
          resample_residual(*dump_data, matched, positions, rule);
      if (t2_norm(R.field, rule) > 0)
        write_field_file(evaluate_grid_s(R, grid, rule, false),
                         fs::path(a.out_dir) / "indicator_residual.txt");
    }
  }
  {
    std::ofstream os(fs::path(a.out_dir) / "report.txt");
    if (!os) throw io_error("cannot open report file in '" + a.out_dir + "'");
    write_report(rep, os);
  }
  std::cout << "components " << rep.components.size() << "\n"
            << "report " << (fs::path(a.out_dir) / "report.txt").string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Direct-sampling reconstruction of multi-scale scatterers from "
               "single-measurement far-field data"};
  app.require_subcommand(1);

  ForwardArgs fa;
  CLI::App* fwd = app.add_subcommand("forward", "Synthesize far-field data for a scene");
  fwd->add_option("--scene", fa.scene_path, "Scene file")->required();
  fwd->add_option("--out", fa.out_path, "Output pattern file")->required();
  fwd->add_option("--k", fa.k, "Wavenumber");
  fwd->add_option("--d", fa.d, "Incident direction x,y,z");
  fwd->add_option("--p", fa.p, "Polarization x,y,z");
  fwd->add_option("--nodes", fa.nodes, "Quadrature node count");
  fwd->add_option("--noise", fa.noise, "Relative noise level");
  fwd->add_option("--seed", fa.seed, "Noise seed");

  DictArgs da;
  CLI::App* dic = app.add_subcommand("dict", "Build a reference dictionary");
  dic->add_option("--shapes", da.shapes, "Comma list: kite|peanut|ball:R[:material]")->required();
  dic->add_option("--out", da.out_dir, "Output directory")->required();
  dic->add_option("--k", da.k, "Wavenumber");
  dic->add_option("--d", da.d, "Incident direction x,y,z");
  dic->add_option("--p", da.p, "Polarization x,y,z");
  dic->add_option("--nodes", da.nodes, "Quadrature node count");
  dic->add_option("--step", da.step, "Orientation angle step (radians)");
  dic->add_option("--scales", da.scales, "Comma list of scale factors");
  dic->add_flag("--full3d", da.full3d, "Sample full 3D orientations");
  dic->add_option("--distinct-threshold", da.distinct, "Distinctness threshold");

  RunArgs ra;
  CLI::App* run = app.add_subcommand("run", "Run a locating scheme");
  run->add_option("--scheme", ra.scheme, "s | ar | m | enhanced-m")->required();
  run->add_option("--pattern", ra.pattern, "Far-field pattern file")->required();
  run->add_option("--pattern2", ra.pattern2, "Second pattern (enhanced-m)");
  run->add_option("--dict", ra.dict_dir, "Dictionary directory");
  run->add_option("--dict2", ra.dict2_dir, "Second dictionary (enhanced-m)");
  run->add_option("--shapes", ra.shapes, "Shape models for non-synthetic dictionary ids");
  run->add_option("--out", ra.out_dir, "Output directory")->required();
  run->add_option("--grid-lo", ra.grid_lo, "Grid lower corner x,y,z");
  run->add_option("--grid-hi", ra.grid_hi, "Grid upper corner x,y,z");
  run->add_option("--spacing", ra.spacing, "Grid spacing");
  run->add_option("--noise", ra.noise, "Relative noise applied to inputs");
  run->add_option("--seed", ra.seed, "Noise seed");
  run->add_option("--tol", ra.tol, "Dictionary acceptance |I-1| tolerance");
  run->add_option("--max-per-entry", ra.max_per_entry, "Detections per entry");
  run->add_option("--trim-margin", ra.trim_margin, "Extra trim radius");
  run->add_option("--crop-pattern", ra.crop_pattern, "Coarse-stage pattern for cropping");
  run->add_option("--crop-radius", ra.crop_radius, "Crop ball radius");
  run->add_option("--crop-threshold-frac", ra.crop_threshold_frac, "Crop peak threshold");
  run->add_option("--threshold-frac", ra.threshold_frac, "Peak threshold fraction");
  run->add_option("--min-separation", ra.min_separation, "Peak merge distance (0: half wavelength)");
  run->add_option("--subdivisions", ra.subdivisions, "Fine-cube subdivisions per axis");
  run->add_option("--side", ra.side, "Fine-cube side length");
  run->add_option("--cap", ra.cap, "Candidate tuple cap");
  run->add_flag("--greedy", ra.greedy, "Greedy per-component search beyond the cap");
  run->add_option("--presence", ra.presence, "Small-component presence threshold");
  run->add_option("--threads", ra.threads, "Worker thread bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fwd) return cmd_forward(fa);
    if (*dic) return cmd_dict(da);
    return cmd_run(ra);
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

#include <doctest.h>

#include <sstream>

#include "dsm/farfield.hpp"
#include "dsm/harmonics.hpp"

using namespace dsm;

namespace {

const QuadratureRule& rule26() {
  static QuadratureRule r = lebedev_rule(26);
  return r;
}

IncidentWave wave() { return IncidentWave(2.0, {1, 0, 0}, {0, 0, 1}); }

FarFieldPattern sample_pattern() {
  const QuadratureRule& r = rule26();
  TangentialField f;
  f.rule_id = r.size();
  for (int q = 0; q < r.size(); ++q) {
    const Vec3& n = r.nodes[q];
    f.values.push_back({complex(n.y, 0.2), complex(-n.x, n.z), complex(0.7, n.y)});
  }
  project_tangential(f, r);
  return FarFieldPattern(std::move(f), wave());
}

double pattern_distance(const FarFieldPattern& a, const FarFieldPattern& b) {
  double s = 0;
  for (size_t q = 0; q < a.field.values.size(); ++q)
    s = std::max(s, (a.field.values[q] - b.field.values[q]).norm());
  return s;
}

}  // namespace

TEST_CASE("incident wave validation") {
  CHECK_THROWS_AS(IncidentWave(0.0, {1, 0, 0}, {0, 0, 1}), validation_error);
  CHECK_THROWS_AS(IncidentWave(1.0, {1, 1, 0}, {0, 0, 1}), validation_error);
  CHECK_THROWS_AS(IncidentWave(1.0, {1, 0, 0}, {0.5, 0, 1}), validation_error);
  IncidentWave w(pi, {0, 1, 0}, {0, 0, -2});
  CHECK(w.k == pi);
}

TEST_CASE("translate_phase properties") {
  const QuadratureRule& r = rule26();
  FarFieldPattern A = sample_pattern();

  CHECK(pattern_distance(translate_phase(A, {0, 0, 0}, r), A) == 0.0);

  Vec3 z1{0.3, -1.2, 0.5}, z2{-0.7, 0.1, 2.0};
  FarFieldPattern twice = translate_phase(translate_phase(A, z1, r), z2, r);
  FarFieldPattern once = translate_phase(A, z1 + z2, r);
  CHECK(pattern_distance(twice, once) < 1e-12);

  FarFieldPattern T = translate_phase(A, z1, r);
  for (int q = 0; q < r.size(); ++q)
    CHECK(T.field.values[q].norm() ==
          doctest::Approx(A.field.values[q].norm()).epsilon(1e-12));
  CHECK(t2_norm(T.field, r) == doctest::Approx(t2_norm(A.field, r)).epsilon(1e-12));
}

TEST_CASE("subtract and scale_amplitude") {
  const QuadratureRule& r = rule26();
  FarFieldPattern A = sample_pattern();

  FarFieldPattern zero = subtract(A, A);
  CHECK(t2_norm(zero.field, r) == 0.0);

  CHECK(pattern_distance(scale_amplitude(A, complex(1)), A) == 0.0);

  FarFieldPattern B = scale_amplitude(A, complex(0.5, 1.5));
  CHECK(t2_norm(subtract(A, B).field, r) <=
        t2_norm(A.field, r) + t2_norm(B.field, r));

  // metadata mismatch
  TangentialField f = A.field;
  FarFieldPattern C(std::move(f), IncidentWave(3.0, {1, 0, 0}, {0, 0, 1}));
  CHECK_THROWS_AS(subtract(A, C), validation_error);

  // translate commutes with scale and distributes over subtract
  Vec3 z{1.0, -0.4, 0.2};
  complex c(0.3, -2.0);
  CHECK(pattern_distance(translate_phase(scale_amplitude(A, c), z, r),
                         scale_amplitude(translate_phase(A, z, r), c)) < 1e-12);
  CHECK(pattern_distance(translate_phase(subtract(A, B), z, r),
                         subtract(translate_phase(A, z, r),
                                  translate_phase(B, z, r))) < 1e-12);
}

TEST_CASE("apply_noise contract") {
  const QuadratureRule& r = rule26();
  FarFieldPattern A = sample_pattern();

  CHECK(pattern_distance(apply_noise(A, 0.0, 7, r), A) == 0.0);
  CHECK(pattern_distance(apply_noise(A, 0.03, 42, r),
                         apply_noise(A, 0.03, 42, r)) == 0.0);
  CHECK(pattern_distance(apply_noise(A, 0.03, 42, r),
                         apply_noise(A, 0.03, 43, r)) > 0.0);

  double amax = 0;
  for (const auto& v : A.field.values) amax = std::max(amax, v.norm());
  const double delta = 0.05;
  FarFieldPattern N = apply_noise(A, delta, 1234, r);
  // per-component perturbation is bounded by delta * max|A| before the
  // tangential re-projection, which cannot increase a component-wise bound of
  // the perturbation vector's norm beyond sqrt(3) of it
  for (int q = 0; q < r.size(); ++q)
    CHECK((N.field.values[q] - A.field.values[q]).norm() <=
          std::sqrt(3.0) * delta * amax * (1 + 1e-12));

  // tangency preserved
  for (int q = 0; q < r.size(); ++q)
    CHECK(std::abs(N.field.values[q].dot(CVec3(r.nodes[q]))) <
          1e-10 * (N.field.values[q].norm() + 1e-30));
}

TEST_CASE("apply_noise is mean-zero over many seeds") {
  const QuadratureRule& r = rule26();
  FarFieldPattern A = sample_pattern();
  const double delta = 0.05;
  const int trials = 10000;
  double amax = 0;
  for (const auto& v : A.field.values) amax = std::max(amax, v.norm());

  std::vector<CVec3> mean(r.size());
  for (int s = 0; s < trials; ++s) {
    FarFieldPattern N = apply_noise(A, delta, 1000 + s, r);
    for (int q = 0; q < r.size(); ++q)
      mean[q] += N.field.values[q] - A.field.values[q];
  }
  for (int q = 0; q < r.size(); ++q) {
    CVec3 m = complex(1.0 / trials) * mean[q];
    CHECK(m.norm() < 3 * delta * amax / std::sqrt(double(trials)));
  }
}

TEST_CASE("pattern file round-trip") {
  const QuadratureRule& r = rule26();
  FarFieldPattern A = sample_pattern();
  std::stringstream ss;
  write_pattern(A, ss, r);
  FarFieldPattern B = read_pattern(ss, r);
  CHECK(B.wave.compatible(A.wave));
  for (int q = 0; q < r.size(); ++q)
    CHECK((B.field.values[q] - A.field.values[q]).norm() <=
          1e-15 * (A.field.values[q].norm() + 1e-30));
}

TEST_CASE("pattern parse errors carry line numbers") {
  const QuadratureRule& r = rule26();

  std::stringstream empty("");
  CHECK_THROWS_WITH_AS(read_pattern(empty, r), doctest::Contains("line 1"),
                       io_error);

  std::stringstream badheader("1.0 1 0 0 0 0\n");
  CHECK_THROWS_AS(read_pattern(badheader, r), io_error);

  // header declares 26 nodes but provides none
  std::stringstream truncated("2 1 0 0 0 0 1 26\n");
  CHECK_THROWS_WITH_AS(read_pattern(truncated, r),
                       doctest::Contains("fewer rows"), io_error);

  // header count disagrees with the rule
  std::stringstream wrongcount("2 1 0 0 0 0 1 12\n");
  CHECK_THROWS_WITH_AS(read_pattern(wrongcount, r),
                       doctest::Contains("does not match rule size"), io_error);

  // malformed data row is reported at its line
  FarFieldPattern A = sample_pattern();
  std::stringstream good;
  write_pattern(A, good, r);
  std::string text = good.str();
  size_t first_nl = text.find('\n');
  size_t second_nl = text.find('\n', first_nl + 1);
  std::string broken =
      text.substr(0, first_nl + 1) + "not numbers\n" + text.substr(second_nl + 1);
  std::stringstream bs(broken);
  CHECK_THROWS_WITH_AS(read_pattern(bs, r), doctest::Contains("line 2"), io_error);
}

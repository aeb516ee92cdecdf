#include <doctest.h>

#include <array>

#include "dsm/core.hpp"
#include "dsm/quadrature.hpp"

using namespace dsm;

namespace {

// Exact surface integral of x^(2a) y^(2b) z^(2c) over the unit sphere:
//   4*pi * (2a)!(2b)!(2c)! (a+b+c)! / ( a! b! c! (2(a+b+c)+1)! )
double even_monomial_integral(int a, int b, int c) {
  auto fact = [](int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
  };
  return four_pi * fact(2 * a) * fact(2 * b) * fact(2 * c) * fact(a + b + c) /
         (fact(a) * fact(b) * fact(c) * fact(2 * (a + b + c) + 1));
}

double integrate_monomial(const QuadratureRule& r, int a, int b, int c) {
  double s = 0;
  for (int q = 0; q < r.size(); ++q) {
    const Vec3& n = r.nodes[q];
    s += r.weights[q] * std::pow(n.x, a) * std::pow(n.y, b) * std::pow(n.z, c);
  }
  return s;
}

constexpr std::array<int, 5> kCounts{6, 26, 110, 302, 590};

}  // namespace

TEST_CASE("lebedev rules satisfy node and weight invariants") {
  for (int count : kCounts) {
    CAPTURE(count);
    QuadratureRule r = lebedev_rule(count);
    CHECK(r.size() == count);
    double wsum = 0;
    for (int q = 0; q < r.size(); ++q) {
      CHECK(std::abs(r.nodes[q].norm() - 1.0) < 1e-12);
      CHECK(r.weights[q] > 0.0);
      wsum += r.weights[q];
    }
    CHECK(std::abs(wsum - four_pi) < 1e-10);
  }
}

TEST_CASE("unsupported point count raises a descriptive error") {
  CHECK_THROWS_AS(lebedev_rule(50), validation_error);
  CHECK_THROWS_WITH_AS(lebedev_rule(7),
                       doctest::Contains("unsupported rule"), validation_error);
}

TEST_CASE("6-point rule integrates constants exactly") {
  QuadratureRule r = lebedev_rule(6);
  CHECK(integrate_monomial(r, 0, 0, 0) == doctest::Approx(four_pi).epsilon(1e-14));
}

TEST_CASE("even monomials integrate to closed form up to exactness degree") {
  for (int count : kCounts) {
    QuadratureRule r = lebedev_rule(count);
    for (int a = 0; 2 * a <= r.exactness; ++a)
      for (int b = 0; 2 * (a + b) <= r.exactness; ++b)
        for (int c = 0; 2 * (a + b + c) <= r.exactness; ++c) {
          CAPTURE(count);
          CAPTURE(a);
          CAPTURE(b);
          CAPTURE(c);
          double got = integrate_monomial(r, 2 * a, 2 * b, 2 * c);
          double want = even_monomial_integral(a, b, c);
          CHECK(std::abs(got - want) < 1e-10 * four_pi);
        }
  }
}

TEST_CASE("odd monomials integrate to zero") {
  for (int count : kCounts) {
    QuadratureRule r = lebedev_rule(count);
    CHECK(std::abs(integrate_monomial(r, 1, 0, 0)) < 1e-12 * four_pi);
    CHECK(std::abs(integrate_monomial(r, 1, 2, 0)) < 1e-12 * four_pi);
    CHECK(std::abs(integrate_monomial(r, 3, 1, 1)) < 1e-12 * four_pi);
    CHECK(std::abs(integrate_monomial(r, 0, 1, 4)) < 1e-12 * four_pi);
  }
}

TEST_CASE("rules are bit-reproducible across constructions") {
  for (int count : kCounts) {
    QuadratureRule a = lebedev_rule(count);
    QuadratureRule b = lebedev_rule(count);
    for (int q = 0; q < a.size(); ++q) {
      CHECK(a.nodes[q].x == b.nodes[q].x);
      CHECK(a.nodes[q].y == b.nodes[q].y);
      CHECK(a.nodes[q].z == b.nodes[q].z);
      CHECK(a.weights[q] == b.weights[q]);
    }
  }
}

TEST_CASE("t2 inner product basics") {
  QuadratureRule r = lebedev_rule(26);
  TangentialField a, b;
  a.rule_id = b.rule_id = r.size();
  for (int q = 0; q < r.size(); ++q) {
    // arbitrary smooth fields, made tangential below
    const Vec3& n = r.nodes[q];
    a.values.push_back({complex(n.x, n.y), complex(n.z, 0.5), complex(1, -n.x)});
    b.values.push_back({complex(0.3, n.z), complex(n.y, n.x), complex(-1, 0.2)});
  }
  project_tangential(a, r);
  project_tangential(b, r);

  for (int q = 0; q < r.size(); ++q)
    CHECK(std::abs(a.values[q].dot(CVec3(r.nodes[q]))) <=
          1e-10 * a.values[q].norm() + 1e-15);

  complex aa = t2_inner(a, a, r);
  CHECK(aa.real() >= 0.0);
  CHECK(std::abs(aa.imag()) <= 1e-12 * aa.real());
  CHECK(t2_norm(a, r) == doctest::Approx(std::sqrt(aa.real())));

  // conjugate-linearity in the second slot: <a, i b> = -i <a, b>
  TangentialField ib = b;
  for (auto& v : ib.values) v = complex(0, 1) * v;
  complex lhs = t2_inner(a, ib, r);
  complex rhs = complex(0, -1) * t2_inner(a, b, r);
  CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(rhs));

  // homogeneity of the norm
  complex cc(1.25, -0.5);
  TangentialField ca = a;
  for (auto& v : ca.values) v = cc * v;
  CHECK(t2_norm(ca, r) ==
        doctest::Approx(std::abs(cc) * t2_norm(a, r)).epsilon(1e-12));

  // zero field
  TangentialField zero;
  zero.rule_id = r.size();
  zero.values.assign(r.size(), CVec3{});
  CHECK(t2_norm(zero, r) == 0.0);

  // mismatched rule
  QuadratureRule r6 = lebedev_rule(6);
  TangentialField small;
  small.rule_id = 6;
  small.values.assign(6, CVec3{});
  CHECK_THROWS_AS(t2_inner(a, small, r), validation_error);
}

#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "dsm/core.hpp"
#include "dsm/farfield.hpp"
#include "dsm/harmonics.hpp"
#include "dsm/quadrature.hpp"
#include "dsm/rotation.hpp"

namespace dsm {

/// Scatterer material: perfect conductor or homogeneous penetrable medium
/// with relative permittivity eps, permeability mu, conductivity sigma.
struct Material {
  enum class Kind { PEC, Medium };
  Kind kind = Kind::PEC;
  double eps = 1, mu = 1, sigma = 0;

  static Material pec() { return Material{}; }
  static Material medium(double eps, double mu, double sigma) {
    if (!(eps > 0) || !(mu > 0) || sigma < 0)
      throw validation_error("material: require eps > 0, mu > 0, sigma >= 0");
    if (std::abs(eps - 1) + std::abs(mu - 1) + std::abs(sigma) <= 0)
      throw validation_error(
          "material: medium must have contrast (|eps-1|+|mu-1|+|sigma| > 0)");
    Material m;
    m.kind = Kind::Medium;
    m.eps = eps;
    m.mu = mu;
    m.sigma = sigma;
    return m;
  }

  bool operator==(const Material& o) const {
    return kind == o.kind && eps == o.eps && mu == o.mu && sigma == o.sigma;
  }
};

/// Multipole scattering coefficients of a sphere, n = 1..order.
/// electric[n-1] is the coefficient whose small-sphere (Rayleigh) limit is
/// (2i/3)(ka)^3 (eps-1)/(eps+2); magnetic[n-1] the dual with mu.
struct MieCoefficients {
  int order = 0;
  std::vector<complex> electric, magnetic;
};

namespace detail {

/// Riccati-Bessel psi_n(x) = x j_n(x) and xi_n(x) = x h_n^(1)(x) together
/// with derivatives, n = 0..order, for real x > 0.
struct RiccatiBessel {
  std::vector<double> psi, dpsi;
  std::vector<complex> xi, dxi;
};

inline RiccatiBessel riccati_bessel(int order, double x) {
  if (!(x > 0)) throw validation_error("riccati_bessel: require x > 0");
  RiccatiBessel rb;
  // spherical j_n by downward (Miller) recurrence, normalized at j_0
  const int start = order + 20 + static_cast<int>(x);
  std::vector<double> j(start + 2, 0.0);
  j[start + 1] = 0.0;
  j[start] = 1e-300;
  for (int n = start; n >= 1; --n) {
    j[n - 1] = (2.0 * n + 1.0) / x * j[n] - j[n + 1];
    if (std::abs(j[n - 1]) > 1e250)
      for (int i = n - 1; i <= start + 1; ++i) j[i] *= 1e-250;
  }
  const double scale = (std::sin(x) / x) / j[0];
  for (auto& v : j) v *= scale;
  // spherical y_n by upward recurrence (stable)
  std::vector<double> y(order + 2, 0.0);
  y[0] = -std::cos(x) / x;
  y[1] = -std::cos(x) / (x * x) - std::sin(x) / x;
  for (int n = 1; n <= order; ++n)
    y[n + 1] = (2.0 * n + 1.0) / x * y[n] - y[n - 1];

  rb.psi.resize(order + 1);
  rb.dpsi.resize(order + 1);
  rb.xi.resize(order + 1);
  rb.dxi.resize(order + 1);
  for (int n = 0; n <= order; ++n) {
    rb.psi[n] = x * j[n];
    rb.xi[n] = complex(x * j[n], x * y[n]);
  }
  rb.dpsi[0] = std::cos(x);
  rb.dxi[0] = complex(std::cos(x), std::sin(x));
  for (int n = 1; n <= order; ++n) {
    rb.dpsi[n] = rb.psi[n - 1] - n * rb.psi[n] / x;
    rb.dxi[n] = rb.xi[n - 1] - complex(n) * rb.xi[n] / x;
  }
  return rb;
}

/// Logarithmic derivative D_n(z) = psi_n'(z)/psi_n(z) by downward recurrence.
inline std::vector<complex> log_derivative(int order, complex z) {
  const int start = order + 15 + static_cast<int>(std::abs(z));
  std::vector<complex> D(start + 1, complex{});
  for (int n = start; n >= 1; --n)
    D[n - 1] = complex(n) / z - 1.0 / (D[n] + complex(n) / z);
  D.resize(order + 1);
  return D;
}

/// Mie series for a sphere of size parameter x = k*a with given relative
/// (possibly complex-effective) permittivity and permeability; pec switches
/// to the perfectly conducting boundary condition.
inline MieCoefficients mie_raw(double x, complex eps, complex mu, bool pec,
                               int order) {
  MieCoefficients mc;
  mc.order = order;
  mc.electric.resize(order);
  mc.magnetic.resize(order);
  const RiccatiBessel rb = riccati_bessel(order, x);
  if (pec) {
    for (int n = 1; n <= order; ++n) {
      mc.electric[n - 1] = -(rb.psi[n] / rb.xi[n]);
      mc.magnetic[n - 1] = -(rb.dpsi[n] / rb.dxi[n]);
    }
    return mc;
  }
  const complex m = std::sqrt(eps * mu);
  const auto D = log_derivative(order, m * x);
  for (int n = 1; n <= order; ++n) {
    const complex an = (m * rb.dpsi[n] - mu * D[n] * rb.psi[n]) /
                       (m * rb.dxi[n] - mu * D[n] * rb.xi[n]);
    const complex bn = (m * rb.dpsi[n] - eps * D[n] * rb.psi[n]) /
                       (m * rb.dxi[n] - eps * D[n] * rb.xi[n]);
    mc.electric[n - 1] = -an;
    mc.magnetic[n - 1] = -bn;
  }
  return mc;
}

}  // namespace detail

/// Multipole coefficients of a sphere of radius a at wavenumber k, truncated
/// at the given order; throws if the truncation has not converged.
inline MieCoefficients mie_coefficients(double a, const Material& mat, double k,
                                        int order) {
  if (!(k * a > 0)) throw validation_error("mie_coefficients: require k*a > 0");
  if (order < k * a + 10)
    throw validation_error("mie_coefficients: order must be >= k*a + 10");
  const bool pec = mat.kind == Material::Kind::PEC;
  const complex eps_eff(mat.eps, pec ? 0.0 : mat.sigma / k);
  MieCoefficients mc =
      detail::mie_raw(k * a, eps_eff, complex(mat.mu), pec, order);
  // convergence: the last retained order must be negligible
  double total = 0, tail = 0;
  for (int n = 1; n <= order; ++n) {
    const double w = (2.0 * n + 1.0) * (std::norm(mc.electric[n - 1]) +
                                        std::norm(mc.magnetic[n - 1]));
    total += w;
    if (n == order) tail = w;
  }
  if (total > 0 && std::sqrt(tail / total) > 1e-12)
    throw numerical_error(
        "mie_coefficients: truncation order " + std::to_string(order) +
        " has not converged at k*a = " + std::to_string(k * a));
  return mc;
}

/// Dense truncated transition matrix over the combined multipole index
/// (sigma, n, m): sigma in {1 = electric/U, 2 = magnetic/V}, 1 <= n <= order,
/// |m| <= n. The far field of the shape under the incident wave (k, d, p) is
///   A(xhat) = sum_b W_b(xhat) * (T c)_b,  c_b = conj(W_b(d)) . p,
/// with W^1 = U, W^2 = V.
struct Tmatrix {
  int order = 0;
  std::vector<complex> a;

  explicit Tmatrix(int order_) : order(order_), a(size_t(dim()) * dim()) {}
  static int block_of(int order) { return order * (order + 2); }
  static int index_of(int order, int sigma, int n, int m) {
    return (sigma - 1) * block_of(order) + (n * n - 1) + (m + n);
  }
  int block() const { return block_of(order); }
  int dim() const { return 2 * block(); }
  int index(int sigma, int n, int m) const { return index_of(order, sigma, n, m); }
  complex& at(int si, int n, int m, int sj, int n2, int m2) {
    return a[size_t(index(si, n, m)) * dim() + index(sj, n2, m2)];
  }
  complex at(int si, int n, int m, int sj, int n2, int m2) const {
    return a[size_t(index(si, n, m)) * dim() + index(sj, n2, m2)];
  }
};

/// Conjugated similarity transform of T by the rotation R (the transition
/// matrix of the rotated scatterer).
inline Tmatrix rotate_t(const Tmatrix& T, const Mat3& R) {
  const auto D = wigner_blocks(T.order, R);
  const int dim = T.dim();
  // left multiply: M = Delta * T
  std::vector<complex> M(size_t(dim) * dim, complex{});
  for (int s = 1; s <= 2; ++s)
    for (int n = 1; n <= T.order; ++n) {
      const int w = 2 * n + 1;
      for (int m = -n; m <= n; ++m) {
        const int row = T.index(s, n, m);
        for (int mu = -n; mu <= n; ++mu) {
          const complex d = D[n][(m + n) * w + (mu + n)];
          if (d == complex{}) continue;
          const int src = T.index(s, n, mu);
          for (int col = 0; col < dim; ++col)
            M[size_t(row) * dim + col] += d * T.a[size_t(src) * dim + col];
        }
      }
    }
  // right multiply by Delta^H
  Tmatrix out(T.order);
  for (int s = 1; s <= 2; ++s)
    for (int n = 1; n <= T.order; ++n) {
      const int w = 2 * n + 1;
      for (int m = -n; m <= n; ++m) {
        const int col = T.index(s, n, m);
        for (int mu = -n; mu <= n; ++mu) {
          const complex dh = std::conj(D[n][(m + n) * w + (mu + n)]);
          if (dh == complex{}) continue;
          const int src = T.index(s, n, mu);
          for (int row = 0; row < dim; ++row)
            out.a[size_t(row) * dim + col] += M[size_t(row) * dim + src] * dh;
        }
      }
    }
  return out;
}

/// Incidence coefficient vector c_b = conj(W_b(d)) . p.
inline std::vector<complex> incidence_coefficients(int order,
                                                   const IncidentWave& wave) {
  const VshValues vd = vsh_all(order, wave.d);
  const CVec3 p(wave.p);
  std::vector<complex> c(2 * Tmatrix::block_of(order));
  for (int s = 1; s <= 2; ++s)
    for (int n = 1; n <= order; ++n)
      for (int m = -n; m <= n; ++m) {
        const CVec3& w = s == 1 ? vd.U[sh_index(n, m)] : vd.V[sh_index(n, m)];
        c[Tmatrix::index_of(order, s, n, m)] = w.conj().dot(p);
      }
  return c;
}

/// Far-field value of the transition matrix T at a single direction.
inline CVec3 far_field_value(const Tmatrix& T, const IncidentWave& wave,
                             const Vec3& xhat) {
  const auto c = incidence_coefficients(T.order, wave);
  const int dim = T.dim();
  std::vector<complex> y(dim, complex{});
  for (int r = 0; r < dim; ++r)
    for (int j = 0; j < dim; ++j) y[r] += T.a[size_t(r) * dim + j] * c[j];
  const VshValues vx = vsh_all(T.order, xhat);
  CVec3 A{};
  for (int s = 1; s <= 2; ++s)
    for (int n = 1; n <= T.order; ++n)
      for (int m = -n; m <= n; ++m) {
        const CVec3& w = s == 1 ? vx.U[sh_index(n, m)] : vx.V[sh_index(n, m)];
        A += y[T.index(s, n, m)] * w;
      }
  return A;
}

/// Far-field pattern of T on all nodes of the rule.
inline FarFieldPattern t_far_field(const Tmatrix& T, const IncidentWave& wave,
                                   const QuadratureRule& rule) {
  const auto c = incidence_coefficients(T.order, wave);
  const int dim = T.dim();
  std::vector<complex> y(dim, complex{});
  for (int r = 0; r < dim; ++r) {
    complex s{};
    for (int j = 0; j < dim; ++j) s += T.a[size_t(r) * dim + j] * c[j];
    y[r] = s;
  }
  TangentialField f;
  f.rule_id = rule.size();
  f.values.reserve(rule.nodes.size());
  for (const Vec3& x : rule.nodes) {
    const VshValues vx = vsh_all(T.order, x);
    CVec3 A{};
    for (int s = 1; s <= 2; ++s)
      for (int n = 1; n <= T.order; ++n)
        for (int m = -n; m <= n; ++m) {
          const CVec3& w = s == 1 ? vx.U[sh_index(n, m)] : vx.V[sh_index(n, m)];
          A += y[Tmatrix::index_of(T.order, s, n, m)] * w;
        }
    f.values.push_back(A);
  }
  return FarFieldPattern(std::move(f), wave);
}

/// Reference scatterer shape: either an exact Mie sphere or a synthetic
/// non-symmetric shape defined by sparse polynomial-in-k transition entries
/// in a body frame (symmetry axis along z), tilted into the reference frame.
struct ShapeModel {
  enum class Kind { MieSphere, Synthetic };

  std::string id;
  Material material;
  Kind kind = Kind::MieSphere;
  double radius = 1;  // sphere radius, or circumradius for synthetic shapes

  struct Entry {
    int sigma, n, m, n2, m2;
    std::vector<complex> poly;  // coefficients of k^0, k^1, ...
  };
  int synth_order = 0;
  std::vector<Entry> entries;
  Mat3 tilt = Mat3::identity();  // body frame -> reference frame

  static ShapeModel ball(double radius, const Material& mat) {
    if (!(radius > 0)) throw validation_error("ball: radius must be positive");
    ShapeModel s;
    s.id = "ball";
    s.material = mat;
    s.kind = Kind::MieSphere;
    s.radius = radius;
    return s;
  }

  static ShapeModel synthetic_peanut();
  static ShapeModel synthetic_kite();

  int truncation_order(double k) const {
    if (kind == Kind::Synthetic) return synth_order;
    return static_cast<int>(std::ceil(k * radius)) + 10;
  }

  /// Transition matrix of the unrotated, unscaled shape at wavenumber k.
  Tmatrix t_matrix(double k) const {
    if (!(k > 0)) throw validation_error("t_matrix: require k > 0");
    if (kind == Kind::MieSphere) {
      const int N = truncation_order(k);
      const MieCoefficients mc = mie_coefficients(radius, material, k, N);
      Tmatrix T(N);
      const complex pref = complex(0, four_pi / k);
      for (int n = 1; n <= N; ++n)
        for (int m = -n; m <= n; ++m) {
          // t^E_n = -(4 pi i / k) * electric_n, likewise magnetic
          T.at(1, n, m, 1, n, m) = -pref * mc.electric[n - 1];
          T.at(2, n, m, 2, n, m) = -pref * mc.magnetic[n - 1];
        }
      return T;
    }
    Tmatrix body(synth_order);
    for (const Entry& e : entries) {
      complex v{};
      double kp = 1;
      for (const complex& c : e.poly) {
        v += c * kp;
        kp *= k;
      }
      body.at(e.sigma, e.n, e.m, e.sigma, e.n2, e.m2) = v;
    }
    return rotate_t(body, tilt);
  }
};

namespace detail {

/// Shared diagonal backbone of the synthetic shapes. Entries depend on m
/// only through |m|, so the shape is a body of revolution about the body
/// z-axis; the even n <-> n' couplings added here additionally preserve the
/// axis-flip symmetry (invariance under rotating the axis to its negative).
inline void add_synthetic_diagonal(ShapeModel& s, double strength) {
  auto push = [&](int sigma, int n, int m, int n2, int m2, complex lin,
                  complex quad) {
    s.entries.push_back({sigma, n, m, n2, m2, {complex{}, lin, quad}});
  };
  for (int m = -1; m <= 1; ++m) {
    const double g = (m == 0) ? 1.0 : 0.45;
    push(1, 1, m, 1, m, strength * g * complex(0.55, 0.15),
         strength * g * complex(0.0, 0.03));
    push(2, 1, m, 1, m, strength * g * complex(0.40, -0.12), complex{});
  }
  for (int m = -2; m <= 2; ++m) {
    const double g = 1.0 / (1.0 + m * m);
    push(1, 2, m, 2, m, strength * g * complex(0.30, -0.10), complex{});
    push(2, 2, m, 2, m, strength * g * complex(0.20, 0.08),
         strength * g * complex(0.01, 0.0));
  }
  for (int m = -3; m <= 3; ++m) {
    const double g = 1.0 / (1.0 + 0.5 * m * m);
    push(1, 3, m, 3, m, strength * g * complex(0.10, 0.05), complex{});
    push(2, 3, m, 3, m, strength * g * complex(0.07, -0.03), complex{});
  }
  // n = 1 <-> 3 coupling (flip-symmetric)
  for (int m = -1; m <= 1; ++m) {
    s.entries.push_back({1, 1, m, 3, m, {complex{}, strength * complex(0.10, 0.06)}});
    s.entries.push_back({1, 3, m, 1, m, {complex{}, strength * complex(0.10, 0.06)}});
    s.entries.push_back({2, 1, m, 3, m, {complex{}, strength * complex(0.08, -0.05)}});
    s.entries.push_back({2, 3, m, 1, m, {complex{}, strength * complex(0.08, -0.05)}});
  }
}

}  // namespace detail

inline ShapeModel ShapeModel::synthetic_peanut() {
  ShapeModel s;
  s.id = "peanut-like";
  s.material = Material::pec();
  s.kind = Kind::Synthetic;
  s.radius = 2.0;  // circumradius of the peanut profile sqrt(3 cos^2 s + 1)
  s.synth_order = 3;
  detail::add_synthetic_diagonal(s, 1.0);
  s.tilt = rot_y(pi / 2);  // symmetry axis along x in the reference frame
  return s;
}

inline ShapeModel ShapeModel::synthetic_kite() {
  ShapeModel s;
  s.id = "kite-like";
  s.material = Material::pec();
  s.kind = Kind::Synthetic;
  s.radius = 2.07;  // circumradius of the kite profile
  s.synth_order = 3;
  detail::add_synthetic_diagonal(s, 0.85);
  // n = 1 <-> 2 coupling: breaks the axis-flip symmetry, so all 8 in-plane
  // orientations at pi/4 steps are distinct
  for (int m = -1; m <= 1; ++m) {
    s.entries.push_back({1, 1, m, 2, m, {complex{}, complex(0.22, 0.10)}});
    s.entries.push_back({1, 2, m, 1, m, {complex{}, complex(0.22, 0.10)}});
    s.entries.push_back({2, 1, m, 2, m, {complex{}, complex(0.15, -0.09)}});
    s.entries.push_back({2, 2, m, 1, m, {complex{}, complex(0.15, -0.09)}});
  }
  s.tilt = rot_y(pi / 2);
  return s;
}

/// Position, orientation (Euler triple), and scale of one scene component.
struct Pose {
  Vec3 z{};
  double theta = 0, phi = 0, psi = 0;
  double tau = 1;

  Pose() = default;
  Pose(const Vec3& z_, double th, double ph, double ps, double tau_)
      : z(z_), theta(th), phi(ph), psi(ps), tau(tau_) {
    if (th < 0 || th > 2 * pi || ph < 0 || ph > 2 * pi)
      throw validation_error("pose: require 0 <= theta, phi <= 2 pi");
    if (ps < 0 || ps > pi) throw validation_error("pose: require 0 <= psi <= pi");
    if (!(tau_ > 0)) throw validation_error("pose: require tau > 0");
  }

  /// Rotation about the vertical axis by alpha in [0, 2 pi], expressed
  /// within the legal Euler ranges (psi is limited to [0, pi]).
  static Pose in_plane(const Vec3& z, double alpha, double tau) {
    if (alpha < 0 || alpha > 2 * pi)
      throw validation_error("in_plane: require 0 <= alpha <= 2 pi");
    if (alpha <= pi) return Pose(z, 0, 0, alpha, tau);
    return Pose(z, pi, pi, alpha - pi, tau);
  }

  Mat3 rotation() const { return euler_matrix(theta, phi, psi); }
};

/// Multi-component scatterer under the single-scattering superposition model.
struct Scene {
  std::vector<std::pair<ShapeModel, Pose>> components;

  void validate() const {
    for (size_t i = 0; i < components.size(); ++i)
      for (size_t j = i + 1; j < components.size(); ++j) {
        const auto& [si, pi_] = components[i];
        const auto& [sj, pj] = components[j];
        const double dist = (pi_.z - pj.z).norm();
        if (dist <= pi_.tau * si.radius + pj.tau * sj.radius)
          throw validation_error(
              "scene: components " + std::to_string(i) + " and " +
              std::to_string(j) + " overlap (center distance " +
              std::to_string(dist) + ")");
      }
  }

  /// Minimal pairwise center distance (infinity-like large value if < 2).
  double separation() const {
    double L = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < components.size(); ++i)
      for (size_t j = i + 1; j < components.size(); ++j)
        L = std::min(L, (components[i].second.z - components[j].second.z).norm());
    return L;
  }
};

/// Far field of one posed component: scale (evaluate the base shape at k*tau
/// and multiply by tau), rotate (conjugate the transition matrix), translate
/// (attach the phase factor).
inline FarFieldPattern eval_far_field(const ShapeModel& model, const Pose& pose,
                                      const IncidentWave& wave,
                                      const QuadratureRule& rule) {
  Tmatrix T = model.t_matrix(wave.k * pose.tau);
  const Mat3 R = pose.rotation();
  bool nontrivial_rotation = false;
  for (int i = 0; i < 9; ++i)
    if (std::abs(R.a[i] - Mat3::identity().a[i]) > 1e-15) nontrivial_rotation = true;
  if (nontrivial_rotation) T = rotate_t(T, R);
  FarFieldPattern A = t_far_field(T, wave, rule);
  A = scale_amplitude(A, complex(pose.tau));
  if (pose.z.norm() > 0) A = translate_phase(A, pose.z, rule);
  return A;
}

/// Superposition far field of the whole scene (inter-component multiple
/// scattering deliberately neglected; this is the simulator's model).
inline FarFieldPattern scene_far_field(const Scene& scene,
                                       const IncidentWave& wave,
                                       const QuadratureRule& rule) {
  scene.validate();
  FarFieldPattern sum = FarFieldPattern::zeros(rule, wave);
  for (const auto& [shape, pose] : scene.components) {
    FarFieldPattern A = eval_far_field(shape, pose, wave, rule);
    for (int q = 0; q < rule.size(); ++q)
      sum.field.values[q] += A.field.values[q];
  }
  return sum;
}

}  // namespace dsm

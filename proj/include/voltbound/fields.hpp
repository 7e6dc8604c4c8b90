#pragma once

// Exact planar forward solutions on layered-disk geometries, plus a simple
// laminate.  Potentials are represented per layer and per angular mode as
//   V_l(r, theta) = sum_n (a_{l,n} r^|n| + b_{l,n} r^-|n|) e^{i n theta}
// with complex coefficients (mode 0 uses the {1, log r} pair).  Each basis
// function is a pure z- or zbar-power, so per-phase volume moments reduce to
// closed-form radial integrals via the holomorphic/antiholomorphic split
//   v_plus = -2 conj(F'), v_minus = -2 G'   where V = F(z) + G(zbar).

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "voltbound/core.hpp"
#include "voltbound/measurement.hpp"
#include "voltbound/quadrature.hpp"

namespace voltbound {

// ---------------------------------------------------------------------------

struct LayeredDiskGeometry {
  std::vector<double> radii;       // interface radii, strictly increasing
  std::vector<int> layer_phase;    // phase label (1 or 2) per annular layer

  void validate() const {
    if (radii.empty() || radii.size() != layer_phase.size())
      throw Error(ErrorCode::InvalidInput,
                  "geometry needs one phase label per radius");
    double prev = 0.0;
    for (double r : radii) {
      if (!(r > prev) || !std::isfinite(r))
        throw Error(ErrorCode::InvalidRadii,
                    "radii must be positive and strictly increasing");
      prev = r;
    }
    for (int p : layer_phase)
      if (p != 1 && p != 2)
        throw Error(ErrorCode::InvalidInput, "layer phase must be 1 or 2");
  }

  double outer_radius() const { return radii.back(); }

  double volume_fraction_phase1() const {
    double area1 = 0.0, inner = 0.0;
    for (std::size_t l = 0; l < radii.size(); ++l) {
      const double a = radii[l] * radii[l] - inner * inner;
      if (layer_phase[l] == 1) area1 += a;
      inner = radii[l];
    }
    const double R = outer_radius();
    return area1 / (R * R);
  }
};

// Dirichlet data on the outer circle: V0(R, theta) = sum_n c_n e^{i n theta}.
struct FourierBC {
  std::map<int, Complex> modes;

  void validate() const {
    if (modes.empty())
      throw Error(ErrorCode::InvalidInput, "boundary condition has no modes");
    for (const auto& [n, c] : modes)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw Error(ErrorCode::InvalidInput, "boundary mode not finite");
  }

  // Affine data V0 = u . x for complex u: modes n = +-1.
  static FourierBC affine(const CVec2& u, double R) {
    FourierBC bc;
    bc.modes[1] = 0.5 * R * (u.x - Complex(0.0, 1.0) * u.y);
    bc.modes[-1] = 0.5 * R * (u.x + Complex(0.0, 1.0) * u.y);
    return bc;
  }
};

// ---------------------------------------------------------------------------

struct FieldSolution {
  struct Layer {
    double r_inner = 0.0;
    double r_outer = 0.0;
    Complex sigma;
    int phase = 1;
    // n -> (a, b): coefficient of r^|n| e^{i n theta} and r^-|n| e^{i n theta};
    // for n = 0 the pair multiplies {1, log r}.
    std::map<int, std::pair<Complex, Complex>> coeff;
  };

  std::vector<Layer> layers;

  double outer_radius() const { return layers.back().r_outer; }
  double area() const {
    const double R = outer_radius();
    return kPi * R * R;
  }

  const Layer& layer_at(double r) const {
    for (const auto& l : layers)
      if (r <= l.r_outer || &l == &layers.back()) return l;
    return layers.back();
  }

  Complex potential(double r, double theta) const {
    const Layer& l = layer_at(r);
    Complex v{0.0, 0.0};
    for (const auto& [n, ab] : l.coeff) {
      if (n == 0) {
        v += ab.first;
        if (ab.second != Complex(0.0, 0.0)) v += ab.second * std::log(r);
        continue;
      }
      const double m = std::abs(n);
      const Complex ang = std::polar(1.0, n * theta);
      v += (ab.first * std::pow(r, m) + ab.second * std::pow(r, -m)) * ang;
    }
    return v;
  }

  // sigma dV/dr in the layer containing r (one-sided at interfaces).
  Complex flux(double r, double theta, const Layer& l) const {
    Complex d{0.0, 0.0};
    for (const auto& [n, ab] : l.coeff) {
      if (n == 0) {
        if (ab.second != Complex(0.0, 0.0)) d += ab.second / r;
        continue;
      }
      const double m = std::abs(n);
      const Complex ang = std::polar(1.0, n * theta);
      d += m * (ab.first * std::pow(r, m - 1) -
                ab.second * std::pow(r, -m - 1)) * ang;
    }
    return l.sigma * d;
  }

  // Real and imaginary electric field vectors at a point, via the
  // holomorphic split: E1 = -(conj F' + G'), E2 = i (G' - conj F') in the
  // complex vector representation.
  std::pair<Vec2, Vec2> field_at(double r, double theta) const {
    const Layer& l = layer_at(r);
    const Complex z = std::polar(r, theta);
    const Complex zb = std::conj(z);
    Complex fp{0.0, 0.0}, gp{0.0, 0.0};
    for (const auto& [n, ab] : l.coeff) {
      if (n == 0) {
        if (ab.second != Complex(0.0, 0.0)) {
          fp += 0.5 * ab.second / z;
          gp += 0.5 * ab.second / zb;
        }
        continue;
      }
      const double m = std::abs(n);
      if (n > 0) {
        fp += ab.first * m * std::pow(z, m - 1);
        gp += ab.second * (-m) * std::pow(zb, -m - 1);
      } else {
        gp += ab.first * m * std::pow(zb, m - 1);
        fp += ab.second * (-m) * std::pow(z, -m - 1);
      }
    }
    const Complex e1 = -(std::conj(fp) + gp);
    const Complex e2 = Complex(0.0, 1.0) * (gp - std::conj(fp));
    return {Vec2{e1.real(), e1.imag()}, Vec2{e2.real(), e2.imag()}};
  }
};

// ---------------------------------------------------------------------------
// Transmission solve: continuity of V and of sigma dV/dr at every interface,
// regularity at the origin, Dirichlet match at the outer radius.

inline FieldSolution solve_layered_disk(const LayeredDiskGeometry& geom,
                                        const PhaseConductivities& cond,
                                        const FourierBC& bc) {
  geom.validate();
  bc.validate();

  const std::size_t L = geom.radii.size();
  FieldSolution sol;
  sol.layers.resize(L);
  double inner = 0.0;
  for (std::size_t l = 0; l < L; ++l) {
    sol.layers[l].r_inner = inner;
    sol.layers[l].r_outer = geom.radii[l];
    sol.layers[l].phase = geom.layer_phase[l];
    sol.layers[l].sigma = cond.sigma(geom.layer_phase[l]);
    inner = geom.radii[l];
  }

  const double R = geom.outer_radius();
  for (const auto& [n, cn] : bc.modes) {
    if (cn == Complex(0.0, 0.0)) continue;
    if (n == 0) {
      // constant potential threads through every layer unchanged
      for (auto& l : sol.layers) l.coeff[0] = {cn, Complex(0.0, 0.0)};
      continue;
    }
    const double m = std::abs(n);
    // unknowns: a_1, then (a_l, b_l) for l = 2..L
    const Eigen::Index dim = Eigen::Index(2 * L - 1);
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(dim, dim);
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(dim);
    auto a_idx = [&](std::size_t l) {
      return Eigen::Index(l == 0 ? 0 : 2 * l - 1);
    };
    auto b_idx = [&](std::size_t l) { return Eigen::Index(2 * l); };

    Eigen::Index row = 0;
    for (std::size_t l = 0; l + 1 < L; ++l, row += 2) {
      const double r = geom.radii[l];
      const double rp = std::pow(r, m);
      const double rm = std::pow(r, -m);
      const Complex sl = sol.layers[l].sigma;
      const Complex sr = sol.layers[l + 1].sigma;
      // potential continuity
      A(row, a_idx(l)) = rp;
      if (l > 0) A(row, b_idx(l)) = rm;
      A(row, a_idx(l + 1)) = -rp;
      A(row, b_idx(l + 1)) = -rm;
      // flux continuity (common factor m / r dropped)
      A(row + 1, a_idx(l)) = sl * rp;
      if (l > 0) A(row + 1, b_idx(l)) = -sl * rm;
      A(row + 1, a_idx(l + 1)) = -sr * rp;
      A(row + 1, b_idx(l + 1)) = sr * rm;
    }
    A(row, a_idx(L - 1)) = std::pow(R, m);
    if (L > 1) A(row, b_idx(L - 1)) = std::pow(R, -m);
    rhs(row) = cn;

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
    Eigen::VectorXcd u = lu.solve(rhs);
    const double resid = (A * u - rhs).norm();
    if (!u.allFinite() || resid > 1e-10 * std::max(1.0, rhs.norm()))
      throw Error(ErrorCode::SingularTransmission,
                  "transmission system singular for mode " + std::to_string(n));

    for (std::size_t l = 0; l < L; ++l) {
      const Complex a = u(a_idx(l));
      const Complex b = l == 0 ? Complex(0.0, 0.0) : u(b_idx(l));
      sol.layers[l].coeff[n] = {a, b};
    }
  }
  return sol;
}

// ---------------------------------------------------------------------------
// Core-shell configuration with core potential z + k zbar^2.  The shell
// coefficients follow from continuity of V and sigma dV/dr at the core
// radius; the resulting boundary data is the Dirichlet condition applied.

inline FieldSolution coreshell_solution(double R1, double R2,
                                        const PhaseConductivities& cond,
                                        double k) {
  if (!(0.0 < R1 && R1 < R2) || !std::isfinite(R1) || !std::isfinite(R2))
    throw Error(ErrorCode::InvalidRadii, "need 0 < R1 < R2");
  if (!std::isfinite(k))
    throw Error(ErrorCode::InvalidInput, "k must be finite");

  const Complex s1 = cond.sigma1();
  const Complex s2 = cond.sigma2();
  const Complex a = (s1 + s2) / (2.0 * s2);
  const Complex b = -R1 * R1 * (s1 - s2) / (2.0 * s2);
  const Complex c = k * (s1 + s2) / (2.0 * s2);
  const Complex d = -k * R1 * R1 * R1 * R1 * (s1 - s2) / (2.0 * s2);

  FieldSolution sol;
  sol.layers.resize(2);
  sol.layers[0] = {0.0, R1, s1, 1, {}};
  sol.layers[1] = {R1, R2, s2, 2, {}};
  // mode +1 carries z and 1/zbar; mode -2 carries zbar^2 and 1/z^2
  sol.layers[0].coeff[1] = {Complex(1.0, 0.0), Complex(0.0, 0.0)};
  sol.layers[1].coeff[1] = {a, b};
  sol.layers[0].coeff[-2] = {Complex(k, 0.0), Complex(0.0, 0.0)};
  sol.layers[1].coeff[-2] = {c, d};
  return sol;
}

// ---------------------------------------------------------------------------
// Exact per-phase volume moments.

struct ExactMoments {
  double f1 = 0.0;                       // true phase-1 volume fraction
  double A[2][2][2] = {};                // A[a-1][m-1][n-1] = <E_m^(a).E_n^(a)>
  double B12[2] = {};                    // <E_1^(a) . R E_2^(a)>
  std::array<std::array<Vec2, 2>, 2> avgE_phase{};  // [a-1][m-1]
  Vec2 avgE1, avgE2, avgJ1, avgJ2;
  double e1j1 = 0.0, e1j2 = 0.0, e2j1 = 0.0, e2j2 = 0.0;
  double rotE = 0.0, rotJ = 0.0;

  double eta(int phase) const {
    return A[phase - 1][0][0] + A[phase - 1][1][1];
  }
  double x_true() const { return A[0][0][0]; }  // A_11^(1)
  double y_true() const { return A[1][0][0]; }  // A_11^(2)

  BoundaryMeasurement measurement() const {
    BoundaryMeasurement m;
    m.avgE1 = avgE1;
    m.avgE2 = avgE2;
    m.avgJ1 = avgJ1;
    m.avgJ2 = avgJ2;
    m.e1j1 = e1j1;
    m.e1j2 = e1j2;
    m.e2j1 = e2j1;
    m.e2j2 = e2j2;
    m.rotE = rotE;
    m.rotJ = rotJ;
    m.rot_available = true;
    return m;
  }

  PhaseAverages phase_averages() const {
    PhaseAverages p;
    p.avg = avgE_phase;
    return p;
  }
};

namespace detail {

// integral over [r0, r1] of r^k dr, with the log branch at k = -1
inline double radial_integral(int k, double r0, double r1) {
  if (k == -1) return std::log(r1 / r0);
  const double e = double(k + 1);
  return (std::pow(r1, e) - std::pow(r0, e)) / e;
}

// Power expansion of F' (z-powers) and G' (zbar-powers) for one layer.
struct DerivSeries {
  std::map<int, Complex> f;  // exponent -> coefficient of z^exponent in F'
  std::map<int, Complex> g;  // exponent -> coefficient of zbar^exponent in G'
};

inline DerivSeries deriv_series(const FieldSolution::Layer& layer) {
  DerivSeries s;
  for (const auto& [n, ab] : layer.coeff) {
    if (n == 0) {
      if (ab.second != Complex(0.0, 0.0)) {
        s.f[-1] += 0.5 * ab.second;
        s.g[-1] += 0.5 * ab.second;
      }
      continue;
    }
    const int m = std::abs(n);
    if (n > 0) {
      if (ab.first != Complex(0.0, 0.0)) s.f[m - 1] += double(m) * ab.first;
      if (ab.second != Complex(0.0, 0.0))
        s.g[-m - 1] += double(-m) * ab.second;
    } else {
      if (ab.first != Complex(0.0, 0.0)) s.g[m - 1] += double(m) * ab.first;
      if (ab.second != Complex(0.0, 0.0))
        s.f[-m - 1] += double(-m) * ab.second;
    }
  }
  return s;
}

}  // namespace detail

inline ExactMoments exact_moments(const FieldSolution& sol) {
  const double total_area = sol.area();
  ExactMoments out;

  // accumulated per phase: int |F'|^2, int |G'|^2, int F'G', int F', int G'
  double iff[2] = {0.0, 0.0}, igg[2] = {0.0, 0.0};
  Complex ifg[2] = {}, i_f[2] = {}, i_g[2] = {};
  double area1 = 0.0;

  for (const auto& layer : sol.layers) {
    const int a = layer.phase - 1;
    const double r0 = layer.r_inner;
    const double r1 = layer.r_outer;
    const double layer_area = kPi * (r1 * r1 - r0 * r0);
    if (layer.phase == 1) area1 += layer_area;

    const detail::DerivSeries s = detail::deriv_series(layer);
    // angular orthogonality: only equal z/zbar exponents survive
    for (const auto& [p, cf] : s.f)
      iff[a] += std::norm(cf) * 2.0 * kPi * detail::radial_integral(2 * p + 1, r0, r1);
    for (const auto& [q, cg] : s.g)
      igg[a] += std::norm(cg) * 2.0 * kPi * detail::radial_integral(2 * q + 1, r0, r1);
    for (const auto& [p, cf] : s.f) {
      auto it = s.g.find(p);
      if (it != s.g.end())
        ifg[a] += cf * it->second * 2.0 * kPi *
                  detail::radial_integral(2 * p + 1, r0, r1);
    }
    auto c0 = s.f.find(0);
    if (c0 != s.f.end()) i_f[a] += c0->second * layer_area;
    auto d0 = s.g.find(0);
    if (d0 != s.g.end()) i_g[a] += d0->second * layer_area;
  }

  out.f1 = area1 / total_area;

  CVec2 sumE[2];
  for (int a = 0; a < 2; ++a) {
    const double inv = 1.0 / total_area;
    out.A[a][0][0] = (iff[a] + igg[a] + 2.0 * ifg[a].real()) * inv;
    out.A[a][1][1] = (iff[a] + igg[a] - 2.0 * ifg[a].real()) * inv;
    out.A[a][0][1] = out.A[a][1][0] = 2.0 * ifg[a].imag() * inv;
    out.B12[a] = (iff[a] - igg[a]) * inv;

    const Complex e1 = -(std::conj(i_f[a]) + i_g[a]) * inv;
    const Complex e2 = Complex(0.0, 1.0) * (i_g[a] - std::conj(i_f[a])) * inv;
    out.avgE_phase[a][0] = Vec2{e1.real(), e1.imag()};
    out.avgE_phase[a][1] = Vec2{e2.real(), e2.imag()};
    sumE[a] = CVec2{out.avgE_phase[a][0], out.avgE_phase[a][1]};
  }

  out.avgE1 = out.avgE_phase[0][0] + out.avgE_phase[1][0];
  out.avgE2 = out.avgE_phase[0][1] + out.avgE_phase[1][1];
  // per-phase conductivities come from the layers themselves
  Complex sigma_of[2] = {Complex(0, 0), Complex(0, 0)};
  for (const auto& layer : sol.layers) sigma_of[layer.phase - 1] = layer.sigma;
  const CVec2 j = sigma_of[0] * sumE[0] + sigma_of[1] * sumE[1];
  out.avgJ1 = j.re();
  out.avgJ2 = j.im();

  for (int a = 0; a < 2; ++a) {
    const double sr = sigma_of[a].real();
    const double si = sigma_of[a].imag();
    out.e1j1 += sr * out.A[a][0][0] - si * out.A[a][0][1];
    out.e1j2 += si * out.A[a][0][0] + sr * out.A[a][0][1];
    out.e2j1 += sr * out.A[a][0][1] - si * out.A[a][1][1];
    out.e2j2 += si * out.A[a][0][1] + sr * out.A[a][1][1];
    out.rotE += out.B12[a];
    out.rotJ += std::norm(sigma_of[a]) * out.B12[a];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Simple laminate: the field is constant in each phase, with tangential E
// and normal J continuous across the lamination planes.  Every bound
// downstream collapses to f1 for such data.

inline ExactMoments laminate_moments(double f1,
                                     const PhaseConductivities& cond,
                                     const CVec2& field1, Vec2 normal) {
  if (!(f1 > 0.0 && f1 < 1.0))
    throw Error(ErrorCode::InvalidInput, "laminate needs 0 < f1 < 1");
  if (!field1.finite() || !normal.finite() || normal.norm2() == 0.0)
    throw Error(ErrorCode::InvalidInput, "laminate field/normal invalid");
  const double nn = normal.norm();
  const Vec2 nu{normal.x / nn, normal.y / nn};

  const Complex ratio = cond.sigma1() / cond.sigma2();
  const Complex en = field1.x * nu.x + field1.y * nu.y;  // normal component
  const CVec2 field2{field1.x + (ratio - 1.0) * en * nu.x,
                     field1.y + (ratio - 1.0) * en * nu.y};

  ExactMoments out;
  out.f1 = f1;
  const CVec2 fields[2] = {field1, field2};
  const double weight[2] = {f1, 1.0 - f1};
  CVec2 sumJ;
  for (int a = 0; a < 2; ++a) {
    const Vec2 e1 = fields[a].re();
    const Vec2 e2 = fields[a].im();
    out.A[a][0][0] = weight[a] * e1.norm2();
    out.A[a][1][1] = weight[a] * e2.norm2();
    out.A[a][0][1] = out.A[a][1][0] = weight[a] * e1.dot(e2);
    out.B12[a] = weight[a] * cross_dot(e1, e2);
    out.avgE_phase[a][0] = weight[a] * e1;
    out.avgE_phase[a][1] = weight[a] * e2;

    const CVec2 jf = cond.sigma(a + 1) * fields[a];
    const Vec2 j1 = jf.re();
    const Vec2 j2 = jf.im();
    sumJ = sumJ + CVec2{weight[a] * j1, weight[a] * j2};
    out.e1j1 += weight[a] * e1.dot(j1);
    out.e1j2 += weight[a] * e1.dot(j2);
    out.e2j1 += weight[a] * e2.dot(j1);
    out.e2j2 += weight[a] * e2.dot(j2);
    out.rotE += out.B12[a];
    out.rotJ += weight[a] * cross_dot(j1, j2);
  }
  out.avgE1 = out.avgE_phase[0][0] + out.avgE_phase[1][0];
  out.avgE2 = out.avgE_phase[0][1] + out.avgE_phase[1][1];
  out.avgJ1 = sumJ.re();
  out.avgJ2 = sumJ.im();
  return out;
}

// ---------------------------------------------------------------------------
// Boundary trace sampled from the outer layer's series, exact at the nodes.

inline BoundaryTrace boundary_trace(const FieldSolution& sol, int n_nodes) {
  if (n_nodes < 16 || n_nodes % 2 != 0)
    throw Error(ErrorCode::InvalidInput, "n_nodes must be even and >= 16");
  const double R = sol.outer_radius();
  const auto& outer = sol.layers.back();
  BoundaryTrace trace;
  trace.radius = R;
  trace.V.resize(std::size_t(n_nodes));
  trace.sdVdn.resize(std::size_t(n_nodes));
  for (int j = 0; j < n_nodes; ++j) {
    const double th = 2.0 * kPi * double(j) / double(n_nodes);
    trace.V[std::size_t(j)] = sol.potential(R, th);
    trace.sdVdn[std::size_t(j)] = sol.flux(R, th, outer);
  }
  return trace;
}

}  // namespace voltbound

#pragma once

// The four bounding procedures.  A test volume fraction f is admissible when
// two 2x2 matrices S_f^(1)(x,y), S_f^(2)(x,y) are simultaneously
// positive-semidefinite somewhere; each {det >= level} set is an elliptic
// disk, so admissibility reduces to an ellipse-intersection decision.  The
// planar rotational averages tighten the test by raising the level from 0 to
// tau_f^(a) (the "tilde" variants).

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <optional>

#include "voltbound/core.hpp"
#include "voltbound/measurement.hpp"
#include "voltbound/scan.hpp"

namespace voltbound {

// ---------------------------------------------------------------------------
// Small symmetric 2x2 helper

struct Sym2 {
  double m11 = 0.0, m12 = 0.0, m22 = 0.0;

  double det() const { return m11 * m22 - m12 * m12; }
  double trace() const { return m11 + m22; }
  double min_eigenvalue() const {
    const double t = 0.5 * trace();
    const double d = std::sqrt(std::max(0.0, t * t - det()));
    return t - d;
  }
  double scale() const {
    return std::max({std::abs(m11), std::abs(m12), std::abs(m22)});
  }
};

struct SMatrixPair {
  Sym2 s1, s2;
};

// Entries exactly as the reduced power system dictates; the trace of each
// matrix is independent of (x, y).
inline SMatrixPair s_matrices(const DerivedConstants& c, double f, double x,
                              double y) {
  SMatrixPair p;
  p.s1.m11 = x - c.avgE(1, 1).norm2() / f;
  p.s1.m22 = -x + c.eta_of(1) - c.avgE(1, 2).norm2() / f;
  p.s1.m12 = -c.gamma * x - c.psi_of(1) * y + c.xi_of(1) - c.dotE(1) / f;
  const double g = 1.0 - f;
  p.s2.m11 = y - c.avgE(2, 1).norm2() / g;
  p.s2.m22 = -y + c.eta_of(2) - c.avgE(2, 2).norm2() / g;
  p.s2.m12 = c.psi_of(2) * x + c.gamma * y - c.xi_of(2) - c.dotE(2) / g;
  return p;
}

// ---------------------------------------------------------------------------
// Elementary bounds: diagonal nonnegativity of both matrices.

inline std::pair<double, double> elementary_bounds(const DerivedConstants& c) {
  for (int a = 1; a <= 2; ++a)
    if (!(c.eta_of(a) > 0.0))
      throw Error(ErrorCode::EtaDegenerate, "eta^(a) must be positive");
  double f_el = c.norm2_sum(1) / c.eta_of(1);
  double f_eu = 1.0 - c.norm2_sum(2) / c.eta_of(2);
  f_el = std::clamp(f_el, 0.0, 1.0);
  f_eu = std::clamp(f_eu, 0.0, 1.0);
  return {f_el, f_eu};
}

struct FeasibleRectangle {
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  bool nonempty() const { return x_lo <= x_hi && y_lo <= y_hi; }
};

inline FeasibleRectangle feasible_rectangle(const DerivedConstants& c,
                                            double f) {
  FeasibleRectangle r;
  r.x_lo = c.avgE(1, 1).norm2() / f;
  r.x_hi = c.eta_of(1) - c.avgE(1, 2).norm2() / f;
  r.y_lo = c.avgE(2, 1).norm2() / (1.0 - f);
  r.y_hi = c.eta_of(2) - c.avgE(2, 2).norm2() / (1.0 - f);
  return r;
}

// ---------------------------------------------------------------------------
// The determinant of S_f^(a) as an explicit quadratic
//   p(x,y) = a1 x^2 + 2 a2 xy + a3 y^2 + 2 a4 x + 2 a5 y + a6,
// concave with discriminant a1 a3 - a2^2 = psi^2 > 0.  In tilde mode a6 is
// lowered by tau_f^(a) = det T_f^(a).

struct EllipseQuadratic {
  double a1 = 0.0, a2 = 0.0, a3 = 0.0, a4 = 0.0, a5 = 0.0, a6 = 0.0;
  double tilde_shift = 0.0;  // tau already subtracted from a6

  double eval(double x, double y) const {
    return a1 * x * x + 2.0 * a2 * x * y + a3 * y * y + 2.0 * a4 * x +
           2.0 * a5 * y + a6;
  }
  // magnitude of the terms entering eval, for cancellation-aware zero tests
  double eval_scale(double x, double y) const {
    return std::abs(a1 * x * x) + std::abs(2.0 * a2 * x * y) +
           std::abs(a3 * y * y) + std::abs(2.0 * a4 * x) +
           std::abs(2.0 * a5 * y) + std::abs(a6);
  }
  double discriminant() const { return a1 * a3 - a2 * a2; }
};

inline double tau_of(const DerivedConstants& c, double f, int phase) {
  if (!c.has_b12())
    throw Error(ErrorCode::MissingRotData,
                "tilde machinery needs B_12 (planar data, distinct moduli)");
  const double fs = phase == 1 ? f : 1.0 - f;
  const double t = *c.b12(phase) - c.crossE(phase) / fs;
  return t * t;
}

inline EllipseQuadratic ellipse_quadratic(const DerivedConstants& c, double f,
                                          int phase, bool tilde) {
  EllipseQuadratic q;
  const double gamma = c.gamma;
  if (phase == 1) {
    const double psi = c.psi_of(1);
    const double P = c.avgE(1, 1).norm2() / f;
    const double Q = c.avgE(1, 2).norm2() / f;
    const double Xi = c.xi_of(1) - c.dotE(1) / f;
    q.a1 = -(1.0 + gamma * gamma);
    q.a2 = -gamma * psi;
    q.a3 = -psi * psi;
    q.a4 = 0.5 * (c.eta_of(1) - Q + P + 2.0 * gamma * Xi);
    q.a5 = psi * Xi;
    q.a6 = -(P * (c.eta_of(1) - Q) + Xi * Xi);
  } else {
    const double psi = c.psi_of(2);
    const double g = 1.0 - f;
    const double P = c.avgE(2, 1).norm2() / g;
    const double Q = c.avgE(2, 2).norm2() / g;
    const double Xi = c.xi_of(2) + c.dotE(2) / g;
    q.a1 = -psi * psi;
    q.a2 = -gamma * psi;
    q.a3 = -(1.0 + gamma * gamma);
    q.a4 = psi * Xi;
    q.a5 = 0.5 * (c.eta_of(2) - Q + P + 2.0 * gamma * Xi);
    q.a6 = -(P * (c.eta_of(2) - Q) + Xi * Xi);
  }
  if (tilde) {
    q.tilde_shift = tau_of(c, f, phase);
    q.a6 -= q.tilde_shift;
  }
  return q;
}

// Stationary point of the concave quadratic (the ellipse center).
inline Vec2 ellipse_center(const EllipseQuadratic& q) {
  const double d = q.discriminant();
  return {(q.a2 * q.a5 - q.a3 * q.a4) / d, (q.a2 * q.a4 - q.a1 * q.a5) / d};
}

// Closed-form maximum of p (or p - tau in tilde mode).
inline double ellipse_pmax(const DerivedConstants& c, double f, int phase,
                           bool tilde) {
  const double fs = phase == 1 ? f : 1.0 - f;
  if (!tilde) {
    const double t = c.eta_of(phase) * fs - c.norm2_sum(phase);
    return t * t / (4.0 * fs * fs);
  }
  if (!c.has_b12())
    throw Error(ErrorCode::MissingRotData, "tilde p_max needs B_12");
  const double b = *c.b12(phase);
  const double vplus2 = c.eta_of(phase) + 2.0 * b;   // <||v_+||^2>
  const double vminus2 = c.eta_of(phase) - 2.0 * b;  // <||v_-||^2>
  const Vec2 vp = c.avgE(phase, 1) + rperp(c.avgE(phase, 2));
  const Vec2 vm = c.avgE(phase, 1) - rperp(c.avgE(phase, 2));
  return (vplus2 * fs - vp.norm2()) * (vminus2 * fs - vm.norm2()) /
         (4.0 * fs * fs);
}

// ---------------------------------------------------------------------------
// Ellipse-intersection admissibility decision.

enum class VerdictCase {
  DeltaNonneg,        // boundaries meet: quadratic along the radical line has
                      // a real root
  Disjoint,           // neither disk contains the other's center
  E1insideE2,
  E2insideE1,
  BothCentersInside,
};

struct AdmissibilityVerdict {
  double f = 0.0;
  double delta = 0.0;  // discriminant of the radical-line quadratic
  double p1_at_r2 = 0.0;
  double p2_at_r1 = 0.0;
  bool admissible = false;
  VerdictCase which = VerdictCase::Disjoint;
};

inline AdmissibilityVerdict intersection_verdict(const DerivedConstants& c,
                                                 double f, bool tilde) {
  const EllipseQuadratic q1 = ellipse_quadratic(c, f, 1, tilde);
  const EllipseQuadratic q2 = ellipse_quadratic(c, f, 2, tilde);
  const double m1 = c.mod2_sigma(1);
  const double m2 = c.mod2_sigma(2);

  // mu_k = m1 a_k^(1) - m2 a_k^(2), doubled for the cross/linear terms.
  // The quadratic parts cancel identically (1 + gamma^2 = m1 m2 / beta^2).
  const double mu1 = m1 * q1.a1 - m2 * q2.a1;
  const double mu2 = 2.0 * (m1 * q1.a2 - m2 * q2.a2);
  const double mu3 = m1 * q1.a3 - m2 * q2.a3;
  const double mu4 = 2.0 * (m1 * q1.a4 - m2 * q2.a4);
  const double mu5 = 2.0 * (m1 * q1.a5 - m2 * q2.a5);
  const double mu6 = m1 * q1.a6 - m2 * q2.a6;
  const double s123 = std::max({std::abs(m1 * q1.a1), std::abs(m2 * q2.a1),
                                2.0 * std::abs(m1 * q1.a2),
                                2.0 * std::abs(m2 * q2.a2),
                                std::abs(m1 * q1.a3), std::abs(m2 * q2.a3)});
  if (std::abs(mu1) > kRelTol * s123 || std::abs(mu2) > kRelTol * s123 ||
      std::abs(mu3) > kRelTol * s123)
    throw Error(ErrorCode::Numerical,
                "mu_1..mu_3 failed to cancel: inconsistent constants");

  const Vec2 r1 = ellipse_center(q1);
  const Vec2 r2 = ellipse_center(q2);

  AdmissibilityVerdict v;
  v.f = f;
  v.p1_at_r2 = q1.eval(r2.x, r2.y);
  v.p2_at_r1 = q2.eval(r1.x, r1.y);
  const double pmax1 = q1.eval(r1.x, r1.y);
  const double pmax2 = q2.eval(r2.x, r2.y);
  const bool in1 = v.p1_at_r2 >= -kRelTol * q1.eval_scale(r2.x, r2.y);
  const bool in2 = v.p2_at_r1 >= -kRelTol * q2.eval_scale(r1.x, r1.y);

  auto containment = [&]() {
    if (in1 && in2) {
      v.admissible = true;
      v.which = VerdictCase::BothCentersInside;
    } else if (in1) {
      v.admissible = true;
      v.which = VerdictCase::E2insideE1;
    } else if (in2) {
      v.admissible = true;
      v.which = VerdictCase::E1insideE2;
    } else {
      v.admissible = false;
      v.which = VerdictCase::Disjoint;
    }
  };

  // Radical line mu4 x + mu5 y + mu6 = 0 substituted into p^(1) = 0, pivoting
  // on the better-conditioned variable.
  const double s45 =
      std::max({2.0 * std::abs(m1 * q1.a4), 2.0 * std::abs(m2 * q2.a4),
                2.0 * std::abs(m1 * q1.a5), 2.0 * std::abs(m2 * q2.a5)});
  const bool line_ok = std::max(std::abs(mu4), std::abs(mu5)) > kRelTol * s45;
  double nu1 = 0.0, nu2 = 0.0, nu3 = 0.0, snu1 = 0.0, snu2 = 0.0, snu3 = 0.0;
  if (line_ok) {
    if (std::abs(mu5) >= std::abs(mu4)) {
      nu1 = q1.a1 * mu5 * mu5 - 2.0 * q1.a2 * mu4 * mu5 + q1.a3 * mu4 * mu4;
      nu2 = 2.0 * (-q1.a2 * mu5 * mu6 + q1.a3 * mu4 * mu6 + q1.a4 * mu5 * mu5 -
                   q1.a5 * mu4 * mu5);
      nu3 = q1.a3 * mu6 * mu6 - 2.0 * q1.a5 * mu5 * mu6 + q1.a6 * mu5 * mu5;
      snu1 = std::abs(q1.a1 * mu5 * mu5) + std::abs(2.0 * q1.a2 * mu4 * mu5) +
             std::abs(q1.a3 * mu4 * mu4);
      snu2 = 2.0 * (std::abs(q1.a2 * mu5 * mu6) + std::abs(q1.a3 * mu4 * mu6) +
                    std::abs(q1.a4 * mu5 * mu5) + std::abs(q1.a5 * mu4 * mu5));
      snu3 = std::abs(q1.a3 * mu6 * mu6) + std::abs(2.0 * q1.a5 * mu5 * mu6) +
             std::abs(q1.a6 * mu5 * mu5);
    } else {
      nu1 = q1.a1 * mu5 * mu5 - 2.0 * q1.a2 * mu4 * mu5 + q1.a3 * mu4 * mu4;
      nu2 = 2.0 * (q1.a1 * mu5 * mu6 - q1.a2 * mu4 * mu6 - q1.a4 * mu4 * mu5 +
                   q1.a5 * mu4 * mu4);
      nu3 = q1.a1 * mu6 * mu6 - 2.0 * q1.a4 * mu4 * mu6 + q1.a6 * mu4 * mu4;
      snu1 = std::abs(q1.a1 * mu5 * mu5) + std::abs(2.0 * q1.a2 * mu4 * mu5) +
             std::abs(q1.a3 * mu4 * mu4);
      snu2 = 2.0 * (std::abs(q1.a1 * mu5 * mu6) + std::abs(q1.a2 * mu4 * mu6) +
                    std::abs(q1.a4 * mu4 * mu5) + std::abs(q1.a5 * mu4 * mu4));
      snu3 = std::abs(q1.a1 * mu6 * mu6) + std::abs(2.0 * q1.a4 * mu4 * mu6) +
             std::abs(q1.a6 * mu4 * mu4);
    }
    v.delta = nu2 * nu2 - 4.0 * nu1 * nu3;
  }

  // Degenerate single-point disks at the interval endpoints: decide by
  // direct evaluation instead of the discriminant, which is pure round-off
  // there.
  if (pmax1 <= kRelTol * q1.eval_scale(r1.x, r1.y)) {
    if (pmax1 < -kRelTol * q1.eval_scale(r1.x, r1.y)) {
      v.admissible = false;  // empty phase-1 disk: f outside its interval
      v.which = VerdictCase::Disjoint;
    } else {
      v.admissible = in2;
      v.which = in2 ? VerdictCase::E1insideE2 : VerdictCase::Disjoint;
    }
    return v;
  }
  if (pmax2 <= kRelTol * q2.eval_scale(r2.x, r2.y)) {
    if (pmax2 < -kRelTol * q2.eval_scale(r2.x, r2.y)) {
      v.admissible = false;
      v.which = VerdictCase::Disjoint;
    } else {
      v.admissible = in1;
      v.which = in1 ? VerdictCase::E2insideE1 : VerdictCase::Disjoint;
    }
    return v;
  }

  if (!line_ok) {
    // mu4 = mu5 = 0: the disks are concentric up to scaling; containment
    // settles it.
    containment();
    return v;
  }

  if (std::abs(nu1) <= kRelTol * snu1) {
    // radical-line equation is linear; a root exists iff nu2 != 0
    if (std::abs(nu2) > kRelTol * snu2) {
      v.admissible = true;
      v.which = VerdictCase::DeltaNonneg;
    } else {
      containment();
    }
    return v;
  }

  const double sdelta = std::max(nu2 * nu2, std::abs(4.0 * nu1 * nu3));
  (void)snu3;
  if (v.delta >= -kRelTol * sdelta) {
    v.admissible = true;
    v.which = VerdictCase::DeltaNonneg;
  } else {
    containment();
  }
  return v;
}

// ---------------------------------------------------------------------------
// Improved elementary bounds from the rotated-field combinations
// v_pm = E_1 +- R E_2.

struct ImprovedBounds {
  double f_lo = 0.0;  // improved lower bound on f^(1)
  double f_hi = 1.0;  // improved upper bound
  double q1 = 0.0;    // lower zero of ptilde_max^(1); <= f_el
  double q2 = 1.0;    // upper zero of ptilde_max^(2); >= f_eu
  bool vplus_zero[2] = {false, false};
  bool vminus_zero[2] = {false, false};
};

inline ImprovedBounds improved_elementary_bounds(const DerivedConstants& c,
                                                 double f_el, double f_eu) {
  if (c.equal_moduli)
    throw Error(ErrorCode::EqualModuli,
                "improved bounds need distinct conductivity moduli");
  if (!c.has_b12())
    throw Error(ErrorCode::MissingRotData,
                "improved bounds need rotational averages");

  const double eta_scale = std::max(c.eta_of(1), c.eta_of(2));
  ImprovedBounds out;
  double quot[2][2];  // [phase-1][0]=plus, [1]=minus
  for (int a = 1; a <= 2; ++a) {
    const double b = *c.b12(a);
    double vn2[2] = {c.eta_of(a) + 2.0 * b, c.eta_of(a) - 2.0 * b};
    const Vec2 vavg[2] = {c.avgE(a, 1) + rperp(c.avgE(a, 2)),
                          c.avgE(a, 1) - rperp(c.avgE(a, 2))};
    for (int s = 0; s < 2; ++s) {
      if (vn2[s] < -kRelTol * eta_scale)
        throw Error(ErrorCode::Numerical, "<||v_pm||^2> < 0");
      const bool zero = vn2[s] <= kRelTol * eta_scale;
      (s == 0 ? out.vplus_zero : out.vminus_zero)[a - 1] = zero;
      quot[a - 1][s] = zero ? 0.0 : vavg[s].norm2() / vn2[s];
    }
  }

  // Degenerate table: a vanishing v_pm in a phase forfeits that phase's
  // improvement and falls back to the elementary bound.
  if (out.vplus_zero[0] || out.vminus_zero[0]) {
    out.f_lo = f_el;
    out.q1 = f_el;
  } else {
    out.f_lo = std::max(quot[0][0], quot[0][1]);
    out.q1 = std::min(quot[0][0], quot[0][1]);
  }
  if (out.vplus_zero[1] || out.vminus_zero[1]) {
    out.f_hi = f_eu;
    out.q2 = f_eu;
  } else {
    out.f_hi = 1.0 - std::max(quot[1][0], quot[1][1]);
    out.q2 = 1.0 - std::min(quot[1][0], quot[1][1]);
  }

  // Ordering f_el <= f_lo <= f_hi <= f_eu holds for consistent data; allow
  // quadrature-level slack, reject beyond it.
  constexpr double slack = 1e-7;
  if (out.f_lo < f_el - slack || out.f_hi > f_eu + slack ||
      out.f_lo > out.f_hi + slack)
    throw Error(ErrorCode::Numerical,
                "improved bounds violate the elementary ordering");
  out.f_lo = std::max(out.f_lo, f_el);
  out.f_hi = std::min(out.f_hi, f_eu);
  if (out.f_lo > out.f_hi) out.f_lo = out.f_hi = 0.5 * (out.f_lo + out.f_hi);
  return out;
}

// Which of v_+ / v_- attains the improved bound, from the sign condition on
// B_12 against the rotational pairing of the phase averages.
enum class Branch { Plus, Minus };
enum class BoundSide { Lower, Upper };

inline Branch branch_selector(const DerivedConstants& c, BoundSide side,
                              double elementary_bound) {
  if (!c.has_b12())
    throw Error(ErrorCode::MissingRotData, "branch selection needs B_12");
  if (side == BoundSide::Lower)
    return *c.b12(1) * elementary_bound <= c.crossE(1) ? Branch::Plus
                                                       : Branch::Minus;
  return *c.b12(2) * (1.0 - elementary_bound) <= c.crossE(2) ? Branch::Plus
                                                             : Branch::Minus;
}

// ---------------------------------------------------------------------------
// 4x4 restricted-feasibility matrix, used as an eigenvalue oracle against
// the det S >= tau criterion.

inline std::array<double, 4> m_matrix_eigenvalues(const DerivedConstants& c,
                                                  double f, double x, double y,
                                                  int phase) {
  const SMatrixPair sp = s_matrices(c, f, x, y);
  const Sym2& s = phase == 1 ? sp.s1 : sp.s2;
  const double t = std::sqrt(tau_of(c, f, phase));
  Eigen::Matrix4d M;
  M << s.m11, s.m12, 0.0, t,
       s.m12, s.m22, -t, 0.0,
       0.0, -t, s.m11, s.m12,
       t, 0.0, s.m12, s.m22;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(M);
  std::array<double, 4> out{};
  for (int i = 0; i < 4; ++i) out[std::size_t(i)] = es.eigenvalues()(i);
  return out;
}

inline bool m_matrix_psd_oracle(const DerivedConstants& c, double f, double x,
                                double y, int phase) {
  const auto eig = m_matrix_eigenvalues(c, f, x, y, phase);
  double scale = 0.0;
  for (double e : eig) scale = std::max(scale, std::abs(e));
  return eig[0] >= -kRelTol * scale;
}

// ---------------------------------------------------------------------------
// Full report: elementary and improved closed forms plus both scans.

struct DegeneracyFlags {
  bool beta_zero = false;
  bool eta_zero[2] = {false, false};
  bool vplus_zero[2] = {false, false};
  bool vminus_zero[2] = {false, false};
  bool equal_moduli = false;
  bool rot_available = true;
};

struct BoundsReport {
  double f_el = 0.0;
  double f_eu = 1.0;
  std::optional<double> f_tilde_el, f_tilde_eu, q1, q2;
  AdmissibleSet setA;
  std::optional<AdmissibleSet> setAtilde;
  DegeneracyFlags degeneracy;
};

struct ScanOptions {
  int grid_n = 2001;
  double refine_tol = 1e-10;
};

namespace detail {

// Scan wrapper that tolerates a degenerate (zero-width) domain, which occurs
// when the closed-form bounds already coincide (laminates).
template <typename Pred>
AdmissibleSet scan_domain(double lo, double hi, Pred&& pred,
                          const ScanOptions& opt, PredicateTag tag) {
  AdmissibleSet set;
  if (hi - lo <= opt.refine_tol) {
    set.tag = tag;
    set.grid_n = opt.grid_n;
    set.refine_tol = opt.refine_tol;
    const double mid = 0.5 * (lo + hi);
    if (pred(mid)) set.intervals.emplace_back(lo, hi);
    return set;
  }
  return scan(lo, hi, pred, opt.grid_n, opt.refine_tol, tag);
}

}  // namespace detail

inline BoundsReport full_bounds(const DerivedConstants& c,
                                const ScanOptions& opt = {}) {
  BoundsReport rep;
  rep.degeneracy.rot_available = c.rot_available;
  rep.degeneracy.equal_moduli = c.equal_moduli;

  std::tie(rep.f_el, rep.f_eu) = elementary_bounds(c);
  rep.setA = detail::scan_domain(
      rep.f_el, rep.f_eu,
      [&](double f) { return intersection_verdict(c, f, false).admissible; },
      opt, PredicateTag::Ellipse);

  if (c.has_b12()) {
    const ImprovedBounds ib =
        improved_elementary_bounds(c, rep.f_el, rep.f_eu);
    rep.f_tilde_el = ib.f_lo;
    rep.f_tilde_eu = ib.f_hi;
    rep.q1 = ib.q1;
    rep.q2 = ib.q2;
    for (int a = 0; a < 2; ++a) {
      rep.degeneracy.vplus_zero[a] = ib.vplus_zero[a];
      rep.degeneracy.vminus_zero[a] = ib.vminus_zero[a];
    }
    rep.setAtilde = detail::scan_domain(
        ib.f_lo, ib.f_hi,
        [&](double f) { return intersection_verdict(c, f, true).admissible; },
        opt, PredicateTag::TildeEllipse);
  }
  return rep;
}

}  // namespace voltbound

#pragma once

// Measurement data model and the splitting-method algebra: one boundary
// voltage/current measurement is reduced to the scalar constants and
// per-phase field averages consumed by every bounding procedure.

#include <array>
#include <optional>

#include "voltbound/core.hpp"

namespace voltbound {

// ---------------------------------------------------------------------------
// Conductivities of the two phases.  Both must dissipate (positive real
// part); the splitting algebra additionally needs beta() != 0, which callers
// check where relevant.

class PhaseConductivities {
 public:
  PhaseConductivities(Complex sigma1, Complex sigma2)
      : sigma1_(sigma1), sigma2_(sigma2) {
    auto check = [](Complex s, const char* name) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
        throw Error(ErrorCode::InvalidInput, std::string(name) + " not finite");
      if (!(s.real() > 0.0))
        throw Error(ErrorCode::InvalidInput,
                    std::string(name) + " must have positive real part");
      if (std::abs(s) == 0.0)
        throw Error(ErrorCode::InvalidInput, std::string(name) + " is zero");
    };
    check(sigma1, "sigma1");
    check(sigma2, "sigma2");
    const double scale = std::max(std::abs(sigma1), std::abs(sigma2));
    if (std::abs(sigma1 - sigma2) <= kRelTol * scale)
      throw Error(ErrorCode::EqualConductivities,
                  "sigma1 == sigma2: phases are indistinguishable");
  }

  Complex sigma1() const { return sigma1_; }
  Complex sigma2() const { return sigma2_; }
  Complex sigma(int phase) const { return phase == 1 ? sigma1_ : sigma2_; }

  double beta() const {
    return sigma1_.real() * sigma2_.imag() - sigma1_.imag() * sigma2_.real();
  }

  bool beta_zero() const {
    return near_zero(beta(), std::abs(sigma1_) * std::abs(sigma2_));
  }

  bool equal_moduli() const {
    const double m1 = std::norm(sigma1_);
    const double m2 = std::norm(sigma2_);
    return near_zero(m1 - m2, std::max(m1, m2));
  }

 private:
  Complex sigma1_;
  Complex sigma2_;
};

// ---------------------------------------------------------------------------
// The thirteen real numbers one boundary measurement yields after averaging.
// Powers are ordered E1.J1, E1.J2, E2.J1, E2.J2; rotE = <E1 . R E2> and
// rotJ = <J1 . R J2> exist only for planar data (rot_available).

struct BoundaryMeasurement {
  Vec2 avgE1, avgE2;
  Vec2 avgJ1, avgJ2;
  double e1j1 = 0.0, e1j2 = 0.0, e2j1 = 0.0, e2j2 = 0.0;
  double rotE = 0.0, rotJ = 0.0;
  bool rot_available = true;

  CVec2 avgE() const { return {avgE1, avgE2}; }
  CVec2 avgJ() const { return {avgJ1, avgJ2}; }

  bool finite() const {
    return avgE1.finite() && avgE2.finite() && avgJ1.finite() &&
           avgJ2.finite() && std::isfinite(e1j1) && std::isfinite(e1j2) &&
           std::isfinite(e2j1) && std::isfinite(e2j2) &&
           std::isfinite(rotE) && std::isfinite(rotJ);
  }

  double power_scale() const {
    return std::max({std::abs(e1j1), std::abs(e1j2), std::abs(e2j1),
                     std::abs(e2j2)});
  }
};

// Periodic-composite shortcut: every product average factors through the
// plain averages, so a measurement can be assembled from <E> and <J> alone.
inline BoundaryMeasurement composite_measurement(const CVec2& avgE,
                                                 const CVec2& avgJ) {
  if (!avgE.finite() || !avgJ.finite())
    throw Error(ErrorCode::InvalidInput, "composite averages must be finite");
  BoundaryMeasurement m;
  m.avgE1 = avgE.re();
  m.avgE2 = avgE.im();
  m.avgJ1 = avgJ.re();
  m.avgJ2 = avgJ.im();
  m.e1j1 = m.avgE1.dot(m.avgJ1);
  m.e1j2 = m.avgE1.dot(m.avgJ2);
  m.e2j1 = m.avgE2.dot(m.avgJ1);
  m.e2j2 = m.avgE2.dot(m.avgJ2);
  m.rotE = cross_dot(m.avgE1, m.avgE2);
  m.rotJ = cross_dot(m.avgJ1, m.avgJ2);
  m.rot_available = true;
  return m;
}

// ---------------------------------------------------------------------------
// Splitting the global averages into per-phase averages.  The pair of
// complex identities
//   <E(1)> + <E(2)> = <E>,   s1 <E(1)> + s2 <E(2)> = <J>
// is solved for <E(1)>, <E(2)>; real/imag parts give the four vectors
// <E_m^(a)>.

struct PhaseAverages {
  // avg[phase-1][m-1] = <E_m^(phase)>
  std::array<std::array<Vec2, 2>, 2> avg;

  Vec2 of(int phase, int m) const { return avg[phase - 1][m - 1]; }
};

inline PhaseAverages phase_field_averages(const PhaseConductivities& cond,
                                          const BoundaryMeasurement& meas) {
  const Complex s1 = cond.sigma1();
  const Complex s2 = cond.sigma2();
  const Complex den = s2 - s1;
  const CVec2 e = meas.avgE();
  const CVec2 j = meas.avgJ();
  const CVec2 e1 = (1.0 / den) * (s2 * e - j);
  const CVec2 e2 = (1.0 / den) * (j - s1 * e);
  PhaseAverages out;
  out.avg[0] = {e1.re(), e1.im()};
  out.avg[1] = {e2.re(), e2.im()};
  return out;
}

// ---------------------------------------------------------------------------
// Everything the bounding procedures consume, computed once per measurement.

struct DerivedConstants {
  PhaseConductivities cond;
  double beta = 0.0;
  double gamma = 0.0;
  std::array<double, 2> psi{};  // psi[a-1] = psi^(a)
  std::array<double, 2> xi{};
  std::array<double, 2> eta{};
  std::optional<double> b12_1;  // B_12^(1), absent without usable rot data
  std::optional<double> b12_2;
  PhaseAverages avgE_phase;
  bool rot_available = false;
  bool equal_moduli = false;

  double psi_of(int phase) const { return psi[phase - 1]; }
  double xi_of(int phase) const { return xi[phase - 1]; }
  double eta_of(int phase) const { return eta[phase - 1]; }
  Vec2 avgE(int phase, int m) const { return avgE_phase.of(phase, m); }
  std::optional<double> b12(int phase) const {
    return phase == 1 ? b12_1 : b12_2;
  }
  bool has_b12() const { return b12_1.has_value() && b12_2.has_value(); }

  // ||<E_1^(a)>||^2 + ||<E_2^(a)>||^2, the numerator of the elementary bound.
  double norm2_sum(int phase) const {
    return avgE(phase, 1).norm2() + avgE(phase, 2).norm2();
  }
  double dotE(int phase) const { return avgE(phase, 1).dot(avgE(phase, 2)); }
  // <E_1^(a)> . R <E_2^(a)>
  double crossE(int phase) const {
    return cross_dot(avgE(phase, 1), avgE(phase, 2));
  }

  double mod2_sigma(int phase) const { return std::norm(cond.sigma(phase)); }
};

inline DerivedConstants derive_constants(const PhaseConductivities& cond,
                                         const BoundaryMeasurement& meas) {
  if (!meas.finite())
    throw Error(ErrorCode::InvalidInput, "measurement contains non-finite data");
  if (cond.beta_zero())
    throw Error(ErrorCode::BetaZero,
                "beta == 0: measurement cannot be split by phase");

  DerivedConstants c{cond};
  const Complex s1 = cond.sigma1();
  const Complex s2 = cond.sigma2();
  c.beta = cond.beta();
  c.gamma = (s1.real() * s2.real() + s1.imag() * s2.imag()) / c.beta;
  c.psi = {std::norm(s2) / c.beta, std::norm(s1) / c.beta};
  c.xi = {(s2.imag() * meas.e1j2 + s2.real() * meas.e1j1) / c.beta,
          (s1.imag() * meas.e1j2 + s1.real() * meas.e1j1) / c.beta};
  c.eta = {(s2.real() * (meas.e2j1 - meas.e1j2) +
            s2.imag() * (meas.e1j1 + meas.e2j2)) /
               c.beta,
           (s1.real() * (meas.e1j2 - meas.e2j1) -
            s1.imag() * (meas.e1j1 + meas.e2j2)) /
               c.beta};

  const double eta_scale = std::max(std::abs(c.eta[0]), std::abs(c.eta[1]));
  for (int a = 0; a < 2; ++a) {
    if (c.eta[a] <= kRelTol * eta_scale)
      throw Error(ErrorCode::EtaDegenerate,
                  "eta^(" + std::to_string(a + 1) +
                      ") <= 0: electric field vanishes in one phase");
  }

  c.avgE_phase = phase_field_averages(cond, meas);
  c.rot_available = meas.rot_available;
  c.equal_moduli = cond.equal_moduli();

  if (meas.rot_available && !c.equal_moduli) {
    const double m1 = std::norm(s1);
    const double m2 = std::norm(s2);
    const double den = m2 - m1;
    c.b12_1 = (m2 * meas.rotE - meas.rotJ) / den;
    c.b12_2 = (meas.rotJ - m1 * meas.rotE) / den;
    // <||v_pm^(a)||^2> = eta^(a) +- 2 B_12^(a) must be nonnegative for data
    // arising from genuine fields.
    for (int a = 1; a <= 2; ++a) {
      const double b = *c.b12(a);
      const double lo = c.eta_of(a) - 2.0 * std::abs(b);
      if (lo < -kRelTol * std::max(eta_scale, 2.0 * std::abs(b)))
        throw Error(ErrorCode::Numerical,
                    "eta^(a) +- 2 B_12^(a) < 0: inconsistent rotational data");
    }
  }
  return c;
}

// ---------------------------------------------------------------------------
// The power-balance system, reduced.  With x = A_11^(1), y = A_11^(2) free,
// the remaining volume moments are linear in (x, y):
//   A_21^(1) = -gamma x - psi^(1) y + xi^(1)      A_22^(1) = eta^(1) - x
//   A_21^(2) =  psi^(2) x + gamma y - xi^(2)      A_22^(2) = eta^(2) - y

struct ReducedMoments {
  double a21_1 = 0.0;
  double a21_2 = 0.0;
  double a22_1 = 0.0;
  double a22_2 = 0.0;
};

inline ReducedMoments reduced_system_solve(const DerivedConstants& c, double x,
                                           double y) {
  if (near_zero(c.beta, std::abs(c.cond.sigma1()) * std::abs(c.cond.sigma2())))
    throw Error(ErrorCode::BetaZero, "beta == 0");
  ReducedMoments m;
  m.a21_1 = -c.gamma * x - c.psi[0] * y + c.xi[0];
  m.a21_2 = c.psi[1] * x + c.gamma * y - c.xi[1];
  m.a22_1 = c.eta[0] - x;
  m.a22_2 = c.eta[1] - y;
  return m;
}

}  // namespace voltbound

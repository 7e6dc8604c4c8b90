#pragma once

// Boundary quadrature: evaluates the five null-Lagrangian functionals from
// sampled voltage and current on a circular boundary.  All integrals use the
// composite trapezoid rule on the uniform periodic grid, which is spectrally
// accurate for band-limited traces; the tangential derivative and the
// stream function are computed in Fourier space for the same reason.

#include <vector>

#include "voltbound/core.hpp"
#include "voltbound/measurement.hpp"

namespace voltbound {

// Samples at theta_j = 2 pi j / N, traversed counterclockwise.  Clockwise
// input is not detected here; it flips the sign of the rotational averages.
struct BoundaryTrace {
  double radius = 0.0;
  std::vector<Complex> V;      // voltage
  std::vector<Complex> sdVdn;  // sigma dV/dn, so J.n = -sdVdn

  std::size_t size() const { return V.size(); }
  double area() const { return kPi * radius * radius; }

  void validate() const {
    const std::size_t n = V.size();
    if (n < 16 || n % 2 != 0)
      throw Error(ErrorCode::InvalidInput,
                  "trace needs an even node count >= 16");
    if (sdVdn.size() != n)
      throw Error(ErrorCode::InvalidInput, "trace arrays differ in length");
    if (!(radius > 0.0) || !std::isfinite(radius))
      throw Error(ErrorCode::InvalidInput, "trace radius must be positive");
    for (std::size_t j = 0; j < n; ++j) {
      if (!std::isfinite(V[j].real()) || !std::isfinite(V[j].imag()) ||
          !std::isfinite(sdVdn[j].real()) || !std::isfinite(sdVdn[j].imag()))
        throw Error(ErrorCode::InvalidInput, "trace contains non-finite data");
    }
  }
};

namespace detail {

// Unnormalized DFT, radix-2 when possible, O(N^2) otherwise.  N stays in the
// low thousands here, so the naive path is acceptable for odd sizes.
inline void dft(std::vector<Complex>& a, bool inverse) {
  const std::size_t n = a.size();
  if ((n & (n - 1)) == 0) {
    // iterative Cooley-Tukey
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
      const double ang = 2.0 * kPi / double(len) * (inverse ? 1.0 : -1.0);
      const Complex wl(std::cos(ang), std::sin(ang));
      for (std::size_t i = 0; i < n; i += len) {
        Complex w(1.0, 0.0);
        for (std::size_t k = 0; k < len / 2; ++k) {
          const Complex u = a[i + k];
          const Complex v = a[i + k + len / 2] * w;
          a[i + k] = u + v;
          a[i + k + len / 2] = u - v;
          w *= wl;
        }
      }
    }
  } else {
    std::vector<Complex> out(n, Complex(0.0, 0.0));
    const double sgn = inverse ? 1.0 : -1.0;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        const double ang = sgn * 2.0 * kPi * double(k * j % n) / double(n);
        out[k] += a[j] * Complex(std::cos(ang), std::sin(ang));
      }
    }
    a = std::move(out);
  }
  if (inverse)
    for (auto& v : a) v /= double(n);
}

inline int signed_freq(std::size_t k, std::size_t n) {
  return k <= n / 2 ? int(k) : int(k) - int(n);
}

// d/dtheta of periodic samples.  Below 64 nodes the data is unlikely to be
// band-limited enough for Fourier differentiation to help, so fall back to
// central differences.
inline std::vector<double> spectral_derivative(const std::vector<double>& g) {
  const std::size_t n = g.size();
  std::vector<double> out(n);
  if (n < 64) {
    const double h = 2.0 * kPi / double(n);
    for (std::size_t j = 0; j < n; ++j)
      out[j] = (g[(j + 1) % n] - g[(j + n - 1) % n]) / (2.0 * h);
    return out;
  }
  std::vector<Complex> a(g.begin(), g.end());
  dft(a, false);
  for (std::size_t k = 0; k < n; ++k) {
    if (2 * k == n) {
      a[k] = Complex(0.0, 0.0);  // Nyquist derivative vanishes at the nodes
      continue;
    }
    a[k] *= Complex(0.0, double(signed_freq(k, n)));
  }
  dft(a, true);
  for (std::size_t j = 0; j < n; ++j) out[j] = a[j].real();
  return out;
}

// Antiderivative in theta of zero-mean periodic samples, pinned to 0 at
// node 0.  The mean is removed before inversion; callers check conservation
// separately.
inline std::vector<double> spectral_antiderivative(
    const std::vector<double>& g) {
  const std::size_t n = g.size();
  std::vector<double> out(n);
  if (n < 64) {
    const double h = 2.0 * kPi / double(n);
    double acc = 0.0;
    out[0] = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      acc += 0.5 * (g[j - 1] + g[j]) * h;
      out[j] = acc;
    }
    return out;
  }
  std::vector<Complex> a(g.begin(), g.end());
  dft(a, false);
  a[0] = Complex(0.0, 0.0);
  for (std::size_t k = 1; k < n; ++k) {
    if (2 * k == n) {
      a[k] = Complex(0.0, 0.0);
      continue;
    }
    a[k] /= Complex(0.0, double(signed_freq(k, n)));
  }
  dft(a, true);
  const double base = a[0].real();
  for (std::size_t j = 0; j < n; ++j) out[j] = a[j].real() - base;
  return out;
}

inline void check_conservation(const std::vector<double>& jn, double weight) {
  double total = 0.0, scale = 0.0;
  for (double v : jn) {
    total += v;
    scale += std::abs(v);
  }
  // tolerance is loose relative to kRelTol: the residual accumulates N
  // rounding errors of magnitude ~scale.
  if (std::abs(total) * weight > 1e-7 * std::max(scale * weight, 1e-300))
    throw Error(ErrorCode::NonConservative,
                "net boundary current is nonzero: inconsistent trace");
}

}  // namespace detail

// Cumulative boundary integral of J_which . n (arc length), starting at
// node 0.  Requires conservation so the result is periodic.
inline std::vector<double> stream_function(const BoundaryTrace& trace,
                                           int which) {
  trace.validate();
  const std::size_t n = trace.size();
  std::vector<double> jn(n);
  for (std::size_t j = 0; j < n; ++j)
    jn[j] = which == 1 ? -trace.sdVdn[j].real() : -trace.sdVdn[j].imag();
  detail::check_conservation(jn, 2.0 * kPi * trace.radius / double(n));
  std::vector<double> phi = detail::spectral_antiderivative(jn);
  for (auto& v : phi) v *= trace.radius;  // d(arc) = R dtheta
  return phi;
}

// The five null Lagrangians evaluated from boundary data alone.
inline BoundaryMeasurement null_lagrangians(const BoundaryTrace& trace) {
  trace.validate();
  const std::size_t n = trace.size();
  const double R = trace.radius;
  const double w = 2.0 * kPi / double(n);  // dtheta weight
  const double inv_area = 1.0 / trace.area();

  std::vector<double> v1(n), v2(n), j1n(n), j2n(n);
  for (std::size_t j = 0; j < n; ++j) {
    v1[j] = trace.V[j].real();
    v2[j] = trace.V[j].imag();
    j1n[j] = -trace.sdVdn[j].real();
    j2n[j] = -trace.sdVdn[j].imag();
  }
  detail::check_conservation(j1n, R * w);
  detail::check_conservation(j2n, R * w);

  BoundaryMeasurement m;
  for (std::size_t j = 0; j < n; ++j) {
    const double th = w * double(j);
    const Vec2 normal{std::cos(th), std::sin(th)};
    const double ds = R * w;
    m.avgE1 += (-inv_area * v1[j] * ds) * normal;
    m.avgE2 += (-inv_area * v2[j] * ds) * normal;
    m.avgJ1 += (inv_area * R * j1n[j] * ds) * normal;  // x = R normal
    m.avgJ2 += (inv_area * R * j2n[j] * ds) * normal;
    m.e1j1 += -inv_area * v1[j] * j1n[j] * ds;
    m.e1j2 += -inv_area * v1[j] * j2n[j] * ds;
    m.e2j1 += -inv_area * v2[j] * j1n[j] * ds;
    m.e2j2 += -inv_area * v2[j] * j2n[j] * ds;
  }

  // <E1 . R E2> = (1/|O|) int V1 dV2/dt ds; on the circle the radius cancels
  // and the integral reduces to int V1 (dV2/dtheta) dtheta.
  const std::vector<double> dv2 = detail::spectral_derivative(v2);
  double rot_e = 0.0;
  for (std::size_t j = 0; j < n; ++j) rot_e += v1[j] * dv2[j];
  m.rotE = inv_area * rot_e * w;

  // <J1 . R J2> = -(1/|O|) int (J1.n) Phi2 ds with Phi2 the stream function
  // of J2.n; independent of the starting node because the net current is 0.
  const std::vector<double> phi2 = detail::spectral_antiderivative(j2n);
  double rot_j = 0.0;
  for (std::size_t j = 0; j < n; ++j) rot_j += j1n[j] * phi2[j] * R;
  m.rotJ = -inv_area * rot_j * R * w;

  m.rot_available = true;
  return m;
}

}  // namespace voltbound

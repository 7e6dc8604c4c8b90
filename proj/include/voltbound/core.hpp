#pragma once

// Small shared vocabulary for the library: planar vectors, complex helpers,
// the error hierarchy, and the tolerance policy used by every "== 0" test.

#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <string>

namespace voltbound {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Relative tolerance for sign/zero decisions; always paired with a scale
// taken from the magnitudes entering the cancellation.
inline constexpr double kRelTol = 1e-9;

inline bool near_zero(double value, double scale) {
  return std::abs(value) <= kRelTol * scale;
}

// ---------------------------------------------------------------------------
// Errors

enum class ErrorCode {
  InvalidInput,         // malformed config/file/arguments
  BetaZero,             // Re s1 Im s2 - Im s1 Re s2 == 0: method inapplicable
  EtaDegenerate,        // field vanishes in one phase
  EqualConductivities,  // s1 == s2: phases indistinguishable
  EqualModuli,          // |s1| == |s2|: rotational split unavailable
  MissingRotData,       // rotational averages absent (e.g. 3-D data)
  InvalidRadii,
  SingularTransmission,
  NonConservative,      // net boundary current != 0
  EmptyDomain,
  EmptySet,
  Numerical,            // internal consistency check failed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Real 2-vectors

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(Vec2 o) {
    x += o.x;
    y += o.y;
    return *this;
  }

  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

// 90-degree clockwise rotation: R v = (v_y, -v_x).
inline Vec2 rperp(Vec2 v) { return {v.y, -v.x}; }

// u . (R v), the rotational pairing used by the planar null Lagrangians.
inline double cross_dot(Vec2 u, Vec2 v) { return u.dot(rperp(v)); }

// ---------------------------------------------------------------------------
// Complex 2-vectors (componentwise complex; real/imag parts are real fields)

struct CVec2 {
  Complex x{0.0, 0.0};
  Complex y{0.0, 0.0};

  CVec2() = default;
  CVec2(Complex x_, Complex y_) : x(x_), y(y_) {}
  CVec2(Vec2 re, Vec2 im) : x(re.x, im.x), y(re.y, im.y) {}

  Vec2 re() const { return {x.real(), y.real()}; }
  Vec2 im() const { return {x.imag(), y.imag()}; }

  CVec2 operator+(const CVec2& o) const { return {x + o.x, y + o.y}; }
  CVec2 operator-(const CVec2& o) const { return {x - o.x, y - o.y}; }
  bool finite() const { return re().finite() && im().finite(); }

  // Complex bilinear dot (no conjugation), matching u . v for u, v in C^2.
  Complex cdot(const CVec2& o) const { return x * o.x + y * o.y; }
};

inline CVec2 operator*(Complex s, const CVec2& v) { return {s * v.x, s * v.y}; }

}  // namespace voltbound

#pragma once

// Sweeps an admissibility predicate over an interval of test volume
// fractions and reports where it holds, as a union of closed intervals with
// bisection-refined endpoints.

#include <functional>
#include <utility>
#include <vector>

#include "voltbound/core.hpp"

namespace voltbound {

enum class PredicateTag { Ellipse, TildeEllipse };

struct AdmissibleSet {
  PredicateTag tag = PredicateTag::Ellipse;
  std::vector<std::pair<double, double>> intervals;  // sorted, disjoint
  int grid_n = 0;
  double refine_tol = 0.0;

  bool empty() const { return intervals.empty(); }
  bool disconnected() const { return intervals.size() > 1; }

  bool contains(double f, double slack = 0.0) const {
    for (const auto& [lo, hi] : intervals)
      if (f >= lo - slack && f <= hi + slack) return true;
    return false;
  }
};

// inf/sup of the set; flags disconnectedness via the set itself.
inline std::pair<double, double> bounds_of(const AdmissibleSet& set) {
  if (set.empty())
    throw Error(ErrorCode::EmptySet,
                "admissible set is empty: measurement inconsistent or grid too coarse");
  return {set.intervals.front().first, set.intervals.back().second};
}

// Uniform grid including both endpoints, each true/false transition refined
// by bisection on the predicate.  Features narrower than the grid pitch can
// be missed; callers pick grid_n accordingly.
template <typename Pred>
AdmissibleSet scan(double lo, double hi, Pred&& admissible, int grid_n,
                   double refine_tol, PredicateTag tag) {
  if (!(lo < hi)) throw Error(ErrorCode::EmptyDomain, "scan needs lo < hi");
  if (grid_n < 3) throw Error(ErrorCode::InvalidInput, "scan needs grid_n >= 3");
  if (!(refine_tol > 0.0))
    throw Error(ErrorCode::InvalidInput, "refine_tol must be positive");

  std::vector<double> f(static_cast<std::size_t>(grid_n), 0.0);
  std::vector<char> ok(static_cast<std::size_t>(grid_n), 0);
  for (int i = 0; i < grid_n; ++i) {
    f[std::size_t(i)] = lo + (hi - lo) * double(i) / double(grid_n - 1);
    ok[std::size_t(i)] = admissible(f[std::size_t(i)]) ? 1 : 0;
  }

  // bisect a bracket [a, b] with admissible(a) != admissible(b); returns the
  // midpoint of the final bracket
  auto refine = [&](double a, double b, bool a_ok) {
    while (b - a > refine_tol) {
      const double mid = 0.5 * (a + b);
      if (admissible(mid) == a_ok)
        a = mid;
      else
        b = mid;
    }
    return 0.5 * (a + b);
  };

  AdmissibleSet set;
  set.tag = tag;
  set.grid_n = grid_n;
  set.refine_tol = refine_tol;

  int i = 0;
  while (i < grid_n) {
    if (!ok[std::size_t(i)]) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < grid_n && ok[std::size_t(j + 1)]) ++j;
    double left = f[std::size_t(i)];
    double right = f[std::size_t(j)];
    if (i > 0) left = refine(f[std::size_t(i - 1)], f[std::size_t(i)], false);
    if (j + 1 < grid_n)
      right = refine(f[std::size_t(j)], f[std::size_t(j + 1)], true);
    set.intervals.emplace_back(left, right);
    i = j + 1;
  }
  return set;
}

}  // namespace voltbound

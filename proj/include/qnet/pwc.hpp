#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace qnet {

// Model time in milliseconds. Configuration quantities (breakpoints, delays,
// offsets, green times, cycle length) are integer milliseconds; endogenous
// times produced by the dynamics (queue zero hits) are not grid-aligned and
// need the full double range.
using Time = double;

inline constexpr double kMsPerSecond = 1000.0;

// Value-merge tolerance used by canonicalization.
inline constexpr double kMergeTol = 1e-12;

// Strictness tolerance for classifying y vs c into negative/positive sets.
inline constexpr double kFlowTol = 1e-9;

/// Right-continuous piecewise-constant function of time on [0, domain_len),
/// optionally periodic with period domain_len. Values are flow rates in
/// vehicles per second.
class PwcFunction {
 public:
  PwcFunction() = default;
  PwcFunction(std::vector<Time> breakpoints, std::vector<double> values,
              Time domain_len, bool periodic);

  static PwcFunction constant(double value, Time domain_len, bool periodic);

  double value(Time t) const;
  Time domain_len() const { return domain_len_; }
  bool periodic() const { return periodic_; }
  const std::vector<Time>& breakpoints() const { return breakpoints_; }
  const std::vector<double>& values() const { return values_; }

  /// Integral over [s1, s2] in vehicles. Wraps modulo the period for
  /// periodic functions; throws on out-of-domain queries otherwise.
  double integrate(Time s1, Time s2) const;

  /// Period average in vehicles per second.
  double mean() const;

  /// g(t) = f(t - delta mod T). Periodic functions only.
  PwcFunction shift(Time delta) const;

  /// Pointwise weighted sum over the merged breakpoint grid.
  static PwcFunction combine(
      const std::vector<std::pair<double, const PwcFunction*>>& terms);

  bool almost_equal(const PwcFunction& other, double tol = kMergeTol) const;

 private:
  void canonicalize();

  std::vector<Time> breakpoints_;  // strictly increasing, starts at 0
  std::vector<double> values_;     // one per segment
  Time domain_len_ = 0;
  bool periodic_ = false;
};

struct Interval {
  Time lo = 0;
  Time hi = 0;
};

struct SignSets {
  std::vector<Interval> negative;  // closures of maximal {y < c} runs
  std::vector<Interval> positive;  // closures of maximal {y > c} runs
};

/// Maximal contiguous intervals of [0,T) where y < c - tol (negative) and
/// y > c + tol (positive); segments with |y-c| <= tol belong to neither.
/// Intervals are reported as closures ordered by left endpoint.
SignSets compare_sets(const PwcFunction& y, const PwcFunction& c,
                      double tol = kFlowTol);

}  // namespace qnet

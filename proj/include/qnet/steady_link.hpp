#pragma once

#include <utility>
#include <vector>

#include "qnet/pwc.hpp"

namespace qnet {

/// Result of locating the last zero-to-positive transition of the periodic
/// queue directly from the inflow/capacity sign structure, without iterating.
struct TransitionAnalysis {
  std::vector<Interval> negative;  // maximal {y < c} intervals (closures)
  std::vector<Interval> positive;  // maximal {y > c} intervals (closures)
  std::vector<Time> w_alpha;       // selected positive-set left endpoints
  Time alpha_last = 0;             // last zero-to-positive transition
  double x0 = 0;                   // periodic queue length at t = 0
  bool trivial = false;            // inflow never exceeds capacity
};

/// Requires mean(y) < mean(c); throws std::domain_error otherwise.
TransitionAnalysis analyze(const PwcFunction& y, const PwcFunction& c);

struct PeriodicOrbit {
  std::vector<std::pair<Time, double>> x_star;  // linear nodes over [0, T]
  PwcFunction z_star;                           // periodic over [0, T)
  std::vector<Time> alphas;                     // zero->positive instants

  double x_at(Time t) const;  // periodic lookup
};

/// The T-periodic orbit of an isolated link: the transition analysis pins
/// x*(0), one period of exact simulation yields the rest. The endpoint must
/// close within 1e-9 vehicles or this throws.
PeriodicOrbit orbit(const PwcFunction& y, const PwcFunction& c);

}  // namespace qnet

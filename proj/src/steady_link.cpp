#include "qnet/steady_link.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "qnet/model.hpp"
#include "qnet/sim.hpp"

namespace qnet {

namespace {

constexpr double kIntTol = 1e-9;   // vehicles, integral comparisons
constexpr double kTimeTol = 1e-9;  // ms, endpoint coincidence
constexpr double kQueueTol = 1e-12;
constexpr double kOrbitTol = 1e-9;  // vehicles, endpoint periodicity

// Right-continuous periodic function from recorded steps over [0, T),
// coalescing breakpoints closer than the event resolution.
PwcFunction periodic_from_steps(const std::vector<std::pair<Time, double>>& s,
                                Time T) {
  std::vector<Time> b;
  std::vector<double> v;
  for (const auto& [t, val] : s) {
    if (t >= T - kTimeTol) break;
    if (!b.empty() && t - b.back() <= kTimeTol) {
      v.back() = val;
    } else {
      b.push_back(t);
      v.push_back(val);
    }
  }
  return PwcFunction(std::move(b), std::move(v), T, true);
}

}  // namespace

TransitionAnalysis analyze(const PwcFunction& y, const PwcFunction& c) {
  if (!y.periodic() || !c.periodic() || y.domain_len() != c.domain_len())
    throw std::invalid_argument("analyze: periods must match");
  if (y.mean() >= c.mean())
    throw std::domain_error("unstable link: average inflow >= average capacity");
  const Time T = y.domain_len();

  TransitionAnalysis a;
  SignSets sets = compare_sets(y, c);
  a.negative = sets.negative;
  a.positive = sets.positive;
  if (a.positive.empty()) {
    a.trivial = true;
    return a;
  }

  auto surplus = [&](Time s1, Time s2) {  // Y - C over [s1, s2], vehicles
    return y.integrate(s1, s2) - c.integrate(s1, s2);
  };

  const int Mw = static_cast<int>(a.positive.size());
  const int Mb = static_cast<int>(a.negative.size());
  std::vector<Time> w(Mw);
  for (int k = 0; k < Mw; ++k) w[k] = a.positive[k].lo;

  // Repeatedly find the next positive set preceded by a negative set over
  // which the queue, restarted empty at the previous pick, drains to zero. A
  // drain finishing exactly at a positive-set start must be strict, and a
  // "drain" that never left the starting instant does not count.
  std::vector<int> picks = {0};
  while (true) {
    const int prev = picks.back();
    const Time wprev = w[prev];
    int found = -1;
    for (int ind = prev + 1; ind < Mw && found < 0; ++ind) {
      for (int p = 0; p < Mb; ++p) {
        const Time bp = a.negative[p].hi;
        if (bp < w[ind - 1] - kTimeTol || bp > w[ind] + kTimeTol) continue;
        if (bp <= wprev + kTimeTol) continue;
        const double d = surplus(wprev, bp);
        const bool hits = (bp < w[ind] - kTimeTol) ? d <= kIntTol : d < -kIntTol;
        if (hits) {
          found = ind;
          break;
        }
      }
    }
    if (found < 0) break;
    picks.push_back(found);
  }

  for (int k : picks) a.w_alpha.push_back(w[k]);
  a.alpha_last = a.w_alpha.back();
  a.x0 = std::max(0.0, surplus(a.alpha_last, T));
  return a;
}

double PeriodicOrbit::x_at(Time t) const {
  if (x_star.empty()) return 0.0;
  const Time T = x_star.back().first;
  Time tw = std::fmod(t, T);
  if (tw < 0) tw += T;
  auto it = std::upper_bound(
      x_star.begin(), x_star.end(), tw,
      [](Time v, const std::pair<Time, double>& e) { return v < e.first; });
  if (it == x_star.begin()) return x_star.front().second;
  if (it == x_star.end()) return x_star.back().second;
  auto hi = it;
  auto lo = std::prev(it);
  Time span = hi->first - lo->first;
  if (span <= 0) return hi->second;
  double f = (tw - lo->first) / span;
  return lo->second + f * (hi->second - lo->second);
}

PeriodicOrbit orbit(const PwcFunction& y, const PwcFunction& c) {
  TransitionAnalysis a = analyze(y, c);
  const Time T = y.domain_len();

  Network one;
  one.n_links = 1;
  one.cycle = T;
  one.inflow = {y};
  one.capacity = {c};

  Trajectory traj = simulate(one, cold_start(one, {a.x0}), T);

  PeriodicOrbit orb;
  orb.x_star = traj.links[0].x;
  orb.z_star = periodic_from_steps(traj.links[0].z, T);
  const auto& nodes = orb.x_star;
  if (std::abs(nodes.back().second - nodes.front().second) > kOrbitTol)
    throw std::runtime_error("periodic orbit failed to close over one period");
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k)
    if (nodes[k].second <= kQueueTol && nodes[k + 1].second > kQueueTol &&
        nodes[k + 1].first > nodes[k].first)
      orb.alphas.push_back(nodes[k].first);
  return orb;
}

}  // namespace qnet

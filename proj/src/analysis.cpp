#include "qnet/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qnet {

namespace {

double lerp_at(const std::vector<std::pair<Time, double>>& nodes, Time t) {
  if (nodes.empty()) return 0.0;
  if (t <= nodes.front().first) return nodes.front().second;
  if (t >= nodes.back().first) return nodes.back().second;
  auto it = std::upper_bound(
      nodes.begin(), nodes.end(), t,
      [](Time v, const std::pair<Time, double>& e) { return v < e.first; });
  auto hi = it;
  auto lo = std::prev(it);
  Time span = hi->first - lo->first;
  if (span <= 0) return hi->second;
  return lo->second + (t - lo->first) / span * (hi->second - lo->second);
}

double beta_value(const PwcFunction& b, Time local) {
  if (b.domain_len() == 0) return 0.0;
  if (local < 0 || local >= b.domain_len()) return 0.0;
  return b.value(local);
}

// Integral of |beta_a - beta_b| (veh/s) over local window [lo, hi), in
// vehicles. Either function may be empty (treated as zero).
double abs_diff_integral(const PwcFunction& a, const PwcFunction& b, Time lo,
                         Time hi) {
  std::vector<Time> grid = {lo};
  for (const PwcFunction* f : {&a, &b})
    if (f->domain_len() > 0)
      for (Time t : f->breakpoints())
        if (t > lo && t < hi) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Time seg_hi = (k + 1 < grid.size()) ? grid[k + 1] : hi;
    acc += std::abs(beta_value(a, grid[k]) - beta_value(b, grid[k])) *
           (seg_hi - grid[k]);
  }
  return acc / kMsPerSecond;
}

// Outflow of link j at absolute time tau, falling back to the initial
// history for times before the trajectory start.
double z_eval(const Network& net, const Trajectory& tr, const NetState& init,
              int j, Time tau) {
  if (tau >= tr.t_begin) return tr.z_at(j, tau);
  Time dbar = net.max_out_delay(j);
  const PwcFunction& b = init.beta[j];
  return beta_value(b, dbar - (tr.t_begin - tau));
}

}  // namespace

StabilityReport stability(const Network& net) {
  auto [lbar, cbar] = average_rates(net);
  auto R = net.routing_matrix();
  StabilityReport rep;
  rep.slack.resize(net.n_links);
  for (int i = 0; i < net.n_links; ++i) {
    double v = cbar[i] - lbar[i];
    for (int j = 0; j < net.n_links; ++j) v -= R[j][i] * cbar[j];
    rep.slack[i] = v;
  }
  rep.margin = *std::min_element(rep.slack.begin(), rep.slack.end());
  rep.stable = rep.margin > 0;
  return rep;
}

DistanceSample l1_distance(const Network& net, const NetState& a,
                           const NetState& b) {
  if (a.t != b.t) throw std::invalid_argument("l1_distance: time mismatch");
  DistanceSample d;
  d.t = a.t;
  for (int i = 0; i < net.n_links; ++i) d.state_gap += std::abs(a.x[i] - b.x[i]);
  for (const auto& e : net.routing) {
    if (e.delay <= 0 || e.ratio <= 0) continue;
    Time dbar = net.max_out_delay(e.from);
    d.history_gap += e.ratio * abs_diff_integral(a.beta[e.from],
                                                 b.beta[e.from],
                                                 dbar - e.delay, dbar);
  }
  return d;
}

std::vector<DistanceSample> check_contraction(const Network& net,
                                              const NetState& a,
                                              const NetState& b, int cycles) {
  const Time T = net.cycle;
  Trajectory ta = simulate(net, a, cycles * T);
  Trajectory tb = simulate(net, b, cycles * T);

  std::vector<DistanceSample> out;
  out.push_back(l1_distance(net, a, b));
  for (int k = 1; k <= cycles; ++k) {
    Time t = a.t + k * T;
    DistanceSample d;
    d.t = t;
    for (int i = 0; i < net.n_links; ++i)
      d.state_gap += std::abs(ta.x_at(i, t) - tb.x_at(i, t));
    for (const auto& e : net.routing) {
      if (e.delay <= 0 || e.ratio <= 0) continue;
      const int j = e.from;
      Time lo = t - e.delay;
      std::vector<Time> grid = {lo};
      for (const Trajectory* tr : {&ta, &tb})
        for (const auto& [ts, v] : tr->links[j].z)
          if (ts > lo && ts < t) grid.push_back(ts);
      Time dbar = net.max_out_delay(j);
      for (const NetState* st : {&a, &b})
        if (st->beta[j].domain_len() > 0)
          for (Time bp : st->beta[j].breakpoints()) {
            Time abs_t = a.t - dbar + bp;
            if (abs_t > lo && abs_t < t) grid.push_back(abs_t);
          }
      std::sort(grid.begin(), grid.end());
      grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
      double acc = 0.0;
      for (std::size_t g = 0; g < grid.size(); ++g) {
        Time hi = (g + 1 < grid.size()) ? grid[g + 1] : t;
        acc += std::abs(z_eval(net, ta, a, j, grid[g]) -
                        z_eval(net, tb, b, j, grid[g])) *
               (hi - grid[g]);
      }
      d.history_gap += e.ratio * acc / kMsPerSecond;
    }
    out.push_back(d);
  }
  return out;
}

double rmse_linear(const std::vector<std::pair<Time, double>>& a,
                   const std::vector<std::pair<Time, double>>& b, Time t1,
                   Time t2) {
  if (t2 <= t1) throw std::invalid_argument("rmse: empty range");
  std::vector<Time> grid = {t1, t2};
  for (const auto* f : {&a, &b})
    for (const auto& [t, v] : *f)
      if (t > t1 && t < t2) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    double d0 = lerp_at(a, grid[k]) - lerp_at(b, grid[k]);
    double d1 = lerp_at(a, grid[k + 1]) - lerp_at(b, grid[k + 1]);
    acc += (grid[k + 1] - grid[k]) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
  }
  return std::sqrt(acc / (t2 - t1));
}

double rmse_step(const PwcFunction& a, const PwcFunction& b) {
  if (a.domain_len() != b.domain_len())
    throw std::invalid_argument("rmse: period mismatch");
  const Time T = a.domain_len();
  std::vector<Time> grid = a.breakpoints();
  grid.insert(grid.end(), b.breakpoints().begin(), b.breakpoints().end());
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  double acc = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    Time hi = (k + 1 < grid.size()) ? grid[k + 1] : T;
    double d = a.value(grid[k]) - b.value(grid[k]);
    acc += d * d * (hi - grid[k]);
  }
  return std::sqrt(acc / T);
}

}  // namespace qnet

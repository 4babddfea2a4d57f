#include "qnet/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

#include "qnet/outflow.hpp"

namespace qnet {

namespace {

constexpr double kTimeTol = 1e-9;    // ms; event coalescing
constexpr double kQueueTol = 1e-12;  // vehicles
constexpr double kRateTol = 1e-12;   // veh/s
constexpr double kInf = std::numeric_limits<double>::infinity();

struct DelayedEdge {
  int other;     // the link at the far end
  double ratio;
  Time delay;
};

double step_lookup(const std::vector<std::pair<Time, double>>& steps,
                   Time tau) {
  auto it = std::upper_bound(
      steps.begin(), steps.end(), tau + kTimeTol,
      [](Time v, const std::pair<Time, double>& e) { return v < e.first; });
  if (it == steps.begin()) return 0.0;
  return std::prev(it)->second;
}

}  // namespace

NetState cold_start(const Network& net, std::vector<double> x0, Time t0) {
  NetState s;
  s.t = t0;
  s.x = std::move(x0);
  s.beta.resize(net.n_links);
  for (int j = 0; j < net.n_links; ++j) {
    Time dbar = net.max_out_delay(j);
    if (dbar > 0) s.beta[j] = PwcFunction::constant(0.0, dbar, false);
  }
  return s;
}

NetState periodic_state(const Network& net, std::vector<double> x0,
                        const std::vector<PwcFunction>& z, Time t0) {
  NetState s;
  s.t = t0;
  s.x = std::move(x0);
  s.beta.resize(net.n_links);
  const Time T = net.cycle;
  for (int j = 0; j < net.n_links; ++j) {
    Time dbar = net.max_out_delay(j);
    if (dbar <= 0) continue;
    Time w0 = t0 - dbar;  // window start in absolute time
    std::vector<Time> locals = {0.0};
    double k0 = std::floor(w0 / T) - 1;
    double k1 = std::floor(t0 / T) + 1;
    for (double k = k0; k <= k1; ++k)
      for (Time b : z[j].breakpoints()) {
        Time abs = k * T + b;
        if (abs > w0 && abs < t0) locals.push_back(abs - w0);
      }
    std::sort(locals.begin(), locals.end());
    locals.erase(std::unique(locals.begin(), locals.end()), locals.end());
    std::vector<double> vals(locals.size());
    for (std::size_t k = 0; k < locals.size(); ++k)
      vals[k] = z[j].value(w0 + locals[k]);
    s.beta[j] = PwcFunction(std::move(locals), std::move(vals), dbar, false);
  }
  return s;
}

std::vector<double> effective_inflow(const Network& net,
                                     const NetState& state) {
  std::vector<double> lam(net.n_links);
  for (int i = 0; i < net.n_links; ++i) {
    lam[i] = net.inflow[i].value(state.t);
    for (const auto& e : net.delayed_upstream(i)) {
      Time dbar = net.max_out_delay(e.from);
      const PwcFunction& b = state.beta[e.from];
      if (b.domain_len() == 0) continue;  // empty history: no traffic in flight
      if (b.domain_len() != dbar)
        throw std::invalid_argument("history window length mismatch");
      lam[i] += e.ratio * b.value(dbar - e.delay);
    }
  }
  return lam;
}

double Trajectory::x_at(int link, Time t) const {
  const auto& nodes = links[link].x;
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
  double f = (t - lo->first) / span;
  return lo->second + f * (hi->second - lo->second);
}

double Trajectory::z_at(int link, Time t) const {
  return step_lookup(links[link].z, t);
}

double Trajectory::z_integral(int link, Time t1, Time t2) const {
  const auto& steps = links[link].z;
  if (t1 >= t2 || steps.empty()) return 0.0;
  double acc = 0.0;
  Time cur = t1;
  auto it = std::upper_bound(
      steps.begin(), steps.end(), t1,
      [](Time v, const std::pair<Time, double>& e) { return v < e.first; });
  double val = (it == steps.begin()) ? 0.0 : std::prev(it)->second;
  for (; it != steps.end() && it->first < t2; ++it) {
    acc += val * (it->first - cur);
    cur = it->first;
    val = it->second;
  }
  acc += val * (t2 - cur);
  return acc / kMsPerSecond;
}

double Trajectory::x_max(int link, Time t1, Time t2) const {
  const auto& nodes = links[link].x;
  double best = std::max(x_at(link, t1), x_at(link, t2));
  for (const auto& [t, v] : nodes)
    if (t > t1 && t < t2) best = std::max(best, v);
  return best;
}

namespace {

class Engine {
 public:
  Engine(const Network& net, const NetState& init)
      : net_(net), solver_(net), n_(net.n_links), t_(init.t), x_(init.x) {
    if (static_cast<int>(x_.size()) != n_)
      throw std::invalid_argument("initial state size mismatch");
    for (double v : x_)
      if (v < 0 || !std::isfinite(v))
        throw std::invalid_argument("negative initial queue");
    T_ = net.cycle;
    cap_ = net.capacity;
    in_zero_.resize(n_);
    in_delayed_.resize(n_);
    out_delayed_.resize(n_);
    for (const auto& e : net.routing) {
      if (e.ratio <= 0) continue;
      if (e.delay == 0) {
        in_zero_[e.to].emplace_back(e.from, e.ratio);
      } else {
        in_delayed_[e.to].push_back({e.from, e.ratio, e.delay});
        out_delayed_[e.from].push_back({e.to, e.ratio, e.delay});
      }
    }
    rebuild_grid();

    hist_.resize(n_);
    for (int j = 0; j < n_; ++j) {
      Time dbar = net.max_out_delay(j);
      if (dbar <= 0) continue;
      if (static_cast<int>(init.beta.size()) <= j ||
          init.beta[j].domain_len() == 0)
        continue;  // no history given: treated as zero flow
      const PwcFunction& b = init.beta[j];
      if (b.domain_len() != dbar)
        throw std::invalid_argument("history window length mismatch");
      for (std::size_t k = 0; k < b.breakpoints().size(); ++k) {
        Time abs = t_ - dbar + b.breakpoints()[k];
        hist_[j].emplace_back(abs, b.values()[k]);
        if (k == 0) continue;
        for (const auto& e : out_delayed_[j])
          if (abs + e.delay > t_ + kTimeTol)
            arrivals_.push({abs + e.delay, e.other});
      }
    }

    traj_.t_begin = t_;
    traj_.t_end = t_;
    traj_.links.resize(n_);
    z_.assign(n_, 0.0);
    slope_.assign(n_, 0.0);
    process_event(true, true);
  }

  void run_until(Time t_end) {
    while (true) {
      Time t_exo = next_exo();
      Time t_arr = arrivals_.empty() ? kInf : arrivals_.top().first;
      Time t_zero = kInf;
      for (int i = 0; i < n_; ++i) {
        hit_[i] = kInf;
        if (x_[i] > kQueueTol && slope_[i] < -1e-15) {
          hit_[i] = t_ + x_[i] / (-slope_[i]) * kMsPerSecond;
          t_zero = std::min(t_zero, hit_[i]);
        }
      }
      Time te = std::min({t_exo, t_arr, t_zero});
      if (te >= t_end - kTimeTol) {
        advance(t_end, -kInf);
        record_x_nodes();
        if (!traj_.windows.empty()) traj_.windows.back().end = t_;
        traj_.t_end = t_;
        return;
      }

      advance(te, te + kTimeTol);
      bool window_start = false;
      if (t_exo <= te + kTimeTol) {
        window_start = true;
        traj_.events.push_back({t_, Event::kExogenous, -1});
      }
      while (!arrivals_.empty() && arrivals_.top().first <= te + kTimeTol) {
        window_start = true;
        traj_.events.push_back({t_, Event::kArrival, arrivals_.top().second});
        arrivals_.pop();
      }
      for (int i = 0; i < n_; ++i)
        if (hit_[i] <= te + kTimeTol)
          traj_.events.push_back({t_, Event::kZeroHit, i});
      process_event(window_start, false);
    }
  }

  // Adaptive signal control swaps capacities at cycle boundaries; refresh()
  // re-solves at the current instant with the new plan.
  void set_capacity(int link, PwcFunction c) { cap_[link] = std::move(c); }
  void refresh() {
    rebuild_grid();
    traj_.events.push_back({t_, Event::kExogenous, -1});
    process_event(true, false);
  }

  const Trajectory& trajectory() const { return traj_; }
  Trajectory take_trajectory() { return std::move(traj_); }

 private:
  void rebuild_grid() {
    grid_.clear();
    for (int i = 0; i < n_; ++i) {
      const auto& a = net_.inflow[i].breakpoints();
      const auto& b = cap_[i].breakpoints();
      grid_.insert(grid_.end(), a.begin(), a.end());
      grid_.insert(grid_.end(), b.begin(), b.end());
    }
    std::sort(grid_.begin(), grid_.end());
    grid_.erase(std::unique(grid_.begin(), grid_.end()), grid_.end());
  }

  Time next_exo() const {
    Time base = std::floor(t_ / T_) * T_;
    Time tw = t_ - base;
    auto it = std::upper_bound(grid_.begin(), grid_.end(), tw + kTimeTol);
    if (it != grid_.end()) return base + *it;
    return base + T_ + grid_.front();
  }

  double hist_value(int j, Time tau) const { return step_lookup(hist_[j], tau); }

  void advance(Time te, Time hit_cutoff) {
    double dt = (te - t_) / kMsPerSecond;
    for (int i = 0; i < n_; ++i) {
      x_[i] = std::max(0.0, x_[i] + slope_[i] * dt);
      if (hit_[i] <= hit_cutoff) x_[i] = 0.0;
    }
    t_ = te;
  }

  void record_x_nodes() {
    for (int i = 0; i < n_; ++i) traj_.links[i].x.emplace_back(t_, x_[i]);
  }

  void process_event(bool window_start, bool first) {
    OutflowQuery q;
    q.zero_set.resize(n_);
    q.eff_inflow.resize(n_);
    q.capacity_now.resize(n_);
    for (int i = 0; i < n_; ++i) {
      q.zero_set[i] = x_[i] <= kQueueTol;
      double lam = net_.inflow[i].value(t_);
      for (const auto& e : in_delayed_[i])
        lam += e.ratio * hist_value(e.other, t_ - e.delay);
      q.eff_inflow[i] = lam;
      q.capacity_now[i] = cap_[i].value(t_);
    }
    solver_.solve_into(q, znew_);

    for (int i = 0; i < n_; ++i) {
      double s = q.eff_inflow[i] - znew_[i];
      for (const auto& [j, r] : in_zero_[i]) s += r * znew_[j];
      slope_[i] = s;
    }

    for (int i = 0; i < n_; ++i) {
      if (!first && std::abs(znew_[i] - z_[i]) <= kRateTol) continue;
      traj_.links[i].z.emplace_back(t_, znew_[i]);
      hist_[i].emplace_back(t_, znew_[i]);
      for (const auto& e : out_delayed_[i])
        arrivals_.push({t_ + e.delay, e.other});
    }
    z_ = znew_;

    // Persistent zero set: empty queues that stay empty. Links with x = 0 but
    // inflow above capacity leave the zero set at this very instant and are
    // not counted as in-window losses.
    cur_set_.resize(n_);
    for (int i = 0; i < n_; ++i)
      cur_set_[i] = q.zero_set[i] && slope_[i] <= kRateTol;
    if (window_start || traj_.windows.empty()) {
      traj_.windows.push_back({t_, t_, 0, false});
      win_set_ = cur_set_;
    } else {
      auto& win = traj_.windows.back();
      bool lost = false;
      for (int i = 0; i < n_; ++i)
        if (win_set_[i] && !cur_set_[i]) lost = true;
      if (cur_set_ != win_set_) {
        ++win.zero_set_changes;
        win_set_ = cur_set_;
      }
      if (lost) win.lost_member = true;
      if (win.zero_set_changes > 10 * n_)
        throw std::runtime_error(
            "event storm: zero-set churn within a constant-input window");
    }
    traj_.windows.back().end = t_;

    record_x_nodes();
    traj_.t_end = t_;
    hit_.assign(n_, kInf);
  }

  const Network& net_;
  OutflowSolver solver_;
  int n_;
  Time T_ = 0;
  Time t_ = 0;
  std::vector<double> x_, z_, znew_, slope_, hit_;
  std::vector<PwcFunction> cap_;
  std::vector<std::vector<std::pair<int, double>>> in_zero_;
  std::vector<std::vector<DelayedEdge>> in_delayed_, out_delayed_;
  std::vector<Time> grid_;
  std::vector<std::vector<std::pair<Time, double>>> hist_;
  std::priority_queue<std::pair<Time, int>, std::vector<std::pair<Time, int>>,
                      std::greater<>>
      arrivals_;
  Trajectory traj_;
  std::vector<char> cur_set_, win_set_;
};

}  // namespace

Trajectory simulate(const Network& net, const NetState& init, Time horizon) {
  if (horizon <= 0) throw std::invalid_argument("horizon must be positive");
  Engine eng(net, init);
  eng.run_until(init.t + horizon);
  return eng.take_trajectory();
}

NetState end_state(const Network& net, const Trajectory& traj) {
  NetState s;
  s.t = traj.t_end;
  s.x.resize(net.n_links);
  s.beta.resize(net.n_links);
  for (int i = 0; i < net.n_links; ++i) s.x[i] = traj.x_at(i, traj.t_end);
  for (int j = 0; j < net.n_links; ++j) {
    Time dbar = net.max_out_delay(j);
    if (dbar <= 0) continue;
    if (traj.t_end - dbar < traj.t_begin - kTimeTol)
      throw std::invalid_argument(
          "trajectory shorter than the look-back window");
    Time w0 = traj.t_end - dbar;
    std::vector<Time> locals = {0.0};
    for (const auto& [t, v] : traj.links[j].z)
      if (t > w0 && t < traj.t_end) locals.push_back(t - w0);
    std::sort(locals.begin(), locals.end());
    locals.erase(std::unique(locals.begin(), locals.end()), locals.end());
    std::vector<double> vals(locals.size());
    for (std::size_t k = 0; k < locals.size(); ++k)
      vals[k] = traj.z_at(j, w0 + locals[k]);
    s.beta[j] = PwcFunction(std::move(locals), std::move(vals), dbar, false);
  }
  return s;
}

Trajectory euler_oracle(const Network& net, const NetState& init, Time horizon,
                        double dt_seconds) {
  const int n = net.n_links;
  const double dt_ms = dt_seconds * kMsPerSecond;
  if (dt_ms <= 0) throw std::invalid_argument("dt must be positive");
  for (const auto& e : net.routing)
    if (e.delay > 0 && e.delay < dt_ms - kTimeTol)
      throw std::invalid_argument("dt exceeds the smallest positive delay");
  const long long steps = std::llround(horizon / dt_ms);

  OutflowSolver solver(net);
  std::vector<std::vector<std::pair<int, double>>> in_zero(n);
  std::vector<std::vector<DelayedEdge>> in_delayed(n);
  for (const auto& e : net.routing) {
    if (e.ratio <= 0) continue;
    if (e.delay == 0)
      in_zero[e.to].emplace_back(e.from, e.ratio);
    else
      in_delayed[e.to].push_back({e.from, e.ratio, e.delay});
  }

  Trajectory traj;
  traj.t_begin = init.t;
  traj.links.resize(n);
  std::vector<double> x = init.x;
  std::vector<std::vector<double>> zhist(n);
  std::vector<double> z(n, 0.0), zprev(n, -1.0);
  OutflowQuery q;
  q.zero_set.resize(n);
  q.eff_inflow.resize(n);
  q.capacity_now.resize(n);

  for (long long k = 0; k <= steps; ++k) {
    Time t = init.t + k * dt_ms;
    for (int i = 0; i < n; ++i) {
      // Absolute tolerance: after a clamp at zero, rounding in the slope sum
      // can leave x at ~1e-19, which would flip the queue out of the zero set
      // and make the outflow chatter between capacity and inflow every step.
      q.zero_set[i] = x[i] <= 1e-12;
      double lam = net.inflow[i].value(t);
      for (const auto& e : in_delayed[i]) {
        Time tau = t - e.delay;
        if (tau >= init.t) {
          long long idx = static_cast<long long>(
              std::floor((tau - init.t) / dt_ms + 1e-9));
          idx = std::min(idx, k - 1);
          lam += e.ratio * (idx >= 0 ? zhist[e.other][idx] : 0.0);
        } else {
          const PwcFunction& b = init.beta[e.other];
          if (b.domain_len() > 0) {
            Time dbar = net.max_out_delay(e.other);
            lam += e.ratio * b.value(dbar - (init.t - tau));
          }
        }
      }
      q.eff_inflow[i] = lam;
      q.capacity_now[i] = net.capacity[i].value(t);
    }
    solver.solve_into(q, z);
    // Route the mass actually emitted this step: when a queue empties
    // mid-step the clamped update x <- max(0, x + dt*xdot) discards the
    // overshoot, so the outflow fed downstream must be capped to the mass
    // available (queue plus inflow over the step). Zero-delay edges make
    // the caps interdependent; iterate the monotone-decreasing map to its
    // fixed point.
    std::vector<double> zu = z;
    for (int pass = 0; pass < 500; ++pass) {
      bool changed = false;
      for (int i = 0; i < n; ++i) {
        double avail = q.eff_inflow[i] + x[i] / dt_seconds;
        for (const auto& [j, r] : in_zero[i]) avail += r * zu[j];
        if (avail < zu[i] - 1e-14) {
          zu[i] = avail;
          changed = true;
        }
      }
      if (!changed) break;
    }
    for (int i = 0; i < n; ++i) {
      zhist[i].push_back(zu[i]);
      traj.links[i].x.emplace_back(t, x[i]);
      if (k == 0 || std::abs(zu[i] - zprev[i]) > kRateTol)
        traj.links[i].z.emplace_back(t, zu[i]);
    }
    zprev = zu;
    if (k == steps) break;
    for (int i = 0; i < n; ++i) {
      double s = q.eff_inflow[i] - zu[i];
      for (const auto& [j, r] : in_zero[i]) s += r * zu[j];
      x[i] = std::max(0.0, x[i] + s * dt_seconds);
    }
  }
  traj.t_end = init.t + steps * dt_ms;
  return traj;
}

Trajectory adaptive_green(const Network& net, const NetState& init,
                          Time horizon) {
  if (net.profiles.empty())
    throw std::invalid_argument("adaptive control needs capacity profiles");
  std::vector<CapacityProfile> prof = net.profiles;
  std::vector<std::vector<LinkId>> groups = net.intersections;
  const Time T = net.cycle;

  Engine eng(net, init);
  Time t = init.t;
  const Time t_stop = init.t + horizon;
  while (t < t_stop - kTimeTol) {
    Time tc = std::min(t + T, t_stop);
    eng.run_until(tc);
    if (tc >= t_stop - kTimeTol) break;
    const Trajectory& traj = eng.trajectory();
    for (const auto& g : groups) {
      if (g.size() < 2) continue;
      double budget = 0, total = 0;
      std::vector<double> peak(g.size());
      for (std::size_t k = 0; k < g.size(); ++k) {
        budget += prof[g[k]].green;
        peak[k] = traj.x_max(g[k], t, tc);
        total += peak[k];
      }
      if (total <= kQueueTol) continue;  // all empty: keep previous split
      // Largest-remainder rounding to whole ticks, each phase >= 1 tick.
      std::vector<Time> green(g.size());
      std::vector<std::pair<double, std::size_t>> rem(g.size());
      Time used = 0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        double exact = budget * peak[k] / total;
        green[k] = std::floor(exact);
        rem[k] = {exact - green[k], k};
        used += green[k];
      }
      std::sort(rem.rbegin(), rem.rend());
      for (std::size_t k = 0; used < budget && k < rem.size(); ++k, ++used)
        green[rem[k].second] += 1;
      for (std::size_t k = 0; k < g.size(); ++k)
        if (green[k] < 1) {
          auto big = std::max_element(green.begin(), green.end());
          *big -= 1 - green[k];
          green[k] = 1;
        }
      for (std::size_t k = 0; k < g.size(); ++k) {
        if (green[k] == prof[g[k]].green) continue;
        prof[g[k]].green = green[k];
        eng.set_capacity(g[k], prof[g[k]].to_pwc());
      }
    }
    // Re-solve at the boundary: an exogenous breakpoint may sit exactly at
    // the cycle edge, and capacities may just have changed.
    eng.refresh();
    t = tc;
  }
  return eng.take_trajectory();
}

}  // namespace qnet

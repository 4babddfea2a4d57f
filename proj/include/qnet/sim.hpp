#pragma once

#include <utility>
#include <vector>

#include "qnet/model.hpp"

namespace qnet {

/// Instantaneous system state: queue lengths plus, for every link with a
/// positive-delay out-edge, the departure history over the look-back window
/// [t - dbar_j, t). beta[j] uses local coordinates: beta[j](s) is the outflow
/// of j at absolute time t - dbar_j + s. Links without delayed out-edges may
/// carry a default-constructed (empty) function.
struct NetState {
  Time t = 0;
  std::vector<double> x;
  std::vector<PwcFunction> beta;
};

/// State with empty history (no vehicles in transit).
NetState cold_start(const Network& net, std::vector<double> x0, Time t0 = 0);

/// State whose history is the periodic extension of the given outflows, used
/// to start a simulation exactly on a periodic orbit.
NetState periodic_state(const Network& net, std::vector<double> x0,
                        const std::vector<PwcFunction>& z, Time t0 = 0);

/// lambda-tilde: external inflow plus delayed upstream departures, evaluated
/// right-continuously at state.t. Throws if a required history is missing or
/// too short; empty histories count as zero flow.
std::vector<double> effective_inflow(const Network& net, const NetState& state);

struct Event {
  enum Kind { kExogenous, kArrival, kZeroHit };
  Time t = 0;
  Kind kind = kExogenous;
  LinkId link = -1;  // -1 for exogenous input switches
};

/// Bookkeeping over one maximal interval of constant lambda-tilde inputs
/// (delimited by exogenous breakpoints and delayed arrivals). The zero set
/// can only gain members inside such a window.
struct WindowRecord {
  Time start = 0;
  Time end = 0;
  int zero_set_changes = 0;
  bool lost_member = false;
};

struct LinkTrajectory {
  std::vector<std::pair<Time, double>> x;  // piecewise-linear nodes
  std::vector<std::pair<Time, double>> z;  // right-continuous steps
};

struct Trajectory {
  Time t_begin = 0;
  Time t_end = 0;
  std::vector<LinkTrajectory> links;
  std::vector<Event> events;
  std::vector<WindowRecord> windows;

  double x_at(int link, Time t) const;
  double z_at(int link, Time t) const;
  double z_integral(int link, Time t1, Time t2) const;  // vehicles
  double x_max(int link, Time t1, Time t2) const;
};

/// Exact event-driven integration: z is recomputed at exogenous breakpoints,
/// delayed arrivals, and queue zero hits; x is piecewise linear in between.
Trajectory simulate(const Network& net, const NetState& init, Time horizon);

/// State at the end of a trajectory, with history reconstructed from the
/// recorded outflows. Requires horizon >= the longest look-back window.
NetState end_state(const Network& net, const Trajectory& traj);

/// Forward-Euler reference integrator (test oracle). dt must not exceed the
/// smallest positive delay.
Trajectory euler_oracle(const Network& net, const NetState& init, Time horizon,
                        double dt_seconds);

/// Simulation that reallocates green time within each intersection group at
/// every cycle boundary, proportionally to the previous cycle's peak queues.
/// Requires capacity profiles; links not listed in any group keep their
/// signal plan.
Trajectory adaptive_green(const Network& net, const NetState& init,
                          Time horizon);

}  // namespace qnet

#pragma once

#include <string>
#include <vector>

#include "qnet/sim.hpp"
#include "qnet/steady_link.hpp"
#include "qnet/steady_net.hpp"

namespace qnet {

/// Columns: t_ms, link, x, z. One row per trajectory node; z is the
/// right-continuous outflow at that node, so the file reconstructs the
/// trajectory exactly.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// Round-trips files written by write_trajectory_csv (n_links recovered from
/// the data). Events and window records are not persisted.
Trajectory read_trajectory_csv(const std::string& path);

/// Columns: t_ms, kind, link (kind in {exogenous, arrival, zero_hit};
/// link -1 for exogenous input switches).
void write_events_csv(const std::string& path, const std::vector<Event>& events);

/// Columns: t_ms, x_star, z_star over one period; the zero-to-positive
/// transition instants go to a sidecar file `<path>.alphas` (one per line).
void write_orbit_csv(const std::string& path, const PeriodicOrbit& orbit);

PeriodicOrbit read_orbit_csv(const std::string& path, Time cycle);

/// Columns: iter, link, z_bar, gap, rmse_vs_final.
void write_iteration_log_csv(const std::string& path, const IterationLog& log);

}  // namespace qnet

#pragma once

#include <utility>
#include <vector>

#include "qnet/model.hpp"
#include "qnet/steady_link.hpp"

namespace qnet {

struct IterationEntry {
  int iter = 0;
  std::vector<double> z_bar;      // per-link period-average outflow
  double gap = 0;                 // max_i (z_bar_target_i - z_bar_i)
  double wall_ms = 0;
  std::vector<std::vector<std::pair<Time, double>>> x_nodes;  // per-link x^(k)
  std::vector<double> rmse_vs_final;                          // filled at end
};

struct IterationLog {
  std::vector<IterationEntry> entries;
};

struct NetworkSteadyState {
  std::vector<PeriodicOrbit> orbits;  // per link
  int iterations = 0;
  double gap = 0;
  bool converged = false;
};

/// One routing pass: y_i = lambda_i + sum_j R_ji z_j(t - delta_ji), all
/// functions T-periodic.
std::vector<PwcFunction> route(const Network& net,
                               const std::vector<PwcFunction>& z);

/// Period-average steady outflows (I - R^T)^{-1} lambda_bar.
std::vector<double> target_average(const Network& net);

struct SteadyOptions {
  double eps = 1e-6;
  int max_iter = 500;
  bool parallel = true;  // per-link orbit solves within an iteration
};

/// Iterates per-link orbit computation against routed upstream outflows
/// until the average-outflow gap closes. Throws std::domain_error on an
/// unstable network.
std::pair<NetworkSteadyState, IterationLog> solve_steady(
    const Network& net, const SteadyOptions& opt = {});

}  // namespace qnet

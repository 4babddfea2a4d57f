#pragma once

#include <utility>
#include <vector>

#include "qnet/model.hpp"
#include "qnet/sim.hpp"

namespace qnet {

struct StabilityReport {
  double margin = 0;           // min over links of [(I - R^T) c_bar - lambda_bar]
  bool stable = false;         // margin > 0
  std::vector<double> slack;   // per-link entries of the vector above
};

StabilityReport stability(const Network& net);

struct DistanceSample {
  Time t = 0;
  double state_gap = 0;    // sum |x_i - x~_i|
  double history_gap = 0;  // routed integral of |z_j - z~_j| over look-backs
};

/// l1 distance between two states of the same network at the same time.
DistanceSample l1_distance(const Network& net, const NetState& a,
                           const NetState& b);

/// Co-simulates both initial conditions and samples the combined l1 gap at
/// every cycle boundary.
std::vector<DistanceSample> check_contraction(const Network& net,
                                              const NetState& a,
                                              const NetState& b, int cycles);

/// Root-mean-square difference of two piecewise-linear functions over
/// [t1, t2], integrated exactly. Nodes outside the range are clamped.
double rmse_linear(const std::vector<std::pair<Time, double>>& a,
                   const std::vector<std::pair<Time, double>>& b, Time t1,
                   Time t2);

/// Same for two periodic step functions over one period.
double rmse_step(const PwcFunction& a, const PwcFunction& b);

}  // namespace qnet

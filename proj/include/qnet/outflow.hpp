#pragma once

#include <utility>
#include <vector>

#include "qnet/model.hpp"

namespace qnet {

/// Instantaneous outflow query: which links have empty queues, the effective
/// inflow rates (external plus delayed arrivals), and the current capacities.
struct OutflowQuery {
  std::vector<char> zero_set;        // 1 if link queue is empty
  std::vector<double> eff_inflow;    // lambda-tilde, veh/s
  std::vector<double> capacity_now;  // veh/s
};

/// Computes the unique instantaneous outflow vector: z_i = c_i off the zero
/// set, and the componentwise-maximum fixed point of
///   z_i = min(c_i, eff_inflow_i + sum_{j in E_i} R_ji z_j)
/// on it. Solved structurally: strongly connected components of the
/// zero-delay subgraph restricted to the zero set, processed in topological
/// order; cyclic components iterate from capacity downward with an exact
/// linear solve fallback.
///
/// Precomputes adjacency once; solve() is cheap and safe for concurrent
/// calls.
class OutflowSolver {
 public:
  explicit OutflowSolver(const Network& net);

  std::vector<double> solve(const OutflowQuery& q) const;
  void solve_into(const OutflowQuery& q, std::vector<double>& z) const;

 private:
  int n_;
  std::vector<std::vector<std::pair<int, double>>> up0_;  // E_i with ratios
  std::vector<std::pair<int, int>> edges0_;               // zero-delay edges
};

inline std::vector<double> solve_outflow(const Network& net,
                                         const OutflowQuery& q) {
  return OutflowSolver(net).solve(q);
}

}  // namespace qnet

#pragma once

#include <cstdint>
#include <vector>

#include "qnet/model.hpp"
#include "qnet/outflow.hpp"

namespace qnet::testing {

enum class DelayMode { kAllZero, kMixed, kAllPositive };

struct RandomNetSpec {
  std::uint64_t seed = 0;
  int n_links = 5;           // <= 10
  DelayMode delays = DelayMode::kAllZero;
  double margin = 0.2;       // stability margin lower bound, veh/s
};

/// Deterministic-in-seed random network: substochastic routing (row sums
/// <= 0.9), rectangular capacities, constant or two-level inflows, sized so
/// the stability margin is at least spec.margin.
Network gen_stable_net(const RandomNetSpec& spec);

/// Brute-force reference for the outflow program: maximizes eta^T z over
/// 0 <= z <= c with the inflow constraints on the zero set, by enumerating
/// binding subsets. Exponential in |zero set|; tests only.
std::vector<double> lp_oracle(const Network& net, const OutflowQuery& q,
                              const std::vector<double>& eta);

}  // namespace qnet::testing

#pragma once

#include <string>
#include <vector>

#include "qnet/pwc.hpp"

namespace qnet {

using LinkId = int;

/// Rectangular capacity pulse: c_max during [offset, offset+green) mod cycle,
/// zero otherwise. Wraps past the cycle boundary when offset+green > cycle.
struct CapacityProfile {
  double c_max = 0;
  Time offset = 0;
  Time green = 0;
  Time cycle = 0;

  PwcFunction to_pwc() const;
};

struct RoutingEntry {
  LinkId from = 0;
  LinkId to = 0;
  double ratio = 0;  // in (0, 1]
  Time delay = 0;    // >= 0, integer milliseconds
};

struct Network {
  int n_links = 0;
  Time cycle = 0;
  std::vector<PwcFunction> inflow;    // periodic, period == cycle
  std::vector<PwcFunction> capacity;  // periodic, period == cycle
  std::vector<RoutingEntry> routing;

  // Optional: capacity profiles and intersection groups, needed only by the
  // adaptive green-split simulation mode.
  std::vector<CapacityProfile> profiles;          // empty if raw capacities
  std::vector<std::vector<LinkId>> intersections;  // groups of links

  double ratio(LinkId from, LinkId to) const;
  Time delay(LinkId from, LinkId to) const;

  /// E_i: upstream links j with R_ji > 0 and zero inter-link travel time,
  /// with their ratios.
  std::vector<std::pair<LinkId, double>> zero_delay_upstream(LinkId i) const;

  /// Upstream (j, ratio, delay) triples with strictly positive delay into i.
  std::vector<RoutingEntry> delayed_upstream(LinkId i) const;

  /// max_i delay(j, i) over downstream links of j; 0 if none.
  Time max_out_delay(LinkId j) const;
  Time max_delay() const;

  std::vector<std::vector<double>> routing_matrix() const;
  std::vector<double> row_sums() const;
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks the standing assumptions: substochastic rows, spectral radius < 1,
/// weak connectivity, drain reachability, tick alignment, ratio ranges.
ValidationReport validate(const Network& net);

/// Per-link period averages (lambda_bar, c_bar).
std::pair<std::vector<double>, std::vector<double>> average_rates(
    const Network& net);

/// Loads the JSON network config (see README for the schema). Throws
/// std::runtime_error with a descriptive message on malformed input.
Network load_network(const std::string& path);
Network parse_network(const std::string& json_text);

}  // namespace qnet

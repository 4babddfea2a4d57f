#include "qnet/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace qnet {

PwcFunction CapacityProfile::to_pwc() const {
  if (green <= 0 || green > cycle)
    throw std::invalid_argument("capacity profile: green outside (0, cycle]");
  if (offset < 0 || offset >= cycle)
    throw std::invalid_argument("capacity profile: offset outside [0, cycle)");
  Time end = offset + green;
  if (green == cycle) return PwcFunction::constant(c_max, cycle, true);
  if (end <= cycle) {
    std::vector<Time> b;
    std::vector<double> v;
    if (offset > 0) {
      b = {0, offset, end};
      v = {0, c_max, 0};
      if (end == cycle) {
        b.pop_back();
        v.pop_back();
      }
    } else {
      b = {0, end};
      v = {c_max, 0};
    }
    return PwcFunction(b, v, cycle, true);
  }
  // Pulse wraps past the cycle boundary.
  Time tail = end - cycle;
  return PwcFunction({0, tail, offset}, {c_max, 0, c_max}, cycle, true);
}

double Network::ratio(LinkId from, LinkId to) const {
  for (const auto& e : routing)
    if (e.from == from && e.to == to) return e.ratio;
  return 0.0;
}

Time Network::delay(LinkId from, LinkId to) const {
  for (const auto& e : routing)
    if (e.from == from && e.to == to) return e.delay;
  return 0.0;
}

std::vector<std::pair<LinkId, double>> Network::zero_delay_upstream(
    LinkId i) const {
  std::vector<std::pair<LinkId, double>> out;
  for (const auto& e : routing)
    if (e.to == i && e.ratio > 0 && e.delay == 0)
      out.emplace_back(e.from, e.ratio);
  return out;
}

std::vector<RoutingEntry> Network::delayed_upstream(LinkId i) const {
  std::vector<RoutingEntry> out;
  for (const auto& e : routing)
    if (e.to == i && e.ratio > 0 && e.delay > 0) out.push_back(e);
  return out;
}

Time Network::max_out_delay(LinkId j) const {
  Time d = 0;
  for (const auto& e : routing)
    if (e.from == j && e.ratio > 0) d = std::max(d, e.delay);
  return d;
}

Time Network::max_delay() const {
  Time d = 0;
  for (const auto& e : routing) d = std::max(d, e.delay);
  return d;
}

std::vector<std::vector<double>> Network::routing_matrix() const {
  std::vector<std::vector<double>> R(n_links,
                                     std::vector<double>(n_links, 0.0));
  for (const auto& e : routing) R[e.from][e.to] += e.ratio;
  return R;
}

std::vector<double> Network::row_sums() const {
  std::vector<double> s(n_links, 0.0);
  for (const auto& e : routing) s[e.from] += e.ratio;
  return s;
}

namespace {

bool tick_aligned(Time t) { return std::floor(t) == t; }

bool spectral_radius_below_one(const std::vector<std::vector<double>>& R) {
  const int n = static_cast<int>(R.size());
  std::vector<double> v(n, 1.0), w(n);
  double rho = 0.0;
  for (int it = 0; it < 10000; ++it) {
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      w[i] = 0.0;
      for (int j = 0; j < n; ++j) w[i] += R[i][j] * v[j];
      norm = std::max(norm, w[i]);
    }
    if (norm == 0.0) return true;
    double next = norm;
    for (int i = 0; i < n; ++i) v[i] = w[i] / norm;
    if (std::abs(next - rho) < 1e-10) return next < 1.0 - 1e-10;
    rho = next;
  }
  return rho < 1.0 - 1e-10;
}

}  // namespace

ValidationReport validate(const Network& net) {
  ValidationReport rep;
  auto fail = [&](const std::string& msg) { rep.violations.push_back(msg); };

  if (net.n_links <= 0) {
    fail("network has no links");
    return rep;
  }
  if (net.cycle <= 0 || !tick_aligned(net.cycle))
    fail("cycle length must be a positive integer tick count");

  for (const auto& e : net.routing) {
    if (e.from < 0 || e.from >= net.n_links || e.to < 0 ||
        e.to >= net.n_links)
      fail("routing entry references unknown link");
    else if (e.from == e.to)
      fail("self-loop routing entry on link " + std::to_string(e.from));
    if (e.ratio <= 0 || e.ratio > 1)
      fail("routing ratio outside (0,1] on edge " + std::to_string(e.from) +
           "->" + std::to_string(e.to));
    if (e.delay < 0 || !tick_aligned(e.delay))
      fail("delay not tick aligned on edge " + std::to_string(e.from) + "->" +
           std::to_string(e.to));
  }
  if (!rep.ok()) return rep;

  auto sums = net.row_sums();
  double max_sum = 0;
  bool any_drain = false;
  for (int i = 0; i < net.n_links; ++i) {
    if (sums[i] > 1.0 + 1e-12)
      fail("row sum of R exceeds 1 on link " + std::to_string(i));
    if (sums[i] < 1.0 - 1e-12) any_drain = true;
    max_sum = std::max(max_sum, sums[i]);
  }
  if (net.routing.empty()) any_drain = true;
  if (!any_drain) fail("no row of R has sum strictly less than 1");

  // Spectral radius: the common case is covered by the row-sum shortcut.
  if (max_sum >= 1.0 - 1e-12 &&
      !spectral_radius_below_one(net.routing_matrix()))
    fail("spectral radius of R is not strictly less than 1");

  // Weak connectivity: undirected BFS over links.
  if (net.n_links > 1) {
    std::vector<std::vector<int>> adj(net.n_links);
    for (const auto& e : net.routing) {
      adj[e.from].push_back(e.to);
      adj[e.to].push_back(e.from);
    }
    std::vector<char> seen(net.n_links, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : adj[u])
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          q.push(v);
        }
    }
    if (count != net.n_links) fail("link graph is not weakly connected");
  }

  // Drain reachability: reverse BFS from rows with sum < 1.
  {
    std::vector<std::vector<int>> radj(net.n_links);
    for (const auto& e : net.routing) radj[e.to].push_back(e.from);
    std::vector<char> reach(net.n_links, 0);
    std::queue<int> q;
    for (int i = 0; i < net.n_links; ++i)
      if (sums[i] < 1.0 - 1e-12) {
        reach[i] = 1;
        q.push(i);
      }
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : radj[u])
        if (!reach[v]) {
          reach[v] = 1;
          q.push(v);
        }
    }
    for (int i = 0; i < net.n_links; ++i)
      if (!reach[i])
        fail("link " + std::to_string(i) +
             " has no directed path to a link with row sum < 1");
  }

  // Input functions: periodicity and tick alignment of breakpoints.
  for (int i = 0; i < net.n_links; ++i) {
    for (const PwcFunction* f : {&net.inflow[i], &net.capacity[i]}) {
      if (!f->periodic() || f->domain_len() != net.cycle)
        fail("inflow/capacity of link " + std::to_string(i) +
             " is not cycle-periodic");
      for (Time b : f->breakpoints())
        if (!tick_aligned(b))
          fail("breakpoint not tick aligned on link " + std::to_string(i));
      for (double v : f->values())
        if (v < 0)
          fail("negative rate on link " + std::to_string(i));
    }
  }
  return rep;
}

std::pair<std::vector<double>, std::vector<double>> average_rates(
    const Network& net) {
  std::vector<double> lbar(net.n_links), cbar(net.n_links);
  for (int i = 0; i < net.n_links; ++i) {
    lbar[i] = net.inflow[i].mean();
    cbar[i] = net.capacity[i].mean();
  }
  return {lbar, cbar};
}

namespace {

using nlohmann::json;

PwcFunction parse_rate_function(const json& j, Time cycle, double rate_scale,
                                const char* what) {
  if (j.contains("constant"))
    return PwcFunction::constant(j.at("constant").get<double>() * rate_scale,
                                 cycle, true);
  if (j.contains("c_max")) {
    CapacityProfile p;
    p.c_max = j.at("c_max").get<double>() * rate_scale;
    p.offset = j.at("offset_ms").get<double>();
    p.green = j.at("green_ms").get<double>();
    p.cycle = cycle;
    return p.to_pwc();
  }
  if (j.contains("breakpoints_ms")) {
    auto b = j.at("breakpoints_ms").get<std::vector<Time>>();
    auto v = j.at("values").get<std::vector<double>>();
    for (double& x : v) x *= rate_scale;
    return PwcFunction(std::move(b), std::move(v), cycle, true);
  }
  throw std::runtime_error(std::string("config: unrecognized ") + what +
                           " specification");
}

}  // namespace

Network parse_network(const std::string& json_text) {
  json j = json::parse(json_text);
  Network net;
  net.cycle = j.at("cycle_ms").get<Time>();
  double rate_scale = 1.0;
  if (j.contains("rate_unit")) {
    std::string u = j.at("rate_unit").get<std::string>();
    if (u == "per_hour")
      rate_scale = 1.0 / 3600.0;
    else if (u != "per_sec")
      throw std::runtime_error("config: unknown rate_unit " + u);
  }

  const auto& links = j.at("links");
  if (links.empty()) throw std::runtime_error("config: no links");
  net.n_links = static_cast<int>(links.size());
  net.inflow.resize(net.n_links, PwcFunction::constant(0, net.cycle, true));
  net.capacity.resize(net.n_links, PwcFunction::constant(0, net.cycle, true));
  bool all_profiles = true;
  net.profiles.resize(net.n_links);
  for (const auto& lj : links) {
    int id = lj.at("id").get<int>();
    if (id < 0 || id >= net.n_links)
      throw std::runtime_error("config: link ids must be dense 0..n-1");
    net.inflow[id] =
        parse_rate_function(lj.at("inflow"), net.cycle, rate_scale, "inflow");
    const auto& cj = lj.at("capacity");
    net.capacity[id] =
        parse_rate_function(cj, net.cycle, rate_scale, "capacity");
    if (cj.contains("c_max")) {
      net.profiles[id] = {cj.at("c_max").get<double>() * rate_scale,
                          cj.at("offset_ms").get<Time>(),
                          cj.at("green_ms").get<Time>(), net.cycle};
    } else {
      all_profiles = false;
    }
  }
  if (!all_profiles) net.profiles.clear();

  if (j.contains("routing"))
    for (const auto& rj : j.at("routing"))
      net.routing.push_back({rj.at("from").get<int>(), rj.at("to").get<int>(),
                             rj.at("ratio").get<double>(),
                             rj.at("delay_ms").get<Time>()});
  if (j.contains("intersections"))
    net.intersections =
        j.at("intersections").get<std::vector<std::vector<int>>>();

  // Reject misaligned inputs up front; validate() re-checks semantics.
  for (int i = 0; i < net.n_links; ++i)
    for (const PwcFunction* f : {&net.inflow[i], &net.capacity[i]})
      for (Time b : f->breakpoints())
        if (std::floor(b) != b)
          throw std::runtime_error("config: breakpoint not tick aligned");
  for (const auto& e : net.routing)
    if (std::floor(e.delay) != e.delay || e.delay < 0)
      throw std::runtime_error("config: delay not tick aligned");
  if (std::floor(net.cycle) != net.cycle || net.cycle <= 0)
    throw std::runtime_error("config: cycle_ms must be a positive integer");
  return net;
}

Network load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

}  // namespace qnet

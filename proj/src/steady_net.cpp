#include "qnet/steady_net.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "qnet/analysis.hpp"
#include "linalg.hpp"

namespace qnet {

std::vector<PwcFunction> route(const Network& net,
                               const std::vector<PwcFunction>& z) {
  const Time T = net.cycle;
  for (const auto& f : z)
    if (!f.periodic() || f.domain_len() != T)
      throw std::invalid_argument("route: outflows must be cycle-periodic");

  std::vector<PwcFunction> y;
  y.reserve(net.n_links);
  std::vector<PwcFunction> shifted;  // keep alive for combine()
  for (int i = 0; i < net.n_links; ++i) {
    shifted.clear();
    std::vector<std::pair<double, const PwcFunction*>> terms;
    terms.emplace_back(1.0, &net.inflow[i]);
    for (const auto& e : net.routing)
      if (e.to == i && e.ratio > 0)
        shifted.push_back(z[e.from].shift(e.delay));
    std::size_t k = 0;
    for (const auto& e : net.routing)
      if (e.to == i && e.ratio > 0) terms.emplace_back(e.ratio, &shifted[k++]);
    y.push_back(PwcFunction::combine(terms));
  }
  return y;
}

std::vector<double> target_average(const Network& net) {
  auto [lbar, cbar] = average_rates(net);
  (void)cbar;
  auto R = net.routing_matrix();
  const int n = net.n_links;
  std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    A[i][i] = 1.0;
    for (int j = 0; j < n; ++j) A[i][j] -= R[j][i];
  }
  return detail::solve_dense(std::move(A), std::move(lbar));
}

std::pair<NetworkSteadyState, IterationLog> solve_steady(
    const Network& net, const SteadyOptions& opt) {
  if (opt.eps <= 0) throw std::invalid_argument("eps must be positive");
  StabilityReport stab = stability(net);
  if (!stab.stable)
    throw std::domain_error("network violates the stability condition");

  const int n = net.n_links;
  const std::vector<double> zstar_bar = target_average(net);
  std::vector<PwcFunction> y = net.inflow;

  NetworkSteadyState state;
  state.orbits.resize(n);
  IterationLog log;
  std::exception_ptr err;

  const auto t_start = std::chrono::steady_clock::now();
  for (int k = 1; k <= opt.max_iter; ++k) {
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
    for (int i = 0; i < n; ++i) {
      try {
        state.orbits[i] = orbit(y[i], net.capacity[i]);
      } catch (...) {
#pragma omp critical
        if (!err) err = std::current_exception();
      }
    }
    if (err) std::rethrow_exception(err);

    IterationEntry e;
    e.iter = k;
    e.z_bar.resize(n);
    e.x_nodes.resize(n);
    double gap = 0.0;
    for (int i = 0; i < n; ++i) {
      e.z_bar[i] = state.orbits[i].z_star.mean();
      e.x_nodes[i] = state.orbits[i].x_star;
      gap = std::max(gap, zstar_bar[i] - e.z_bar[i]);
    }
    e.gap = gap;
    e.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t_start)
                    .count();
    log.entries.push_back(std::move(e));

    state.iterations = k;
    state.gap = gap;
    if (gap <= opt.eps) {
      state.converged = true;
      break;
    }
    if (k == opt.max_iter) break;
    std::vector<PwcFunction> z;
    z.reserve(n);
    for (int i = 0; i < n; ++i) z.push_back(state.orbits[i].z_star);
    y = route(net, z);
  }

  for (auto& e : log.entries) {
    e.rmse_vs_final.resize(n);
    for (int i = 0; i < n; ++i)
      e.rmse_vs_final[i] = rmse_linear(e.x_nodes[i], state.orbits[i].x_star,
                                       0.0, net.cycle);
  }
  return {std::move(state), std::move(log)};
}

}  // namespace qnet

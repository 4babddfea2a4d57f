#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qnet/analysis.hpp"
#include "qnet/io.hpp"
#include "qnet/model.hpp"
#include "qnet/sim.hpp"
#include "qnet/steady_link.hpp"
#include "qnet/steady_net.hpp"

namespace {

using namespace qnet;

std::vector<double> parse_init(const std::string& s, int n) {
  std::vector<double> x;
  std::stringstream ss(s);
  std::string cell;
  while (std::getline(ss, cell, ',')) x.push_back(std::stod(cell));
  if (x.size() == 1) x.assign(n, x[0]);
  if (static_cast<int>(x.size()) != n)
    throw std::runtime_error("--init needs 1 or n_links values");
  return x;
}

// One period of x, shifted to [0, T], taken from the tail of a trajectory.
std::vector<std::pair<Time, double>> last_period_x(const Trajectory& traj,
                                                   int link, Time T) {
  Time lo = traj.t_end - T;
  std::vector<std::pair<Time, double>> out;
  out.emplace_back(0.0, traj.x_at(link, lo));
  for (const auto& [t, v] : traj.links[link].x)
    if (t > lo && t < traj.t_end) out.emplace_back(t - lo, v);
  out.emplace_back(T, traj.x_at(link, traj.t_end));
  return out;
}

int cmd_validate(const std::string& path) {
  Network net = load_network(path);
  ValidationReport rep = validate(net);
  if (rep.ok()) {
    std::cout << "valid: " << net.n_links << " links, cycle "
              << net.cycle << " ms\n";
    return 0;
  }
  for (const auto& v : rep.violations) std::cout << "violation: " << v << "\n";
  return 1;
}

int cmd_stability(const std::string& path) {
  Network net = load_network(path);
  StabilityReport rep = stability(net);
  std::printf("margin %.12g (%s)\n", rep.margin,
              rep.stable ? "stable" : "unstable");
  for (std::size_t i = 0; i < rep.slack.size(); ++i)
    std::printf("link %zu slack %.12g\n", i, rep.slack[i]);
  return 0;
}

int cmd_simulate(const std::string& path, Time horizon,
                 const std::string& init, const std::string& out,
                 const std::string& events, bool adaptive) {
  Network net = load_network(path);
  ValidationReport rep = validate(net);
  if (!rep.ok()) throw std::runtime_error("invalid network: " + rep.violations[0]);
  NetState s = cold_start(net, parse_init(init, net.n_links));
  Trajectory traj = adaptive ? adaptive_green(net, s, horizon)
                             : simulate(net, s, horizon);
  write_trajectory_csv(out, traj);
  if (!events.empty()) write_events_csv(events, traj.events);
  std::cout << "simulated " << horizon << " ms, " << traj.events.size()
            << " events -> " << out << "\n";
  return 0;
}

int cmd_steady(const std::string& path, double eps, int max_iter,
               const std::string& out_dir) {
  Network net = load_network(path);
  ValidationReport rep = validate(net);
  if (!rep.ok()) throw std::runtime_error("invalid network: " + rep.violations[0]);
  SteadyOptions opt;
  opt.eps = eps;
  opt.max_iter = max_iter;
  auto [state, log] = solve_steady(net, opt);
  std::filesystem::create_directories(out_dir);
  for (int i = 0; i < net.n_links; ++i)
    write_orbit_csv(out_dir + "/orbit_" + std::to_string(i) + ".csv",
                    state.orbits[i]);
  write_iteration_log_csv(out_dir + "/iteration_log.csv", log);
  std::printf("%s after %d iterations, gap %.12g\n",
              state.converged ? "converged" : "NOT converged",
              state.iterations, state.gap);
  return state.converged ? 0 : 1;
}

int cmd_compare(const std::string& a_path, const std::string& b_path,
                Time period) {
  Trajectory a = read_trajectory_csv(a_path);
  Trajectory b = read_trajectory_csv(b_path);
  if (a.links.size() != b.links.size())
    throw std::runtime_error("link count mismatch");
  Time hi = std::min(a.t_end, b.t_end);
  Time lo = std::max(a.t_begin, b.t_begin);
  if (period > 0) lo = std::max(lo, hi - period);
  if (lo >= hi) throw std::runtime_error("no overlapping time range");
  std::printf("link,rmse_x,rmse_z\n");
  for (std::size_t i = 0; i < a.links.size(); ++i) {
    double rx = rmse_linear(a.links[i].x, b.links[i].x, lo, hi);
    // Step outflows: exact piecewise-constant integral over [lo, hi].
    std::vector<Time> grid = {lo};
    for (const Trajectory* t : {&a, &b})
      for (const auto& [ts, v] : t->links[i].z)
        if (ts > lo && ts < hi) grid.push_back(ts);
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    double acc = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      Time seg = ((k + 1 < grid.size()) ? grid[k + 1] : hi) - grid[k];
      double d = a.z_at(static_cast<int>(i), grid[k]) -
                 b.z_at(static_cast<int>(i), grid[k]);
      acc += d * d * seg;
    }
    std::printf("%zu,%.12g,%.12g\n", i, rx, std::sqrt(acc / (hi - lo)));
  }
  return 0;
}

int cmd_demo_rmse(const std::string& path, const std::string& out,
                  int ref_cycles, double eps, int max_iter) {
  Network net = load_network(path);
  ValidationReport rep = validate(net);
  if (!rep.ok()) throw std::runtime_error("invalid network: " + rep.violations[0]);
  StabilityReport stab = stability(net);
  if (!stab.stable) throw std::runtime_error("network is unstable");

  const Time T = net.cycle;
  Trajectory ref = simulate(net, cold_start(net, std::vector<double>(
                                                     net.n_links, 10.0)),
                            ref_cycles * T);
  std::vector<std::vector<std::pair<Time, double>>> ref_x(net.n_links);
  for (int i = 0; i < net.n_links; ++i) ref_x[i] = last_period_x(ref, i, T);

  SteadyOptions opt;
  opt.eps = eps;
  opt.max_iter = max_iter;
  auto [state, log] = solve_steady(net, opt);

  std::FILE* f = std::fopen(out.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + out);
  std::fprintf(f, "iter,link,rmse\n");
  bool monotone = true;
  std::vector<double> prev(net.n_links, -1.0);
  double final_max = 0.0;
  for (const auto& e : log.entries) {
    for (int i = 0; i < net.n_links; ++i) {
      double r = rmse_linear(e.x_nodes[i], ref_x[i], 0.0, T);
      std::fprintf(f, "%d,%d,%.12g\n", e.iter, i, r);
      if (prev[i] >= 0 && r > prev[i] + 1e-9) monotone = false;
      prev[i] = r;
      if (e.iter == log.entries.back().iter) final_max = std::max(final_max, r);
    }
  }
  std::fclose(f);
  std::printf("%d iterations, rmse non-increasing: %s, final max rmse %.12g\n",
              state.iterations, monotone ? "yes" : "no", final_max);
  return monotone && state.converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"queue-network simulator and periodic-orbit solver"};
  app.require_subcommand(1);

  std::string net_path, out_path = "traj.csv", events_path, init = "0";
  std::string a_path, b_path, out_dir = "steady_out", rmse_out = "rmse.csv";
  double horizon = 0, eps = 1e-6, period = 0;
  int max_iter = 500, ref_cycles = 300;
  bool adaptive = false;

  auto* v = app.add_subcommand("validate", "check model assumptions");
  v->add_option("config", net_path)->required();

  auto* st = app.add_subcommand("stability", "average-rate stability margin");
  st->add_option("config", net_path)->required();

  auto* si = app.add_subcommand("simulate", "event-driven simulation");
  si->add_option("config", net_path)->required();
  si->add_option("--horizon-ms", horizon)->required();
  si->add_option("--init", init, "initial queue lengths (scalar or list)");
  si->add_option("--out", out_path);
  si->add_option("--events", events_path, "event log CSV");
  si->add_flag("--adaptive", adaptive, "proportional green reallocation");

  auto* sd = app.add_subcommand("steady", "periodic-orbit computation");
  sd->add_option("config", net_path)->required();
  sd->add_option("--eps", eps);
  sd->add_option("--max-iter", max_iter);
  sd->add_option("--out", out_dir, "output directory");

  auto* cp = app.add_subcommand("compare", "RMSE between two trajectories");
  cp->add_option("a", a_path)->required();
  cp->add_option("b", b_path)->required();
  cp->add_option("--period-ms", period, "restrict to the trailing window");

  auto* dm = app.add_subcommand("demo-fig-rmse",
                                "per-iteration RMSE against long simulation");
  dm->add_option("config", net_path)->required();
  dm->add_option("--out", rmse_out);
  dm->add_option("--cycles", ref_cycles, "reference simulation length");
  dm->add_option("--eps", eps);
  dm->add_option("--max-iter", max_iter);

  CLI11_PARSE(app, argc, argv);
  try {
    if (v->parsed()) return cmd_validate(net_path);
    if (st->parsed()) return cmd_stability(net_path);
    if (si->parsed())
      return cmd_simulate(net_path, horizon, init, out_path, events_path,
                          adaptive);
    if (sd->parsed()) return cmd_steady(net_path, eps, max_iter, out_dir);
    if (cp->parsed()) return cmd_compare(a_path, b_path, period);
    if (dm->parsed())
      return cmd_demo_rmse(net_path, rmse_out, ref_cycles, eps, max_iter);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

#include "qnet/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qnet {

namespace {

constexpr double kRateTol = 1e-12;

std::string fmt(double v) {
  char buf[32];
  // shortest representation that still round-trips doubles exactly
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double back;
  if (std::sscanf(buf, "%lf", &back) == 1 && back == v) {
    char shorter[32];
    std::snprintf(shorter, sizeof shorter, "%.12g", v);
    if (std::sscanf(shorter, "%lf", &back) == 1 && back == v)
      return shorter;
  }
  return buf;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read file: " + path);
  return in;
}

std::vector<double> split_row(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  out << "t_ms,link,x,z\n";
  for (std::size_t i = 0; i < traj.links.size(); ++i)
    for (const auto& [t, x] : traj.links[i].x)
      out << fmt(t) << ',' << i << ',' << fmt(x) << ','
          << fmt(traj.z_at(static_cast<int>(i), t)) << '\n';
}

Trajectory read_trajectory_csv(const std::string& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t_ms,link,x,z", 0) != 0)
    throw std::runtime_error("not a trajectory CSV: " + path);
  Trajectory traj;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_row(line);
    if (row.size() != 4) throw std::runtime_error("malformed row in " + path);
    int link = static_cast<int>(row[1]);
    if (link >= static_cast<int>(traj.links.size()))
      traj.links.resize(link + 1);
    auto& lt = traj.links[link];
    lt.x.emplace_back(row[0], row[2]);
    if (lt.z.empty() || std::abs(lt.z.back().second - row[3]) > kRateTol)
      lt.z.emplace_back(row[0], row[3]);
  }
  if (traj.links.empty()) throw std::runtime_error("empty trajectory: " + path);
  traj.t_begin = traj.links[0].x.front().first;
  traj.t_end = traj.links[0].x.back().first;
  return traj;
}

void write_events_csv(const std::string& path,
                      const std::vector<Event>& events) {
  auto out = open_out(path);
  out << "t_ms,kind,link\n";
  for (const auto& e : events) {
    const char* kind = e.kind == Event::kExogenous ? "exogenous"
                       : e.kind == Event::kArrival ? "arrival"
                                                   : "zero_hit";
    out << fmt(e.t) << ',' << kind << ',' << e.link << '\n';
  }
}

void write_orbit_csv(const std::string& path, const PeriodicOrbit& orbit) {
  auto out = open_out(path);
  out << "t_ms,x_star,z_star\n";
  std::vector<Time> grid;
  for (const auto& [t, v] : orbit.x_star) grid.push_back(t);
  for (Time t : orbit.z_star.breakpoints()) grid.push_back(t);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  for (Time t : grid)
    out << fmt(t) << ',' << fmt(orbit.x_at(t)) << ','
        << fmt(orbit.z_star.value(t)) << '\n';

  auto side = open_out(path + ".alphas");
  for (Time a : orbit.alphas) side << fmt(a) << '\n';
}

PeriodicOrbit read_orbit_csv(const std::string& path, Time cycle) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || line.rfind("t_ms,x_star,z_star", 0) != 0)
    throw std::runtime_error("not an orbit CSV: " + path);
  std::vector<Time> b;
  std::vector<double> v;
  PeriodicOrbit orb;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_row(line);
    if (row.size() != 3) throw std::runtime_error("malformed row in " + path);
    orb.x_star.emplace_back(row[0], row[1]);
    if (row[0] < cycle) {
      b.push_back(row[0]);
      v.push_back(row[2]);
    }
  }
  if (orb.x_star.empty() || orb.x_star.back().first != cycle)
    orb.x_star.emplace_back(cycle, orb.x_star.empty() ? 0.0
                                                      : orb.x_star.front().second);
  orb.z_star = PwcFunction(std::move(b), std::move(v), cycle, true);
  std::ifstream side(path + ".alphas");
  if (side) {
    while (std::getline(side, line))
      if (!line.empty()) orb.alphas.push_back(std::stod(line));
  }
  return orb;
}

void write_iteration_log_csv(const std::string& path, const IterationLog& log) {
  auto out = open_out(path);
  out << "iter,link,z_bar,gap,rmse_vs_final\n";
  for (const auto& e : log.entries)
    for (std::size_t i = 0; i < e.z_bar.size(); ++i)
      out << e.iter << ',' << i << ',' << fmt(e.z_bar[i]) << ',' << fmt(e.gap)
          << ',' << fmt(e.rmse_vs_final.empty() ? 0.0 : e.rmse_vs_final[i])
          << '\n';
}

}  // namespace qnet

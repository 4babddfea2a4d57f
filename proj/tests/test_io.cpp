#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "qnet/io.hpp"
#include "qnet/sim.hpp"
#include "qnet/steady_link.hpp"
#include "qnet/steady_net.hpp"
#include "oracle.hpp"

using namespace qnet;
using namespace qnet::testing;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const char* name) : path(std::string("io_test_") + name) {}
  ~TempFile() {
    std::remove(path.c_str());
    std::remove((path + ".alphas").c_str());
  }
};

Network sample_net() {
  RandomNetSpec spec;
  spec.seed = 321;
  spec.n_links = 4;
  spec.delays = DelayMode::kMixed;
  return gen_stable_net(spec);
}

}  // namespace

TEST_CASE("trajectory csv round trip") {
  auto net = sample_net();
  std::vector<double> x0(net.n_links, 4.0);
  auto traj = simulate(net, cold_start(net, x0), 10 * net.cycle);
  TempFile f("traj.csv");
  write_trajectory_csv(f.path, traj);
  auto back = read_trajectory_csv(f.path);
  REQUIRE(back.links.size() == traj.links.size());
  CHECK(back.t_begin == traj.t_begin);
  CHECK(back.t_end == traj.t_end);
  for (int i = 0; i < net.n_links; ++i)
    for (Time t = 0; t <= 10 * net.cycle; t += 333) {
      CHECK(back.x_at(i, t) == doctest::Approx(traj.x_at(i, t)).epsilon(1e-9));
      CHECK(back.z_at(i, t) == doctest::Approx(traj.z_at(i, t)).epsilon(1e-9));
    }
}

TEST_CASE("trajectory csv is byte-identical across writes") {
  auto net = sample_net();
  std::vector<double> x0(net.n_links, 2.0);
  auto traj = simulate(net, cold_start(net, x0), 5 * net.cycle);
  TempFile a("det_a.csv"), b("det_b.csv");
  write_trajectory_csv(a.path, traj);
  write_trajectory_csv(b.path, traj);
  CHECK(slurp(a.path) == slurp(b.path));
}

TEST_CASE("events csv lists every recorded event") {
  auto net = sample_net();
  std::vector<double> x0(net.n_links, 4.0);
  auto traj = simulate(net, cold_start(net, x0), 3 * net.cycle);
  TempFile f("events.csv");
  write_events_csv(f.path, traj.events);
  auto text = slurp(f.path);
  CHECK(text.rfind("t_ms,kind,link", 0) == 0);
  size_t lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines == traj.events.size() + 1);
  CHECK(text.find("exogenous") != std::string::npos);
}

TEST_CASE("orbit csv round trip with alphas sidecar") {
  auto y = PwcFunction::constant(0.5, 20000, true);
  auto c = PwcFunction({0, 10000}, {2.0, 0.0}, 20000, true);
  auto orb = orbit(y, c);
  TempFile f("orbit.csv");
  write_orbit_csv(f.path, orb);
  auto back = read_orbit_csv(f.path, 20000);
  for (Time t = 0; t < 20000; t += 100) {
    CHECK(back.x_at(t) == doctest::Approx(orb.x_at(t)).epsilon(1e-9));
    CHECK(back.z_star.value(t) ==
          doctest::Approx(orb.z_star.value(t)).epsilon(1e-9));
  }
  REQUIRE(back.alphas.size() == orb.alphas.size());
  CHECK(back.alphas[0] == doctest::Approx(orb.alphas[0]).epsilon(1e-9));
}

TEST_CASE("iteration log csv") {
  auto net = sample_net();
  auto [state, log] = solve_steady(net);
  REQUIRE(state.converged);
  TempFile f("itlog.csv");
  write_iteration_log_csv(f.path, log);
  auto text = slurp(f.path);
  CHECK(text.rfind("iter,link,z_bar,gap,rmse_vs_final", 0) == 0);
  size_t lines = 0;
  for (char ch : text)
    if (ch == '\n') ++lines;
  CHECK(lines == log.entries.size() * net.n_links + 1);
}

TEST_CASE("reader rejects missing files") {
  CHECK_THROWS(read_trajectory_csv("does_not_exist.csv"));
  CHECK_THROWS(read_orbit_csv("does_not_exist.csv", 20000));
}

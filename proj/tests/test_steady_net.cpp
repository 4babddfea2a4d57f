#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "qnet/sim.hpp"
#include "qnet/steady_net.hpp"
#include "oracle.hpp"

using namespace qnet;
using namespace qnet::testing;

namespace {

PwcFunction pulse(double level, Time lo, Time hi, Time T) {
  std::vector<Time> bp{0};
  std::vector<double> v{lo > 0 ? 0.0 : level};
  if (lo > 0) {
    bp.push_back(lo);
    v.push_back(level);
  }
  if (hi < T) {
    bp.push_back(hi);
    v.push_back(0.0);
  }
  return PwcFunction(bp, v, T, true);
}

Network chain_example() {
  // link 0 = the single-green link, feeding link 1 (ample capacity)
  Network net;
  net.n_links = 2;
  net.cycle = 20000;
  net.inflow.push_back(PwcFunction::constant(0.5, 20000, true));
  net.inflow.push_back(PwcFunction::constant(0.0, 20000, true));
  net.capacity.push_back(pulse(2.0, 0, 10000, 20000));
  net.capacity.push_back(PwcFunction::constant(10.0, 20000, true));
  net.routing.push_back({0, 1, 0.5, 0});
  return net;
}

}  // namespace

TEST_CASE("route: empty routing returns the external inflows") {
  Network net;
  net.n_links = 1;
  net.cycle = 20000;
  net.inflow.push_back(PwcFunction::constant(0.7, 20000, true));
  net.capacity.push_back(PwcFunction::constant(2.0, 20000, true));
  auto y = route(net, {PwcFunction::constant(1.0, 20000, true)});
  CHECK(y[0].almost_equal(net.inflow[0]));
}

TEST_CASE("route: full-period delay acts as zero shift") {
  auto net = chain_example();
  net.routing[0].delay = 20000;
  std::vector<PwcFunction> z{pulse(4.0, 0, 10000, 20000),
                             PwcFunction::constant(0.0, 20000, true)};
  auto y = route(net, z);
  auto want = pulse(2.0, 0, 10000, 20000);  // 0.5 * z0, unshifted
  CHECK(y[1].almost_equal(want, 1e-12));
}

TEST_CASE("route: hand shift-and-scale") {
  auto net = chain_example();
  net.routing[0].delay = 2000;
  net.inflow[1] = PwcFunction::constant(0.1, 20000, true);
  std::vector<PwcFunction> z{pulse(4.0, 0, 10000, 20000),
                             PwcFunction::constant(0.0, 20000, true)};
  auto y = route(net, z);
  CHECK(y[1].value(0) == doctest::Approx(0.1));      // before the arrival
  CHECK(y[1].value(2000) == doctest::Approx(2.1));   // 0.5*4 shifted by 2 s
  CHECK(y[1].value(11999) == doctest::Approx(2.1));
  CHECK(y[1].value(12000) == doctest::Approx(0.1));
}

TEST_CASE("route preserves period averages") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomNetSpec spec;
    spec.seed = 3100 + seed;
    spec.n_links = 6;
    spec.delays = DelayMode::kMixed;
    auto net = gen_stable_net(spec);
    std::vector<PwcFunction> z;
    for (int i = 0; i < net.n_links; ++i) z.push_back(net.capacity[i]);
    auto y = route(net, z);
    auto R = net.routing_matrix();
    for (int i = 0; i < net.n_links; ++i) {
      double want = net.inflow[i].mean();
      for (int j = 0; j < net.n_links; ++j) want += R[j][i] * z[j].mean();
      CHECK(y[i].mean() == doctest::Approx(want).epsilon(1e-10));
    }
  }
}

TEST_CASE("target averages") {
  SUBCASE("no routing") {
    Network net;
    net.n_links = 1;
    net.cycle = 20000;
    net.inflow.push_back(PwcFunction::constant(0.5, 20000, true));
    net.capacity.push_back(pulse(2.0, 0, 10000, 20000));
    auto t = target_average(net);
    CHECK(t[0] == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("chain") {
    auto net = chain_example();
    auto t = target_average(net);
    CHECK(t[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t[1] == doctest::Approx(0.25).epsilon(1e-12));
  }
}

TEST_CASE("isolated links converge in one iteration") {
  Network net;
  net.n_links = 1;
  net.cycle = 20000;
  net.inflow.push_back(PwcFunction::constant(0.5, 20000, true));
  net.capacity.push_back(pulse(2.0, 0, 10000, 20000));
  auto [state, log] = solve_steady(net);
  CHECK(state.converged);
  CHECK(state.iterations == 1);
  CHECK(state.gap <= 1e-6);
}

TEST_CASE("chain example converges to the hand averages") {
  auto net = chain_example();
  auto [state, log] = solve_steady(net);
  REQUIRE(state.converged);
  CHECK(state.orbits[0].z_star.mean() == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(state.orbits[1].z_star.mean() == doctest::Approx(0.25).epsilon(1e-6));
  for (Time t = 0; t <= 20000; t += 100)
    CHECK(state.orbits[1].x_at(t) == doctest::Approx(0.0).scale(1));
  // cross-check against a long direct simulation
  auto traj = simulate(net, cold_start(net, {0.0, 0.0}), 200 * 20000);
  Time base = 199 * 20000;
  for (Time t = 0; t <= 20000; t += 100)
    CHECK(traj.x_at(0, base + t) ==
          doctest::Approx(state.orbits[0].x_at(t)).epsilon(1e-6).scale(1));
}

TEST_CASE("iterates grow monotonically and averages stay below target") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    RandomNetSpec spec;
    spec.seed = 8800 + seed;
    spec.n_links = 6;
    spec.delays = DelayMode::kMixed;
    auto net = gen_stable_net(spec);
    auto [state, log] = solve_steady(net);
    REQUIRE(state.converged);
    auto target = target_average(net);
    for (size_t k = 0; k < log.entries.size(); ++k) {
      for (int i = 0; i < net.n_links; ++i) {
        CHECK(log.entries[k].z_bar[i] <= target[i] + 1e-9);
        if (k > 0)
          CHECK(log.entries[k].z_bar[i] >=
                log.entries[k - 1].z_bar[i] - 1e-9);
      }
    }
    CHECK(state.gap <= 1e-6);
  }
}

TEST_CASE("serial and parallel paths agree exactly") {
  RandomNetSpec spec;
  spec.seed = 424242;
  spec.n_links = 8;
  spec.delays = DelayMode::kMixed;
  auto net = gen_stable_net(spec);
  SteadyOptions ser, par;
  ser.parallel = false;
  auto [a, la] = solve_steady(net, ser);
  auto [b, lb] = solve_steady(net, par);
  REQUIRE(a.iterations == b.iterations);
  for (int i = 0; i < net.n_links; ++i)
    CHECK(a.orbits[i].z_star.almost_equal(b.orbits[i].z_star, 1e-12));
}

TEST_CASE("iteration budget exhaustion is flagged, not thrown") {
  auto net = chain_example();
  SteadyOptions opt;
  opt.eps = 1e-12;  // unreachable in one iteration
  opt.max_iter = 1;
  auto [state, log] = solve_steady(net, opt);
  CHECK(!state.converged);
  CHECK(state.iterations == 1);
}

TEST_CASE("unstable network is rejected up front") {
  auto net = chain_example();
  net.inflow[0] = PwcFunction::constant(1.5, 20000, true);  // mean c is 1.0
  CHECK_THROWS_AS(solve_steady(net), std::domain_error);
}

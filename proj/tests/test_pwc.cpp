#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>
#include <vector>

#include "qnet/pwc.hpp"

using namespace qnet;

namespace {

PwcFunction pulse(double level, Time lo, Time hi, Time T) {
  // level on [lo, hi), 0 elsewhere on [0, T), periodic
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

PwcFunction random_pwc(std::mt19937_64& rng, Time T) {
  std::uniform_int_distribution<int> nseg(1, 6);
  std::uniform_real_distribution<double> val(0.0, 5.0);
  int k = nseg(rng);
  std::vector<Time> bp{0};
  std::uniform_int_distribution<long> tick(1, long(T) - 1);
  std::vector<long> cuts;
  for (int i = 1; i < k; ++i) cuts.push_back(tick(rng));
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (long c : cuts) bp.push_back(double(c));
  std::vector<double> v;
  for (size_t i = 0; i < bp.size(); ++i) v.push_back(val(rng));
  return PwcFunction(bp, v, T, true);
}

}  // namespace

TEST_CASE("constant and value lookup") {
  auto f = PwcFunction::constant(1.5, 20.0, true);
  CHECK(f.value(0) == 1.5);
  CHECK(f.value(19.999) == 1.5);
  CHECK(f.value(25.0) == 1.5);  // periodic wrap
  CHECK(f.mean() == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("right continuity at breakpoints") {
  auto f = pulse(2.0, 0, 10, 20);
  CHECK(f.value(0) == 2.0);
  CHECK(f.value(10) == 0.0);  // right-continuous: new value at the breakpoint
  CHECK(f.value(9.999999) == 2.0);
  CHECK(f.value(20) == 2.0);  // wraps to t=0
}

TEST_CASE("canonicalization merges equal adjacent segments") {
  PwcFunction f({0, 5, 10}, {1.0, 1.0, 2.0}, 20, true);
  CHECK(f.breakpoints().size() == 2);
  CHECK(f.values()[0] == 1.0);
  CHECK(f.values()[1] == 2.0);
}

TEST_CASE("integrate: zero function") {
  auto f = PwcFunction::constant(0.0, 20.0, true);
  CHECK(f.integrate(0, 20) == 0.0);
}

TEST_CASE("integrate: hand sum of segment areas") {
  // 2 veh/s on the first 10 s of a 20 s cycle
  auto f = pulse(2.0, 0, 10000, 20000);
  CHECK(f.integrate(0, 20000) == doctest::Approx(20.0).epsilon(1e-12));
}

TEST_CASE("integrate: periodic wraparound") {
  auto f = pulse(2.0, 0, 10000, 20000);
  CHECK(f.integrate(15000, 25000) == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("integrate: additivity on random functions") {
  std::mt19937_64 rng(7);
  for (int it = 0; it < 50; ++it) {
    auto f = random_pwc(rng, 20.0);
    std::uniform_real_distribution<double> pt(0.0, 60.0);
    double a = pt(rng), b = pt(rng), c = pt(rng);
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    CHECK(f.integrate(a, c) ==
          doctest::Approx(f.integrate(a, b) + f.integrate(b, c)).epsilon(1e-12));
  }
}

TEST_CASE("integrate: out-of-domain throws on non-periodic") {
  PwcFunction f({0}, {1.0}, 10000, false);
  CHECK_THROWS(f.integrate(5000, 15000));
  CHECK(f.integrate(0, 10000) == doctest::Approx(10.0));
}

TEST_CASE("shift: identity cases") {
  auto f = pulse(1.0, 0, 10, 20);
  CHECK(f.shift(0).almost_equal(f));
  CHECK(f.shift(20).almost_equal(f));   // full period
  CHECK(f.shift(40).almost_equal(f));   // two periods
}

TEST_CASE("shift: hand shift") {
  auto f = pulse(1.0, 0, 10, 20);
  auto g = f.shift(5);
  CHECK(g.almost_equal(pulse(1.0, 5, 15, 20)));
}

TEST_CASE("shift composes additively") {
  std::mt19937_64 rng(11);
  for (int it = 0; it < 30; ++it) {
    auto f = random_pwc(rng, 20.0);
    std::uniform_int_distribution<long> d(0, 19);
    double d1 = double(d(rng)), d2 = double(d(rng));
    CHECK(f.shift(d1).shift(d2).almost_equal(f.shift(d1 + d2), 1e-12));
  }
}

TEST_CASE("combine: identity and constants") {
  auto f = pulse(2.0, 0, 10, 20);
  auto one = PwcFunction::combine({{1.0, &f}});
  CHECK(one.almost_equal(f));

  auto a = PwcFunction::constant(2.0, 20, true);
  auto b = PwcFunction::constant(1.0, 20, true);
  auto s = PwcFunction::combine({{0.5, &a}, {1.0, &b}});
  CHECK(s.almost_equal(PwcFunction::constant(2.0, 20, true)));
}

TEST_CASE("combine: hand merge collapses to a constant") {
  PwcFunction f({0, 10}, {2.0, 0.0}, 20, true);
  PwcFunction g({0, 10}, {0.0, 4.0}, 20, true);
  auto s = PwcFunction::combine({{0.5, &f}, {0.25, &g}});
  CHECK(s.breakpoints().size() == 1);
  CHECK(s.values()[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("combine is linear against integrate") {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 30; ++it) {
    auto f = random_pwc(rng, 20.0);
    auto g = random_pwc(rng, 20.0);
    std::uniform_real_distribution<double> w(0.0, 2.0);
    double wf = w(rng), wg = w(rng);
    auto s = PwcFunction::combine({{wf, &f}, {wg, &g}});
    CHECK(s.integrate(0, 20) ==
          doctest::Approx(wf * f.integrate(0, 20) + wg * g.integrate(0, 20))
              .epsilon(1e-10));
  }
}

TEST_CASE("combine rejects mismatched domains") {
  auto a = PwcFunction::constant(1.0, 20, true);
  auto b = PwcFunction::constant(1.0, 10, true);
  CHECK_THROWS(PwcFunction::combine({{1.0, &a}, {1.0, &b}}));
}

TEST_CASE("compare_sets: single green pulse") {
  auto y = PwcFunction::constant(0.5, 20, true);
  auto c = pulse(2.0, 0, 10, 20);
  auto s = compare_sets(y, c);
  REQUIRE(s.negative.size() == 1);
  REQUIRE(s.positive.size() == 1);
  CHECK(s.negative[0].lo == 0.0);
  CHECK(s.negative[0].hi == 10.0);
  CHECK(s.positive[0].lo == 10.0);
  CHECK(s.positive[0].hi == 20.0);
}

TEST_CASE("compare_sets: equality everywhere gives empty sets") {
  auto y = pulse(2.0, 0, 10, 20);
  auto s = compare_sets(y, y);
  CHECK(s.negative.empty());
  CHECK(s.positive.empty());
}

TEST_CASE("compare_sets: hand comparison with interior switch") {
  PwcFunction y({0, 5}, {3.0, 1.0}, 20, true);
  auto c = PwcFunction::constant(2.0, 20, true);
  auto s = compare_sets(y, c);
  REQUIRE(s.positive.size() == 1);
  REQUIRE(s.negative.size() == 1);
  CHECK(s.positive[0].lo == 0.0);
  CHECK(s.positive[0].hi == 5.0);
  CHECK(s.negative[0].lo == 5.0);
  CHECK(s.negative[0].hi == 20.0);
}

TEST_CASE("compare_sets: near-equality within tolerance is neither") {
  PwcFunction y({0, 10}, {2.0 + 1e-12, 3.0}, 20, true);
  auto c = PwcFunction::constant(2.0, 20, true);
  auto s = compare_sets(y, c);
  REQUIRE(s.positive.size() == 1);
  CHECK(s.positive[0].lo == 10.0);
  CHECK(s.negative.empty());
}

TEST_CASE("compare_sets: intervals disjoint and strict in the interior") {
  std::mt19937_64 rng(17);
  for (int it = 0; it < 50; ++it) {
    auto y = random_pwc(rng, 20.0);
    auto c = random_pwc(rng, 20.0);
    auto s = compare_sets(y, c);
    auto check_order = [](const std::vector<Interval>& iv) {
      for (size_t k = 0; k + 1 < iv.size(); ++k) CHECK(iv[k].hi <= iv[k + 1].lo);
      for (const auto& i : iv) CHECK(i.lo < i.hi);
    };
    check_order(s.negative);
    check_order(s.positive);
    for (const auto& i : s.positive) {
      double mid = 0.5 * (i.lo + i.hi);
      CHECK(y.value(mid) > c.value(mid));
    }
    for (const auto& i : s.negative) {
      double mid = 0.5 * (i.lo + i.hi);
      CHECK(y.value(mid) < c.value(mid));
    }
  }
}

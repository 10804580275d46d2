#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "trafusion/bt_weight.hpp"
#include "trafusion/errors.hpp"

using namespace trafusion;

namespace {
const BtWeightParams kDefault;
}

TEST_CASE("closed-form area matches the shoelace polygon") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double dt = 10.0 + 2000.0 * u(rng);
    const double dx = dt * (kDefault.v_min + (kDefault.v_max - kDefault.v_min) * u(rng));
    const double closed = parallelogram_area(dx, dt, kDefault).area;
    const double poly = oracle::shoelace(oracle::feasible_parallelogram(dx, dt, kDefault.v_min, kDefault.v_max));
    CHECK(closed == doctest::Approx(poly).epsilon(1e-9));
  }
}

TEST_CASE("area examples") {
  const auto a = parallelogram_area(2000.0, 120.0, kDefault);
  CHECK_FALSE(a.clamped);
  CHECK(a.area == doctest::Approx(1.232e5).epsilon(1e-3));
  CHECK(a.area == doctest::Approx(oracle::shoelace(oracle::feasible_parallelogram(2000.0, 120.0, kDefault.v_min, kDefault.v_max))));
  CHECK(parallelogram_area(kDefault.v_max * 120.0, 120.0, kDefault).area == 0.0);
  CHECK(parallelogram_area(kDefault.v_min * 120.0, 120.0, kDefault).area == 0.0);
  const auto fast = parallelogram_area(2.0 * kDefault.v_max * 120.0, 120.0, kDefault);
  CHECK(fast.area == 0.0);
  CHECK(fast.clamped);
  CHECK_THROWS_AS(parallelogram_area(0.0, 1.0, kDefault), DomainError);
  CHECK_THROWS_AS(parallelogram_area(1.0, -1.0, kDefault), DomainError);
}

TEST_CASE("weight examples") {
  CHECK(bt_weight(0.0, 5e5) == 1.0);
  CHECK(bt_weight(5e5, 5e5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
  const double a = parallelogram_area(2000.0, 120.0, kDefault).area;
  CHECK(std::abs(bt_weight(a, 5e5) - 0.7817) < 1e-3);
  CHECK_THROWS_AS(bt_weight(-1.0, 5e5), DomainError);
  CHECK_THROWS_AS(bt_weight(1.0, 0.0), DomainError);
}

TEST_CASE("weight decreases with area") {
  double prev = 2.0;
  for (int k = 0; k < 1000; ++k) {
    const double w = bt_weight(k * 2000.0, 5e5);
    CHECK(w < prev);
    prev = w;
  }
}

TEST_CASE("area is concave in dx with its peak at the mean of the speed bounds") {
  const double dt = 300.0;
  const double lo = kDefault.v_min * dt;
  const double hi = kDefault.v_max * dt;
  const double peak = 0.5 * (kDefault.v_min + kDefault.v_max) * dt;
  const int n = 400;
  std::vector<double> a(n + 1);
  for (int k = 0; k <= n; ++k) a[k] = parallelogram_area(lo + (hi - lo) * k / n, dt, kDefault).area;
  for (int k = 1; k < n; ++k) CHECK(a[k - 1] + a[k + 1] <= 2.0 * a[k] * (1 + 1e-12));
  const double top = parallelogram_area(peak, dt, kDefault).area;
  for (double v : a) CHECK(v <= top * (1 + 1e-12));
}

TEST_CASE("area scales quadratically") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double dt = 30.0 + 600.0 * u(rng);
    const double dx = dt * (kDefault.v_min + (kDefault.v_max - kDefault.v_min) * u(rng));
    const double s = 0.5 + 4.0 * u(rng);
    CHECK(parallelogram_area(s * dx, s * dt, kDefault).area ==
          doctest::Approx(s * s * parallelogram_area(dx, dt, kDefault).area).epsilon(1e-9));
  }
}

TEST_CASE("weight field averages per cell") {
  const GridSpec g(0.0, 5000.0, 0.0, 600.0);
  // At v_max: zero area, weight 1, ten cells.
  const double t_fast = 1000.0 / kDefault.v_max;
  const std::vector fast{BtSample{"a", 0.0, 1000.0, 0.0, t_fast}};
  const WeightField w1 = bt_weight_field(fast, g, kDefault);
  for (std::size_t i = 0; i < 10; ++i) CHECK(w1(i, 0) == doctest::Approx(1.0));
  CHECK(w1(10, 0) == 0.0);

  // Two samples across cell (0,0): weights 1 and 0.5.
  BtWeightParams p = kDefault;
  const double dt2 = 20.0;
  const double dx2 = 100.0;
  p.gamma = parallelogram_area(dx2, dt2, p).area / std::log(2.0);
  const std::vector two{BtSample{"a", 0.0, 100.0, 0.0, 100.0 / p.v_max},
                        BtSample{"b", 0.0, dx2, 0.0, dt2}};
  const WeightField w2 = bt_weight_field(two, g, p);
  CHECK(w2(0, 0) == doctest::Approx(0.75));

  const WeightField w0 = bt_weight_field(std::vector<BtSample>{}, g, kDefault);
  for (double v : w0.values().data()) CHECK(v == 0.0);
}

TEST_CASE("longer segments get less trust at equal mean speed") {
  const double v = 60.0 * kKmh;
  double prev = 2.0;
  for (double d : {500.0, 1000.0, 2000.0, 4000.0, 8000.0}) {
    const double w = bt_sample_weight(BtSample{"a", 0.0, d, 0.0, d / v}, kDefault);
    CHECK(w < prev);
    prev = w;
  }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "trafusion/errors.hpp"
#include "trafusion/grid.hpp"

using namespace trafusion;

TEST_CASE("grid dimensions round up partial cells") {
  const GridSpec g(0.0, 10000.0, 0.0, 14400.0);
  CHECK(g.n_x() == 100);
  CHECK(g.n_t() == 240);
  const GridSpec partial(0.0, 1050.0, 0.0, 61.0);
  CHECK(partial.n_x() == 11);
  CHECK(partial.n_t() == 2);
  CHECK_THROWS_AS(GridSpec(0.0, 0.0, 0.0, 60.0), DomainError);
  CHECK_THROWS_AS(GridSpec(0.0, 100.0, 0.0, 60.0, -1.0), DomainError);
}

TEST_CASE("cell_index examples") {
  const GridSpec g(0.0, 1000.0, 0.0, 600.0);
  CHECK(cell_index(g, 0.0, 0.0) == CellIndex{0, 0});
  CHECK(cell_index(g, 59.9, 99.9) == CellIndex{0, 0});
  CHECK(cell_index(g, 60.0, 100.0) == CellIndex{1, 1});
  CHECK(cell_index(g, 600.0, 1000.0) == CellIndex{9, 9});
  CHECK_THROWS_AS(cell_index(g, -0.1, 0.0), DomainError);
  CHECK_THROWS_AS(cell_index(g, 0.0, 1000.1), DomainError);
}

TEST_CASE("cell_index matches floor/clamp rule on every boundary point") {
  const GridSpec g(-250.0, 950.0, 30.0, 630.0);
  for (std::size_t a = 0; a <= g.n_x(); ++a) {
    for (std::size_t b = 0; b <= g.n_t(); ++b) {
      const double x = g.x_min() + static_cast<double>(a) * g.dx();
      const double t = g.t_min() + static_cast<double>(b) * g.dt();
      const CellIndex c = cell_index(g, t, x);
      CHECK(c.row == std::min(a, g.n_x() - 1));
      CHECK(c.col == std::min(b, g.n_t() - 1));
    }
  }
}

TEST_CASE("cell_index of a cell centre returns that cell") {
  const GridSpec g(0.0, 2000.0, 0.0, 1200.0);
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    for (std::size_t j = 0; j < g.n_t(); ++j) {
      CHECK(cell_index(g, g.t_center(j), g.x_center(i)) == CellIndex{i, j});
    }
  }
}

TEST_CASE("harmonic_mean examples") {
  const double v50 = 50.0 * kKmh;
  const double v100 = 100.0 * kKmh;
  const std::vector<double> unit{1.0, 1.0};
  CHECK(harmonic_mean(std::vector{v50, v50}, unit) == doctest::Approx(v50));
  CHECK(harmonic_mean(std::vector{v50, v100}, unit) / kKmh == doctest::Approx(2.0 / (1.0 / 50 + 1.0 / 100)).epsilon(1e-12));
  CHECK(harmonic_mean(std::vector{v50, v100}, unit) / kKmh == doctest::Approx(66.667).epsilon(1e-5));
  CHECK(harmonic_mean(std::vector{40.0 * kKmh, 80.0 * kKmh}, std::vector{1.0, 0.0}) ==
        doctest::Approx(40.0 * kKmh));
}

TEST_CASE("harmonic_mean errors") {
  CHECK_THROWS_AS(harmonic_mean(std::vector<double>{}, std::vector<double>{}), NoDataError);
  CHECK_THROWS_AS(harmonic_mean(std::vector{10.0}, std::vector{0.0}), NoDataError);
  CHECK_THROWS_AS(harmonic_mean(std::vector{0.0, 10.0}, std::vector{1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(harmonic_mean(std::vector{10.0}, std::vector{-1.0}), DomainError);
}

TEST_CASE("harmonic_mean properties") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> speed(1.0, 40.0);
  std::uniform_real_distribution<double> weight(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + trial % 7);
    std::vector<double> w(v.size());
    for (auto& x : v) x = speed(rng);
    for (auto& x : w) x = weight(rng);
    w[0] = 0.5;
    const double h = harmonic_mean(v, w);
    CHECK(h == doctest::Approx(oracle::harmonic(v, w)).epsilon(1e-12));
    CHECK(h >= *std::min_element(v.begin(), v.end()) * (1 - 1e-12));
    CHECK(h <= *std::max_element(v.begin(), v.end()) * (1 + 1e-12));

    std::vector<double> scaled(v);
    for (auto& x : scaled) x *= 3.5;
    CHECK(harmonic_mean(scaled, w) == doctest::Approx(3.5 * h).epsilon(1e-12));

    std::vector<std::size_t> order(v.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<double> pv, pw;
    for (auto k : order) {
      pv.push_back(v[k]);
      pw.push_back(w[k]);
    }
    CHECK(harmonic_mean(pv, pw) == doctest::Approx(h).epsilon(1e-12));
  }
}

TEST_CASE("speed field invariants") {
  const GridSpec g(0.0, 300.0, 0.0, 120.0);
  CHECK(SpeedField(g).empty());
  const auto c = SpeedField::constant(g, 25.0);
  CHECK(c.fully_filled());
  CHECK(c.data_cell_count() == 6);
  Matrix v(3, 2, 10.0);
  Matrix w(3, 2, 1.0);
  w(0, 0) = 1.5;
  CHECK_THROWS_AS(SpeedField(g, v, w), DomainError);
  w(0, 0) = 1.0;
  v(1, 1) = std::nan("");
  CHECK_THROWS_AS(SpeedField(g, v, w), DomainError);
  CHECK_THROWS_AS(SpeedField(g, Matrix(2, 2), Matrix(2, 2)), ShapeError);
}

TEST_CASE("accumulator aggregation is order independent") {
  const GridSpec g(0.0, 100.0, 0.0, 60.0);
  HarmonicAccumulator a(g);
  HarmonicAccumulator b(g);
  const SpeedClamp clamp;
  a.add(0, 0, 10.0, 1.0, clamp);
  a.add(0, 0, 30.0, 1.0, clamp);
  b.add(0, 0, 30.0, 1.0, clamp);
  b.add(0, 0, 10.0, 1.0, clamp);
  const auto fa = a.finish(HarmonicAccumulator::WeightRule::unit, clamp);
  const auto fb = b.finish(HarmonicAccumulator::WeightRule::unit, clamp);
  CHECK(fa.speed(0, 0) == doctest::Approx(15.0));
  CHECK(fa.speed(0, 0) == fb.speed(0, 0));
}

TEST_CASE("zero speeds clamp to the floor") {
  const GridSpec g(0.0, 100.0, 0.0, 60.0);
  HarmonicAccumulator a(g);
  const SpeedClamp clamp;
  a.add(0, 0, 0.0, 1.0, clamp);
  CHECK(a.finish(HarmonicAccumulator::WeightRule::unit, clamp).speed(0, 0) == clamp.v_floor);
}

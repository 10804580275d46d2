#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "oracles.hpp"
#include "trafusion/errors.hpp"
#include "trafusion/smoothing.hpp"

using namespace trafusion;

namespace {

const KernelParams kCong{-15.0 * kKmh, 600.0, 60.0, false};
const KernelParams kFree{80.0 * kKmh, 600.0, 60.0, false};
const KernelParams kStationary{0.0, 300.0, 60.0, true};

SpeedField sparse_field(const GridSpec& g, unsigned seed, int count) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> v(3.0, 35.0);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  Matrix values(g.n_x(), g.n_t());
  Matrix weights(g.n_x(), g.n_t());
  for (int n = 0; n < count; ++n) {
    const auto i = rng() % g.n_x();
    const auto j = rng() % g.n_t();
    values(i, j) = v(rng);
    weights(i, j) = w(rng);
  }
  return SpeedField(g, values, weights);
}

}  // namespace

TEST_CASE("kernel_value") {
  CHECK(kernel_value(kCong, 0.0, 0.0) == 1.0);
  CHECK(kernel_value(kCong, -40.0 * 3.6 * 0.0 + 600.0 / (-15.0 * kKmh), 600.0) ==
        doctest::Approx(std::exp(-1.0)));
  CHECK(kernel_value(kStationary, 60.0, 300.0) == doctest::Approx(std::exp(-2.0)));
  CHECK_THROWS_AS(directional_smooth(SpeedField::constant(GridSpec(0, 100, 0, 60), 1.0),
                                     KernelParams{0.0, 600.0, 60.0, false}),
                  DomainError);
}

TEST_CASE("uniform field is a fixed point of every kernel") {
  const GridSpec g(0.0, 3000.0, 0.0, 1800.0);
  for (const auto& k : {kCong, kFree, kStationary}) {
    const SpeedField out = directional_smooth(SpeedField::constant(g, 25.0), k);
    CHECK(out.fully_filled());
    for (double v : out.values().data()) CHECK(v == doctest::Approx(25.0).epsilon(1e-12));
  }
}

TEST_CASE("single datum fills the grid with decaying weight") {
  const GridSpec g(0.0, 5000.0, 0.0, 3600.0);
  Matrix v(g.n_x(), g.n_t());
  Matrix w(g.n_x(), g.n_t());
  v(25, 30) = 10.0;
  w(25, 30) = 1.0;
  const SpeedField out = directional_smooth(SpeedField(g, v, w), kCong);
  CHECK(out.fully_filled());
  for (double s : out.values().data()) CHECK(s == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(out.weight(25, 30) == 1.0);
  CHECK(out.weight(25, 31) < out.weight(25, 30));
  CHECK(out.weight(0, 0) > 0.0);
  CHECK(out.weight(0, 0) < 1e-6);
}

TEST_CASE("two equidistant data give the inverse-speed mean") {
  const GridSpec g(0.0, 1000.0, 0.0, 600.0);
  Matrix v(g.n_x(), g.n_t());
  Matrix w(g.n_x(), g.n_t());
  v(5, 2) = 10.0;
  w(5, 2) = 1.0;
  v(5, 6) = 30.0;
  w(5, 6) = 1.0;
  const SpeedField out = directional_smooth(SpeedField(g, v, w), kStationary);
  CHECK(out.speed(5, 4) == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("smoothing matches the untruncated kernel oracle") {
  const GridSpec g(0.0, 4000.0, 0.0, 2400.0);
  for (int density : {3, 40, 400}) {
    const SpeedField f = sparse_field(g, 17 + density, density);
    for (const auto& k : {kCong, kFree, kStationary}) {
      const SpeedField out = directional_smooth(f, k);
      for (std::size_t i = 0; i < g.n_x(); i += 3) {
        for (std::size_t j = 0; j < g.n_t(); j += 2) {
          const auto [speed, mass] = oracle::smooth_cell(f, k, i, j);
          CHECK(out.speed(i, j) == doctest::Approx(speed).epsilon(1e-10));
          if (mass < 1.0) CHECK(out.weight(i, j) == doctest::Approx(mass).epsilon(1e-10));
        }
      }
    }
  }
}

TEST_CASE("smoothing output is bounded by the data extremes") {
  const GridSpec g(0.0, 4000.0, 0.0, 2400.0);
  for (unsigned seed = 1; seed < 6; ++seed) {
    const SpeedField f = sparse_field(g, seed, 60);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < g.n_x(); ++i) {
      for (std::size_t j = 0; j < g.n_t(); ++j) {
        if (!f.has_data(i, j)) continue;
        lo = std::min(lo, f.speed(i, j));
        hi = std::max(hi, f.speed(i, j));
      }
    }
    for (const auto& k : {kCong, kFree, kStationary}) {
      const SpeedField out = directional_smooth(f, k);
      for (double v : out.values().data()) {
        CHECK(v >= lo * (1 - 1e-12));
        CHECK(v <= hi * (1 + 1e-12));
      }
    }
  }
}

TEST_CASE("smoothing commutes with a shift of the time origin") {
  const GridSpec a(0.0, 3000.0, 0.0, 3600.0);
  const GridSpec b(0.0, 3000.0, 600.0, 4200.0);
  const SpeedField fa = sparse_field(a, 9, 50);
  const SpeedField fb(b, fa.values(), fa.weights());
  const SpeedField oa = directional_smooth(fa, kCong);
  const SpeedField ob = directional_smooth(fb, kCong);
  for (std::size_t k = 0; k < oa.values().data().size(); ++k) {
    CHECK(oa.values().data()[k] == doctest::Approx(ob.values().data()[k]).epsilon(1e-9));
  }
}

TEST_CASE("empty field is rejected") {
  CHECK_THROWS_AS(directional_smooth(SpeedField(GridSpec(0, 100, 0, 60)), kCong), NoDataError);
}

TEST_CASE("adaptive weight") {
  const double thr = 60.0 * kKmh;
  const double dv = 20.0 * kKmh;
  CHECK(adaptive_weight(thr, 100.0, thr, dv) == 0.5);
  CHECK(adaptive_weight(0.0, 30.0, thr, dv) == doctest::Approx(0.5 * (1.0 + std::tanh(3.0))).epsilon(1e-12));
  CHECK(adaptive_weight(0.0, 30.0, thr, dv) == doctest::Approx(0.99753).epsilon(1e-5));
  CHECK(adaptive_weight(1e6, 1e6, thr, dv) == doctest::Approx(0.0));
  double prev = 2.0;
  for (int k = 0; k <= 1000; ++k) {
    const double w = adaptive_weight(k * 0.05, 40.0, thr, dv);
    CHECK(w <= prev);
    CHECK(w >= 0.0);
    CHECK(w <= 1.0);
    prev = w;
  }
}

TEST_CASE("adaptive weight field and shape checks") {
  const GridSpec g(0.0, 200.0, 0.0, 120.0);
  const WeightField w =
      adaptive_weight(SpeedField::constant(g, 10.0), SpeedField::constant(g, 30.0), 60 * kKmh, 20 * kKmh);
  CHECK(w(1, 1) == doctest::Approx(adaptive_weight(10.0, 30.0, 60 * kKmh, 20 * kKmh)));
  CHECK_THROWS_AS(adaptive_weight(SpeedField::constant(g, 10.0),
                                  SpeedField::constant(GridSpec(0, 300, 0, 120), 10.0), 1.0, 1.0),
                  ShapeError);
}

TEST_CASE("asm_combine") {
  const GridSpec g(0.0, 200.0, 0.0, 120.0);
  const auto vc = SpeedField::constant(g, 10.0);
  const auto vf = SpeedField::constant(g, 30.0);
  CHECK(asm_combine(vc, vf, WeightField(g, 1.0)).speed(0, 0) == 10.0);
  CHECK(asm_combine(vc, vf, WeightField(g, 0.0)).speed(0, 0) == 30.0);
  CHECK(asm_combine(vc, vf, WeightField(g, 0.5)).speed(0, 0) == doctest::Approx(15.0));
  CHECK(asm_combine(vc, vf, WeightField(g, 0.5), false).speed(0, 0) == doctest::Approx(20.0));
  for (int k = 0; k <= 20; ++k) {
    const double v = asm_combine(vc, vf, WeightField(g, k / 20.0)).speed(1, 1);
    CHECK(v >= 10.0);
    CHECK(v <= 30.0);
  }
  const auto partial = SpeedField::constant(g, 10.0, 0.25);
  CHECK(asm_combine(partial, SpeedField::constant(g, 30.0, 0.5), WeightField(g, 0.5)).weight(0, 0) == 0.5);
}

TEST_CASE("congested kernel ridge follows the congested wave speed") {
  const GridSpec g(0.0, 6000.0, 0.0, 3600.0);
  Matrix v(g.n_x(), g.n_t());
  Matrix w(g.n_x(), g.n_t());
  v(40, 20) = 2.0;
  w(40, 20) = 1.0;
  // Fast background everywhere else.
  for (std::size_t i = 0; i < g.n_x(); ++i) {
    for (std::size_t j = 0; j < g.n_t(); ++j) {
      if (w(i, j) == 0.0 && (i + j) % 5 == 0) {
        v(i, j) = 30.0;
        w(i, j) = 1.0;
      }
    }
  }
  const SpeedField out = directional_smooth(SpeedField(g, v, w), kCong);
  // Along the characteristic through the datum the speed stays lower than
  // at the same time offset without the spatial shift.
  const double shift = 1000.0 / (-15.0 * kKmh);  // s per 1000 m upstream
  const auto col = static_cast<std::size_t>(20 + std::lround(-shift / 60.0));
  CHECK(out.speed(30, col) < out.speed(30, 20));
}

TEST_CASE("cells far beyond underflow range keep the limiting ratio") {
  // tau = 20 s over 10 h: linear kernel sums underflow at the far end.
  const GridSpec g(0.0, 500.0, 0.0, 36000.0);
  const KernelParams k{0.0, 300.0, 20.0, true};
  Matrix v(g.n_x(), g.n_t());
  Matrix w(g.n_x(), g.n_t());
  v(0, 0) = 10.0;
  w(0, 0) = 1.0;
  v(0, 1) = 30.0;
  w(0, 1) = 0.5;
  const SpeedField out = directional_smooth(SpeedField(g, v, w), k);
  // Past both data the time factors share e^{-t/tau}, leaving a fixed mix.
  const double a = 1.0;
  const double b = 0.5 * std::exp(60.0 / 20.0);
  const double expected = (a + b) / (a / 10.0 + b / 30.0);
  for (std::size_t j : {std::size_t{5}, std::size_t{300}, g.n_t() - 1}) {
    for (std::size_t i = 0; i < g.n_x(); ++i) {
      CHECK(out.speed(i, j) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
  CHECK(out.weight(0, g.n_t() - 1) == std::numeric_limits<double>::min());
}

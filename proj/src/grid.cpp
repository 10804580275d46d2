#include "trafusion/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "trafusion/errors.hpp"

namespace trafusion {

namespace {

std::size_t cells_covering(double lo, double hi, double step) {
  // Tolerate representation noise, e.g. (0.3 - 0.0) / 0.1.
  const double n = (hi - lo) / step;
  const double rounded = std::round(n);
  const double count = std::abs(n - rounded) < 1e-9 ? rounded : std::ceil(n);
  return static_cast<std::size_t>(std::max(1.0, count));
}

}  // namespace

double SpeedClamp::apply(double v) const {
  if (!std::isfinite(v)) {
    return v > 0 ? v_ceil : v_floor;
  }
  return std::clamp(v, v_floor, v_ceil);
}

GridSpec::GridSpec(double x_min, double x_max, double t_min, double t_max, double dx, double dt)
    : x_min_(x_min), x_max_(x_max), t_min_(t_min), t_max_(t_max), dx_(dx), dt_(dt) {
  if (!(dx > 0.0) || !(dt > 0.0)) {
    throw DomainError("grid steps must be positive");
  }
  if (!(x_max > x_min) || !(t_max > t_min)) {
    throw DomainError("grid extent must be nonempty (x_max > x_min, t_max > t_min)");
  }
  n_x_ = cells_covering(x_min, x_max, dx);
  n_t_ = cells_covering(t_min, t_max, dt);
}

std::size_t row_of(const GridSpec& spec, double x) {
  const double r = std::floor((x - spec.x_min()) / spec.dx());
  if (r <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(r), spec.n_x() - 1);
}

std::size_t col_of(const GridSpec& spec, double t) {
  const double c = std::floor((t - spec.t_min()) / spec.dt());
  if (c <= 0.0) return 0;
  return std::min(static_cast<std::size_t>(c), spec.n_t() - 1);
}

CellIndex cell_index(const GridSpec& spec, double t, double x) {
  if (!spec.contains(t, x)) {
    throw DomainError("point (t=" + std::to_string(t) + " s, x=" + std::to_string(x) +
                      " m) lies outside the grid");
  }
  return {row_of(spec, x), col_of(spec, t)};
}

WeightField::WeightField(const GridSpec& spec, Matrix values)
    : spec_(spec), values_(std::move(values)) {
  if (values_.rows() != spec.n_x() || values_.cols() != spec.n_t()) {
    throw ShapeError("weight matrix dimensions do not match the grid");
  }
}

SpeedField::SpeedField(const GridSpec& spec)
    : spec_(spec), values_(spec.n_x(), spec.n_t()), weights_(spec.n_x(), spec.n_t()) {}

SpeedField::SpeedField(const GridSpec& spec, Matrix values, Matrix weights)
    : spec_(spec), values_(std::move(values)), weights_(std::move(weights)) {
  if (values_.rows() != spec.n_x() || values_.cols() != spec.n_t() ||
      weights_.rows() != spec.n_x() || weights_.cols() != spec.n_t()) {
    throw ShapeError("speed field matrices do not match the grid");
  }
  auto v = values_.data();
  auto w = weights_.data();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!(w[k] >= 0.0 && w[k] <= 1.0)) {
      throw DomainError("cell weights must lie in [0, 1]");
    }
    if (w[k] > 0.0 && !(std::isfinite(v[k]) && v[k] > 0.0)) {
      throw DomainError("cell with data holds a non-finite or nonpositive speed");
    }
  }
}

SpeedField SpeedField::constant(const GridSpec& spec, double speed, double weight) {
  return SpeedField(spec, Matrix(spec.n_x(), spec.n_t(), speed),
                    Matrix(spec.n_x(), spec.n_t(), weight));
}

std::size_t SpeedField::data_cell_count() const {
  const auto w = weights_.data();
  return static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [](double x) { return x > 0.0; }));
}

double harmonic_mean(std::span<const double> speeds, std::span<const double> weights) {
  if (speeds.size() != weights.size()) {
    throw ShapeError("harmonic_mean: speeds and weights differ in length");
  }
  double sum_w = 0.0;
  double sum_w_over_v = 0.0;
  for (std::size_t k = 0; k < speeds.size(); ++k) {
    if (weights[k] < 0.0) throw DomainError("harmonic_mean: negative weight");
    if (!(speeds[k] > 0.0)) throw DomainError("harmonic_mean: nonpositive speed");
    if (weights[k] == 0.0) continue;
    sum_w += weights[k];
    sum_w_over_v += weights[k] / speeds[k];
  }
  if (sum_w <= 0.0) {
    throw NoDataError("harmonic_mean: no positive weight");
  }
  return sum_w / sum_w_over_v;
}

HarmonicAccumulator::HarmonicAccumulator(const GridSpec& spec)
    : spec_(spec),
      sum_w_(spec.n_x(), spec.n_t()),
      sum_w_over_v_(spec.n_x(), spec.n_t()),
      max_w_(spec.n_x(), spec.n_t()) {}

void HarmonicAccumulator::add(std::size_t i, std::size_t j, double v, double w,
                              const SpeedClamp& clamp) {
  if (!(w > 0.0)) return;
  const double speed = clamp.apply(v);
  sum_w_(i, j) += w;
  sum_w_over_v_(i, j) += w / speed;
  max_w_(i, j) = std::max(max_w_(i, j), w);
}

SpeedField HarmonicAccumulator::finish(WeightRule rule, const SpeedClamp& clamp) const {
  Matrix values(spec_.n_x(), spec_.n_t());
  Matrix weights(spec_.n_x(), spec_.n_t());
  const auto sw = sum_w_.data();
  const auto swv = sum_w_over_v_.data();
  const auto mw = max_w_.data();
  auto out_v = values.data();
  auto out_w = weights.data();
  for (std::size_t k = 0; k < sw.size(); ++k) {
    if (sw[k] <= 0.0) continue;
    out_v[k] = clamp.apply(sw[k] / swv[k]);
    out_w[k] = rule == WeightRule::unit ? 1.0 : std::min(1.0, mw[k]);
  }
  return SpeedField(spec_, std::move(values), std::move(weights));
}

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) {
    throw ShapeError(std::string(what) + ": fields are defined on different grids");
  }
}

}  // namespace trafusion

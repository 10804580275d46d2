#include "trafusion/bt_weight.hpp"

#include <cmath>

#include "trafusion/errors.hpp"

namespace trafusion {

void BtWeightParams::validate() const {
  if (!(v_min > 0.0) || !(v_max > v_min)) {
    throw DomainError("BT weight parameters need 0 < v_min < v_max");
  }
  if (!(gamma > 0.0)) {
    throw DomainError("BT weight parameter gamma must be positive");
  }
}

ParallelogramArea parallelogram_area(double dx, double dt, const BtWeightParams& p) {
  p.validate();
  if (!(dx > 0.0) || !(dt > 0.0)) {
    throw DomainError("parallelogram_area: dx and dt must be positive");
  }
  const double slack_low = dx - p.v_min * dt;
  const double slack_high = p.v_max * dt - dx;
  if (slack_low <= 0.0 || slack_high <= 0.0) {
    return {0.0, slack_low < 0.0 || slack_high < 0.0};
  }
  return {slack_low * slack_high / (p.v_max - p.v_min), false};
}

double bt_weight(double area, double gamma) {
  if (area < 0.0) throw DomainError("bt_weight: negative area");
  if (!(gamma > 0.0)) throw DomainError("bt_weight: gamma must be positive");
  return std::exp(-area / gamma);
}

double bt_sample_weight(const BtSample& s, const BtWeightParams& p) {
  return bt_weight(parallelogram_area(s.distance(), s.travel_time(), p).area, p.gamma);
}

WeightField bt_weight_field(std::span<const BtSample> samples, const GridSpec& spec,
                            const BtWeightParams& p) {
  Matrix sum(spec.n_x(), spec.n_t());
  Matrix count(spec.n_x(), spec.n_t());
  for (const auto& s : samples) {
    if (!(s.x_end > s.x_start) || !(s.t_end > s.t_start)) continue;
    const double w = bt_sample_weight(s, p);
    for (const auto& piece : bt_path(spec, s)) {
      sum(piece.cell.row, piece.cell.col) += w;
      count(piece.cell.row, piece.cell.col) += 1.0;
    }
  }
  WeightField out(spec);
  for (std::size_t i = 0; i < spec.n_x(); ++i) {
    for (std::size_t j = 0; j < spec.n_t(); ++j) {
      if (count(i, j) > 0.0) out(i, j) = sum(i, j) / count(i, j);
    }
  }
  return out;
}

}  // namespace trafusion

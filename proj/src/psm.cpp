#include "trafusion/psm.hpp"

#include <array>
#include <cmath>
#include <optional>

#include "trafusion/errors.hpp"
#include "trafusion/sensors.hpp"
#include "trafusion/smoothing.hpp"

namespace trafusion {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

KernelParams sync_pilot_kernel(const ReconstructionParams& params) {
  return {0.0, params.psm.sigma_sync, params.adaptive.tau, true};
}

}  // namespace

PhaseField::PhaseField(const GridSpec& spec)
    : spec_(spec),
      p_free_(spec.n_x(), spec.n_t()),
      p_sync_(spec.n_x(), spec.n_t()),
      p_wmj_(spec.n_x(), spec.n_t()) {}

double PhaseField::probability(Phase phase, std::size_t i, std::size_t j) const {
  switch (phase) {
    case Phase::free_flow:
      return p_free_(i, j);
    case Phase::synchronized:
      return p_sync_(i, j);
    case Phase::wide_moving_jam:
      return p_wmj_(i, j);
  }
  return 0.0;
}

Phase PhaseField::dominant(std::size_t i, std::size_t j) const {
  const double f = p_free_(i, j);
  const double s = p_sync_(i, j);
  const double w = p_wmj_(i, j);
  if (w >= s && w >= f) return Phase::wide_moving_jam;
  if (s >= f) return Phase::synchronized;
  return Phase::free_flow;
}

void PhaseField::set(std::size_t i, std::size_t j, double free, double sync, double wmj) {
  const double total = free + sync + wmj;
  p_free_(i, j) = free / total;
  p_sync_(i, j) = sync / total;
  p_wmj_(i, j) = wmj / total;
}

double membership_free(double v, const PsmParams& p) {
  return logistic((v - p.free_sync_center) / p.steepness);
}

double membership_sync(double v, const PsmParams& p) {
  return logistic((v - p.sync_wmj_center) / p.steepness) *
         logistic((p.free_sync_center - v) / p.steepness);
}

double membership_wmj(double v, const PsmParams& p) {
  return logistic((p.sync_wmj_center - v) / p.steepness);
}

PhaseField classify_phases(const SpeedField& raw, const ReconstructionParams& params) {
  if (raw.empty()) {
    throw NoDataError("classify_phases: raw field holds no data");
  }
  const auto& a = params.adaptive;
  const SpeedField free_pilot = directional_smooth(raw, a.free_kernel(), params.clamp);
  const SpeedField sync_pilot = directional_smooth(raw, sync_pilot_kernel(params), params.clamp);
  const SpeedField wmj_pilot = directional_smooth(raw, a.congested_kernel(), params.clamp);

  const GridSpec& spec = raw.spec();
  PhaseField phases(spec);
  for (std::size_t i = 0; i < spec.n_x(); ++i) {
    for (std::size_t j = 0; j < spec.n_t(); ++j) {
      const double mf = membership_free(free_pilot.speed(i, j), params.psm);
      const double ms = membership_sync(sync_pilot.speed(i, j), params.psm);
      const double mw = membership_wmj(wmj_pilot.speed(i, j), params.psm);
      double lf = mf * free_pilot.weight(i, j);
      double ls = ms * sync_pilot.weight(i, j);
      double lw = mw * wmj_pilot.weight(i, j);
      if (!(lf + ls + lw > 0.0)) {
        lf = mf;
        ls = ms;
        lw = mw;
      }
      phases.set(i, j, lf, ls, lw);
    }
  }
  return phases;
}

SpeedField reconstruct_psm(const SpeedField& raw, const ReconstructionParams& params) {
  const PhaseField phases = classify_phases(raw, params);
  const GridSpec& spec = raw.spec();

  std::array<Matrix, 3> phase_values;
  std::array<Matrix, 3> phase_weights;
  for (auto& m : phase_values) m = Matrix(spec.n_x(), spec.n_t());
  for (auto& m : phase_weights) m = Matrix(spec.n_x(), spec.n_t());
  for (std::size_t i = 0; i < spec.n_x(); ++i) {
    for (std::size_t j = 0; j < spec.n_t(); ++j) {
      if (!raw.has_data(i, j)) continue;
      const auto k = static_cast<std::size_t>(phases.dominant(i, j));
      phase_values[k](i, j) = raw.speed(i, j);
      phase_weights[k](i, j) = raw.weight(i, j);
    }
  }

  const auto& a = params.adaptive;
  const std::array<KernelParams, 3> kernels{
      a.free_kernel(),
      params.psm.sync_stationary_kernel ? sync_pilot_kernel(params) : a.congested_kernel(),
      a.congested_kernel(),
  };
  std::array<std::optional<SpeedField>, 3> estimates;
  for (std::size_t k = 0; k < 3; ++k) {
    SpeedField subset(spec, phase_values[k], phase_weights[k]);
    if (!subset.empty()) estimates[k] = directional_smooth(subset, kernels[k], params.clamp);
  }

  Matrix values(spec.n_x(), spec.n_t());
  Matrix weights(spec.n_x(), spec.n_t());
  for (std::size_t i = 0; i < spec.n_x(); ++i) {
    for (std::size_t j = 0; j < spec.n_t(); ++j) {
      std::array<double, 3> blend{};
      double total = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        if (!estimates[k]) continue;
        blend[k] = phases.probability(static_cast<Phase>(k), i, j) * estimates[k]->weight(i, j);
        total += blend[k];
      }
      if (!(total > 0.0)) {
        total = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          blend[k] = estimates[k] ? phases.probability(static_cast<Phase>(k), i, j) : 0.0;
          total += blend[k];
        }
      }
      if (!(total > 0.0)) {
        total = 0.0;
        for (std::size_t k = 0; k < 3; ++k) {
          blend[k] = estimates[k] ? 1.0 : 0.0;
          total += blend[k];
        }
      }
      double inv = 0.0;
      double mass = 0.0;
      for (std::size_t k = 0; k < 3; ++k) {
        if (blend[k] <= 0.0) continue;
        inv += blend[k] / estimates[k]->speed(i, j);
        mass = std::max(mass, estimates[k]->weight(i, j));
      }
      values(i, j) = params.clamp.apply(total / inv);
      weights(i, j) = mass;
    }
  }
  return SpeedField(spec, std::move(values), std::move(weights));
}

SpeedField reconstruct_psm_w(const SpeedField& loop, const SpeedField& fcd, const SpeedField& bt,
                             const WeightField& bt_weights, const ReconstructionParams& params) {
  const GridSpec& spec = loop.spec();
  const std::array<SpeedField, 3> sources{loop, fcd, bt};
  const std::array<WeightField, 3> trust{WeightField(spec, 1.0), WeightField(spec, 1.0),
                                         bt_weights};
  const SpeedField fused = combine_cellwise(sources, trust, params.clamp);
  if (fused.empty()) {
    throw NoDataError("reconstruct_psm_w: no input data after weighting");
  }
  return reconstruct_psm(fused, params);
}

}  // namespace trafusion

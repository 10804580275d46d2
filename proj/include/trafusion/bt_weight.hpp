#pragma once

// Trustworthiness of Bluetooth travel-time samples.
//
// A vehicle observed covering distance dx in time dt at speeds within
// [v_min, v_max] must have stayed inside the space-time parallelogram spanned
// by the forward speed cone of the entry point and the backward speed cone of
// the exit point. The larger that area, the less a straight-line
// interpolation says about where the vehicle actually was, so the sample's
// rasterized speeds get weight exp(-A / gamma).

#include <span>

#include "trafusion/grid.hpp"
#include "trafusion/params.hpp"
#include "trafusion/sensors.hpp"

namespace trafusion {

struct ParallelogramArea {
  double area = 0.0;     // m*s
  bool clamped = false;  // mean speed was outside [v_min, v_max]
};

/// Area of the feasible-trajectory parallelogram,
/// A = (dx - v_min dt)(v_max dt - dx) / (v_max - v_min).
///
/// Mean speeds outside [v_min, v_max] yield A = 0 with `clamped` set.
/// Throws DomainError for nonpositive dx or dt.
ParallelogramArea parallelogram_area(double dx, double dt, const BtWeightParams& p);

/// exp(-area / gamma). Throws DomainError for negative area or gamma <= 0.
double bt_weight(double area, double gamma);

/// Weight of a single sample.
double bt_sample_weight(const BtSample& s, const BtWeightParams& p);

/// Per cell, the arithmetic mean of the weights of every sample whose straight
/// interpolant crosses the cell; 0 where none passes.
WeightField bt_weight_field(std::span<const BtSample> samples, const GridSpec& spec,
                            const BtWeightParams& p);

}  // namespace trafusion

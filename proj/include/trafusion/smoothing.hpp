#pragma once

// Anisotropic kernel smoothing of inverse speeds along characteristic wave
// directions, and the adaptive congested/free blend built on top of it.

#include <vector>

#include "trafusion/grid.hpp"
#include "trafusion/params.hpp"

namespace trafusion {

/// Kernel value for an output-minus-data offset (dt, dx).
double kernel_value(const KernelParams& k, double dt, double dx);

/// Smooths the inverse speeds of all data cells with kernel `k`.
///
/// Output speed at each cell is 1 / (sum phi*w/v / sum phi*w) over every data
/// cell, without truncation, so every output cell is filled. Output weight is
/// the kernel mass sum phi*w clipped to [DBL_MIN, 1].
///
/// Throws NoDataError when `field` holds no data.
SpeedField directional_smooth(const SpeedField& field, const KernelParams& k,
                              const SpeedClamp& clamp = {});

/// w = 1/2 (1 + tanh((v_thr - min(V_cong, V_free)) / delta_v)), per cell.
double adaptive_weight(double v_cong, double v_free, double v_thr, double delta_v);
WeightField adaptive_weight(const SpeedField& v_cong, const SpeedField& v_free, double v_thr,
                            double delta_v);

/// Cell-wise convex combination of the two smoothed fields; in inverse-speed
/// space unless `inverse` is false. Output weight is the larger input weight.
SpeedField asm_combine(const SpeedField& v_cong, const SpeedField& v_free, const WeightField& w,
                       bool inverse = true, const SpeedClamp& clamp = {});

}  // namespace trafusion

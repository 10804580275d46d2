#pragma once

#include "trafusion/grid.hpp"
#include "trafusion/params.hpp"

namespace trafusion {

/// Adaptive smoothing: congested and free-flow kernel estimates blended by
/// the low-speed-favouring adaptive weight. Fully filled output.
SpeedField reconstruct_asm(const SpeedField& raw, const ReconstructionParams& params);

}  // namespace trafusion

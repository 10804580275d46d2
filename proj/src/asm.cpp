#include "trafusion/asm.hpp"

#include "trafusion/errors.hpp"
#include "trafusion/smoothing.hpp"

namespace trafusion {

SpeedField reconstruct_asm(const SpeedField& raw, const ReconstructionParams& params) {
  if (raw.empty()) {
    throw NoDataError("reconstruct_asm: raw field holds no data");
  }
  const auto& p = params.adaptive;
  const SpeedField v_cong = directional_smooth(raw, p.congested_kernel(), params.clamp);
  const SpeedField v_free = directional_smooth(raw, p.free_kernel(), params.clamp);
  const WeightField w = adaptive_weight(v_cong, v_free, p.v_thr, p.delta_v);
  return asm_combine(v_cong, v_free, w, p.combine_inverse, params.clamp);
}

}  // namespace trafusion

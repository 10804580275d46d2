#pragma once

// Phase-based smoothing.
//
// Step one smooths the raw data with three pilot kernels, one per traffic
// phase: free flow along the free-flow wave speed, wide moving jams along the
// congested wave speed, and synchronized flow only in time (narrow spatial
// support, since its downstream front is pinned at a bottleneck). Logistic
// speed memberships of the pilots, weighted by pilot kernel mass, give each
// cell a probability per phase.
//
// Step two assigns every raw cell to its dominant phase, smooths each phase's
// data separately and blends the phase estimates in inverse-speed space with
// weights p_phase * kernel mass.

#include "trafusion/grid.hpp"
#include "trafusion/params.hpp"

namespace trafusion {

enum class Phase { free_flow = 0, synchronized = 1, wide_moving_jam = 2 };

class PhaseField {
 public:
  explicit PhaseField(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  const Matrix& p_free() const { return p_free_; }
  const Matrix& p_sync() const { return p_sync_; }
  const Matrix& p_wmj() const { return p_wmj_; }

  double probability(Phase phase, std::size_t i, std::size_t j) const;
  /// argmax over phases, ties resolved toward the more congested phase.
  Phase dominant(std::size_t i, std::size_t j) const;

  /// Stores normalized probabilities for one cell.
  void set(std::size_t i, std::size_t j, double free, double sync, double wmj);

 private:
  GridSpec spec_;
  Matrix p_free_;
  Matrix p_sync_;
  Matrix p_wmj_;
};

/// Logistic speed memberships used by the classifier.
double membership_free(double v, const PsmParams& p);
double membership_sync(double v, const PsmParams& p);
double membership_wmj(double v, const PsmParams& p);

PhaseField classify_phases(const SpeedField& raw, const ReconstructionParams& params);

/// raw.weights() act as per-cell trust of the input data.
SpeedField reconstruct_psm(const SpeedField& raw, const ReconstructionParams& params);

/// Fuses loop and FCD at weight 1 with BT at `bt_weights`, then runs PSM on
/// the fusion with the fused weights as cell trust.
SpeedField reconstruct_psm_w(const SpeedField& loop, const SpeedField& fcd, const SpeedField& bt,
                             const WeightField& bt_weights, const ReconstructionParams& params);

}  // namespace trafusion

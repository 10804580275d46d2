#pragma once

// Tunable constants of every reconstruction algorithm, in SI units.
//
// Defaults: kernel and adaptive-weight constants are the usual ASM settings
// (Treiber/Helbing); phase memberships approximate the PSM behaviour; the BT
// trust constants are gamma = 500,000 m*s, v_min = 5 km/h, v_max = 130 km/h.

#include "trafusion/grid.hpp"

namespace trafusion {

/// Exponential smoothing kernel exp(-|dx|/sigma - |dt - dx/c|/tau).
struct KernelParams {
  double wave_speed = 0.0;  // m/s, negative = moving upstream
  double sigma = 600.0;     // m
  double tau = 60.0;        // s
  bool stationary = false;  // ignore wave_speed: exp(-|dx|/sigma - |dt|/tau)

  /// Throws DomainError on nonpositive widths or a zero wave speed.
  void validate() const;
};

struct AdaptiveSmoothingParams {
  double c_cong = -15.0 * kKmh;
  double c_free = 80.0 * kKmh;
  double sigma = 600.0;
  double tau = 60.0;
  double v_thr = 60.0 * kKmh;
  double delta_v = 20.0 * kKmh;
  /// Blend V_cong/V_free in inverse-speed space (true) or speed space.
  bool combine_inverse = true;

  KernelParams congested_kernel() const { return {c_cong, sigma, tau, false}; }
  KernelParams free_kernel() const { return {c_free, sigma, tau, false}; }
};

struct PsmParams {
  double free_sync_center = 80.0 * kKmh;
  double sync_wmj_center = 25.0 * kKmh;
  double steepness = 10.0 * kKmh;
  double sigma_sync = 300.0;
  /// Smooth sync-phase data with the stationary kernel instead of the
  /// congested one in the second step.
  bool sync_stationary_kernel = false;
};

struct BtWeightParams {
  double v_min = 5.0 * kKmh;
  double v_max = 130.0 * kKmh;
  double gamma = 500000.0;  // m*s

  void validate() const;
};

struct SectionAverageParams {
  double default_fill_speed = 100.0 * kKmh;
};

struct ReconstructionParams {
  SpeedClamp clamp;
  AdaptiveSmoothingParams adaptive;
  PsmParams psm;
  BtWeightParams bt;
  SectionAverageParams section;
};

}  // namespace trafusion

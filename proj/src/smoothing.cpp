#include "trafusion/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "trafusion/errors.hpp"

namespace trafusion {

namespace {

double kernel_exponent(const KernelParams& k, double dt, double dx) {
  const double shift = k.stationary ? 0.0 : dx / k.wave_speed;
  return -std::abs(dx) / k.sigma - std::abs(dt - shift) / k.tau;
}

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == kNegInf) return a;
  return a + std::log1p(std::exp(b - a));
}

// Exponentially discounted prefix and suffix sums along one data row, for the
// weights (den) and the weighted inverse speeds (num):
//   fwd[j] = sum_{b <= j} x_b e^{-(j-b) d},  bwd[j] = sum_{b >= j} x_b e^{-(b-j) d}
// with d = dt / tau. Along a row the kernel's time factor is a one-sided
// exponential on either side of the shifted centre, so these give the exact
// contribution of the whole row to any output cell in O(1).
struct RowSums {
  int i = 0;
  std::vector<double> fwd_den, fwd_num, bwd_den, bwd_num;
};

// Same recursions in log space, for cells whose linear sums underflow.
struct LogRowSums {
  int i = 0;
  std::vector<double> fwd_den, fwd_num, bwd_den, bwd_num;
};

struct RowOffset {
  double space;  // -|dx| / sigma
  double s;      // output column minus shift, relative to the output column
};

RowOffset row_offset(const GridSpec& spec, const KernelParams& k, int di) {
  const double dx = di * spec.dx();
  const double shift_cols = k.stationary ? 0.0 : dx / (k.wave_speed * spec.dt());
  return {-std::abs(dx) / k.sigma, -shift_cols};
}

}  // namespace

void KernelParams::validate() const {
  if (!(sigma > 0.0) || !(tau > 0.0)) {
    throw DomainError("kernel widths sigma and tau must be positive");
  }
  if (!stationary && !(wave_speed != 0.0 && std::isfinite(wave_speed))) {
    throw DomainError("non-stationary kernel needs a finite nonzero wave speed");
  }
}

double kernel_value(const KernelParams& k, double dt, double dx) {
  return std::exp(kernel_exponent(k, dt, dx));
}

SpeedField directional_smooth(const SpeedField& field, const KernelParams& k,
                              const SpeedClamp& clamp) {
  k.validate();
  const GridSpec& spec = field.spec();
  const int n_x = static_cast<int>(spec.n_x());
  const int n_t = static_cast<int>(spec.n_t());
  const double decay = spec.dt() / k.tau;
  const double step = std::exp(-decay);

  std::vector<RowSums> rows;
  for (int i = 0; i < n_x; ++i) {
    RowSums r;
    bool any = false;
    r.i = i;
    r.fwd_den.assign(n_t, 0.0);
    r.fwd_num.assign(n_t, 0.0);
    for (int j = 0; j < n_t; ++j) {
      const double w = field.weight(i, j);
      if (w <= 0.0) continue;
      any = true;
      r.fwd_den[j] = w;
      r.fwd_num[j] = w / field.speed(i, j);
    }
    if (!any) continue;
    r.bwd_den = r.fwd_den;
    r.bwd_num = r.fwd_num;
    for (int j = 1; j < n_t; ++j) {
      r.fwd_den[j] += step * r.fwd_den[j - 1];
      r.fwd_num[j] += step * r.fwd_num[j - 1];
    }
    for (int j = n_t - 2; j >= 0; --j) {
      r.bwd_den[j] += step * r.bwd_den[j + 1];
      r.bwd_num[j] += step * r.bwd_num[j + 1];
    }
    rows.push_back(std::move(r));
  }
  if (rows.empty()) {
    throw NoDataError("directional_smooth: field holds no data");
  }

  Matrix num(spec.n_x(), spec.n_t());
  Matrix den(spec.n_x(), spec.n_t());
  for (int i = 0; i < n_x; ++i) {
    double* num_row = &num(i, 0);
    double* den_row = &den(i, 0);
    for (const auto& r : rows) {
      const RowOffset off = row_offset(spec, k, i - r.i);
      // Output column j pulls from shifted position j + off.s: columns up to
      // j + lo come from the forward sums, from j + lo + 1 on the backward.
      const double fl = std::floor(off.s);
      const int lo = static_cast<int>(fl);
      const double f_fwd = std::exp(off.space - (off.s - fl) * decay);
      const double f_bwd = std::exp(off.space - (fl + 1.0 - off.s) * decay);
      for (int j = 0; j < n_t; ++j) {
        const int jf = j + lo;
        const int jb = jf + 1;
        if (jf >= 0) {
          // Past the last column the forward sum keeps decaying.
          const int c = std::min(jf, n_t - 1);
          const double extra = jf > c ? std::exp(-(jf - c) * decay) : 1.0;
          den_row[j] += f_fwd * extra * r.fwd_den[c];
          num_row[j] += f_fwd * extra * r.fwd_num[c];
        }
        if (jb < n_t) {
          const int c = std::max(jb, 0);
          const double extra = jb < c ? std::exp(-(c - jb) * decay) : 1.0;
          den_row[j] += f_bwd * extra * r.bwd_den[c];
          num_row[j] += f_bwd * extra * r.bwd_num[c];
        }
      }
    }
  }

  Matrix values(spec.n_x(), spec.n_t());
  Matrix weights(spec.n_x(), spec.n_t());
  constexpr double kTiny = std::numeric_limits<double>::min();
  // Below this the linear sums may have dropped underflowed terms.
  constexpr double kLinearFloor = 1e-280;
  std::vector<LogRowSums> log_rows;
  for (int i = 0; i < n_x; ++i) {
    for (int j = 0; j < n_t; ++j) {
      if (den(i, j) > kLinearFloor && num(i, j) > kLinearFloor) {
        values(i, j) = clamp.apply(den(i, j) / num(i, j));
        weights(i, j) = std::clamp(den(i, j), kTiny, 1.0);
        continue;
      }
      // Underflow far from all data: redo this cell in log space.
      if (log_rows.empty()) {
        for (const auto& r : rows) {
          LogRowSums l{r.i, {}, {}, {}, {}};
          l.fwd_den.assign(n_t, kNegInf);
          l.fwd_num.assign(n_t, kNegInf);
          for (int b = 0; b < n_t; ++b) {
            const double w = field.weight(r.i, b);
            if (w <= 0.0) continue;
            l.fwd_den[b] = std::log(w);
            l.fwd_num[b] = std::log(w / field.speed(r.i, b));
          }
          l.bwd_den = l.fwd_den;
          l.bwd_num = l.fwd_num;
          for (int b = 1; b < n_t; ++b) {
            l.fwd_den[b] = log_add(l.fwd_den[b], l.fwd_den[b - 1] - decay);
            l.fwd_num[b] = log_add(l.fwd_num[b], l.fwd_num[b - 1] - decay);
          }
          for (int b = n_t - 2; b >= 0; --b) {
            l.bwd_den[b] = log_add(l.bwd_den[b], l.bwd_den[b + 1] - decay);
            l.bwd_num[b] = log_add(l.bwd_num[b], l.bwd_num[b + 1] - decay);
          }
          log_rows.push_back(std::move(l));
        }
      }
      double log_den = kNegInf;
      double log_num = kNegInf;
      for (const auto& l : log_rows) {
        const RowOffset off = row_offset(spec, k, i - l.i);
        const double s = j + off.s;
        const double fl = std::floor(s);
        if (fl >= 0.0) {
          const int c = static_cast<int>(std::min<double>(fl, n_t - 1));
          const double e = off.space - (s - c) * decay;
          log_den = log_add(log_den, l.fwd_den[c] + e);
          log_num = log_add(log_num, l.fwd_num[c] + e);
        }
        if (fl + 1.0 < n_t) {
          const int c = static_cast<int>(std::max<double>(fl + 1.0, 0.0));
          const double e = off.space - (c - s) * decay;
          log_den = log_add(log_den, l.bwd_den[c] + e);
          log_num = log_add(log_num, l.bwd_num[c] + e);
        }
      }
      values(i, j) = clamp.apply(std::exp(log_den - log_num));
      weights(i, j) = kTiny;
    }
  }
  return SpeedField(spec, std::move(values), std::move(weights));
}

double adaptive_weight(double v_cong, double v_free, double v_thr, double delta_v) {
  return 0.5 * (1.0 + std::tanh((v_thr - std::min(v_cong, v_free)) / delta_v));
}

WeightField adaptive_weight(const SpeedField& v_cong, const SpeedField& v_free, double v_thr,
                            double delta_v) {
  require_same_grid(v_cong.spec(), v_free.spec(), "adaptive_weight");
  if (!(delta_v > 0.0)) {
    throw DomainError("adaptive_weight: delta_v must be positive");
  }
  WeightField w(v_cong.spec());
  for (std::size_t i = 0; i < w.spec().n_x(); ++i) {
    for (std::size_t j = 0; j < w.spec().n_t(); ++j) {
      w(i, j) = adaptive_weight(v_cong.speed(i, j), v_free.speed(i, j), v_thr, delta_v);
    }
  }
  return w;
}

SpeedField asm_combine(const SpeedField& v_cong, const SpeedField& v_free, const WeightField& w,
                       bool inverse, const SpeedClamp& clamp) {
  require_same_grid(v_cong.spec(), v_free.spec(), "asm_combine");
  require_same_grid(v_cong.spec(), w.spec(), "asm_combine");
  const GridSpec& spec = v_cong.spec();
  Matrix values(spec.n_x(), spec.n_t());
  Matrix weights(spec.n_x(), spec.n_t());
  for (std::size_t i = 0; i < spec.n_x(); ++i) {
    for (std::size_t j = 0; j < spec.n_t(); ++j) {
      const double a = w(i, j);
      const double vc = v_cong.speed(i, j);
      const double vf = v_free.speed(i, j);
      double v;
      if (a >= 1.0) {
        v = vc;
      } else if (a <= 0.0) {
        v = vf;
      } else if (inverse) {
        v = 1.0 / (a / vc + (1.0 - a) / vf);
      } else {
        v = a * vc + (1.0 - a) * vf;
      }
      weights(i, j) = std::max(v_cong.weight(i, j), v_free.weight(i, j));
      values(i, j) = weights(i, j) > 0.0 ? clamp.apply(v) : 0.0;
    }
  }
  return SpeedField(spec, std::move(values), std::move(weights));
}

}  // namespace trafusion

#pragma once

// Discrete space-time domain and the speed-field container.
//
// Rows index space cells (i), columns index time cells (j). Every quantity is
// SI: metres, seconds, metres per second. Cells are half-open
// [x_min + i*dx, x_min + (i+1)*dx) x [t_min + j*dt, t_min + (j+1)*dt); the last
// row/column also owns the closing domain boundary.

#include <compare>
#include <cstddef>
#include <span>
#include <vector>

namespace trafusion {

/// One km/h expressed in m/s.
inline constexpr double kKmh = 1.0 / 3.6;

/// Admissible range of stored cell speeds.
struct SpeedClamp {
  double v_floor = 1.0 * kKmh;
  double v_ceil = 250.0 * kKmh;

  double apply(double v) const;
};

class GridSpec {
 public:
  GridSpec(double x_min, double x_max, double t_min, double t_max, double dx = 100.0,
           double dt = 60.0);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double t_min() const { return t_min_; }
  double t_max() const { return t_max_; }
  double dx() const { return dx_; }
  double dt() const { return dt_; }
  std::size_t n_x() const { return n_x_; }
  std::size_t n_t() const { return n_t_; }
  std::size_t cell_count() const { return n_x_ * n_t_; }

  double x_lower(std::size_t i) const { return x_min_ + static_cast<double>(i) * dx_; }
  double t_lower(std::size_t j) const { return t_min_ + static_cast<double>(j) * dt_; }
  double x_center(std::size_t i) const { return x_lower(i) + 0.5 * dx_; }
  double t_center(std::size_t j) const { return t_lower(j) + 0.5 * dt_; }

  bool contains(double t, double x) const {
    return t >= t_min_ && t <= t_max_ && x >= x_min_ && x <= x_max_;
  }

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

 private:
  double x_min_;
  double x_max_;
  double t_min_;
  double t_max_;
  double dx_;
  double dt_;
  std::size_t n_x_;
  std::size_t n_t_;
};

struct CellIndex {
  std::size_t row = 0;  // space
  std::size_t col = 0;  // time

  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Maps a point of the domain onto its cell. Throws DomainError outside.
CellIndex cell_index(const GridSpec& spec, double t, double x);

/// Row index of position x, floor semantics with the closing boundary clamped
/// inward. No domain check.
std::size_t row_of(const GridSpec& spec, double x);
std::size_t col_of(const GridSpec& spec, double t);

/// Dense row-major n_x by n_t matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Per-cell dimensionless weights on a grid (0 = no data / no trust).
class WeightField {
 public:
  explicit WeightField(const GridSpec& spec, double fill = 0.0)
      : spec_(spec), values_(spec.n_x(), spec.n_t(), fill) {}
  WeightField(const GridSpec& spec, Matrix values);

  const GridSpec& spec() const { return spec_; }
  const Matrix& values() const { return values_; }
  Matrix& values() { return values_; }
  double operator()(std::size_t i, std::size_t j) const { return values_(i, j); }
  double& operator()(std::size_t i, std::size_t j) { return values_(i, j); }

 private:
  GridSpec spec_;
  Matrix values_;
};

/// Cell speeds plus per-cell trust. Immutable once built.
///
/// Cells with weight 0 carry no data and store speed 0. Cells with weight > 0
/// hold a finite speed inside the clamp used to build them.
class SpeedField {
 public:
  /// Field with no data anywhere.
  explicit SpeedField(const GridSpec& spec);
  SpeedField(const GridSpec& spec, Matrix values, Matrix weights);

  static SpeedField constant(const GridSpec& spec, double speed, double weight = 1.0);

  const GridSpec& spec() const { return spec_; }
  const Matrix& values() const { return values_; }
  const Matrix& weights() const { return weights_; }

  double speed(std::size_t i, std::size_t j) const { return values_(i, j); }
  double weight(std::size_t i, std::size_t j) const { return weights_(i, j); }
  bool has_data(std::size_t i, std::size_t j) const { return weights_(i, j) > 0.0; }

  std::size_t data_cell_count() const;
  bool empty() const { return data_cell_count() == 0; }
  bool fully_filled() const { return data_cell_count() == spec_.cell_count(); }

  /// Weight matrix as a standalone weight field.
  WeightField weight_field() const { return WeightField(spec_, weights_); }

 private:
  GridSpec spec_;
  Matrix values_;
  Matrix weights_;
};

/// Weighted harmonic mean (sum w) / (sum w/v).
///
/// Throws NoDataError when no weight is positive, DomainError on a
/// nonpositive speed or a negative weight.
double harmonic_mean(std::span<const double> speeds, std::span<const double> weights);

/// Order-independent cell-wise harmonic aggregation.
///
/// Accumulates (sum w, sum w/v, max w) per cell so that contributions may be
/// added in any order.
class HarmonicAccumulator {
 public:
  enum class WeightRule {
    unit,        // weight 1 wherever data exists
    max_source,  // max over contribution weights, capped at 1
  };

  explicit HarmonicAccumulator(const GridSpec& spec);

  /// Adds speed v with weight w to cell (i,j). Speeds are clamped first;
  /// w <= 0 contributes nothing.
  void add(std::size_t i, std::size_t j, double v, double w, const SpeedClamp& clamp);

  SpeedField finish(WeightRule rule, const SpeedClamp& clamp) const;

 private:
  GridSpec spec_;
  Matrix sum_w_;
  Matrix sum_w_over_v_;
  Matrix max_w_;
};

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what);

}  // namespace trafusion

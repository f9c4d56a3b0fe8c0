#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "swsr/errors.hpp"

namespace swsr {

/// Dense row-major 2D array of doubles. Rows index latitude (south to
/// north), columns index longitude.
class Field2 {
 public:
  Field2() = default;
  Field2(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }

  double& operator()(int j, int i) { return data_[static_cast<size_t>(j) * cols_ + i]; }
  double operator()(int j, int i) const { return data_[static_cast<size_t>(j) * cols_ + i]; }

  double* row(int j) { return data_.data() + static_cast<size_t>(j) * cols_; }
  const double* row(int j) const { return data_.data() + static_cast<size_t>(j) * cols_; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool same_shape(const Field2& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  void fill(double v) { data_.assign(data_.size(), v); }

  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  bool operator==(const Field2& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

/// y += a*x, elementwise over same-shape fields.
inline void axpy(double a, const Field2& x, Field2& y) {
  if (!x.same_shape(y)) throw ShapeError("axpy: shape mismatch");
  const double* px = x.data();
  double* py = y.data();
  const size_t n = x.size();
  for (size_t k = 0; k < n; ++k) py[k] += a * px[k];
}

/// out = x + a*y.
inline void add_scaled(const Field2& x, double a, const Field2& y, Field2& out) {
  if (!x.same_shape(y) || !x.same_shape(out)) throw ShapeError("add_scaled: shape mismatch");
  const double* px = x.data();
  const double* py = y.data();
  double* po = out.data();
  const size_t n = x.size();
  for (size_t k = 0; k < n; ++k) po[k] = px[k] + a * py[k];
}

/// Compensated (Kahan) summation; keeps conservation sums accurate at
/// 1e-12 relative on 1e5-element grids.
class KahanSum {
 public:
  void add(double v) {
    double y = v - c_;
    double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

}  // namespace swsr

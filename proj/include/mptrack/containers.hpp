#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "mptrack/complexnum.hpp"
#include "mptrack/precision.hpp"

namespace mptrack {

/// Dense complex vector; all entries share one precision level.
class MpVector {
 public:
  MpVector() = default;

  explicit MpVector(std::size_t n, PrecisionLevel level = PrecisionLevel())
      : level_(level), data_(n, MpComplex(level)) {}

  std::size_t size() const { return data_.size(); }
  PrecisionLevel level() const { return level_; }

  const MpComplex& operator[](std::size_t i) const { return data_[i]; }

  void set(std::size_t i, const MpComplex& v) { data_[i] = v.with_precision(level_); }

  MpVector with_precision(PrecisionLevel level) const {
    MpVector r(size(), level);
    for (std::size_t i = 0; i < size(); ++i) r.data_[i] = data_[i].with_precision(level);
    return r;
  }

  friend MpVector operator+(const MpVector& a, const MpVector& b) {
    MpVector r(a.size(), std::max(a.level_, b.level_));
    for (std::size_t i = 0; i < a.size(); ++i) r.data_[i] = a.data_[i] + b.data_[i];
    return r;
  }

  friend MpVector operator-(const MpVector& a, const MpVector& b) {
    MpVector r(a.size(), std::max(a.level_, b.level_));
    for (std::size_t i = 0; i < a.size(); ++i) r.data_[i] = a.data_[i] - b.data_[i];
    return r;
  }

 private:
  PrecisionLevel level_;
  std::vector<MpComplex> data_;
};

/// max over entries of the Euclidean modulus; 0 for the empty vector.
inline double max_norm(const MpVector& v) {
  double m = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    double a = v[i].modulus_double();
    if (a > m) m = a;
  }
  return m;
}

/// Dense complex matrix, row-major, uniform precision level.
class MpMatrix {
 public:
  MpMatrix() = default;

  MpMatrix(std::size_t rows, std::size_t cols, PrecisionLevel level = PrecisionLevel())
      : rows_(rows), cols_(cols), level_(level), data_(rows * cols, MpComplex(level)) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  PrecisionLevel level() const { return level_; }

  const MpComplex& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  void set(std::size_t r, std::size_t c, const MpComplex& v) {
    data_[r * cols_ + c] = v.with_precision(level_);
  }

  MpMatrix with_precision(PrecisionLevel level) const {
    MpMatrix r(rows_, cols_, level);
    for (std::size_t i = 0; i < data_.size(); ++i) r.data_[i] = data_[i].with_precision(level);
    return r;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  PrecisionLevel level_;
  std::vector<MpComplex> data_;
};

inline double max_norm(const MpMatrix& a) {
  double m = 0.0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    for (std::size_t c = 0; c < a.cols(); ++c) {
      double v = a.at(r, c).modulus_double();
      if (v > m) m = v;
    }
  }
  return m;
}

}  // namespace mptrack

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hetgnn/types.hpp"

namespace hetgnn {

class Rng;

// Row-major dense matrix of Real. All kernels below use a fixed loop order so
// results are bit-identical across runs and across callers.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, Real fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Real> data);

  static DenseMatrix identity(std::size_t n);
  // Glorot-uniform initialisation.
  static DenseMatrix glorot(std::size_t rows, std::size_t cols, Rng& rng);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Real operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<Real> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<Real>& data() { return data_; }
  const std::vector<Real>& data() const { return data_; }

  void set_zero();
  bool all_finite() const;
  // max_ij |a_ij|
  Real max_abs() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

// out = a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// out = a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
// out = a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
// a += b (same shape)
void add_inplace(DenseMatrix& a, const DenseMatrix& b);
// max_ij |a_ij - b_ij|
Real max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

void require_shape(bool ok, const std::string& what);

}  // namespace hetgnn

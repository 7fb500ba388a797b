#include "hetgnn/dense.hpp"

#include <algorithm>
#include <cmath>

#include "hetgnn/rng.hpp"

namespace hetgnn {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<Real> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require_shape(data_.size() == rows_ * cols_, "DenseMatrix: data length != rows*cols");
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  const Real limit = std::sqrt(6.0 / static_cast<Real>(rows + cols));
  for (Real& x : m.data_) x = (2.0 * rng.uniform() - 1.0) * limit;
  return m;
}

void DenseMatrix::set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

bool DenseMatrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](Real x) { return std::isfinite(x); });
}

Real DenseMatrix::max_abs() const {
  Real m = 0.0;
  for (Real x : data_) m = std::max(m, std::abs(x));
  return m;
}

void require_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.cols() == b.rows(), "matmul: inner dimensions differ");
  DenseMatrix out(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    Real* o = out.data().data() + i * n;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const Real aik = a(i, k);
      if (aik == 0.0) continue;
      const Real* brow = b.data().data() + k * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += aik * brow[j];
    }
  }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.rows() == b.rows(), "matmul_tn: row counts differ");
  DenseMatrix out(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const Real* brow = b.data().data() + r * n;
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const Real ari = a(r, i);
      if (ari == 0.0) continue;
      Real* o = out.data().data() + i * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += ari * brow[j];
    }
  }
  return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.cols() == b.cols(), "matmul_nt: column counts differ");
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const Real* arow = a.data().data() + i * a.cols();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const Real* brow = b.data().data() + j * b.cols();
      Real s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += arow[k] * brow[k];
      out(i, j) = s;
    }
  }
  return out;
}

void add_inplace(DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add_inplace: shape mismatch");
  for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

Real max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "max_abs_diff: shape mismatch");
  Real m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace hetgnn

#include "emview/linalg.hpp"

#include <cmath>
#include <string>

#include "emview/error.hpp"

namespace emview {

namespace {

void require_same_size(std::size_t a, std::size_t b, const char* op) {
  if (a != b) {
    fail(ErrorCode::DimensionMismatch, std::string(op) + ": vector lengths " + std::to_string(a) +
                                           " and " + std::to_string(b) + " differ");
  }
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorCode::DimensionMismatch,
         std::string(op) + ": matrix shapes " + std::to_string(a.rows()) + "x" +
             std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
             std::to_string(b.cols()) + " differ");
  }
}

}  // namespace

DenseVector& DenseVector::operator+=(const DenseVector& other) {
  require_same_size(size(), other.size(), "vector add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseVector& DenseVector::operator-=(const DenseVector& other) {
  require_same_size(size(), other.size(), "vector sub");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

DenseVector& DenseVector::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

bool DenseVector::all_finite() const noexcept {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) fail(ErrorCode::DimensionMismatch, "ragged matrix literal");
    data_.insert(data_.end(), row.begin(), row.end());
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(const DenseVector& diag) {
  DenseMatrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
  require_same_shape(*this, other, "matrix add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
  require_same_shape(*this, other, "matrix sub");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (double& x : data_) x *= s;
  return *this;
}

double DenseMatrix::trace() const {
  double t = 0.0;
  for (std::size_t i = 0; i < rows_ && i < cols_; ++i) t += (*this)(i, i);
  return t;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

bool DenseMatrix::all_finite() const noexcept {
  for (double x : data_)
    if (!std::isfinite(x)) return false;
  return true;
}

double DenseMatrix::asymmetry() const {
  if (!square()) return INFINITY;
  double worst = 0.0;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = r + 1; c < cols_; ++c)
      worst = std::max(worst, std::abs((*this)(r, c) - (*this)(c, r)));
  return worst;
}

double dot(const DenseVector& a, const DenseVector& b) {
  require_same_size(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

DenseVector scale(double s, const DenseVector& v) {
  DenseVector out = v;
  out *= s;
  return out;
}

DenseMatrix scale(double s, const DenseMatrix& m) {
  DenseMatrix out = m;
  out *= s;
  return out;
}

DenseVector add(const DenseVector& a, const DenseVector& b) {
  DenseVector out = a;
  out += b;
  return out;
}

DenseVector sub(const DenseVector& a, const DenseVector& b) {
  DenseVector out = a;
  out -= b;
  return out;
}

DenseMatrix mat_add(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out = a;
  out += b;
  return out;
}

DenseMatrix mat_sub(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out = a;
  out -= b;
  return out;
}

DenseMatrix outer(const DenseVector& a, const DenseVector& b) {
  DenseMatrix m(a.size(), b.size());
  for (std::size_t r = 0; r < a.size(); ++r)
    for (std::size_t c = 0; c < b.size(); ++c) m(r, c) = a[r] * b[c];
  return m;
}

DenseMatrix mat_sub_outer(const DenseMatrix& a, const DenseVector& u) {
  if (a.rows() != u.size() || a.cols() != u.size()) {
    fail(ErrorCode::DimensionMismatch, "mat_sub_outer: matrix is not " +
                                           std::to_string(u.size()) + "x" +
                                           std::to_string(u.size()));
  }
  DenseMatrix out = a;
  add_outer(-1.0, u, out);
  return out;
}

DenseVector matvec(const DenseMatrix& m, const DenseVector& v) {
  require_same_size(m.cols(), v.size(), "matvec");
  DenseVector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) s += m(r, c) * v[c];
    out[r] = s;
  }
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_size(a.cols(), b.rows(), "matmul");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double ark = a(r, k);
      for (std::size_t c = 0; c < b.cols(); ++c) out(r, c) += ark * b(k, c);
    }
  return out;
}

void axpy(double alpha, const DenseVector& x, DenseVector& y) {
  require_same_size(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void add_outer(double alpha, const DenseVector& x, DenseMatrix& m) {
  if (m.rows() != x.size() || m.cols() != x.size()) {
    fail(ErrorCode::DimensionMismatch, "add_outer: shape mismatch");
  }
  for (std::size_t r = 0; r < x.size(); ++r) {
    const double ax = alpha * x[r];
    for (std::size_t c = 0; c < x.size(); ++c) m(r, c) += ax * x[c];
  }
}

double norm2(const DenseVector& v) { return std::sqrt(dot(v, v)); }

}  // namespace emview

#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace emview {

/// Dense real vector with value semantics.
class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  DenseVector(std::initializer_list<double> init) : data_(init) {}
  explicit DenseVector(std::vector<double> data) : data_(std::move(data)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> span() const noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  DenseVector& operator+=(const DenseVector& other);
  DenseVector& operator-=(const DenseVector& other);
  DenseVector& operator*=(double s);

  bool all_finite() const noexcept;

  friend bool operator==(const DenseVector&, const DenseVector&) = default;

 private:
  std::vector<double> data_;
};

/// Dense row-major real matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(const DenseVector& diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<const double> span() const noexcept { return data_; }

  DenseMatrix& operator+=(const DenseMatrix& other);
  DenseMatrix& operator-=(const DenseMatrix& other);
  DenseMatrix& operator*=(double s);

  double trace() const;
  DenseMatrix transpose() const;
  bool all_finite() const noexcept;
  /// Max absolute difference between the matrix and its transpose.
  double asymmetry() const;

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

double dot(const DenseVector& a, const DenseVector& b);
DenseVector scale(double s, const DenseVector& v);
DenseMatrix scale(double s, const DenseMatrix& m);
DenseVector add(const DenseVector& a, const DenseVector& b);
DenseVector sub(const DenseVector& a, const DenseVector& b);
DenseMatrix mat_add(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix mat_sub(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix outer(const DenseVector& a, const DenseVector& b);
/// a - u uᵀ, the covariance-from-moments correction.
DenseMatrix mat_sub_outer(const DenseMatrix& a, const DenseVector& u);
DenseVector matvec(const DenseMatrix& m, const DenseVector& v);
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);

/// y += alpha * x
void axpy(double alpha, const DenseVector& x, DenseVector& y);
/// m += alpha * x xᵀ
void add_outer(double alpha, const DenseVector& x, DenseMatrix& m);

double norm2(const DenseVector& v);

}  // namespace emview

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace fedctr {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles. The single numeric currency of the
/// whole framework: embeddings, parameter blocks, gradients and message
/// payloads are all Matrix (or Vector) values.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Matrix row_vector(const Vector& v);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  Vector row_copy(std::size_t i) const;

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  void fill(double v);
  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  bool is_finite() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator*=(double s);

  friend bool operator==(const Matrix& a, const Matrix& b) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Matrix products. Shapes are validated; a mismatch throws std::invalid_argument.
Matrix matmul(const Matrix& a, const Matrix& b);         // (m,k)x(k,n)
Matrix matmul_transa(const Matrix& a, const Matrix& b);  // a^T b: (k,m)^T x (k,n)
Matrix matmul_transb(const Matrix& a, const Matrix& b);  // a b^T: (m,k) x (n,k)^T

Vector matvec(const Matrix& a, const Vector& x);         // (m,n)(n) -> m
Vector matvec_transa(const Matrix& a, const Vector& x);  // (m,n)^T (m) -> n

double dot(std::span<const double> a, std::span<const double> b);
double norm_l2(std::span<const double> a);
void axpy(double alpha, std::span<const double> x, std::span<double> y);  // y += alpha*x
Vector scaled(const Vector& v, double s);
Vector add(const Vector& a, const Vector& b);

/// In-place softmax with max-subtraction for stability.
void softmax_inplace(std::span<double> v);

/// Backward of y = softmax(s): returns ds from (y, dy).
Vector softmax_backward(std::span<const double> y, std::span<const double> dy);

void require_finite(const Matrix& m, const std::string& what);

}  // namespace fedctr

#include "fedctr/nn/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedctr {

namespace {
[[noreturn]] void shape_error(const std::string& op, const Matrix& a, const Matrix& b) {
  throw std::invalid_argument(op + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                              std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                              std::to_string(b.cols()) + ")");
}
}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw std::invalid_argument("Matrix: data length " + std::to_string(data_.size()) +
                                " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != m.cols_) throw std::invalid_argument("Matrix::from_rows: ragged rows");
    std::copy(r.begin(), r.end(), m.data_.begin() + i * m.cols_);
    ++i;
  }
  return m;
}

Matrix Matrix::row_vector(const Vector& v) { return Matrix(1, v.size(), v); }

Vector Matrix::row_copy(std::size_t i) const {
  auto r = row(i);
  return Vector(r.begin(), r.end());
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::is_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (!same_shape(o)) shape_error("Matrix::operator+=", *this, o);
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  Matrix c(a.rows(), b.cols());
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.data() + i * k;
    double* crow = c.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = arow[p];
      if (av == 0.0) continue;
      const double* brow = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Matrix matmul_transa(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) shape_error("matmul_transa", a, b);
  const std::size_t k = a.rows(), m = a.cols(), n = b.cols();
  Matrix c(m, n);
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a.data() + p * m;
    const double* brow = b.data() + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double av = arow[i];
      if (av == 0.0) continue;
      double* crow = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
  return c;
}

Matrix matmul_transb(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) shape_error("matmul_transb", a, b);
  const std::size_t m = a.rows(), k = a.cols(), n = b.rows();
  Matrix c(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a.data() + i * k;
    double* crow = c.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) crow[j] = dot({arow, k}, b.row(j));
  }
  return c;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (a.cols() != x.size()) {
    throw std::invalid_argument("matvec: " + std::to_string(a.cols()) +
                                " cols vs vector of length " + std::to_string(x.size()));
  }
  Vector y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = dot(a.row(i), x);
  return y;
}

Vector matvec_transa(const Matrix& a, const Vector& x) {
  if (a.rows() != x.size()) {
    throw std::invalid_argument("matvec_transa: " + std::to_string(a.rows()) +
                                " rows vs vector of length " + std::to_string(x.size()));
  }
  Vector y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) axpy(x[i], a.row(i), y);
  return y;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("dot: lengths " + std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm_l2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

Vector scaled(const Vector& v, double s) {
  Vector r(v);
  for (double& x : r) x *= s;
  return r;
}

Vector add(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("add: length mismatch");
  Vector r(a);
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += b[i];
  return r;
}

void softmax_inplace(std::span<double> v) {
  if (v.empty()) throw std::invalid_argument("softmax: empty input");
  const double mx = *std::max_element(v.begin(), v.end());
  double z = 0.0;
  for (double& x : v) {
    x = std::exp(x - mx);
    z += x;
  }
  for (double& x : v) x /= z;
}

Vector softmax_backward(std::span<const double> y, std::span<const double> dy) {
  if (y.size() != dy.size()) throw std::invalid_argument("softmax_backward: length mismatch");
  double inner = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) inner += y[i] * dy[i];
  Vector ds(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ds[i] = y[i] * (dy[i] - inner);
  return ds;
}

void require_finite(const Matrix& m, const std::string& what) {
  if (!m.is_finite()) throw std::runtime_error(what + ": non-finite entries");
}

}  // namespace fedctr

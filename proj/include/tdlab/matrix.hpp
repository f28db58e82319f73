#pragma once
// Dense real matrix kernel for small problems (the workloads here stay in the
// tens of rows; nothing is blocked or vectorized on purpose). Row-major
// storage. Shape errors throw MatrixError naming the operation and the
// offending dimensions; a singular pivot throws SingularMatrix carrying the
// pivot magnitude. Overflow to non-finite entries is deliberately NOT an
// error: divergent iterates are a first-class result and are detected by the
// caller via all_finite().

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdlab/numeric.hpp"

namespace tdlab {

struct MatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrix : MatrixError {
  double pivot;
  SingularMatrix(const std::string& what, double pivot_magnitude)
      : MatrixError(what), pivot(pivot_magnitude) {}
};

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols, 0.0) {}
  Matrix(int rows, int cols, std::vector<double> data)
      : rows_(rows), cols_(cols), a_(std::move(data)) {
    if (a_.size() != static_cast<size_t>(rows) * cols)
      throw MatrixError("Matrix: data size does not match " +
                        std::to_string(rows) + "x" + std::to_string(cols));
  }

  static Matrix identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
  static Matrix diag(const std::vector<double>& d) {
    Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
    for (int i = 0; i < m.rows(); ++i) m(i, i) = d[i];
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }
  const std::vector<double>& data() const { return a_; }
  std::vector<double>& data() { return a_; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline Matrix mat_mul(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.rows())
    throw MatrixError("mat_mul: dimension mismatch " + shape_str(x) + " * " +
                      shape_str(y));
  Matrix out(x.rows(), y.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int k = 0; k < x.cols(); ++k) {
      double xv = x(i, k);
      if (xv == 0.0) continue;
      for (int j = 0; j < y.cols(); ++j) out(i, j) += xv * y(k, j);
    }
  return out;
}

inline Matrix mat_add(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw MatrixError("mat_add: dimension mismatch " + shape_str(x) + " + " +
                      shape_str(y));
  Matrix out = x;
  for (size_t i = 0; i < out.data().size(); ++i) out.data()[i] += y.data()[i];
  return out;
}

inline Matrix mat_sub(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw MatrixError("mat_sub: dimension mismatch " + shape_str(x) + " - " +
                      shape_str(y));
  Matrix out = x;
  for (size_t i = 0; i < out.data().size(); ++i) out.data()[i] -= y.data()[i];
  return out;
}

inline Matrix mat_scale(const Matrix& x, double c) {
  Matrix out = x;
  for (double& v : out.data()) v *= c;
  return out;
}

inline Matrix transpose(const Matrix& x) {
  Matrix out(x.cols(), x.rows());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) out(j, i) = x(i, j);
  return out;
}

inline std::vector<double> mat_vec(const Matrix& x, const std::vector<double>& v) {
  if (x.cols() != static_cast<int>(v.size()))
    throw MatrixError("mat_vec: dimension mismatch " + shape_str(x) + " * vec" +
                      std::to_string(v.size()));
  std::vector<double> out(x.rows(), 0.0);
  for (int i = 0; i < x.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < x.cols(); ++j) s += x(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

inline double norm_inf(const Matrix& m) {
  double best = 0.0;
  for (int i = 0; i < m.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < m.cols(); ++j) row += std::abs(m(i, j));
    best = std::max(best, row);
  }
  return best;
}

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

inline double max_abs(const Matrix& m) {
  double best = 0.0;
  for (double v : m.data()) best = std::max(best, std::abs(v));
  return best;
}

inline double max_abs_diff(const Matrix& x, const Matrix& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols())
    throw MatrixError("max_abs_diff: dimension mismatch " + shape_str(x) +
                      " vs " + shape_str(y));
  double best = 0.0;
  for (size_t i = 0; i < x.data().size(); ++i)
    best = std::max(best, std::abs(x.data()[i] - y.data()[i]));
  return best;
}

inline bool all_finite(const Matrix& m) {
  for (double v : m.data())
    if (!std::isfinite(v)) return false;
  return true;
}

// Gauss-Jordan with partial pivoting. Pivot tolerance is relative to the
// largest input entry so uniformly scaled matrices behave identically.
inline Matrix mat_inverse(const Matrix& x) {
  if (x.rows() != x.cols())
    throw MatrixError("mat_inverse: matrix not square " + shape_str(x));
  int n = x.rows();
  double tiny = 1e-14 * std::max(1.0, max_abs(x));
  Matrix a = x;
  Matrix inv = Matrix::identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    double pval = a(piv, col);
    if (std::abs(pval) <= tiny)
      throw SingularMatrix("mat_inverse: singular " + shape_str(x) +
                               " matrix, pivot magnitude " +
                               std::to_string(std::abs(pval)) + " at column " +
                               std::to_string(col),
                           std::abs(pval));
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a(piv, j), a(col, j));
        std::swap(inv(piv, j), inv(col, j));
      }
    double s = 1.0 / a(col, col);
    for (int j = 0; j < n; ++j) {
      a(col, j) *= s;
      inv(col, j) *= s;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a(r, col);
      if (f == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a(r, j) -= f * a(col, j);
        inv(r, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

// Solve A X = B without forming the inverse (LU, partial pivot).
inline Matrix mat_solve(const Matrix& a_in, const Matrix& b_in) {
  if (a_in.rows() != a_in.cols())
    throw MatrixError("mat_solve: matrix not square " + shape_str(a_in));
  if (a_in.rows() != b_in.rows())
    throw MatrixError("mat_solve: dimension mismatch " + shape_str(a_in) +
                      " \\ " + shape_str(b_in));
  int n = a_in.rows(), m = b_in.cols();
  double tiny = 1e-14 * std::max(1.0, max_abs(a_in));
  Matrix a = a_in, b = b_in;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a(r, col)) > std::abs(a(piv, col))) piv = r;
    double pval = a(piv, col);
    if (std::abs(pval) <= tiny)
      throw SingularMatrix("mat_solve: singular " + shape_str(a_in) +
                               " matrix, pivot magnitude " +
                               std::to_string(std::abs(pval)) + " at column " +
                               std::to_string(col),
                           std::abs(pval));
    if (piv != col) {
      for (int j = col; j < n; ++j) std::swap(a(piv, j), a(col, j));
      for (int j = 0; j < m; ++j) std::swap(b(piv, j), b(col, j));
    }
    for (int r = col + 1; r < n; ++r) {
      double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      a(r, col) = 0.0;
      for (int j = col + 1; j < n; ++j) a(r, j) -= f * a(col, j);
      for (int j = 0; j < m; ++j) b(r, j) -= f * b(col, j);
    }
  }
  for (int col = n - 1; col >= 0; --col) {
    for (int j = 0; j < m; ++j) {
      double s = b(col, j);
      for (int k = col + 1; k < n; ++k) s -= a(col, k) * b(k, j);
      b(col, j) = s / a(col, col);
    }
  }
  return b;
}

inline std::vector<double> mat_solve_vec(const Matrix& a,
                                         const std::vector<double>& rhs) {
  Matrix b(static_cast<int>(rhs.size()), 1);
  for (size_t i = 0; i < rhs.size(); ++i) b(static_cast<int>(i), 0) = rhs[i];
  Matrix x = mat_solve(a, b);
  std::vector<double> out(rhs.size());
  for (size_t i = 0; i < rhs.size(); ++i) out[i] = x(static_cast<int>(i), 0);
  return out;
}

// Non-negative integer power by repeated squaring. Exponents in the tens of
// millions show up when an analytic iteration-count bound is used as a period,
// so linear-time powering is not an option. Overflow propagates as inf/nan.
inline Matrix mat_power(const Matrix& x, std::uint64_t k) {
  if (x.rows() != x.cols())
    throw MatrixError("mat_power: matrix not square " + shape_str(x));
  Matrix result = Matrix::identity(x.rows());
  Matrix base = x;
  while (k > 0) {
    if (k & 1) result = mat_mul(result, base);
    k >>= 1;
    if (k > 0) base = mat_mul(base, base);
  }
  return result;
}

// ---- small vector helpers (weights live in plain std::vector<double>) ----

inline std::vector<double> vec_add(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  return out;
}

inline std::vector<double> vec_sub(const std::vector<double>& a,
                                   const std::vector<double>& b) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline std::vector<double> vec_scale(const std::vector<double>& a, double c) {
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = c * a[i];
  return out;
}

inline double vec_norm2(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

inline double vec_norm_inf(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

}  // namespace tdlab

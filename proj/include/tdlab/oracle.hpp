#pragma once
// Brute-force reference computations used to cross-check the fast paths.
// Everything here is deliberately written from first principles: the naive
// product is a bare triple loop, the radius oracle is power iteration on
// shifted copies of the matrix, gradients come from central differences.
// None of it may call into the implementation it checks.

#include <complex>
#include <functional>
#include <vector>

#include "tdlab/matrix.hpp"

namespace tdlab::oracle {

inline Matrix naive_mul(const Matrix& x, const Matrix& y) {
  Matrix out(x.rows(), y.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < y.cols(); ++j) {
      double s = 0.0;
      for (int k = 0; k < x.cols(); ++k) s += x(i, k) * y(k, j);
      out(i, j) = s;
    }
  return out;
}

// max |(A * Ainv - I)_ij|, using the naive product.
inline double inverse_residual(const Matrix& a, const Matrix& ainv) {
  Matrix prod = naive_mul(a, ainv);
  double worst = 0.0;
  for (int i = 0; i < prod.rows(); ++i)
    for (int j = 0; j < prod.cols(); ++j)
      worst = std::max(worst,
                       std::abs(prod(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

// Spectral radius by power iteration on shifted matrices. A single power
// iteration cannot separate a conjugate pair (equal moduli), so the matrix is
// shifted by c*e^{i psi} for a fan of directions psi; for each shift the
// iteration converges to the eigenvalue maximizing |lambda + shift|, the
// shift is subtracted back out, and the largest modulus over the fan is the
// radius. The eigenvalue of largest modulus wins the direction aligned with
// its own argument (with a healthy convergence ratio), so the fan always
// recovers it. Directions where the iteration has not actually converged to
// an eigenvector are rejected via the residual ||Bx - lambda x||; otherwise a
// half-converged Rayleigh quotient sitting between two eigenvalues could
// overshoot the radius.
inline double power_radius(const Matrix& m, int directions = 24,
                           int iters = 2000) {
  int n = m.rows();
  if (n == 0) return 0.0;
  using cd = std::complex<double>;
  double c = 0.0;
  for (double v : m.data()) c += v * v;
  c = std::sqrt(c) + 1.0;  // shift magnitude on the scale of the matrix
  double best = 0.0, best_unconverged = 0.0;
  bool any = false;
  for (int d = 0; d < directions; ++d) {
    double psi = 2.0 * 3.14159265358979323846 * d / directions;
    cd shift = c * cd(std::cos(psi), std::sin(psi));
    std::vector<cd> x(n);
    for (int i = 0; i < n; ++i)
      x[i] = cd(1.0 + 0.1 * i, 0.3 + 0.05 * ((i * 7) % 5));
    double nx = 0.0;
    for (const cd& e : x) nx += std::norm(e);
    nx = std::sqrt(nx);
    for (cd& e : x) e /= nx;
    cd rayleigh(0, 0);
    bool converged = false;
    for (int it = 0; it < iters; ++it) {
      std::vector<cd> y(n, cd(0, 0));
      for (int i = 0; i < n; ++i) {
        cd s = shift * x[i];
        for (int j = 0; j < n; ++j) s += m(i, j) * x[j];
        y[i] = s;
      }
      cd num(0, 0);
      for (int i = 0; i < n; ++i) num += std::conj(x[i]) * y[i];
      rayleigh = num;  // x has unit norm
      double res = 0.0;
      for (int i = 0; i < n; ++i) res += std::norm(y[i] - rayleigh * x[i]);
      if (std::sqrt(res) <= 1e-11 * c) {
        converged = true;
        break;
      }
      double ny = 0.0;
      for (const cd& e : y) ny += std::norm(e);
      ny = std::sqrt(ny);
      if (!(ny > 0.0) || !std::isfinite(ny)) break;
      for (int i = 0; i < n; ++i) x[i] = y[i] / ny;
    }
    double modulus = std::abs(rayleigh - shift);
    if (converged) {
      best = std::max(best, modulus);
      any = true;
    } else {
      best_unconverged = std::max(best_unconverged, modulus);
    }
  }
  return any ? best : best_unconverged;
}

// Spectral radius from the Gelfand formula rho = lim ||A^k||^(1/k), taken at
// k = 2^48 via normalized repeated squaring (own triple-loop product). The
// Frobenius norm dominates the radius, so the estimate approaches rho from
// above; at this k the bias (n-1)*ln(k)/k plus the bounded oscillation of the
// dominant block is far below 1e-9 relative. Complements power_radius, which
// approaches from below through genuine eigenvalues but can lose a tight
// modulus race between clustered eigenvalues.
inline double gelfand_radius(const Matrix& m, int squarings = 48) {
  int n = m.rows();
  if (n == 0) return 0.0;
  Matrix b = m;
  double log_acc = 0.0;
  double weight = 1.0;
  for (int j = 0; j < squarings; ++j) {
    double s = 0.0;
    for (double v : b.data()) s += v * v;
    s = std::sqrt(s);
    if (s == 0.0) return 0.0;  // nilpotent
    log_acc += weight * std::log(s);
    weight *= 0.5;
    Matrix scaled = b;
    for (double& v : scaled.data()) v /= s;
    b = naive_mul(scaled, scaled);
  }
  double s = 0.0;
  for (double v : b.data()) s += v * v;
  s = std::sqrt(s);
  if (s == 0.0) return 0.0;
  log_acc += weight * std::log(s);
  return std::exp(log_acc);
}

// Stationary distribution of a row-stochastic chain, found the slow sure way:
// inverse iteration on P^T near eigenvalue 1. The shift sits just off 1 so the
// shifted matrix stays invertible; three solves pin the eigenvector to machine
// precision. Deliberately avoids the power-iteration code path.
inline std::vector<double> stationary_by_inverse_iteration(const Matrix& p) {
  int n = p.rows();
  Matrix shifted = mat_sub(transpose(p), mat_scale(Matrix::identity(n),
                                                   1.0 + 1e-10));
  std::vector<double> x(n, 1.0 / n);
  for (int it = 0; it < 3; ++it) {
    x = mat_solve_vec(shifted, x);
    double nrm = vec_norm2(x);
    for (double& v : x) v /= nrm;
  }
  double sum = 0.0;
  for (double v : x) sum += v;
  for (double& v : x) v /= sum;
  return x;
}

// Discounted value of a fixed chain by truncated power series:
// sum_k gamma^k P^k R, cut when the geometric tail bound drops below tol.
inline std::vector<double> value_by_power_series(const Matrix& p,
                                                 const std::vector<double>& r,
                                                 double gamma,
                                                 double tol = 1e-12) {
  int n = p.rows();
  double rmax = 0.0;
  for (double v : r) rmax = std::max(rmax, std::abs(v));
  std::vector<double> q(r), term(r), next(n);
  double scale = 1.0;
  for (long k = 1; k < 100'000; ++k) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += p(i, j) * term[j];
      next[i] = acc;
    }
    term = next;
    scale *= gamma;
    for (int i = 0; i < n; ++i) q[i] += scale * term[i];
    if (scale * rmax / (1.0 - gamma) < tol) break;
  }
  return q;
}

// Central finite-difference gradient of a scalar function.
inline std::vector<double> central_diff_grad(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-6) {
  std::vector<double> g(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    double keep = x[i];
    x[i] = keep + h;
    double up = f(x);
    x[i] = keep - h;
    double down = f(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace tdlab::oracle

#pragma once
// Eigenvalue machinery for small dense matrices (n <= 64 is the design
// envelope). Dispatch:
//   n == 1, n == 2         closed form
//   exactly symmetric      cyclic Jacobi (real spectrum, no imaginary noise)
//   general                complex Householder Hessenberg reduction followed
//                          by explicit Wilkinson-shifted QR with deflation
// Real inputs get their spectra snapped to exact conjugate closure afterwards;
// the QR sweep itself works in complex arithmetic and only delivers pairs up
// to roundoff.

#include <complex>
#include <cstdint>
#include <vector>

#include "tdlab/matrix.hpp"

namespace tdlab {

using cd = std::complex<double>;

struct Spectrum {
  std::vector<cd> eigenvalues;  // sorted by (|z| desc, Re desc, Im desc)
  double radius = 0.0;          // max |z|
};

namespace detail {

class CMatrix {
 public:
  CMatrix() = default;
  CMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows) * cols) {}
  explicit CMatrix(const Matrix& m) : CMatrix(m.rows(), m.cols()) {
    for (int i = 0; i < rows_; ++i)
      for (int j = 0; j < cols_; ++j) (*this)(i, j) = m(i, j);
  }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  cd& operator()(int i, int j) { return a_[static_cast<size_t>(i) * cols_ + j]; }
  cd operator()(int i, int j) const { return a_[static_cast<size_t>(i) * cols_ + j]; }

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<cd> a_;
};

// Cyclic Jacobi for symmetric input. Returns the diagonal after convergence.
inline std::vector<double> jacobi_eigenvalues(const Matrix& m) {
  int n = m.rows();
  Matrix a = m;
  double scale = std::max(1.0, frobenius_norm(a));
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-14 * scale) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (int k = 0; k < n; ++k) {
          double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(i, i);
  return eig;
}

inline bool exactly_symmetric(const Matrix& m) {
  if (m.rows() != m.cols()) return false;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != m(j, i)) return false;
  return true;
}

// Householder reduction to upper Hessenberg form, complex arithmetic.
inline void hessenberg(CMatrix& h) {
  int n = h.rows();
  for (int k = 0; k + 2 < n; ++k) {
    double xnorm = 0.0;
    for (int i = k + 1; i < n; ++i) xnorm += std::norm(h(i, k));
    xnorm = std::sqrt(xnorm);
    if (xnorm <= 1e-300) continue;
    cd x0 = h(k + 1, k);
    cd alpha = (std::abs(x0) > 0.0) ? -(x0 / std::abs(x0)) * xnorm : cd(-xnorm, 0);
    std::vector<cd> v(n, cd(0, 0));
    for (int i = k + 1; i < n; ++i) v[i] = h(i, k);
    v[k + 1] -= alpha;
    double vnorm = 0.0;
    for (int i = k + 1; i < n; ++i) vnorm += std::norm(v[i]);
    vnorm = std::sqrt(vnorm);
    if (vnorm <= 1e-300) continue;
    for (int i = k + 1; i < n; ++i) v[i] /= vnorm;
    // left: H -= 2 v (v^H H)
    for (int j = k; j < n; ++j) {
      cd dot(0, 0);
      for (int i = k + 1; i < n; ++i) dot += std::conj(v[i]) * h(i, j);
      dot *= 2.0;
      for (int i = k + 1; i < n; ++i) h(i, j) -= dot * v[i];
    }
    // right: H -= 2 (H v) v^H
    for (int i = 0; i < n; ++i) {
      cd dot(0, 0);
      for (int j = k + 1; j < n; ++j) dot += h(i, j) * v[j];
      dot *= 2.0;
      for (int j = k + 1; j < n; ++j) h(i, j) -= dot * std::conj(v[j]);
    }
    h(k + 1, k) = alpha;
    for (int i = k + 2; i < n; ++i) h(i, k) = cd(0, 0);
  }
}

// Unitary 2x2 rotation [[c, s], [-conj(s), c]] (c real) with G [a; b] = [r; 0].
struct Givens {
  double c = 1.0;
  cd s{0, 0};
};

inline Givens make_givens(cd a, cd b) {
  Givens g;
  double aa = std::abs(a), bb = std::abs(b);
  double r = std::hypot(aa, bb);
  if (r <= 1e-300 || bb == 0.0) return g;  // identity
  if (aa == 0.0) {
    g.c = 0.0;
    g.s = std::conj(b) / bb;
    return g;
  }
  g.c = aa / r;
  g.s = (a / aa) * std::conj(b) / r;
  return g;
}

// Eigenvalues of a complex 2x2.
inline std::pair<cd, cd> eig2(cd a, cd b, cd c, cd d) {
  cd half = (a + d) * 0.5;
  cd disc = std::sqrt(half * half - (a * d - b * c));
  return {half + disc, half - disc};
}

// Explicit single-shift QR sweeps with deflation on an upper Hessenberg
// complex matrix. Appends eigenvalues to `out`.
inline void hessenberg_qr(CMatrix& h, std::vector<cd>& out) {
  int n = h.rows();
  double hnorm = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) hnorm = std::max(hnorm, std::abs(h(i, j)));
  hnorm = std::max(hnorm, 1e-300);
  const double rel = 1e-15;
  int hi = n - 1;
  int iters = 0;
  while (hi >= 0) {
    if (hi == 0) {
      out.push_back(h(0, 0));
      --hi;
      continue;
    }
    // deflation scan: lo = start of the active block ending at hi
    int lo = hi;
    while (lo > 0) {
      double sub = std::abs(h(lo, lo - 1));
      double ref = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
      if (ref == 0.0) ref = hnorm;
      if (sub <= rel * ref) {
        h(lo, lo - 1) = cd(0, 0);
        break;
      }
      --lo;
    }
    if (lo == hi) {
      out.push_back(h(hi, hi));
      --hi;
      iters = 0;
      continue;
    }
    if (++iters > 40 * n)
      throw MatrixError("spectrum: QR iteration failed to converge for " +
                        std::to_string(n) + "x" + std::to_string(n) +
                        " matrix");
    // Wilkinson shift from the trailing 2x2 of the active block; occasional
    // exceptional shift to break symmetric cycles.
    cd mu;
    if (iters % 16 == 0) {
      mu = h(hi, hi) + 0.75 * std::abs(h(hi, hi - 1));
    } else {
      auto [m1, m2] = eig2(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
      mu = (std::abs(m1 - h(hi, hi)) < std::abs(m2 - h(hi, hi))) ? m1 : m2;
    }
    // Explicit QR of (H - mu I) restricted to the active block, then RQ + mu I.
    std::vector<Givens> rots(hi - lo);
    for (int i = lo; i <= hi; ++i) h(i, i) -= mu;
    for (int k = lo; k < hi; ++k) {
      Givens g = make_givens(h(k, k), h(k + 1, k));
      rots[k - lo] = g;
      for (int j = k; j <= hi; ++j) {
        cd top = h(k, j), bot = h(k + 1, j);
        h(k, j) = g.c * top + g.s * bot;
        h(k + 1, j) = -std::conj(g.s) * top + g.c * bot;
      }
    }
    for (int k = lo; k < hi; ++k) {
      Givens g = rots[k - lo];
      int top_row = lo;
      for (int i = top_row; i <= std::min(k + 1, hi); ++i) {
        cd left = h(i, k), right = h(i, k + 1);
        h(i, k) = g.c * left + std::conj(g.s) * right;
        h(i, k + 1) = -g.s * left + g.c * right;
      }
    }
    for (int i = lo; i <= hi; ++i) h(i, i) += mu;
  }
}

// Snap the spectrum of a real matrix to exact conjugate closure: pair each
// eigenvalue of positive imaginary part with its best mirror and average.
inline void symmetrize_conjugates(std::vector<cd>& eig, double scale) {
  double im_zero = 1e-11 * scale;
  double pair_tol = 1e-6 * scale;
  for (auto& z : eig)
    if (std::abs(z.imag()) <= im_zero) z = cd(z.real(), 0.0);
  std::vector<int> used(eig.size(), 0);
  for (size_t i = 0; i < eig.size(); ++i) {
    if (used[i] || eig[i].imag() <= 0.0) continue;
    int best = -1;
    double best_d = pair_tol;
    for (size_t j = 0; j < eig.size(); ++j) {
      if (used[j] || i == j || eig[j].imag() >= 0.0) continue;
      double d = std::abs(eig[j] - std::conj(eig[i]));
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0) {
      cd avg = (eig[i] + std::conj(eig[best])) * 0.5;
      eig[i] = avg;
      eig[best] = std::conj(avg);
      used[i] = used[best] = 1;
    }
  }
}

inline void sort_spectrum(std::vector<cd>& eig) {
  std::sort(eig.begin(), eig.end(), [](const cd& x, const cd& y) {
    double ax = std::abs(x), ay = std::abs(y);
    if (ax != ay) return ax > ay;
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
}

}  // namespace detail

inline Spectrum spectrum(const Matrix& m) {
  if (m.rows() != m.cols())
    throw MatrixError("spectrum: matrix not square " + shape_str(m));
  if (!all_finite(m))
    throw MatrixError("spectrum: non-finite entries in " + shape_str(m) +
                      " matrix");
  int n = m.rows();
  Spectrum sp;
  if (n == 0) return sp;
  if (n == 1) {
    sp.eigenvalues = {cd(m(0, 0), 0)};
  } else if (n == 2) {
    auto [a, b] = detail::eig2(cd(m(0, 0), 0), cd(m(0, 1), 0), cd(m(1, 0), 0),
                               cd(m(1, 1), 0));
    sp.eigenvalues = {a, b};
  } else if (detail::exactly_symmetric(m)) {
    for (double v : detail::jacobi_eigenvalues(m))
      sp.eigenvalues.push_back(cd(v, 0));
  } else {
    detail::CMatrix h(m);
    detail::hessenberg(h);
    detail::hessenberg_qr(h, sp.eigenvalues);
  }
  double scale = 1.0;
  for (const cd& z : sp.eigenvalues) scale = std::max(scale, std::abs(z));
  detail::symmetrize_conjugates(sp.eigenvalues, scale);
  detail::sort_spectrum(sp.eigenvalues);
  sp.radius = sp.eigenvalues.empty() ? 0.0 : std::abs(sp.eigenvalues.front());
  return sp;
}

// Largest singular value. M^T M is symmetric PSD, so Jacobi gives the full
// spectrum reliably even with clustered singular values.
inline double spectral_norm(const Matrix& m) {
  if (!all_finite(m))
    throw MatrixError("spectral_norm: non-finite entries in " + shape_str(m) +
                      " matrix");
  Matrix b = mat_mul(transpose(m), m);
  double best = 0.0;
  for (double v : detail::jacobi_eigenvalues(b)) best = std::max(best, v);
  return std::sqrt(std::max(0.0, best));
}

namespace detail {

struct CLU {
  int n = 0;
  std::vector<cd> lu;
  std::vector<int> piv;
  bool ok = false;
};

inline CLU clu_factor(const CMatrix& a_in) {
  CLU f;
  f.n = a_in.rows();
  f.lu.resize(static_cast<size_t>(f.n) * f.n);
  f.piv.resize(f.n);
  for (int i = 0; i < f.n; ++i)
    for (int j = 0; j < f.n; ++j) f.lu[static_cast<size_t>(i) * f.n + j] = a_in(i, j);
  auto at = [&](int i, int j) -> cd& { return f.lu[static_cast<size_t>(i) * f.n + j]; };
  for (int col = 0; col < f.n; ++col) {
    int piv = col;
    for (int r = col + 1; r < f.n; ++r)
      if (std::abs(at(r, col)) > std::abs(at(piv, col))) piv = r;
    f.piv[col] = piv;
    if (std::abs(at(piv, col)) <= 1e-300) return f;  // ok stays false
    if (piv != col)
      for (int j = 0; j < f.n; ++j) std::swap(at(piv, j), at(col, j));
    for (int r = col + 1; r < f.n; ++r) {
      cd m = at(r, col) / at(col, col);
      at(r, col) = m;
      for (int j = col + 1; j < f.n; ++j) at(r, j) -= m * at(col, j);
    }
  }
  f.ok = true;
  return f;
}

inline std::vector<cd> clu_solve(const CLU& f, std::vector<cd> b) {
  auto at = [&](int i, int j) -> const cd& {
    return f.lu[static_cast<size_t>(i) * f.n + j];
  };
  for (int col = 0; col < f.n; ++col) {
    if (f.piv[col] != col) std::swap(b[f.piv[col]], b[col]);
    for (int r = col + 1; r < f.n; ++r) b[r] -= at(r, col) * b[col];
  }
  for (int col = f.n - 1; col >= 0; --col) {
    for (int k = col + 1; k < f.n; ++k) b[col] -= at(col, k) * b[k];
    b[col] /= at(col, col);
  }
  return b;
}

// Hermitian eigenvalues via the real symmetric embedding [[X, -Y], [Y, X]].
inline std::vector<double> hermitian_eigenvalues(const CMatrix& b) {
  int k = b.rows();
  Matrix e(2 * k, 2 * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      e(i, j) = b(i, j).real();
      e(i + k, j + k) = b(i, j).real();
      e(i, j + k) = -b(i, j).imag();
      e(i + k, j) = b(i, j).imag();
    }
  return jacobi_eigenvalues(e);
}

}  // namespace detail

// Spectral condition number of an eigenvector matrix of m. Eigenvalues are
// grouped into clusters; a cluster of size k contributes k inverse-iteration
// vectors orthogonalized within the cluster, which is a genuine eigenbasis
// exactly when the eigenspace has full dimension. Throws MatrixError if no
// complete basis can be extracted (defective matrix) so callers can surface
// "bound inapplicable".
inline double eigvec_condition(const Matrix& m) {
  Spectrum sp = spectrum(m);
  int n = m.rows();
  double scale = std::max(1.0, sp.radius);
  const double cluster_tol = 1e-8 * scale;

  std::vector<std::pair<cd, int>> clusters;  // representative, count
  for (const cd& z : sp.eigenvalues) {
    bool found = false;
    for (auto& c : clusters)
      if (std::abs(c.first - z) <= cluster_tol) {
        ++c.second;
        found = true;
        break;
      }
    if (!found) clusters.push_back({z, 1});
  }

  detail::CMatrix a(m);
  detail::CMatrix v(n, n);
  int col = 0;
  for (const auto& [rep, count] : clusters) {
    std::vector<std::vector<cd>> cluster_vecs;
    for (int j = 0; j < count; ++j) {
      bool accepted = false;
      for (int attempt = 0; attempt < 6 && !accepted; ++attempt) {
        cd shift = rep + cd(1e-12 * scale * (attempt + 1),
                            0.7e-12 * scale * (attempt + 1));
        detail::CMatrix shifted = a;
        for (int i = 0; i < n; ++i) shifted(i, i) -= shift;
        detail::CLU f = detail::clu_factor(shifted);
        if (!f.ok) continue;
        std::vector<cd> x(n);
        for (int i = 0; i < n; ++i)
          x[i] = cd(std::cos(0.7 * (i + 1) * (j + 2) + attempt),
                    std::sin(0.3 * (i + 1) * (j + 1) - attempt));
        for (int it = 0; it < 5; ++it) {
          x = detail::clu_solve(f, std::move(x));
          double nx = 0.0;
          for (const cd& e : x) nx += std::norm(e);
          nx = std::sqrt(nx);
          if (!(nx > 0) || !std::isfinite(nx)) break;
          for (cd& e : x) e /= nx;
        }
        // orthogonalize within the cluster
        for (const auto& u : cluster_vecs) {
          cd dot(0, 0);
          for (int i = 0; i < n; ++i) dot += std::conj(u[i]) * x[i];
          for (int i = 0; i < n; ++i) x[i] -= dot * u[i];
        }
        double nx = 0.0;
        for (const cd& e : x) nx += std::norm(e);
        nx = std::sqrt(nx);
        if (nx < 1e-4) continue;  // collapsed onto earlier vectors, retry
        for (cd& e : x) e /= nx;
        // residual ||A x - rep x||
        double res = 0.0;
        for (int i = 0; i < n; ++i) {
          cd r(0, 0);
          for (int k2 = 0; k2 < n; ++k2) r += a(i, k2) * x[k2];
          r -= rep * x[i];
          res += std::norm(r);
        }
        if (std::sqrt(res) > 1e-5 * scale) continue;
        cluster_vecs.push_back(x);
        accepted = true;
      }
      if (!accepted)
        throw MatrixError(
            "eigvec_condition: could not extract a complete eigenvector "
            "basis (defective or near-defective matrix)");
    }
    for (const auto& u : cluster_vecs) {
      for (int i = 0; i < n; ++i) v(i, col) = u[i];
      ++col;
    }
  }

  detail::CMatrix g(n, n);  // Gram matrix V^H V
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      cd dot(0, 0);
      for (int k = 0; k < n; ++k) dot += std::conj(v(k, i)) * v(k, j);
      g(i, j) = dot;
    }
  std::vector<double> ev = detail::hermitian_eigenvalues(g);
  double lo = ev[0], hi = ev[0];
  for (double e : ev) {
    lo = std::min(lo, e);
    hi = std::max(hi, e);
  }
  if (!(lo > 0))
    throw MatrixError(
        "eigvec_condition: eigenvector matrix numerically singular");
  return std::sqrt(hi / lo);
}

}  // namespace tdlab

#include "tdlab/spectrum.hpp"

#include <catch2/catch_amalgamated.hpp>
#include <complex>

#include "helpers.hpp"
#include "tdlab/oracle.hpp"

using namespace tdlab;

namespace {

// sorted-multiset comparison against expected eigenvalues
void check_spectrum(const Matrix& m, std::vector<cd> expected, double tol) {
  Spectrum sp = spectrum(m);
  REQUIRE(sp.eigenvalues.size() == expected.size());
  detail::sort_spectrum(expected);
  for (size_t i = 0; i < expected.size(); ++i) {
    INFO("eigenvalue " << i);
    CHECK(std::abs(sp.eigenvalues[i] - expected[i]) <= tol);
  }
}

}  // namespace

TEST_CASE("closed forms for 1x1 and 2x2") {
  check_spectrum(Matrix(1, 1, {3.0}), {cd(3, 0)}, 0.0);
  check_spectrum(Matrix(2, 2, {1, 4, 0, 2}), {cd(2, 0), cd(1, 0)}, 1e-14);
  // rotation-scale block: exact conjugate pair 0.3 +/- 0.4i, radius 0.5
  Matrix rot(2, 2, {0.3, -0.4, 0.4, 0.3});
  Spectrum sp = spectrum(rot);
  CHECK(std::abs(sp.radius - 0.5) < 1e-14);
  CHECK(sp.eigenvalues[0] == std::conj(sp.eigenvalues[1]));
  check_spectrum(rot, {cd(0.3, 0.4), cd(0.3, -0.4)}, 1e-14);
}

TEST_CASE("companion matrix of (x-2)(x+1)(x-1/2)") {
  // x^3 - 1.5 x^2 - 1.5 x + 1
  Matrix c(3, 3,
           {0, 0, -1,
            1, 0, 1.5,
            0, 1, 1.5});
  check_spectrum(c, {cd(2, 0), cd(-1, 0), cd(0.5, 0)}, 1e-10);
  CHECK(std::abs(spectrum(c).radius - 2.0) < 1e-10);
}

TEST_CASE("triangular 3x3 goes through the QR path") {
  Matrix t(3, 3, {1, 2, 3, 0, 2, 4, 0, 0, 3});
  check_spectrum(t, {cd(3, 0), cd(2, 0), cd(1, 0)}, 1e-10);
}

TEST_CASE("symmetric input: exact real spectrum") {
  check_spectrum(Matrix(2, 2, {2, 1, 1, 2}), {cd(3, 0), cd(1, 0)}, 1e-12);
  // char poly (2-l)(l-1)(l-4) up to sign: eigenvalues {4, 2, 1}
  Matrix s(3, 3, {2, 1, 0, 1, 3, 1, 0, 1, 2});
  Spectrum sp = spectrum(s);
  for (const cd& z : sp.eigenvalues) CHECK(z.imag() == 0.0);
  check_spectrum(s, {cd(4, 0), cd(2, 0), cd(1, 0)}, 1e-10);
}

TEST_CASE("dense 4x4 with known complex pair via similarity") {
  Matrix b(4, 4);
  b(0, 0) = 0.3; b(0, 1) = -0.4; b(1, 0) = 0.4; b(1, 1) = 0.3;
  b(2, 2) = 1.2; b(3, 3) = -0.7;
  std::mt19937_64 rng(42);
  Matrix s = testutil::random_matrix(rng, 4, 4);
  for (int i = 0; i < 4; ++i) s(i, i) += 2.0;
  Matrix a = mat_mul(s, mat_mul(b, mat_inverse(s)));
  check_spectrum(a, {cd(1.2, 0), cd(-0.7, 0), cd(0.3, 0.4), cd(0.3, -0.4)},
                 1e-9);
}

TEST_CASE("radius agrees with the shifted power-iteration oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = testutil::random_matrix(rng, 4, 4);
    double qr_radius = spectrum(a).radius;
    double pi_radius = oracle::power_radius(a);
    INFO("trial " << trial);
    CHECK(std::abs(qr_radius - pi_radius) < 1e-6);
  }
}

TEST_CASE("radius oracle agreement on larger sizes") {
  // dense random spectra cluster near the spectral edge, where the shifted
  // fan can lose a modulus race; the norm-powering oracle has no such mode
  std::mt19937_64 rng(8);
  for (int n : {8, 16, 33, 64}) {
    Matrix a = testutil::random_matrix(rng, n, n);
    INFO("n = " << n);
    CHECK(std::abs(spectrum(a).radius - oracle::gelfand_radius(a)) < 1e-6);
  }
}

TEST_CASE("the two radius oracles sandwich each other on 4x4") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix a = testutil::random_matrix(rng, 4, 4);
    double fan = oracle::power_radius(a);
    double norm_pow = oracle::gelfand_radius(a);
    CHECK(fan <= norm_pow + 1e-9);
    CHECK(std::abs(fan - norm_pow) < 1e-6);
  }
}

TEST_CASE("real input spectra are closed under conjugation") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 25; ++trial) {
    int n = 2 + static_cast<int>(rng() % 7);
    Matrix a = testutil::random_matrix(rng, n, n);
    Spectrum sp = spectrum(a);
    for (const cd& z : sp.eigenvalues) {
      if (z.imag() == 0.0) continue;
      bool found = false;
      for (const cd& w : sp.eigenvalues)
        if (w == std::conj(z)) found = true;
      INFO("trial " << trial << " eigenvalue " << z.real() << "+"
                    << z.imag() << "i");
      CHECK(found);
    }
  }
}

TEST_CASE("defective blocks stay within the problem's own conditioning") {
  // eigenvalue condition for a Jordan block is eps^(1/k); do not overclaim
  Matrix j(3, 3, {0.5, 1, 0, 0, 0.5, 1, 0, 0, 0.5});
  Spectrum sp = spectrum(j);
  REQUIRE(sp.eigenvalues.size() == 3);
  for (const cd& z : sp.eigenvalues) CHECK(std::abs(z - cd(0.5, 0)) < 1e-4);
  CHECK(std::abs(sp.radius - 0.5) < 1e-4);
}

TEST_CASE("non-finite input is rejected with a clear error") {
  Matrix a(2, 2, {1, 2, 3, std::numeric_limits<double>::infinity()});
  CHECK_THROWS_AS(spectrum(a), MatrixError);
}

TEST_CASE("spectral norm frozen cases") {
  CHECK(std::abs(spectral_norm(Matrix(2, 2, {3, 0, 0, -4})) - 4.0) < 1e-12);
  CHECK(std::abs(spectral_norm(Matrix(2, 2, {0, 2, 0, 0})) - 2.0) < 1e-12);
  // largest singular value of [[1,1],[0,1]] is the golden ratio
  CHECK(std::abs(spectral_norm(Matrix(2, 2, {1, 1, 0, 1})) -
                 1.6180339887498949) < 1e-12);
}

TEST_CASE("spectral norm dominates the spectral radius") {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix a = testutil::random_matrix(rng, 5, 5);
    CHECK(spectral_norm(a) >= spectrum(a).radius - 1e-12);
  }
}

TEST_CASE("eigenvector condition number: frozen shear case") {
  // A = S diag(1,2) S^{-1}, S = [[1,1],[0,1]]: normalized eigenvector matrix
  // has condition number 1 + sqrt(2)
  Matrix a(2, 2, {1, 1, 0, 2});
  CHECK(std::abs(eigvec_condition(a) - 2.414213562373095) < 1e-6);
}

TEST_CASE("eigenvector condition number: normal and repeated spectra") {
  CHECK(std::abs(eigvec_condition(Matrix(2, 2, {2, 1, 1, 2})) - 1.0) < 1e-6);
  // full eigenspace despite triple eigenvalue
  CHECK(std::abs(eigvec_condition(Matrix::identity(3)) - 1.0) < 1e-6);
}

TEST_CASE("eigenvector condition number: defective input is inapplicable") {
  Matrix j(2, 2, {1, 1, 0, 1});
  CHECK_THROWS_AS(eigvec_condition(j), MatrixError);
}

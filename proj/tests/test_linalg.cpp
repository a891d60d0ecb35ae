#include <catch2/catch_amalgamated.hpp>

#include "simodet/constellation.hpp"
#include "simodet/linalg.hpp"
#include "simodet/rng.hpp"

using namespace simodet;
using Catch::Approx;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.complex_gaussian(1.0);
  return m;
}

// E[X*X]/N for a fixed symbol row: conj(s_i) s_j + sigma^2 on the diagonal
Matrix expected_gram_entries(const Vector& s, double sw2) {
  Matrix g = s.conjugate() * s.transpose();
  g.diagonal().array() += sw2;
  return g;
}

}  // namespace

TEST_CASE("hermitian construction enforces symmetry", "[linalg]") {
  Matrix a(2, 2);
  a << cplx(1, 0), cplx(0, 1), cplx(0, -1), cplx(2, 0);
  HermitianMatrix h(a);
  REQUIRE(h.m(0, 0).imag() == 0.0);

  a(0, 1) = cplx(0.5, 1);  // conjugate-asymmetric
  REQUIRE_THROWS_AS(HermitianMatrix(a), std::invalid_argument);

  Matrix d = Matrix::Identity(3, 3);
  d(1, 1) = cplx(1.0, 1e-13);  // tiny imaginary diagonal gets zeroed
  HermitianMatrix hd(d);
  REQUIRE(hd.m(1, 1).imag() == 0.0);
}

TEST_CASE("gram of zero block is zero", "[linalg]") {
  REQUIRE(gram_normalized(Matrix::Zero(5, 3)).m.norm() == 0.0);
}

TEST_CASE("gram of a noiseless rank-1 block", "[linalg]") {
  Rng rng(21);
  const int n = 24, t = 5;
  const Constellation qpsk = make_qpsk();
  Vector s(t);
  for (int k = 0; k < t; ++k) s(k) = qpsk.points[rng.below(4)];
  Vector h = random_matrix(n, 1, rng).col(0);
  h *= std::sqrt(static_cast<double>(n)) / h.norm();  // ||h||^2 = N
  const Matrix x = h * s.transpose();
  const HermitianMatrix g = gram_normalized(x);
  const Matrix want = s.conjugate() * s.transpose();
  REQUIRE((g.m - want).cwiseAbs().maxCoeff() <= 1e-12 * want.cwiseAbs().maxCoeff());
}

TEST_CASE("gram matches the naive conjugate-product loop", "[linalg]") {
  Rng rng(22);
  const Matrix x = random_matrix(3, 2, rng);
  const HermitianMatrix g = gram_normalized(x);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      cplx acc = 0.0;
      for (int r = 0; r < 3; ++r) acc += std::conj(x(r, i)) * x(r, j);
      acc /= 3.0;
      REQUIRE(std::abs(g.m(i, j) - acc) <= 1e-12);
    }
  }
  REQUIRE_THROWS_AS(gram_normalized(Matrix::Zero(3, 1)), std::invalid_argument);
}

TEST_CASE("max eigenvalue on reference matrices", "[linalg]") {
  REQUIRE(max_eigenvalue(HermitianMatrix(Matrix::Identity(6, 6))) == Approx(1.0));

  // expected Gram with unit-modulus symbols: lambda_max = T + sigma^2
  const Constellation qpsk = make_qpsk();
  Rng rng(23);
  const int t = 7;
  const double sw2 = 0.37;
  Vector s(t);
  for (int k = 0; k < t; ++k) s(k) = qpsk.points[rng.below(4)];
  const HermitianMatrix eg(expected_gram_entries(s, sw2));
  REQUIRE(max_eigenvalue(eg) == Approx(t + sw2).epsilon(1e-10));

  // rank-1 s s^*: lambda_max = ||s||^2
  Vector v(4);
  v << cplx(1, 1), cplx(0, -2), cplx(0.5, 0), cplx(-1, 0.25);
  const HermitianMatrix r1(Matrix(v * v.adjoint()));
  REQUIRE(max_eigenvalue(r1) == Approx(v.squaredNorm()).epsilon(1e-10));
}

TEST_CASE("shifted matrix", "[linalg]") {
  const HermitianMatrix eye(Matrix::Identity(4, 4));
  REQUIRE((shifted_matrix(eye, 2.0).m - Matrix::Identity(4, 4)).norm() == Approx(0.0).margin(1e-14));

  const Constellation qpsk = make_qpsk();
  Rng rng(24);
  const int t = 5;
  Vector s(t);
  for (int k = 0; k < t; ++k) s(k) = qpsk.points[rng.below(4)];
  const double sw2 = 0.6;
  const HermitianMatrix eg(expected_gram_entries(s, sw2));
  const HermitianMatrix a = shifted_matrix(eg, t + sw2);
  for (int i = 0; i < t; ++i) {
    REQUIRE(a.m(i, i).real() == Approx(t - std::norm(s(i))).margin(1e-10));
  }

  // shifting by exactly lambda_max leaves a zero eigenvalue
  const HermitianMatrix z = shifted_matrix(eg, max_eigenvalue(eg));
  Eigen::SelfAdjointEigenSolver<Matrix> es(z.m, Eigen::EigenvaluesOnly);
  REQUIRE(es.eigenvalues().minCoeff() == Approx(0.0).margin(1e-9));
}

TEST_CASE("cholesky of the identity", "[linalg]") {
  const UpperTriangular r = cholesky_psd(HermitianMatrix(Matrix::Identity(5, 5)));
  REQUIRE((r.m - Matrix::Identity(5, 5)).norm() == Approx(0.0).margin(1e-14));
}

TEST_CASE("cholesky of the T=4 expected shifted Gram has the closed-form diagonal",
          "[linalg]") {
  // unit-modulus sequence, rho_E = T + sigma^2: diagonal (sqrt 3, sqrt(8/3), sqrt 2, 0)
  const Constellation qpsk = make_qpsk();
  Rng rng(25);
  const int t = 4;
  Vector s(t);
  for (int k = 0; k < t; ++k) s(k) = qpsk.points[rng.below(4)];
  const double sw2 = 1.3;
  const HermitianMatrix a = shifted_matrix(HermitianMatrix(expected_gram_entries(s, sw2)),
                                           t + sw2);
  const UpperTriangular r = cholesky_psd(a);
  REQUIRE(r.m(0, 0).real() == Approx(std::sqrt(3.0)).margin(1e-8));
  REQUIRE(r.m(1, 1).real() == Approx(std::sqrt(8.0 / 3.0)).margin(1e-8));
  REQUIRE(r.m(2, 2).real() == Approx(std::sqrt(2.0)).margin(1e-8));
  REQUIRE(r.m(3, 3).real() == 0.0);  // exactly clamped zero pivot
}

TEST_CASE("cholesky reconstructs random PSD matrices", "[linalg]") {
  Rng rng(26);
  const Matrix b = random_matrix(4, 4, rng);
  const HermitianMatrix m(Matrix(b.adjoint() * b));
  const UpperTriangular r = cholesky_psd(m);
  REQUIRE(frobenius_norm(r.m.adjoint() * r.m - m.m) <= 1e-10);

  for (int dim : {2, 3, 6, 12}) {
    for (int rep = 0; rep < 25; ++rep) {
      const Matrix c = random_matrix(dim, dim, rng);
      const HermitianMatrix psd(Matrix(c.adjoint() * c));
      double delta = -1.0;
      const UpperTriangular f = cholesky_psd(psd, 1e-12, &delta);
      const double err = frobenius_norm(f.m.adjoint() * f.m -
                                        (psd.m + delta * Matrix::Identity(dim, dim)));
      REQUIRE(err <= 1e-9 * (1.0 + frobenius_norm(psd.m)));
    }
  }
}

TEST_CASE("rayleigh quotient never exceeds the maximum eigenvalue", "[linalg]") {
  Rng rng(27);
  for (int rep = 0; rep < 40; ++rep) {
    const int dim = 2 + static_cast<int>(rng.below(6));
    const Matrix b = random_matrix(dim, dim, rng);
    const HermitianMatrix h(Matrix(b + b.adjoint()));
    const double lam = max_eigenvalue(h);
    for (int probe = 0; probe < 5; ++probe) {
      const Vector v = random_matrix(dim, 1, rng).col(0);
      const double q = (v.adjoint() * (h.m * v))(0, 0).real() / v.squaredNorm();
      REQUIRE(q <= lam + 1e-9 * (1.0 + std::abs(lam)));
    }
  }
}

TEST_CASE("shift slightly above lambda_max factorizes without jitter", "[linalg]") {
  Rng rng(28);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix b = random_matrix(5, 5, rng);
    const HermitianMatrix h(Matrix(b.adjoint() * b));
    const double lam = max_eigenvalue(h);
    double delta = -1.0;
    cholesky_psd(shifted_matrix(h, lam * (1.0 + 1e-9)), 1e-12, &delta);
    REQUIRE(delta == 0.0);
  }
}

TEST_CASE("jitter escalation and the indefinite error path", "[linalg]") {
  Rng rng(29);
  const Matrix b = random_matrix(4, 4, rng);
  Matrix m = b.adjoint() * b;
  m.diagonal().array() -= 5e-10;  // slightly indefinite, within the escalation cap
  double delta = -1.0;
  const UpperTriangular r = cholesky_psd(HermitianMatrix(m), 1e-12, &delta);
  REQUIRE(delta > 0.0);
  REQUIRE(frobenius_norm(r.m.adjoint() * r.m -
                         (m + delta * Matrix::Identity(4, 4))) <= 1e-8);

  REQUIRE_THROWS_AS(cholesky_psd(HermitianMatrix(Matrix(-Matrix::Identity(3, 3)))),
                    std::runtime_error);
}

TEST_CASE("frobenius norm basics", "[linalg]") {
  REQUIRE(frobenius_norm(Matrix::Zero(3, 3)) == 0.0);
  REQUIRE(frobenius_norm(Matrix::Identity(9, 9)) == Approx(3.0));
  Matrix m(1, 2);
  m << cplx(3, 0), cplx(0, 4);
  REQUIRE(frobenius_norm(m) == Approx(5.0));
}

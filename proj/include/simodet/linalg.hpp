#pragma once

#include <cmath>
#include <stdexcept>

#include "simodet/types.hpp"

namespace simodet {

// Dense T x T Hermitian matrix. Construction enforces the symmetry invariant:
// input must be Hermitian to within 1e-12 (absolute, relative to the largest
// entry for badly scaled inputs); the stored matrix is exactly Hermitian with
// real diagonal.
struct HermitianMatrix {
  Matrix m;

  explicit HermitianMatrix(Matrix a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("hermitian: matrix not square");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    const double asym = (a - a.adjoint()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale) throw std::invalid_argument("hermitian: asymmetry above tolerance");
    m = 0.5 * (a + a.adjoint().eval());
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, i) = cplx(m(i, i).real(), 0.0);
  }

  Eigen::Index dim() const { return m.rows(); }
};

// Upper triangular factor with nonnegative real diagonal; zero below diagonal.
struct UpperTriangular {
  Matrix m;
  Eigen::Index dim() const { return m.rows(); }
};

inline double frobenius_norm(const Matrix& m) { return m.norm(); }

// X*X / N for an N x T block.
inline HermitianMatrix gram_normalized(const Matrix& x) {
  if (x.rows() < 1 || x.cols() < 2) throw std::invalid_argument("gram: need N >= 1, T >= 2");
  Matrix g = (x.adjoint() * x) / static_cast<double>(x.rows());
  return HermitianMatrix(std::move(g));
}

inline double max_eigenvalue(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h.m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("max_eigenvalue: eigensolver failed");
  return es.eigenvalues().maxCoeff();
}

// rho*I - H
inline HermitianMatrix shifted_matrix(const HermitianMatrix& h, double rho) {
  Matrix s = -h.m;
  s.diagonal().array() += rho;
  return HermitianMatrix(std::move(s));
}

// Cholesky factorization M + delta*I = R*R for positive semidefinite M.
//
// Pivots in [-jitter, jitter) are clamped to zero and the row is zeroed
// (the 0/0 convention for exactly singular inputs); a pivot below -jitter
// restarts the factorization with delta escalating through
// {jitter, 10*jitter, ...} up to 1e-6 * trace(M). Indefiniteness beyond the
// cap is an error. The delta actually applied is reported via delta_used.
inline UpperTriangular cholesky_psd(const HermitianMatrix& mat, double jitter = 1e-12,
                                    double* delta_used = nullptr) {
  const Eigen::Index n = mat.dim();
  const Matrix& a = mat.m;
  const double trace = a.diagonal().real().sum();
  const double cap = 1e-6 * std::max(trace, 0.0);

  UpperTriangular out;
  out.m = Matrix::Zero(n, n);
  Matrix& r = out.m;

  double delta = 0.0;
  while (true) {
    bool ok = true;
    r.setZero();
    for (Eigen::Index i = 0; i < n && ok; ++i) {
      cplx acc = 0.0;
      for (Eigen::Index k = 0; k < i; ++k) acc += std::conj(r(k, i)) * r(k, i);
      const double piv = a(i, i).real() + delta - acc.real();
      if (piv < -jitter) {
        ok = false;
        break;
      }
      if (piv < jitter) {
        // clamped row: diagonal and trailing entries all zero
        continue;
      }
      const double d = std::sqrt(piv);
      r(i, i) = d;
      for (Eigen::Index j = i + 1; j < n; ++j) {
        cplx s = a(i, j);
        for (Eigen::Index k = 0; k < i; ++k) s -= std::conj(r(k, i)) * r(k, j);
        r(i, j) = s / d;
      }
    }
    if (ok) {
      if (delta_used) *delta_used = delta;
      return out;
    }
    const double next = (delta == 0.0) ? jitter : delta * 10.0;
    if (next > cap || next <= 0.0) {
      throw std::runtime_error("cholesky_psd: matrix indefinite beyond jitter cap");
    }
    delta = next;
  }
}

}  // namespace simodet

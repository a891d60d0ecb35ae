#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "simodet/constellation.hpp"
#include "simodet/linalg.hpp"
#include "simodet/types.hpp"

namespace simodet {

// Closed-form quantities used to validate the numerical pipeline. These are
// test-support operations, not part of the detection path; the CLI `verify`
// subcommand drives them.

// E[X*X]/N for a fixed transmitted symbol sequence: entry (i,j) is
// conj(s_i) s_j with sigma_w^2 added on the diagonal.
inline HermitianMatrix expected_gram(const Vector& symbols, double sigma_w_sq) {
  const Eigen::Index t = symbols.size();
  if (t < 2) throw std::invalid_argument("expected_gram: need T >= 2");
  Matrix g = symbols.conjugate() * symbols.transpose();
  g.diagonal().array() += sigma_w_sq;
  return HermitianMatrix(std::move(g));
}

// Cholesky diagonal of rho_E I - E[X*X]/N for unit-modulus symbols:
// entry i (1-based) is sqrt(T - T/(T-i+1)); the last entry is exactly zero.
inline std::vector<double> expected_cholesky_diag_cm(int t) {
  if (t < 2) throw std::invalid_argument("expected_cholesky_diag_cm: need T >= 2");
  std::vector<double> d(t, 0.0);
  const double td = static_cast<double>(t);
  for (int i = 1; i < t; ++i) {
    d[i - 1] = std::sqrt(td - td / (td - static_cast<double>(i - 1)));
  }
  d[t - 1] = 0.0;
  return d;
}

// General-energy counterpart: entry i is sqrt(t_total (1 - |s_i|^2 / ||s_{i:T}||^2)).
inline std::vector<double> expected_cholesky_diag_ncm(const Vector& symbols) {
  const int t = static_cast<int>(symbols.size());
  if (t < 2) throw std::invalid_argument("expected_cholesky_diag_ncm: need T >= 2");
  const double total = symbols.squaredNorm();
  std::vector<double> d(t, 0.0);
  double suffix = 0.0;
  std::vector<double> suffix_energy(t, 0.0);
  for (int i = t - 1; i >= 0; --i) {
    suffix += std::norm(symbols(i));
    suffix_energy[i] = suffix;
  }
  for (int i = 0; i + 1 < t; ++i) {
    d[i] = std::sqrt(total * (1.0 - std::norm(symbols(i)) / suffix_energy[i]));
  }
  d[t - 1] = 0.0;
  return d;
}

// Constant-modulus separation bound: wrong sequences meet metric >= T d_min^2 / 2
// at their divergence layer under the expected Gram.
inline double lemma1_bound(const Constellation& c, int t) {
  if (!c.is_constant_modulus)
    throw std::invalid_argument("lemma1_bound: constellation is not constant-modulus");
  return static_cast<double>(t) * c.d_min_sq / 2.0;
}

// 16-QAM normalized-metric separation bound.
inline double lemma2_bound() { return 2.0 / 45.0; }

// var((X*X)_{i,j} / N) = (1 + sigma_w^2)^2 / N for unit-energy symbols.
inline double gram_entry_variance(double sigma_w_sq, int n) {
  if (n < 1) throw std::invalid_argument("gram_entry_variance: need N >= 1");
  const double a = 1.0 + sigma_w_sq;
  return a * a / static_cast<double>(n);
}

}  // namespace simodet

#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "simodet/harness.hpp"
#include "simodet/oracles.hpp"

namespace simodet {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

namespace detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

inline Vector random_symbols(const Constellation& c, int t, Rng& rng, bool pin_pilot) {
  Vector s(t);
  for (int k = 0; k < t; ++k) s(k) = c.points[rng.below(c.size())];
  if (pin_pilot) s(t - 1) = c.points[0];
  return s;
}

}  // namespace detail

// Numerical Cholesky of rho_E I - E[X*X]/N against the closed-form diagonal
// for unit-modulus symbols, T = 2..30. `diag_perturbation` exists for fault
// injection in tests.
inline CheckResult check_closed_form_cholesky_cm(double diag_perturbation = 0.0,
                                                 std::uint64_t seed = 11) {
  const Constellation qpsk = make_qpsk();
  Rng rng(seed);
  double worst = 0.0;
  for (int t = 2; t <= 30; ++t) {
    const Vector s = detail::random_symbols(qpsk, t, rng, true);
    const HermitianMatrix eg = expected_gram(s, 0.5);
    const double rho_e = static_cast<double>(t) + 0.5;
    const UpperTriangular r = cholesky_psd(shifted_matrix(eg, rho_e));
    const std::vector<double> want = expected_cholesky_diag_cm(t);
    for (int i = 0; i < t; ++i) {
      worst = std::max(worst, std::abs(r.m(i, i).real() + diag_perturbation - want[i]));
    }
  }
  CheckResult res;
  res.name = "closed_form_cholesky_cm";
  res.pass = worst <= 1e-8;
  res.detail = "max |diag - closed form| = " + detail::fmt(worst) + " (tol 1e-8)";
  return res;
}

// Same check for general-energy sequences (16-QAM), random lengths.
inline CheckResult check_closed_form_cholesky_ncm(int sequences = 20, std::uint64_t seed = 12,
                                                  double diag_perturbation = 0.0) {
  const Constellation qam = make_16qam();
  Rng rng(seed);
  double worst = 0.0;
  for (int q = 0; q < sequences; ++q) {
    const int t = 2 + static_cast<int>(rng.below(15));
    const Vector s = detail::random_symbols(qam, t, rng, false);
    const double rho_e = s.squaredNorm() + 0.25;
    const UpperTriangular r = cholesky_psd(shifted_matrix(expected_gram(s, 0.25), rho_e));
    const std::vector<double> want = expected_cholesky_diag_ncm(s);
    for (int i = 0; i < t; ++i) {
      worst = std::max(worst, std::abs(r.m(i, i).real() + diag_perturbation - want[i]));
    }
  }
  CheckResult res;
  res.name = "closed_form_cholesky_ncm";
  res.pass = worst <= 1e-8;
  res.detail = "max |diag - closed form| = " + detail::fmt(worst) + " (tol 1e-8)";
  return res;
}

// Empirical variance of Gram entries against (1+sigma^2)^2/N. Checks one
// off-diagonal and one diagonal entry for each (sigma^2, N) combination.
inline CheckResult check_gram_variance(int draws, double rel_tol, std::uint64_t seed = 13) {
  const Constellation qpsk = make_qpsk();
  const cplx s1 = qpsk.points[0];
  const cplx s2 = qpsk.points[1];
  double worst = 0.0;
  for (double sw2 : {0.25, 1.0, 4.0}) {
    for (int n : {10, 100}) {
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(sw2 * 100), n));
      cplx sum12 = 0.0, sum11 = 0.0;
      double sq12 = 0.0, sq11 = 0.0;
      for (int d = 0; d < draws; ++d) {
        cplx g12 = 0.0, g11 = 0.0;
        for (int i = 0; i < n; ++i) {
          const cplx h = rng.complex_gaussian(1.0);
          const cplx x1 = h * s1 + rng.complex_gaussian(sw2);
          const cplx x2 = h * s2 + rng.complex_gaussian(sw2);
          g12 += std::conj(x1) * x2;
          g11 += std::conj(x1) * x1;
        }
        g12 /= n;
        g11 /= n;
        sum12 += g12;
        sq12 += std::norm(g12);
        sum11 += g11;
        sq11 += std::norm(g11);
      }
      const double m = static_cast<double>(draws);
      const double var12 = sq12 / m - std::norm(sum12 / m);
      const double var11 = sq11 / m - std::norm(sum11 / m);
      const double want = gram_entry_variance(sw2, n);
      worst = std::max(worst, std::abs(var12 - want) / want);
      worst = std::max(worst, std::abs(var11 - want) / want);
    }
  }
  CheckResult res;
  res.name = "gram_entry_variance";
  res.pass = worst <= rel_tol;
  res.detail = "max relative deviation = " + detail::fmt(worst) + " (tol " +
               detail::fmt(rel_tol) + ")";
  return res;
}

// Entrywise mean of X*X/N over many draws with a fixed symbol sequence,
// compared to the expected Gram within 3 standard errors.
inline CheckResult check_expected_gram_mean(int draws = 20000, std::uint64_t seed = 14) {
  const Constellation qpsk = make_qpsk();
  const int t = 3, n = 4;
  const double sw2 = 0.8;
  Rng rng(seed);
  Vector s(t);
  s << qpsk.points[1], qpsk.points[2], qpsk.points[0];

  Matrix sum = Matrix::Zero(t, t);
  Eigen::MatrixXd sumsq_re = Eigen::MatrixXd::Zero(t, t);
  Eigen::MatrixXd sumsq_im = Eigen::MatrixXd::Zero(t, t);
  Matrix x(n, t);
  for (int d = 0; d < draws; ++d) {
    for (int i = 0; i < n; ++i) {
      const cplx h = rng.complex_gaussian(1.0);
      for (int k = 0; k < t; ++k) x(i, k) = h * s(k) + rng.complex_gaussian(sw2);
    }
    const Matrix g = (x.adjoint() * x) / static_cast<double>(n);
    sum += g;
    sumsq_re += g.real().cwiseProduct(g.real());
    sumsq_im += g.imag().cwiseProduct(g.imag());
  }
  const double m = static_cast<double>(draws);
  const Matrix mean = sum / m;
  const HermitianMatrix want = expected_gram(s, sw2);
  double worst_sigmas = 0.0;
  for (int i = 0; i < t; ++i) {
    for (int j = 0; j < t; ++j) {
      const double se_re =
          std::sqrt(std::max(sumsq_re(i, j) / m - mean(i, j).real() * mean(i, j).real(), 1e-30) / m);
      const double se_im =
          std::sqrt(std::max(sumsq_im(i, j) / m - mean(i, j).imag() * mean(i, j).imag(), 1e-30) / m);
      worst_sigmas = std::max(worst_sigmas,
                              std::abs(mean(i, j).real() - want.m(i, j).real()) / se_re);
      worst_sigmas = std::max(worst_sigmas,
                              std::abs(mean(i, j).imag() - want.m(i, j).imag()) / se_im);
    }
  }
  CheckResult res;
  res.name = "expected_gram_mean";
  res.pass = worst_sigmas <= 3.0;
  res.detail = "max deviation = " + detail::fmt(worst_sigmas) + " standard errors (tol 3)";
  return res;
}

namespace detail {

// Shared brute force: minimum divergence-layer metric over all pilot-pinned
// wrong sequences under the expected Gram, plus the largest partial metric of
// the transmitted sequence itself.
struct Separation {
  double min_wrong = std::numeric_limits<double>::infinity();
  double max_true = 0.0;
};

inline Separation separation_scan(const Constellation& c, const std::vector<int>& true_idx,
                                  bool normalized) {
  const int t = static_cast<int>(true_idx.size());
  const int nsym = c.size();
  Vector s(t);
  for (int k = 0; k < t; ++k) s(k) = c.points[true_idx[k]];
  const double rho_e = s.squaredNorm() + 1.0;
  const UpperTriangular r = cholesky_psd(shifted_matrix(expected_gram(s, 1.0), rho_e));

  Separation sep;
  const auto true_m = normalized ? partial_metrics_normalized(r, c, true_idx)
                                 : partial_metrics(r, c, true_idx);
  for (double v : true_m) sep.max_true = std::max(sep.max_true, v);

  std::vector<int> idx(true_idx);
  for (int k = 0; k + 1 < t; ++k) idx[k] = 0;
  while (true) {
    if (idx != true_idx) {
      int div = -1;
      for (int k = t - 1; k >= 0; --k) {
        if (idx[k] != true_idx[k]) {
          div = k;
          break;
        }
      }
      const auto pm = normalized ? partial_metrics_normalized(r, c, idx)
                                 : partial_metrics(r, c, idx);
      sep.min_wrong = std::min(sep.min_wrong, pm[div]);
    }
    int k = 0;
    while (k + 1 < t && idx[k] == nsym - 1) idx[k++] = 0;
    if (k + 1 >= t) break;
    ++idx[k];
  }
  return sep;
}

}  // namespace detail

// Constant-modulus radius bound: wrong sequences stay above T d_min^2/2 at
// their divergence layer; the transmitted sequence's partial metrics vanish.
inline CheckResult check_separation_cm(std::uint64_t seed = 15) {
  Rng rng(seed);
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_true = 0.0;
  for (const Constellation& c : {make_bpsk(), make_qpsk()}) {
    for (int t = 2; t <= 5; ++t) {
      std::vector<int> true_idx(t);
      for (int k = 0; k + 1 < t; ++k) true_idx[k] = static_cast<int>(rng.below(c.size()));
      true_idx[t - 1] = 0;
      const auto sep = detail::separation_scan(c, true_idx, false);
      worst_margin = std::min(worst_margin, sep.min_wrong - lemma1_bound(c, t));
      worst_true = std::max(worst_true, sep.max_true);
    }
  }
  CheckResult res;
  res.name = "separation_bound_cm";
  res.pass = worst_margin >= -1e-9 && worst_true <= 1e-10;
  res.detail = "min margin over bound = " + detail::fmt(worst_margin) +
               ", max transmitted partial metric = " + detail::fmt(worst_true);
  return res;
}

// 16-QAM normalized-metric bound 2/45 at T = 3.
inline CheckResult check_separation_ncm(int true_sequences = 8, std::uint64_t seed = 16) {
  const Constellation qam = make_16qam();
  Rng rng(seed);
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_true = 0.0;
  for (int q = 0; q < true_sequences; ++q) {
    const int t = 3;
    std::vector<int> true_idx(t);
    for (int k = 0; k + 1 < t; ++k) true_idx[k] = static_cast<int>(rng.below(qam.size()));
    true_idx[t - 1] = 0;
    const auto sep = detail::separation_scan(qam, true_idx, true);
    worst_margin = std::min(worst_margin, sep.min_wrong - lemma2_bound());
    worst_true = std::max(worst_true, sep.max_true);
  }
  CheckResult res;
  res.name = "separation_bound_ncm";
  res.pass = worst_margin >= -1e-9 && worst_true <= 1e-10;
  res.detail = "min margin over 2/45 = " + detail::fmt(worst_margin) +
               ", max transmitted partial metric = " + detail::fmt(worst_true);
  return res;
}

// Sphere decoders and the tree search against the exhaustive oracle on random
// small blocks. `blocks` is the total count, spread over the constellation/T
// grid and SNR in {-10, 0, 10} dB.
inline CheckResult check_oracle_equivalence(int blocks = 510, std::uint64_t seed = 17) {
  struct Case {
    const char* constellation;
    int t_min, t_max;
  };
  const Case cases[] = {{"bpsk", 3, 7}, {"qpsk", 3, 7}, {"16qam", 3, 4}};
  const double snrs[] = {-10.0, 0.0, 10.0};
  const int n_choices[] = {4, 16, 64, 256};

  double worst = 0.0;
  std::uint64_t counter = 0;
  int done = 0;
  while (done < blocks) {
    for (const auto& cs : cases) {
      for (int t = cs.t_min; t <= cs.t_max && done < blocks; ++t) {
        const Constellation& c = constellation_by_name(cs.constellation);
        const double snr = snrs[counter % 3];
        const int n = n_choices[(counter / 3) % 4];
        ChannelConfig cfg{n, t, snr, c, c.points[0], derive_seed(seed, counter, 77)};
        ++counter;
        const ReceivedBlock blk = draw_block(cfg);
        const GramDecomposition g = prepare(blk.x);

        const DetectionOutcome ex_ncm =
            exhaustive_detect(g, c, 0, MetricMode::Normalized);
        SphereOptions opt_ncm{default_radius_ncm(), RestartPolicy::Double};
        const DetectionOutcome sp_ncm = sphere_detect_ncm(g, c, 0, opt_ncm);
        const double f_sp_ncm = sequence_objective(g, c, sp_ncm.s_hat, MetricMode::Normalized);
        worst = std::max(worst, std::abs(f_sp_ncm - ex_ncm.metric) /
                                    std::max(1.0, std::abs(ex_ncm.metric)));

        if (c.is_constant_modulus) {
          const DetectionOutcome ex_cm =
              exhaustive_detect(g, c, 0, MetricMode::ConstantModulus);
          SphereOptions opt_cm{default_radius_cm(c, t), RestartPolicy::Double};
          const DetectionOutcome sp_cm = sphere_detect_cm(g, c, 0, opt_cm);
          const DetectionOutcome ts = tsa_detect(g, c, 0, MetricMode::ConstantModulus);
          const double f_sp = sequence_objective(g, c, sp_cm.s_hat, MetricMode::ConstantModulus);
          const double f_ts = sequence_objective(g, c, ts.s_hat, MetricMode::ConstantModulus);
          worst = std::max(worst, std::abs(f_sp - ex_cm.metric) /
                                      std::max(1.0, std::abs(ex_cm.metric)));
          worst = std::max(worst, std::abs(f_ts - ex_cm.metric) /
                                      std::max(1.0, std::abs(ex_cm.metric)));
        } else {
          const DetectionOutcome ts = tsa_detect(g, c, 0, MetricMode::Normalized);
          const double f_ts = sequence_objective(g, c, ts.s_hat, MetricMode::Normalized);
          worst = std::max(worst, std::abs(f_ts - ex_ncm.metric) /
                                      std::max(1.0, std::abs(ex_ncm.metric)));
        }
        ++done;
      }
    }
  }
  CheckResult res;
  res.name = "oracle_equivalence";
  res.pass = worst <= 1e-9;
  res.detail = "max relative objective gap over " + std::to_string(blocks) +
               " blocks = " + detail::fmt(worst) + " (tol 1e-9)";
  return res;
}

inline std::vector<CheckResult> run_verification(bool full, std::uint64_t seed = 101) {
  std::vector<CheckResult> out;
  out.push_back(check_closed_form_cholesky_cm(0.0, seed + 1));
  out.push_back(check_closed_form_cholesky_ncm(20, seed + 2));
  out.push_back(check_gram_variance(full ? 100000 : 20000, full ? 0.05 : 0.10, seed + 3));
  out.push_back(check_expected_gram_mean(full ? 100000 : 20000, seed + 4));
  out.push_back(check_separation_cm(seed + 5));
  out.push_back(check_separation_ncm(full ? 20 : 8, seed + 6));
  out.push_back(check_oracle_equivalence(full ? 510 : 60, seed + 7));
  return out;
}

}  // namespace simodet

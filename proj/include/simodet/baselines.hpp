#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "simodet/detectors.hpp"

namespace simodet {

enum class Estimator { LS, MMSE };

struct BaselineConfig {
  Estimator estimator = Estimator::MMSE;
  int iterations = 0;  // 0 = non-iterative
};

// nearest constellation point; equidistant ties go to the smaller index
inline int nearest_index(cplx y, const Constellation& c) {
  int best = 0;
  double best_d = std::norm(y - c.points[0]);
  for (int i = 1; i < c.size(); ++i) {
    const double d = std::norm(y - c.points[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

// Single-pilot channel estimate from the last received column.
// LS: x_T conj(p)/|p|^2; MMSE adds the unit-variance channel prior shrinkage.
inline Vector pilot_estimate(const Vector& x_last_col, cplx pilot, double sigma_w_sq,
                             Estimator est) {
  const double p2 = std::norm(pilot);
  if (!(p2 > 0.0)) throw std::invalid_argument("pilot_estimate: zero pilot");
  const double denom = (est == Estimator::LS) ? p2 : p2 + sigma_w_sq;
  return x_last_col * (std::conj(pilot) / denom);
}

// Per-symbol matched filter y_k = h^* x_k / ||h||^2 quantized to the alphabet;
// position T is forced to the pilot.
inline std::vector<int> coherent_detect(const Matrix& x, const Vector& h_hat,
                                        const Constellation& c, int pilot_index) {
  const double h2 = h_hat.squaredNorm();
  if (!(h2 > 0.0)) throw std::invalid_argument("coherent_detect: zero channel estimate");
  const int t = static_cast<int>(x.cols());
  std::vector<int> idx(t, 0);
  for (int k = 0; k + 1 < t; ++k) {
    const cplx y = (h_hat.adjoint() * x.col(k))(0, 0) / h2;
    idx[k] = nearest_index(y, c);
  }
  idx[t - 1] = pilot_index;
  return idx;
}

// Pilot-seeded estimate/detect loop. Each iteration re-estimates the channel
// from the full detected sequence (LS per the joint-ML normal equation, MMSE
// with the sigma_w^2 shrinkage) and re-detects. Exits early on a fixed point.
inline DetectionOutcome iterative_detect(const ReceivedBlock& blk, const BaselineConfig& cfg,
                                         const Constellation& c, int pilot_index) {
  if (cfg.iterations < 0 || cfg.iterations > 10000)
    throw std::invalid_argument("iterative_detect: iterations out of range");
  const int t = static_cast<int>(blk.x.cols());

  Vector h = pilot_estimate(blk.x.col(t - 1), c.points[pilot_index], blk.sigma_w_sq,
                            cfg.estimator);
  std::vector<int> idx = coherent_detect(blk.x, h, c, pilot_index);

  Vector symbols(t);
  for (int it = 0; it < cfg.iterations; ++it) {
    for (int k = 0; k < t; ++k) symbols(k) = c.points[idx[k]];
    const double energy = symbols.squaredNorm();
    const double denom = (cfg.estimator == Estimator::LS) ? energy : energy + blk.sigma_w_sq;
    h = (blk.x * symbols.conjugate()) / denom;
    std::vector<int> next = coherent_detect(blk.x, h, c, pilot_index);
    const bool fixed_point = (next == idx);
    idx = std::move(next);
    if (fixed_point) break;
  }

  DetectionOutcome out;
  out.s_hat = idx;
  for (int k = 0; k < t; ++k) symbols(k) = c.points[idx[k]];
  out.metric = residual_metric(blk.x, symbols);
  out.h_hat = h;
  out.visited_per_layer.assign(t, 0);
  return out;
}

// ---------------------------------------------------------------------------
// Multi-user MIMO uplink with orthogonal training and per-user SIMO ML stages.
// ---------------------------------------------------------------------------

struct MimoConfig {
  int n_rx = 1;
  int t_coh = 2;
  int m_users = 1;
  double snr_db = 0.0;
  Constellation constellation;
  std::uint64_t seed = 0;
};

struct MimoBlock {
  Matrix x;        // N x T
  int m_users = 0;
  Matrix pilots;   // M x M, orthogonal rows, entries from the constellation
  Matrix s_true;   // M x T symbols; first M columns are the pilots
  std::vector<std::vector<int>> s_index;  // per user
  Matrix h_true;   // N x M
  double sigma_w_sq = 0.0;
};

// Sylvester-Hadamard matrix scaled by the first constellation point: rows are
// orthogonal with P P^* = M e I, and every entry stays inside the alphabet
// (the alphabets here are closed under negation). Requires M a power of two.
inline Matrix hadamard_pilots(const Constellation& c, int m) {
  if (m < 1 || (m & (m - 1)) != 0)
    throw std::invalid_argument("hadamard_pilots: m_users must be a power of two");
  Eigen::MatrixXd h(1, 1);
  h(0, 0) = 1.0;
  while (h.rows() < m) {
    const Eigen::Index k = h.rows();
    Eigen::MatrixXd g(2 * k, 2 * k);
    g.topLeftCorner(k, k) = h;
    g.topRightCorner(k, k) = h;
    g.bottomLeftCorner(k, k) = h;
    g.bottomRightCorner(k, k) = -h;
    h = std::move(g);
  }
  const cplx base = c.points[0];
  if (c.index_of(-base) < 0)
    throw std::invalid_argument("hadamard_pilots: constellation not closed under negation");
  return h.cast<cplx>() * base;
}

inline MimoBlock draw_mimo_block(const MimoConfig& cfg) {
  const int n = cfg.n_rx, t = cfg.t_coh, m = cfg.m_users;
  if (t <= m) throw std::invalid_argument("draw_mimo_block: need T > M");
  const int nsym = cfg.constellation.size();
  Rng rng(cfg.seed);

  MimoBlock blk;
  blk.m_users = m;
  blk.sigma_w_sq = noise_variance(cfg.constellation, cfg.snr_db);
  blk.pilots = hadamard_pilots(cfg.constellation, m);

  blk.h_true.resize(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n; ++i) blk.h_true(i, j) = rng.complex_gaussian(1.0);

  blk.s_index.assign(m, std::vector<int>(t, 0));
  blk.s_true.resize(m, t);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      blk.s_index[j][k] = cfg.constellation.index_of(blk.pilots(j, k));
      blk.s_true(j, k) = blk.pilots(j, k);
    }
    for (int k = m; k < t; ++k) {
      blk.s_index[j][k] = static_cast<int>(rng.below(nsym));
      blk.s_true(j, k) = cfg.constellation.points[blk.s_index[j][k]];
    }
  }

  blk.x.resize(n, t);
  for (int k = 0; k < t; ++k) {
    for (int i = 0; i < n; ++i) {
      cplx v = 0.0;
      for (int j = 0; j < m; ++j) v += blk.h_true(i, j) * blk.s_true(j, k);
      blk.x(i, k) = v + rng.complex_gaussian(blk.sigma_w_sq);
    }
  }
  return blk;
}

struct MimoResult {
  std::vector<std::vector<int>> s_hat;     // M x T indices (pilot columns included)
  std::vector<DetectionOutcome> per_user;  // ML stage stats, accumulated over rounds
};

namespace detail {

// Solve (A + ridge I) Z = B for Hermitian A, escalating the ridge when the
// system is numerically singular.
inline Matrix solve_regularized(const Matrix& a, const Matrix& b, double ridge) {
  double extra = 0.0;
  for (int attempt = 0; attempt < 40; ++attempt) {
    Matrix m = a;
    m.diagonal().array() += ridge + extra;
    Eigen::LDLT<Matrix> ldlt(m);
    if (ldlt.info() == Eigen::Success) {
      Matrix z = ldlt.solve(b);
      if (z.allFinite()) return z;
    }
    extra = (extra == 0.0) ? std::max(ridge, 1e-12) : extra * 10.0;
  }
  throw std::runtime_error("solve_regularized: system stayed singular");
}

// H-hat = X S^* (S S^* + sigma^2 I)^{-1}
inline Matrix mmse_channel_estimate(const Matrix& x, const Matrix& s, double sigma_w_sq) {
  const Matrix a = s * s.adjoint();
  const Matrix rhs = (x * s.adjoint()).adjoint();
  return solve_regularized(a, rhs, sigma_w_sq).adjoint();
}

inline void mmse_data_detect(const Matrix& x, const Matrix& h, const Constellation& c,
                             double sigma_w_sq, int first_data_col,
                             std::vector<std::vector<int>>& idx, Matrix& s) {
  const int m = static_cast<int>(h.cols());
  const int t = static_cast<int>(x.cols());
  const Matrix a = h.adjoint() * h;
  Matrix rhs = h.adjoint() * x.rightCols(t - first_data_col);
  Matrix z = solve_regularized(a, rhs, sigma_w_sq);
  for (int k = first_data_col; k < t; ++k) {
    for (int j = 0; j < m; ++j) {
      idx[j][k] = nearest_index(z(j, k - first_data_col), c);
      s(j, k) = c.points[idx[j][k]];
    }
  }
}

}  // namespace detail

// Training-based MMSE channel estimation and per-column MMSE data detection;
// iterations > 0 re-estimates the channel from detected data and re-detects.
inline MimoResult mimo_mmse_detect(const MimoBlock& blk, const Constellation& c, int iterations) {
  const int m = blk.m_users;
  const int t = static_cast<int>(blk.x.cols());

  MimoResult res;
  res.s_hat.assign(m, std::vector<int>(t, 0));
  Matrix s = Matrix::Zero(m, t);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      res.s_hat[j][k] = c.index_of(blk.pilots(j, k));
      s(j, k) = blk.pilots(j, k);
    }
  }

  Matrix h = detail::mmse_channel_estimate(blk.x.leftCols(m), blk.pilots, blk.sigma_w_sq);
  detail::mmse_data_detect(blk.x, h, c, blk.sigma_w_sq, m, res.s_hat, s);
  for (int it = 0; it < iterations; ++it) {
    auto prev = res.s_hat;
    h = detail::mmse_channel_estimate(blk.x, s, blk.sigma_w_sq);
    detail::mmse_data_detect(blk.x, h, c, blk.sigma_w_sq, m, res.s_hat, s);
    if (res.s_hat == prev) break;
  }
  return res;
}

// Interference-cancelling scheme: MMSE training estimate, MMSE detection, then
// per-user SIMO joint ML detection on the cleaned block X - sum_{i != j} h_i s_i*,
// pinned by the user's last pilot column, alternating with MMSE channel
// re-estimation for `rounds` rounds.
inline MimoResult mimo_detect(const MimoBlock& blk, const Constellation& c, int rounds = 10) {
  if (rounds < 1) throw std::invalid_argument("mimo_detect: rounds must be >= 1");
  const int m = blk.m_users;
  const int t = static_cast<int>(blk.x.cols());
  const int t_eff = t - m + 1;

  MimoResult res;
  res.s_hat.assign(m, std::vector<int>(t, 0));
  res.per_user.assign(m, DetectionOutcome{});
  for (auto& o : res.per_user) o.visited_per_layer.assign(t_eff, 0);
  Matrix s = Matrix::Zero(m, t);
  for (int j = 0; j < m; ++j) {
    for (int k = 0; k < m; ++k) {
      res.s_hat[j][k] = c.index_of(blk.pilots(j, k));
      s(j, k) = blk.pilots(j, k);
    }
  }

  Matrix h = detail::mmse_channel_estimate(blk.x.leftCols(m), blk.pilots, blk.sigma_w_sq);
  detail::mmse_data_detect(blk.x, h, c, blk.sigma_w_sq, m, res.s_hat, s);
  h = detail::mmse_channel_estimate(blk.x, s, blk.sigma_w_sq);

  Matrix cleaned(blk.x.rows(), t);
  Matrix sub(blk.x.rows(), t_eff);
  for (int round = 0; round < rounds; ++round) {
    auto prev = res.s_hat;
    for (int j = 0; j < m; ++j) {
      cleaned = blk.x;
      for (int i = 0; i < m; ++i) {
        if (i != j) cleaned.noalias() -= h.col(i) * s.row(i);
      }
      // data columns first, the user's last pilot column pinned at the end
      sub.leftCols(t_eff - 1) = cleaned.rightCols(t - m);
      sub.col(t_eff - 1) = cleaned.col(m - 1);
      const int pilot_index = c.index_of(blk.pilots(j, m - 1));

      GramDecomposition g = prepare(sub);
      SphereOptions opt;
      DetectionOutcome o;
      if (c.is_constant_modulus) {
        opt.r0_sq = default_radius_cm(c, t_eff);
        o = sphere_detect_cm(g, c, pilot_index, opt, &sub);
      } else {
        opt.r0_sq = default_radius_ncm();
        o = sphere_detect_ncm(g, c, pilot_index, opt, &sub);
      }
      for (int k = 0; k + 1 < t_eff; ++k) res.s_hat[j][m + k] = o.s_hat[k];

      auto& agg = res.per_user[j];
      agg.visited_nodes += o.visited_nodes;
      for (int k = 0; k < t_eff; ++k) agg.visited_per_layer[k] += o.visited_per_layer[k];
      agg.radius_restarts += o.radius_restarts;
      agg.s_hat = o.s_hat;
      agg.metric = o.metric;
      agg.h_hat = o.h_hat;
    }
    for (int j = 0; j < m; ++j)
      for (int k = m; k < t; ++k) s(j, k) = c.points[res.s_hat[j][k]];
    h = detail::mmse_channel_estimate(blk.x, s, blk.sigma_w_sq);
    if (res.s_hat == prev) break;
  }
  return res;
}

}  // namespace simodet

#pragma once

#include <cstdint>
#include <stdexcept>

#include "simodet/constellation.hpp"
#include "simodet/rng.hpp"
#include "simodet/types.hpp"

namespace simodet {

// One simulated coherence block: X = h s* + W with the symbol at position T
// pinned to a known pilot. s_true holds the transmitted symbols (the entries
// of the row s*); the optimization-space column vector is its conjugate.
struct ChannelConfig {
  int n_rx = 1;
  int t_coh = 2;
  double snr_db = 0.0;
  Constellation constellation;
  cplx pilot_symbol;  // must be a constellation point
  std::uint64_t seed = 0;
};

struct ReceivedBlock {
  Matrix x;                  // N x T
  Vector h_true;             // N
  Vector s_true;             // T transmitted symbols
  std::vector<int> s_index;  // constellation indices of s_true
  double sigma_w_sq = 0.0;
};

// per-entry complex noise variance: SNR is e_avg / sigma_w^2 per receive antenna
inline double noise_variance(const Constellation& c, double snr_db) {
  return c.e_avg * std::pow(10.0, -snr_db / 10.0);
}

// Deterministic in cfg.seed. Draw order: h, then data symbols (positions
// 1..T-1), then W column by column.
inline ReceivedBlock draw_block(const ChannelConfig& cfg) {
  if (cfg.n_rx < 1) throw std::invalid_argument("draw_block: n_rx must be positive");
  if (cfg.t_coh < 2) throw std::invalid_argument("draw_block: t_coh must be at least 2");
  const int pilot = cfg.constellation.index_of(cfg.pilot_symbol);
  if (pilot < 0) throw std::invalid_argument("draw_block: pilot symbol not in constellation");

  const int n = cfg.n_rx;
  const int t = cfg.t_coh;
  const int nsym = cfg.constellation.size();
  Rng rng(cfg.seed);

  ReceivedBlock blk;
  blk.sigma_w_sq = noise_variance(cfg.constellation, cfg.snr_db);
  blk.h_true.resize(n);
  for (int i = 0; i < n; ++i) blk.h_true(i) = rng.complex_gaussian(1.0);

  blk.s_index.resize(t);
  blk.s_true.resize(t);
  for (int k = 0; k + 1 < t; ++k) blk.s_index[k] = static_cast<int>(rng.below(nsym));
  blk.s_index[t - 1] = pilot;
  for (int k = 0; k < t; ++k) blk.s_true(k) = cfg.constellation.points[blk.s_index[k]];

  blk.x.resize(n, t);
  for (int k = 0; k < t; ++k) {
    for (int i = 0; i < n; ++i) {
      blk.x(i, k) = blk.h_true(i) * blk.s_true(k) + rng.complex_gaussian(blk.sigma_w_sq);
    }
  }
  return blk;
}

// h-hat = X s / ||s||^2 where s is the optimization column (conjugate of the
// transmitted symbols passed in).
inline Vector ml_channel_estimate(const Matrix& x, const Vector& symbols) {
  const double energy = symbols.squaredNorm();
  if (!(energy > 0.0)) throw std::invalid_argument("ml_channel_estimate: zero-energy sequence");
  return (x * symbols.conjugate()) / energy;
}

// ||X - h-hat s*||^2 evaluated as tr(XX*) - ||X s||^2 / ||s||^2.
inline double residual_metric(const Matrix& x, const Vector& symbols) {
  const double energy = symbols.squaredNorm();
  if (!(energy > 0.0)) throw std::invalid_argument("residual_metric: zero-energy sequence");
  const double total = x.squaredNorm();
  const double captured = (x * symbols.conjugate()).squaredNorm() / energy;
  return total - captured;
}

}  // namespace simodet

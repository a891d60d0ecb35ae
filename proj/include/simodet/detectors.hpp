#pragma once

#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

#include "simodet/channel.hpp"
#include "simodet/constellation.hpp"
#include "simodet/linalg.hpp"

namespace simodet {

// Search-tree conventions
// -----------------------
// Candidate sequences are indexed vectors over the constellation; position T
// (the last one) is pinned to the pilot. Layer i of the tree (1-based, as in
// the tree layout: layer T at the top, layer 1 the full sequences) decides the
// symbol at position i. Internally positions/layers are 0-based, so "layer"
// li corresponds to the partial sequence over positions li..T-1.
//
// The metric of a partial sequence is
//   M_{li} = |sum_{k>=li} R(li,k) s_k|^2 + M_{li+1},   s_k = conj(symbol_k),
// nondecreasing from parent to child. The normalized metric divides by
// e_max*li + ||suffix||^2, a lower bound on the full sequence energy, which
// makes it a valid pruning bound for nonconstant-modulus alphabets.
//
// A "visited node" is a partial sequence whose metric gets computed; counters
// tally every such evaluation, including re-visits after a radius restart.

struct GramDecomposition {
  HermitianMatrix gram;  // X*X/N
  double rho = 0.0;      // slightly above the maximum eigenvalue of the Gram
  UpperTriangular r_factor;
};

struct DetectionOutcome {
  std::vector<int> s_hat;  // constellation indices; s_hat.back() is the pilot
  double metric = 0.0;     // final objective value (M or normalized M)
  Vector h_hat;            // filled when the received block is supplied
  std::uint64_t visited_nodes = 0;
  std::vector<std::uint64_t> visited_per_layer;  // [i] for layer i+1
  int radius_restarts = 0;
  std::vector<double> incumbent_history;  // objective at each incumbent update
};

enum class RestartPolicy { Double, JumpToInfinity };
enum class MetricMode { ConstantModulus, Normalized };

struct SphereOptions {
  double r0_sq = 1.0;
  RestartPolicy restart = RestartPolicy::Double;
  bool debug_full_recompute = false;  // re-derive every node metric from scratch
};

inline double default_radius_cm(const Constellation& c, int t) {
  return static_cast<double>(t) * c.d_min_sq / 6.0;
}

inline double default_radius_ncm() { return 2.0 / 45.0; }

inline GramDecomposition prepare(const Matrix& x, double jitter = 1e-12) {
  GramDecomposition g{gram_normalized(x), 0.0, {}};
  const double lam = max_eigenvalue(g.gram);
  g.rho = lam * (1.0 + 1e-9) + 1e-12;
  g.r_factor = cholesky_psd(shifted_matrix(g.gram, g.rho), jitter);
  return g;
}

// Direct evaluation of the objective from the Gram matrix (no Cholesky):
// s*(rho I - G)s, optionally normalized by ||s||^2.
inline double sequence_objective(const HermitianMatrix& gram, double rho, const Constellation& c,
                                 const std::vector<int>& idx, MetricMode mode) {
  const Eigen::Index t = gram.dim();
  Vector s(t);
  for (Eigen::Index k = 0; k < t; ++k) s(k) = std::conj(c.points[idx[k]]);
  const double energy = s.squaredNorm();
  const double value = rho * energy - (s.adjoint() * (gram.m * s))(0, 0).real();
  if (mode == MetricMode::Normalized) return value / energy;
  return value;
}

inline double sequence_objective(const GramDecomposition& g, const Constellation& c,
                                 const std::vector<int>& idx, MetricMode mode) {
  return sequence_objective(g.gram, g.rho, c, idx, mode);
}

// Partial metrics M_{s_{i:T}} for layers T..1 of a fixed sequence, returned as
// out[li] for the 0-based layer li (out[0] is the full-sequence metric).
inline std::vector<double> partial_metrics(const UpperTriangular& r, const Constellation& c,
                                           const std::vector<int>& idx) {
  const int t = static_cast<int>(r.dim());
  std::vector<double> out(t, 0.0);
  double acc = 0.0;
  for (int i = t - 1; i >= 0; --i) {
    cplx row = 0.0;
    for (int k = i; k < t; ++k) row += r.m(i, k) * std::conj(c.points[idx[k]]);
    acc += std::norm(row);
    out[i] = acc;
  }
  return out;
}

// Normalized counterparts: out[li] = M_{li} / (e_max*li + ||suffix li..T-1||^2).
inline std::vector<double> partial_metrics_normalized(const UpperTriangular& r,
                                                      const Constellation& c,
                                                      const std::vector<int>& idx) {
  const int t = static_cast<int>(r.dim());
  std::vector<double> out = partial_metrics(r, c, idx);
  double suffix_energy = 0.0;
  std::vector<double> denom(t, 0.0);
  for (int i = t - 1; i >= 0; --i) {
    suffix_energy += std::norm(c.points[idx[i]]);
    denom[i] = c.e_max * static_cast<double>(i) + suffix_energy;
  }
  for (int i = 0; i < t; ++i) out[i] /= denom[i];
  return out;
}

namespace detail {

struct SphereState {
  const Matrix& r;
  const Constellation& c;
  int t;
  int nsym;
  int pilot;
  MetricMode mode;
  bool debug_full_recompute;

  std::vector<int> idx;
  std::vector<cplx> row_tail;      // sum_{k>li} R(li,k) s_k for the current path
  std::vector<double> acc_metric;  // metric of the partial sequence above li
  std::vector<double> acc_energy;  // energy of positions above li

  DetectionOutcome* out;
  std::vector<int> best_idx;
  double best_key = std::numeric_limits<double>::infinity();
  bool best_valid = false;

  SphereState(const GramDecomposition& g, const Constellation& cc, int pilot_index,
              MetricMode mm, bool debug, DetectionOutcome* o)
      : r(g.r_factor.m),
        c(cc),
        t(static_cast<int>(g.r_factor.dim())),
        nsym(cc.size()),
        pilot(pilot_index),
        mode(mm),
        debug_full_recompute(debug),
        idx(t, 0),
        row_tail(t, cplx(0.0)),
        acc_metric(t, 0.0),
        acc_energy(t, 0.0),
        out(o) {}

  cplx sval(int layer) const { return std::conj(c.points[idx[layer]]); }

  double node_key(int li, double& raw_metric) {
    const cplx pv = c.points[idx[li]];
    const double term = std::norm(row_tail[li] + r(li, li) * std::conj(pv));
    double m = acc_metric[li] + term;
    if (debug_full_recompute) {
      // recompute the node metric from scratch; keeps the incremental path honest
      double acc = 0.0;
      for (int i = t - 1; i >= li; --i) {
        cplx row = 0.0;
        for (int k = i; k < t; ++k) row += r(i, k) * std::conj(c.points[idx[k]]);
        acc += std::norm(row);
      }
      m = acc;
    }
    raw_metric = m;
    if (mode == MetricMode::ConstantModulus) return m;
    const double denom =
        c.e_max * static_cast<double>(li) + acc_energy[li] + std::norm(pv);
    return m / denom;
  }

  // One depth-first pass at the current radius. r2 shrinks to each new
  // incumbent. Returns once the pruned tree is exhausted.
  void pass(double& r2) {
    int li = t - 1;
    idx[li] = pilot;
    row_tail[li] = 0.0;
    acc_metric[li] = 0.0;
    acc_energy[li] = 0.0;
    while (true) {
      double m = 0.0;
      const double key = node_key(li, m);
      ++out->visited_per_layer[li];
      bool descend = !(key > r2);
      if (descend && li == 0) {
        if (!best_valid || key < best_key) {
          best_valid = true;
          best_key = key;
          best_idx = idx;
          r2 = key;
          out->incumbent_history.push_back(key);
        }
        descend = false;
      }
      if (descend) {
        acc_metric[li - 1] = m;
        acc_energy[li - 1] = acc_energy[li] + std::norm(c.points[idx[li]]);
        --li;
        idx[li] = 0;
        cplx tail = 0.0;
        for (int k = li + 1; k < t; ++k) tail += r(li, k) * sval(k);
        row_tail[li] = tail;
        continue;
      }
      // backtrack: smallest layer >= li with an untried index (layer T is pinned)
      int j = li;
      while (j <= t - 2 && idx[j] == nsym - 1) ++j;
      if (j > t - 2) return;
      li = j;
      ++idx[li];
    }
  }
};

}  // namespace detail

inline DetectionOutcome sphere_detect(const GramDecomposition& g, const Constellation& c,
                                      int pilot_index, const SphereOptions& opt, MetricMode mode,
                                      const Matrix* x = nullptr) {
  const int t = static_cast<int>(g.r_factor.dim());
  if (pilot_index < 0 || pilot_index >= c.size())
    throw std::invalid_argument("sphere_detect: pilot index out of range");
  if (!(opt.r0_sq > 0.0)) throw std::invalid_argument("sphere_detect: initial radius must be positive");

  DetectionOutcome out;
  out.visited_per_layer.assign(t, 0);
  detail::SphereState st(g, c, pilot_index, mode, opt.debug_full_recompute, &out);

  double r2 = opt.r0_sq;
  while (true) {
    st.pass(r2);
    if (st.best_valid) break;
    r2 = (opt.restart == RestartPolicy::Double) ? r2 * 4.0
                                                : std::numeric_limits<double>::infinity();
    ++out.radius_restarts;
  }

  out.s_hat = st.best_idx;
  out.metric = st.best_key;
  out.visited_nodes = 0;
  for (auto v : out.visited_per_layer) out.visited_nodes += v;
  if (x) {
    Vector symbols(t);
    for (int k = 0; k < t; ++k) symbols(k) = c.points[out.s_hat[k]];
    out.h_hat = ml_channel_estimate(*x, symbols);
  }
  return out;
}

inline DetectionOutcome sphere_detect_cm(const GramDecomposition& g, const Constellation& c,
                                         int pilot_index, const SphereOptions& opt,
                                         const Matrix* x = nullptr) {
  if (!c.is_constant_modulus)
    throw std::invalid_argument("sphere_detect_cm: constellation is not constant-modulus");
  return sphere_detect(g, c, pilot_index, opt, MetricMode::ConstantModulus, x);
}

inline DetectionOutcome sphere_detect_ncm(const GramDecomposition& g, const Constellation& c,
                                          int pilot_index, const SphereOptions& opt,
                                          const Matrix* x = nullptr) {
  return sphere_detect(g, c, pilot_index, opt, MetricMode::Normalized, x);
}

// Best-first search: repeatedly expand the frontier leaf with the smallest
// metric until a full-length sequence is extracted. Needs no initial radius
// and never visits more nodes than the sphere decoder on the same block.
inline DetectionOutcome tsa_detect(const GramDecomposition& g, const Constellation& c,
                                   int pilot_index, MetricMode mode, const Matrix* x = nullptr) {
  const int t = static_cast<int>(g.r_factor.dim());
  const int nsym = c.size();
  if (pilot_index < 0 || pilot_index >= nsym)
    throw std::invalid_argument("tsa_detect: pilot index out of range");
  const Matrix& r = g.r_factor.m;

  struct Node {
    double m;        // raw metric
    double energy;   // suffix symbol energy
    int layer;       // 0-based; t means root
    int sym;
    int parent;
  };
  struct HeapEntry {
    double key;
    int layer;
    std::uint64_t seq;
    int node;
  };
  struct Cmp {
    bool operator()(const HeapEntry& a, const HeapEntry& b) const {
      if (a.key != b.key) return a.key > b.key;
      if (a.layer != b.layer) return a.layer < b.layer;  // prefer layers closer to the root
      return a.seq > b.seq;                              // then insertion order
    }
  };

  DetectionOutcome out;
  out.visited_per_layer.assign(t, 0);

  std::vector<Node> arena;
  arena.push_back({0.0, 0.0, t, -1, -1});
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, Cmp> frontier;
  std::uint64_t seq = 0;
  frontier.push({0.0, t, seq++, 0});

  std::vector<int> suffix(t, 0);
  while (true) {
    const HeapEntry e = frontier.top();
    frontier.pop();
    const Node nd = arena[e.node];
    if (nd.layer == 0) {
      // full sequence: reconstruct and finish; e.key is the smallest metric
      out.metric = e.key;
      out.incumbent_history.push_back(e.key);
      out.s_hat.assign(t, 0);
      int cur = e.node;
      while (arena[cur].layer < t) {
        out.s_hat[arena[cur].layer] = arena[cur].sym;
        cur = arena[cur].parent;
      }
      break;
    }
    const int child_layer = nd.layer - 1;
    // suffix symbols of the seed node, positions nd.layer..t-1
    {
      int cur = e.node;
      while (arena[cur].layer < t) {
        suffix[arena[cur].layer] = arena[cur].sym;
        cur = arena[cur].parent;
      }
    }
    cplx tail = 0.0;
    for (int k = nd.layer; k < t; ++k)
      tail += r(child_layer, k) * std::conj(c.points[suffix[k]]);

    const int first = (child_layer == t - 1) ? pilot_index : 0;
    const int last = (child_layer == t - 1) ? pilot_index : nsym - 1;
    for (int s = first; s <= last; ++s) {
      const cplx pv = c.points[s];
      const double term = std::norm(tail + r(child_layer, child_layer) * std::conj(pv));
      const double m = nd.m + term;
      const double energy = nd.energy + std::norm(pv);
      const double key =
          (mode == MetricMode::ConstantModulus)
              ? m
              : m / (c.e_max * static_cast<double>(child_layer) + energy);
      ++out.visited_per_layer[child_layer];
      arena.push_back({m, energy, child_layer, s, e.node});
      frontier.push({key, child_layer, seq++, static_cast<int>(arena.size()) - 1});
    }
  }

  out.visited_nodes = 0;
  for (auto v : out.visited_per_layer) out.visited_nodes += v;
  if (x) {
    Vector symbols(t);
    for (int k = 0; k < t; ++k) symbols(k) = c.points[out.s_hat[k]];
    out.h_hat = ml_channel_estimate(*x, symbols);
  }
  return out;
}

// Enumerates every pilot-pinned sequence and evaluates the objective directly
// from the Gram matrix. Position 1 varies fastest; ties keep the first
// sequence found (smallest enumeration index).
inline DetectionOutcome exhaustive_detect(const HermitianMatrix& gram, double rho,
                                          const Constellation& c, int pilot_index,
                                          MetricMode mode, const Matrix* x = nullptr) {
  const int t = static_cast<int>(gram.dim());
  const int nsym = c.size();
  if (pilot_index < 0 || pilot_index >= nsym)
    throw std::invalid_argument("exhaustive_detect: pilot index out of range");
  double total = 1.0;
  for (int k = 0; k + 1 < t; ++k) total *= nsym;
  if (total > static_cast<double>(1 << 24))
    throw std::invalid_argument("exhaustive_detect: search space exceeds 2^24 sequences");

  DetectionOutcome out;
  out.visited_per_layer.assign(t, 0);
  std::vector<int> idx(t, 0);
  idx[t - 1] = pilot_index;
  std::vector<int> best = idx;
  double best_val = std::numeric_limits<double>::infinity();
  std::uint64_t count = 0;
  while (true) {
    const double val = sequence_objective(gram, rho, c, idx, mode);
    ++count;
    if (val < best_val) {
      best_val = val;
      best = idx;
    }
    int k = 0;
    while (k + 1 < t && idx[k] == nsym - 1) {
      idx[k] = 0;
      ++k;
    }
    if (k + 1 >= t) break;
    ++idx[k];
  }
  out.s_hat = best;
  out.metric = best_val;
  out.visited_nodes = count;
  out.visited_per_layer[0] = count;
  if (x) {
    Vector symbols(t);
    for (int k = 0; k < t; ++k) symbols(k) = c.points[out.s_hat[k]];
    out.h_hat = ml_channel_estimate(*x, symbols);
  }
  return out;
}

inline DetectionOutcome exhaustive_detect(const GramDecomposition& g, const Constellation& c,
                                          int pilot_index, MetricMode mode,
                                          const Matrix* x = nullptr) {
  return exhaustive_detect(g.gram, g.rho, c, pilot_index, mode, x);
}

}  // namespace simodet

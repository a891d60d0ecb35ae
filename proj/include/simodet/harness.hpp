#pragma once

#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "simodet/baselines.hpp"
#include "simodet/detectors.hpp"

namespace simodet {

enum class DetectorKind {
  SphereCm,
  SphereNcm,
  Tsa,
  Exhaustive,
  Ls,
  Mmse,
  LsIter,
  MmseIter,
  MimoMl,
  MimoMmseIter,
  MimoMmse
};

inline const char* detector_name(DetectorKind k) {
  switch (k) {
    case DetectorKind::SphereCm: return "sphere_cm";
    case DetectorKind::SphereNcm: return "sphere_ncm";
    case DetectorKind::Tsa: return "tsa";
    case DetectorKind::Exhaustive: return "exhaustive";
    case DetectorKind::Ls: return "ls";
    case DetectorKind::Mmse: return "mmse";
    case DetectorKind::LsIter: return "ls_iter";
    case DetectorKind::MmseIter: return "mmse_iter";
    case DetectorKind::MimoMl: return "mimo_ml";
    case DetectorKind::MimoMmseIter: return "mimo_mmse_iter";
    case DetectorKind::MimoMmse: return "mimo_mmse";
  }
  return "?";
}

inline DetectorKind detector_from_name(const std::string& s) {
  for (DetectorKind k :
       {DetectorKind::SphereCm, DetectorKind::SphereNcm, DetectorKind::Tsa,
        DetectorKind::Exhaustive, DetectorKind::Ls, DetectorKind::Mmse, DetectorKind::LsIter,
        DetectorKind::MmseIter, DetectorKind::MimoMl, DetectorKind::MimoMmseIter,
        DetectorKind::MimoMmse}) {
    if (s == detector_name(k)) return k;
  }
  throw std::invalid_argument("unknown detector: " + s);
}

struct ExperimentSpec {
  std::string name = "experiment";
  DetectorKind detector = DetectorKind::Tsa;
  std::vector<int> n_list{100};
  std::vector<int> t_list{8};
  std::vector<double> snr_list{0.0};
  std::string constellation = "qpsk";
  int trials = 10000;
  std::uint64_t seed = 1;
  std::optional<double> radius_override;
  RestartPolicy restart = RestartPolicy::Double;
  int iterations = 100;
  std::optional<int> m_users;
};

struct ResultRow {
  std::string name;
  std::string detector;
  std::string constellation;
  int n = 0;
  int t = 0;
  double snr_db = 0.0;
  int trials = 0;
  double ser = 0.0;
  double ser_stderr = 0.0;
  double mean_visited = 0.0;
  double visited_stderr = 0.0;
  double mean_restarts = 0.0;
  double wall_time_s = 0.0;
};

struct RunTiming {
  double total_s = 0.0;
  std::vector<double> per_row_s;
};

inline int worker_count_from_env() {
  if (const char* env = std::getenv("SIMODET_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace detail {

struct TrialStat {
  int errors = 0;
  int denom = 0;
  std::uint64_t visited = 0;
  int restarts = 0;
};

inline bool is_mimo(DetectorKind k) {
  return k == DetectorKind::MimoMl || k == DetectorKind::MimoMmseIter ||
         k == DetectorKind::MimoMmse;
}

inline bool is_ml_simo(DetectorKind k) {
  return k == DetectorKind::SphereCm || k == DetectorKind::SphereNcm ||
         k == DetectorKind::Tsa || k == DetectorKind::Exhaustive;
}

inline TrialStat run_simo_trial(const ExperimentSpec& spec, const Constellation& cons, int n,
                                int t, double snr, std::uint64_t trial_seed) {
  ChannelConfig cfg{n, t, snr, cons, cons.points[0], trial_seed};
  ReceivedBlock blk = draw_block(cfg);
  const int pilot = 0;

  DetectionOutcome out;
  switch (spec.detector) {
    case DetectorKind::SphereCm: {
      GramDecomposition g = prepare(blk.x);
      SphereOptions opt{spec.radius_override.value_or(default_radius_cm(cons, t)), spec.restart};
      out = sphere_detect_cm(g, cons, pilot, opt);
      break;
    }
    case DetectorKind::SphereNcm: {
      GramDecomposition g = prepare(blk.x);
      SphereOptions opt{spec.radius_override.value_or(default_radius_ncm()), spec.restart};
      out = sphere_detect_ncm(g, cons, pilot, opt);
      break;
    }
    case DetectorKind::Tsa: {
      GramDecomposition g = prepare(blk.x);
      out = tsa_detect(g, cons, pilot,
                       cons.is_constant_modulus ? MetricMode::ConstantModulus
                                                : MetricMode::Normalized);
      break;
    }
    case DetectorKind::Exhaustive: {
      GramDecomposition g = prepare(blk.x);
      out = exhaustive_detect(g, cons, pilot,
                              cons.is_constant_modulus ? MetricMode::ConstantModulus
                                                       : MetricMode::Normalized);
      break;
    }
    case DetectorKind::Ls:
    case DetectorKind::LsIter: {
      BaselineConfig bc{Estimator::LS,
                        spec.detector == DetectorKind::Ls ? 0 : spec.iterations};
      out = iterative_detect(blk, bc, cons, pilot);
      break;
    }
    case DetectorKind::Mmse:
    case DetectorKind::MmseIter: {
      BaselineConfig bc{Estimator::MMSE,
                        spec.detector == DetectorKind::Mmse ? 0 : spec.iterations};
      out = iterative_detect(blk, bc, cons, pilot);
      break;
    }
    default:
      throw std::logic_error("run_simo_trial: not a SIMO detector");
  }

  TrialStat st;
  st.denom = t - 1;
  for (int k = 0; k + 1 < t; ++k) {
    if (out.s_hat[k] != blk.s_index[k]) ++st.errors;
  }
  st.visited = out.visited_nodes;
  st.restarts = out.radius_restarts;
  return st;
}

inline TrialStat run_mimo_trial(const ExperimentSpec& spec, const Constellation& cons, int n,
                                int t, double snr, std::uint64_t trial_seed) {
  const int m = spec.m_users.value_or(1);
  MimoConfig cfg{n, t, m, snr, cons, trial_seed};
  MimoBlock blk = draw_mimo_block(cfg);

  MimoResult res;
  switch (spec.detector) {
    case DetectorKind::MimoMl:
      res = mimo_detect(blk, cons, spec.iterations > 0 ? std::min(spec.iterations, 10) : 10);
      break;
    case DetectorKind::MimoMmse:
      res = mimo_mmse_detect(blk, cons, 0);
      break;
    case DetectorKind::MimoMmseIter:
      res = mimo_mmse_detect(blk, cons, 10);
      break;
    default:
      throw std::logic_error("run_mimo_trial: not a MIMO detector");
  }

  TrialStat st;
  st.denom = m * (t - m);
  for (int j = 0; j < m; ++j) {
    for (int k = m; k < t; ++k) {
      if (res.s_hat[j][k] != blk.s_index[j][k]) ++st.errors;
    }
  }
  for (const auto& o : res.per_user) st.visited += o.visited_nodes;
  return st;
}

}  // namespace detail

inline void validate(const ExperimentSpec& spec) {
  const Constellation& cons = constellation_by_name(spec.constellation);
  if (spec.trials < 1) throw std::invalid_argument("spec: trials must be >= 1");
  if (spec.n_list.empty() || spec.t_list.empty() || spec.snr_list.empty())
    throw std::invalid_argument("spec: empty grid");
  if (spec.detector == DetectorKind::SphereCm && !cons.is_constant_modulus)
    throw std::invalid_argument("spec: sphere_cm requires a constant-modulus constellation");
  if (detail::is_mimo(spec.detector)) {
    const int m = spec.m_users.value_or(0);
    if (m < 1) throw std::invalid_argument("spec: MIMO detectors need m_users");
    for (int t : spec.t_list)
      if (t <= m) throw std::invalid_argument("spec: MIMO needs T > m_users");
  }
  if (spec.iterations < 0 || spec.iterations > 10000)
    throw std::invalid_argument("spec: iterations out of range");
  for (int t : spec.t_list)
    if (t < 2) throw std::invalid_argument("spec: T must be >= 2");
}

// Runs the full (N, T, SNR) grid. Per-trial seeds are derived from
// (seed, grid index, trial index), trials execute on `workers` threads, and
// results reduce in trial order, so output is independent of the worker count.
// Row order: N outermost, then T, then SNR. Wall time is reported via
// `timing`; the rows' wall_time_s stays zero so emitted CSVs are reproducible.
inline std::vector<ResultRow> run(const ExperimentSpec& spec, int workers = 0,
                                  RunTiming* timing = nullptr) {
  validate(spec);
  const Constellation& cons = constellation_by_name(spec.constellation);
  if (workers <= 0) workers = worker_count_from_env();

  std::vector<ResultRow> rows;
  if (timing) {
    timing->total_s = 0.0;
    timing->per_row_s.clear();
  }
  std::uint64_t grid_index = 0;
  for (int n : spec.n_list) {
    for (int t : spec.t_list) {
      for (double snr : spec.snr_list) {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<detail::TrialStat> stats(spec.trials);
        std::atomic<int> next{0};
        auto body = [&]() {
          while (true) {
            const int i = next.fetch_add(1);
            if (i >= spec.trials) break;
            const std::uint64_t trial_seed = derive_seed(spec.seed, grid_index, i);
            stats[i] = detail::is_mimo(spec.detector)
                           ? detail::run_mimo_trial(spec, cons, n, t, snr, trial_seed)
                           : detail::run_simo_trial(spec, cons, n, t, snr, trial_seed);
          }
        };
        if (workers == 1) {
          body();
        } else {
          std::vector<std::thread> pool;
          for (int w = 0; w < workers; ++w) pool.emplace_back(body);
          for (auto& th : pool) th.join();
        }

        ResultRow row;
        row.name = spec.name;
        row.detector = detector_name(spec.detector);
        row.constellation = spec.constellation;
        row.n = n;
        row.t = t;
        row.snr_db = snr;
        row.trials = spec.trials;

        long long total_errors = 0;
        std::uint64_t total_visited = 0;
        long long total_restarts = 0;
        for (const auto& st : stats) {
          total_errors += st.errors;
          total_visited += st.visited;
          total_restarts += st.restarts;
        }
        const double denom = static_cast<double>(stats[0].denom);
        row.ser = static_cast<double>(total_errors) / (denom * spec.trials);
        row.mean_visited = static_cast<double>(total_visited) / spec.trials;
        row.mean_restarts = static_cast<double>(total_restarts) / spec.trials;
        double var_ser = 0.0, var_vis = 0.0;
        for (const auto& st : stats) {
          const double ds = st.errors / denom - row.ser;
          var_ser += ds * ds;
          const double dv = static_cast<double>(st.visited) - row.mean_visited;
          var_vis += dv * dv;
        }
        const double nf = spec.trials > 1 ? static_cast<double>(spec.trials - 1) : 1.0;
        row.ser_stderr = std::sqrt(var_ser / nf) / std::sqrt(static_cast<double>(spec.trials));
        row.visited_stderr =
            std::sqrt(var_vis / nf) / std::sqrt(static_cast<double>(spec.trials));
        rows.push_back(std::move(row));

        if (timing) {
          const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
          timing->per_row_s.push_back(dt);
          timing->total_s += dt;
        }
        ++grid_index;
      }
    }
  }
  return rows;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

inline void emit_csv(const std::vector<ResultRow>& rows, std::ostream& os) {
  if (rows.empty()) throw std::invalid_argument("emit_csv: no rows");
  os << "name,detector,constellation,N,T,snr_db,trials,ser,ser_stderr,mean_visited,"
        "visited_stderr,mean_restarts,wall_time_s\n";
  for (const auto& r : rows) {
    os << r.name << ',' << r.detector << ',' << r.constellation << ',' << r.n << ',' << r.t
       << ',' << format_real(r.snr_db) << ',' << r.trials << ',' << format_real(r.ser) << ','
       << format_real(r.ser_stderr) << ',' << format_real(r.mean_visited) << ','
       << format_real(r.visited_stderr) << ',' << format_real(r.mean_restarts) << ','
       << format_real(r.wall_time_s) << '\n';
  }
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream f(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!f) throw std::runtime_error("emit_csv: cannot open " + path);
  emit_csv(rows, f);
  if (!f.good()) throw std::runtime_error("emit_csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Spec files: plain "key = value" lines, '#' comments, comma/space separated
// lists for N / T / snr_db.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == ',' || ch == ' ' || ch == '\t') {
      if (!cur.empty()) out.push_back(std::exchange(cur, {}));
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

inline void apply_spec_setting(ExperimentSpec& spec, const std::string& key,
                               const std::string& value) {
  using detail::split_list;
  if (key == "name") {
    spec.name = value;
  } else if (key == "detector") {
    spec.detector = detector_from_name(value);
  } else if (key == "constellation") {
    spec.constellation = value;
  } else if (key == "N") {
    spec.n_list.clear();
    for (const auto& v : split_list(value)) spec.n_list.push_back(std::stoi(v));
  } else if (key == "T") {
    spec.t_list.clear();
    for (const auto& v : split_list(value)) spec.t_list.push_back(std::stoi(v));
  } else if (key == "snr_db") {
    spec.snr_list.clear();
    for (const auto& v : split_list(value)) spec.snr_list.push_back(std::stod(v));
  } else if (key == "trials") {
    spec.trials = std::stoi(value);
  } else if (key == "seed") {
    spec.seed = std::stoull(value);
  } else if (key == "radius") {
    spec.radius_override = std::stod(value);
  } else if (key == "restart_policy") {
    if (value == "double") spec.restart = RestartPolicy::Double;
    else if (value == "infinity") spec.restart = RestartPolicy::JumpToInfinity;
    else throw std::invalid_argument("spec: restart_policy must be double|infinity");
  } else if (key == "iterations") {
    spec.iterations = std::stoi(value);
  } else if (key == "m_users") {
    spec.m_users = std::stoi(value);
  } else {
    throw std::invalid_argument("spec: unknown key '" + key + "'");
  }
}

inline ExperimentSpec parse_spec_text(const std::string& text) {
  ExperimentSpec spec;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("spec: missing '=' on line " + std::to_string(lineno));
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    apply_spec_setting(spec, key, value);
  }
  return spec;
}

inline ExperimentSpec parse_spec_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("spec: cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_spec_text(ss.str());
}

}  // namespace simodet

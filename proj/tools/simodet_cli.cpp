// Command-line front end: Monte-Carlo sweeps from spec files, one-shot
// self-validation, bundled figure experiments, and node-count sweeps.
//
// Exit codes: 0 success, 1 verification/check failure, 2 bad configuration.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "simodet/figures.hpp"
#include "simodet/verify.hpp"

namespace {

using nlohmann::json;

json spec_to_json(const simodet::ExperimentSpec& s) {
  json j;
  j["name"] = s.name;
  j["detector"] = simodet::detector_name(s.detector);
  j["constellation"] = s.constellation;
  j["N"] = s.n_list;
  j["T"] = s.t_list;
  j["snr_db"] = s.snr_list;
  j["trials"] = s.trials;
  j["seed"] = s.seed;
  if (s.radius_override) j["radius"] = *s.radius_override;
  j["restart_policy"] =
      s.restart == simodet::RestartPolicy::Double ? "double" : "infinity";
  j["iterations"] = s.iterations;
  if (s.m_users) j["m_users"] = *s.m_users;
  return j;
}

void write_manifest(const std::string& path, const json& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open manifest path " + path);
  f << body.dump(2) << '\n';
}

constexpr const char* kVersion = "simodet 0.1.0";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simodet: joint ML channel estimation / non-coherent detection simulator"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  // simulate ----------------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "run a spec file and write CSV + manifest");
  std::string spec_path, out_path, manifest_path;
  std::vector<std::string> overrides;
  bool timing_in_csv = false;
  sim->add_option("spec", spec_path, "experiment spec file")->required();
  sim->add_option("-o,--out", out_path, "output CSV path (default <name>.csv)");
  sim->add_option("--manifest", manifest_path, "manifest path (default <name>.manifest.json)");
  sim->add_option("--set", overrides, "override spec entries, key=value")->take_all();
  sim->add_flag("--timing", timing_in_csv,
                "write measured wall times into the CSV (breaks byte reproducibility)");

  // verify ------------------------------------------------------------------
  auto* ver = app.add_subcommand("verify", "run the closed-form and oracle self-checks");
  bool full = false;
  ver->add_flag("--full", full, "acceptance-grade sample sizes");

  // figure ------------------------------------------------------------------
  auto* fig = app.add_subcommand("figure", "run a bundled figure experiment");
  std::string fig_name, fig_dir = ".";
  int fig_trials = 0;
  fig->add_option("name", fig_name, "fig2|fig3|fig4|fig5|fig6|fig7|fig8|fig9")->required();
  fig->add_option("--out-dir", fig_dir, "output directory");
  fig->add_option("--trials", fig_trials, "override trials per grid point");

  // complexity ---------------------------------------------------------------
  auto* cx = app.add_subcommand("complexity", "visited-node sweep over N");
  std::string cx_const = "qpsk", cx_out = "complexity.csv";
  int cx_t = 20, cx_trials = 200;
  double cx_snr = -4.0;
  double cx_radius = 0.0;
  std::vector<int> cx_n = {10, 50, 100, 500};
  cx->add_option("--constellation", cx_const, "bpsk|qpsk|16qam");
  cx->add_option("-T,--t-coh", cx_t, "coherence length");
  cx->add_option("--snr", cx_snr, "SNR in dB");
  cx->add_option("--radius", cx_radius, "sphere radius^2 override (0 = default)");
  cx->add_option("--trials", cx_trials, "trials per N");
  cx->add_option("-N,--n-list", cx_n, "receive antenna counts")->take_all();
  cx->add_option("-o,--out", cx_out, "output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const int workers = simodet::worker_count_from_env();

    if (*sim) {
      simodet::ExperimentSpec spec = simodet::parse_spec_file(spec_path);
      for (const auto& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
          throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
        simodet::apply_spec_setting(spec, kv.substr(0, eq), kv.substr(eq + 1));
      }
      if (out_path.empty()) out_path = spec.name + ".csv";
      if (manifest_path.empty()) manifest_path = spec.name + ".manifest.json";

      simodet::RunTiming timing;
      std::vector<simodet::ResultRow> rows = simodet::run(spec, workers, &timing);
      if (timing_in_csv) {
        for (std::size_t i = 0; i < rows.size(); ++i) rows[i].wall_time_s = timing.per_row_s[i];
      }
      simodet::emit_csv(rows, out_path);

      json manifest;
      manifest["version"] = kVersion;
      manifest["spec"] = spec_to_json(spec);
      manifest["workers"] = workers;
      manifest["csv"] = out_path;
      manifest["rows"] = rows.size();
      manifest["wall_time_s"] = timing.total_s;
      manifest["row_wall_time_s"] = timing.per_row_s;
      write_manifest(manifest_path, manifest);
      std::cout << "wrote " << rows.size() << " rows to " << out_path << " ("
                << timing.total_s << " s)\n";
      return 0;
    }

    if (*ver) {
      const auto results = simodet::run_verification(full);
      bool all = true;
      for (const auto& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
        all = all && r.pass;
      }
      std::cout << (all ? "verify: all checks passed\n" : "verify: FAILURES present\n");
      return all ? 0 : 1;
    }

    if (*fig) {
      const auto specs = simodet::figure_specs(fig_name);
      std::vector<simodet::ResultRow> rows;
      json manifest;
      manifest["version"] = kVersion;
      manifest["figure"] = fig_name;
      manifest["description"] = simodet::figure_catalog().at(fig_name);
      json spec_list = json::array();
      double total_s = 0.0;
      for (auto spec : specs) {
        if (fig_trials > 0) spec.trials = fig_trials;
        simodet::RunTiming timing;
        auto part = simodet::run(spec, workers, &timing);
        rows.insert(rows.end(), part.begin(), part.end());
        spec_list.push_back(spec_to_json(spec));
        total_s += timing.total_s;
        std::cout << fig_name << ": " << simodet::detector_name(spec.detector) << " done ("
                  << timing.total_s << " s)\n";
      }
      const std::string csv = fig_dir + "/" + fig_name + ".csv";
      simodet::emit_csv(rows, csv);
      manifest["specs"] = spec_list;
      manifest["csv"] = csv;
      manifest["wall_time_s"] = total_s;
      write_manifest(fig_dir + "/" + fig_name + ".manifest.json", manifest);
      std::cout << "wrote " << rows.size() << " rows to " << csv << '\n';
      return 0;
    }

    if (*cx) {
      const simodet::Constellation& c = simodet::constellation_by_name(cx_const);
      std::vector<simodet::ResultRow> rows;
      for (simodet::DetectorKind d :
           {c.is_constant_modulus ? simodet::DetectorKind::SphereCm
                                  : simodet::DetectorKind::SphereNcm,
            simodet::DetectorKind::Tsa}) {
        simodet::ExperimentSpec spec;
        spec.name = "complexity";
        spec.detector = d;
        spec.constellation = cx_const;
        spec.n_list = cx_n;
        spec.t_list = {cx_t};
        spec.snr_list = {cx_snr};
        spec.trials = cx_trials;
        spec.seed = 4242;
        if (cx_radius > 0.0 && d != simodet::DetectorKind::Tsa)
          spec.radius_override = cx_radius;
        auto part = simodet::run(spec, workers);
        rows.insert(rows.end(), part.begin(), part.end());
      }
      simodet::emit_csv(rows, cx_out);
      std::cout << "wrote " << rows.size() << " rows to " << cx_out << '\n';
      return 0;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

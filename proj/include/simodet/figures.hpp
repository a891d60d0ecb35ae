#pragma once

#include <map>
#include <string>
#include <vector>

#include "simodet/harness.hpp"

namespace simodet {

// Bundled experiment specs, one bundle per reported plot, sized for a desktop
// run. Each bundle is a list of specs (one per scheme) whose rows concatenate
// into a single CSV.

inline std::vector<ExperimentSpec> figure_specs(const std::string& fig) {
  auto base = [](const std::string& name, DetectorKind d) {
    ExperimentSpec s;
    s.name = name;
    s.detector = d;
    return s;
  };

  std::vector<ExperimentSpec> out;
  if (fig == "fig2" || fig == "fig3" || fig == "fig4" || fig == "fig9") {
    // QPSK symbol error rate vs SNR: ML against LS (fig2/fig3) or MMSE
    // (fig4/fig9) estimate-and-detect baselines, T = 8 or 20, N = 100.
    const bool ls = (fig == "fig2" || fig == "fig3");
    const int t = (fig == "fig2" || fig == "fig4") ? 8 : 20;
    const DetectorKind iter = ls ? DetectorKind::LsIter : DetectorKind::MmseIter;
    const DetectorKind oneshot = ls ? DetectorKind::Ls : DetectorKind::Mmse;
    for (DetectorKind d : {DetectorKind::Tsa, iter, oneshot}) {
      ExperimentSpec s = base(fig, d);
      s.constellation = "qpsk";
      s.n_list = {100};
      s.t_list = {t};
      s.snr_list = {-16, -15, -14, -13, -12, -11, -10, -9, -8, -7, -6, -5, -4};
      s.trials = 4000;
      s.seed = 9000 + t;
      out.push_back(std::move(s));
    }
  } else if (fig == "fig5") {
    // Average visited nodes per block, QPSK T = 20, sphere radius T/3 and TSA.
    for (DetectorKind d : {DetectorKind::SphereCm, DetectorKind::Tsa}) {
      ExperimentSpec s = base(fig, d);
      s.constellation = "qpsk";
      s.n_list = {10, 50, 100, 500};
      s.t_list = {20};
      s.snr_list = {-6, -4, -2, 0, 2, 4};
      s.trials = 200;
      s.seed = 9500;
      if (d == DetectorKind::SphereCm) s.radius_override = 20.0 / 3.0;
      out.push_back(std::move(s));
    }
  } else if (fig == "fig6") {
    // 16-QAM SER vs SNR, T = 12, ML against iterative/non-iterative MMSE.
    for (DetectorKind d : {DetectorKind::Tsa, DetectorKind::MmseIter, DetectorKind::Mmse}) {
      ExperimentSpec s = base(fig, d);
      s.constellation = "16qam";
      s.n_list = {100};
      s.t_list = {12};
      s.snr_list = {-5, -4, -3, -2, -1, 0, 1, 2, 3, 4};
      s.trials = 4000;
      s.seed = 9600;
      out.push_back(std::move(s));
    }
  } else if (fig == "fig7") {
    // Average visited nodes, 16-QAM T = 12, sphere radius 2/45 and TSA.
    for (DetectorKind d : {DetectorKind::SphereNcm, DetectorKind::Tsa}) {
      ExperimentSpec s = base(fig, d);
      s.constellation = "16qam";
      s.n_list = {50, 100, 500};
      s.t_list = {12};
      s.snr_list = {-4, -2, 0, 2, 4};
      s.trials = 100;
      s.seed = 9700;
      if (d == DetectorKind::SphereNcm) s.radius_override = 2.0 / 45.0;
      out.push_back(std::move(s));
    }
  } else if (fig == "fig8") {
    // Four-user MIMO uplink, QPSK T = 20: interference-cancelling ML scheme
    // against iterative and non-iterative MMSE.
    for (DetectorKind d :
         {DetectorKind::MimoMl, DetectorKind::MimoMmseIter, DetectorKind::MimoMmse}) {
      ExperimentSpec s = base(fig, d);
      s.constellation = "qpsk";
      s.n_list = {100};
      s.t_list = {20};
      s.snr_list = {-16, -15, -14, -13, -12, -11, -10, -9, -8, -7, -6};
      s.trials = 2000;
      s.seed = 9800;
      s.m_users = 4;
      out.push_back(std::move(s));
    }
  } else {
    throw std::invalid_argument("unknown figure: " + fig + " (expected fig2..fig9)");
  }
  return out;
}

inline const std::map<std::string, std::string>& figure_catalog() {
  static const std::map<std::string, std::string> cat = {
      {"fig2", "QPSK T=8 N=100 SER: ML vs LS / iterative LS"},
      {"fig3", "QPSK T=20 N=100 SER: ML vs LS / iterative LS"},
      {"fig4", "QPSK T=8 N=100 SER: ML vs MMSE / iterative MMSE"},
      {"fig5", "QPSK T=20 visited nodes vs SNR for N in {10,50,100,500}"},
      {"fig6", "16-QAM T=12 N=100 SER: ML vs MMSE / iterative MMSE"},
      {"fig7", "16-QAM T=12 visited nodes vs SNR for N in {50,100,500}"},
      {"fig8", "4-user MIMO QPSK T=20 N=100 SER: IC-ML vs MMSE schemes"},
      {"fig9", "QPSK T=20 N=100 SER: ML vs MMSE / iterative MMSE"},
  };
  return cat;
}

}  // namespace simodet

#pragma once

#include <optional>
#include <vector>

#include "ncjt/analytic.hpp"
#include "ncjt/config.hpp"

namespace ncjt {

struct DesignQuery {
  double gamma = 0.9;                   // target SNR fraction, 0 < gamma < 1
  std::optional<double> snr0_db;        // overrides cfg.sigma_w_sq when set
  int scan_cap = 1000;                  // largest cluster size scanned
  long np_cap = 1000000;                // largest pilot length considered

  void validate() const;
};

// cfg with sigma_w_sq set from a reference SNR in dB.
SystemConfig at_snr0_db(const SystemConfig& cfg, double snr0_db);

struct PilotLengthApprox {
  double value;
  bool valid;  // gamma (n_a + 1) >= 10, the threshold used for gamma >> 1/(n_a + 1)
};

// gamma n_a (sigma_phi^2 - sigma_c^2 + sigma_w^2)(sigma_c^2 + sigma_w^2)
//   / ((1 - gamma) sigma_c^2 sigma_w^2).
// Rejects sigma_w_sq = 0, where the expression diverges.
PilotLengthApprox np_star_approx(const SystemConfig& cfg, double gamma);
PilotLengthApprox np_star_approx(double gamma, int n_a, const ClusterEnergy& energy, double sigma_w_sq);

// Smallest integer n_p <= np_cap whose effective SNR reaches target_snr.
// Bisection on the monotone SNR(n_p); if a log-spaced probe finds SNR
// decreasing anywhere, falls back to a linear scan. Throws UnreachableTarget
// carrying the limiting SNR when no n_p <= np_cap suffices.
long np_star_numeric(const SystemConfig& cfg, double target_snr, long np_cap = 1000000);
long np_star_numeric(const SystemConfig& cfg, const ClusterEnergy& energy, double target_snr,
                     long np_cap = 1000000);

// Energies of the clusters n_a = 1..cap (index n_a - 1).
std::vector<ClusterEnergy> energy_profile(const SystemConfig& cfg, int cap);

// sigma_c^2 / (n_a (sigma_phi^2 - sigma_c^2)): the pilot-contamination SNR
// per unit of n_p / n_a.
double contamination_objective(int n_a, const ClusterEnergy& energy);

struct ClusterChoice {
  int n_a;
  bool cap_reached;  // argmax sits on the scan cap: optimum unbounded in practice
  double objective;
};

// argmax over n_a = 1..scan_cap of the contamination objective, ties to the
// smaller n_a.
ClusterChoice na_star_contamination(const SystemConfig& cfg, const DesignQuery& query);
ClusterChoice na_star_contamination(const std::vector<ClusterEnergy>& profile);

// Smallest n_a whose objective reaches gamma times the scan maximum.
int na_suboptimal(const SystemConfig& cfg, const DesignQuery& query, double gamma);
int na_suboptimal(const std::vector<ClusterEnergy>& profile, double gamma);

enum class Dominance { none, single_ap, two_ap };

struct Crossover {
  std::optional<double> n_p;  // real pilot length where SNR(2) = SNR(1)
  Dominance dominant = Dominance::none;  // set when there is no crossing in range
  double residual = 0.0;      // |SNR2 - SNR1| / SNR1 at the root
};

// Real n_p in (1, np_cap) above which n_a = 2 beats n_a = 1, for the noise
// level in cfg. Scans a log grid for the last sign change of SNR2 - SNR1 from
// negative to positive, then bisects.
Crossover ncjt_crossover(const SystemConfig& cfg, double np_cap = 1e6);

// Analytic effective SNR for a real pilot length.
double snr_at(int n_a, double n_p, double sigma_w_sq, const ClusterEnergy& energy);

struct BestCluster {
  int n_a;
  double snr;
};

// Largest effective SNR over n_a = 1..profile.size() at pilot length n_p.
BestCluster best_cluster_snr(const std::vector<ClusterEnergy>& profile, double n_p, double sigma_w_sq);

}  // namespace ncjt

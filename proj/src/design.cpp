#include "ncjt/design.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "ncjt/error.hpp"

namespace ncjt {

void DesignQuery::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("design query: gamma must lie in (0, 1)");
  if (scan_cap < 1) throw std::invalid_argument("design query: scan_cap must be at least 1");
  if (np_cap < 1) throw std::invalid_argument("design query: np_cap must be at least 1");
}

SystemConfig at_snr0_db(const SystemConfig& cfg, double snr0_db) {
  return cfg.with_noise(noise_for_snr0(cfg, db_to_linear(snr0_db)));
}

PilotLengthApprox np_star_approx(double gamma, int n_a, const ClusterEnergy& energy, double sigma_w_sq) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("np_star_approx: gamma must lie in (0, 1)");
  if (!(sigma_w_sq > 0.0)) throw std::invalid_argument("np_star_approx: diverges for sigma_w_sq = 0");
  const double c = energy.sigma_c_sq;
  const double value = gamma * n_a * (energy.out_of_cluster + sigma_w_sq) * (c + sigma_w_sq) /
                       ((1.0 - gamma) * c * sigma_w_sq);
  return {value, gamma * (n_a + 1) >= 10.0};
}

PilotLengthApprox np_star_approx(const SystemConfig& cfg, double gamma) {
  cfg.validate();
  return np_star_approx(gamma, cfg.n_a, cluster_energy(cfg), cfg.sigma_w_sq);
}

double snr_at(int n_a, double n_p, double sigma_w_sq, const ClusterEnergy& energy) {
  const double e = sigma_e_sq_asymptotic(n_a, n_p, sigma_w_sq, energy);
  return snr_effective(energy.sigma_c_sq, e, sigma_w_sq);
}

long np_star_numeric(const SystemConfig& cfg, const ClusterEnergy& energy, double target_snr, long np_cap) {
  if (np_cap < 1) throw std::invalid_argument("np_star_numeric: np_cap must be at least 1");
  if (target_snr <= 0.0) return 1;
  auto snr = [&](long n_p) { return snr_at(cfg.n_a, static_cast<double>(n_p), cfg.sigma_w_sq, energy); };

  const double ceiling = cfg.sigma_w_sq > 0.0 ? energy.sigma_c_sq / cfg.sigma_w_sq
                                              : std::numeric_limits<double>::infinity();
  if (target_snr >= ceiling || snr(np_cap) < target_snr) {
    std::ostringstream msg;
    msg << "np_star_numeric: target SNR " << target_snr << " not reached with n_p <= " << np_cap
        << " (limit " << ceiling << ")";
    throw UnreachableTarget(msg.str(), ceiling);
  }
  if (snr(1) >= target_snr) return 1;

  long lo = 1, hi = np_cap;  // snr(lo) < target <= snr(hi)
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    (snr(mid) >= target_snr ? hi : lo) = mid;
  }

  // The bisection is only sound when SNR grows with n_p; probe that on a
  // geometric grid below the answer.
  bool monotone = true;
  double prev = -std::numeric_limits<double>::infinity();
  for (double x = 1.0; x <= static_cast<double>(hi); x *= 1.25) {
    const double v = snr(static_cast<long>(x));
    if (v < prev * (1.0 - 1e-12)) {
      monotone = false;
      break;
    }
    prev = v;
  }
  if (monotone) return hi;
  for (long n_p = 1; n_p <= np_cap; ++n_p)
    if (snr(n_p) >= target_snr) return n_p;
  return hi;  // unreachable: snr(np_cap) >= target was checked above
}

long np_star_numeric(const SystemConfig& cfg, double target_snr, long np_cap) {
  cfg.validate();
  return np_star_numeric(cfg, cluster_energy(cfg), target_snr, np_cap);
}

std::vector<ClusterEnergy> energy_profile(const SystemConfig& cfg, int cap) {
  if (cap < 1) throw std::invalid_argument("energy_profile: cap must be at least 1");
  std::vector<ClusterEnergy> out;
  out.reserve(cap);
  for (int n = 1; n <= cap; ++n) out.push_back(cluster_energy(cfg.with_cluster(n)));
  return out;
}

double contamination_objective(int n_a, const ClusterEnergy& energy) {
  if (!(energy.out_of_cluster > 0.0))
    throw std::invalid_argument("contamination_objective: undefined when the cluster holds all the energy");
  return energy.sigma_c_sq / (n_a * energy.out_of_cluster);
}

ClusterChoice na_star_contamination(const std::vector<ClusterEnergy>& profile) {
  if (profile.empty()) throw std::invalid_argument("na_star_contamination: empty profile");
  ClusterChoice best{1, false, contamination_objective(1, profile[0])};
  for (std::size_t i = 1; i < profile.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    const double v = contamination_objective(n, profile[i]);
    if (v > best.objective) best = {n, false, v};
  }
  best.cap_reached = best.n_a == static_cast<int>(profile.size()) && profile.size() > 1;
  return best;
}

ClusterChoice na_star_contamination(const SystemConfig& cfg, const DesignQuery& query) {
  query.validate();
  return na_star_contamination(energy_profile(cfg, query.scan_cap));
}

int na_suboptimal(const std::vector<ClusterEnergy>& profile, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("na_suboptimal: gamma must lie in (0, 1)");
  // When the argmax is on the cap this maximum is the objective at the cap,
  // standing in for the supremum of the unbounded regime.
  const double threshold = gamma * na_star_contamination(profile).objective;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (contamination_objective(n, profile[i]) >= threshold) return n;
  }
  return static_cast<int>(profile.size());
}

int na_suboptimal(const SystemConfig& cfg, const DesignQuery& query, double gamma) {
  query.validate();
  return na_suboptimal(energy_profile(cfg, query.scan_cap), gamma);
}

Crossover ncjt_crossover(const SystemConfig& cfg, double np_cap) {
  cfg.validate();
  if (!(np_cap > 1.0)) throw std::invalid_argument("ncjt_crossover: np_cap must exceed 1");
  const auto e1 = cluster_energy(cfg.with_cluster(1));
  const auto e2 = cluster_energy(cfg.with_cluster(2));
  auto g = [&](double n_p) {
    const double s1 = snr_at(1, n_p, cfg.sigma_w_sq, e1);
    return (snr_at(2, n_p, cfg.sigma_w_sq, e2) - s1) / s1;
  };

  constexpr int kGrid = 400;
  const double log_hi = std::log(np_cap);
  double x_prev = 1.0, g_prev = g(1.0);
  double lo = 0.0, hi = 0.0;
  bool found = false, any_pos = g_prev > 0.0, any_neg = g_prev < 0.0;
  for (int i = 1; i <= kGrid; ++i) {
    const double x = std::exp(log_hi * i / kGrid);
    const double gx = g(x);
    any_pos |= gx > 0.0;
    any_neg |= gx < 0.0;
    if (g_prev < 0.0 && gx >= 0.0) {
      lo = x_prev;
      hi = x;
      found = true;
    }
    x_prev = x;
    g_prev = gx;
  }

  Crossover out;
  if (!found) {
    out.dominant = any_pos && !any_neg ? Dominance::two_ap
                   : any_neg && !any_pos ? Dominance::single_ap
                   : g_prev > 0.0       ? Dominance::two_ap
                                        : Dominance::single_ap;
    return out;
  }
  double g_lo = g(lo);
  double root = hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    root = mid;
    if (std::abs(gm) < 1e-9 || (hi - lo) <= 1e-12 * mid) break;
    if ((gm < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = gm;
    } else {
      hi = mid;
    }
  }
  out.n_p = root;
  out.residual = std::abs(g(root));
  if (!(out.residual < 1e-6)) {
    std::ostringstream msg;
    msg << "ncjt_crossover: bisection stalled at n_p = " << root << " with relative gap " << out.residual;
    throw NumericalError(msg.str(), out.residual);
  }
  return out;
}

BestCluster best_cluster_snr(const std::vector<ClusterEnergy>& profile, double n_p, double sigma_w_sq) {
  if (profile.empty()) throw std::invalid_argument("best_cluster_snr: empty profile");
  BestCluster best{1, snr_at(1, n_p, sigma_w_sq, profile[0])};
  for (std::size_t i = 1; i < profile.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    const double v = snr_at(n, n_p, sigma_w_sq, profile[i]);
    if (v > best.snr) best = {n, v};
  }
  return best;
}

}  // namespace ncjt

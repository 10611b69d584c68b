#pragma once

#include <cmath>
#include <stdexcept>

#include "ncjt/config.hpp"

namespace ncjt {

// Spatial-average energies and SNRs for one configuration.
struct EnergySummary {
  double sigma_phi_sq = 0.0;  // all access points
  double sigma_c_sq = 0.0;    // the n_a nearest
  double sigma_e_sq = 0.0;    // LMMSE error of the cluster-sum estimate
  double snr = 0.0;           // effective SNR with the estimation error
  double snr0 = 0.0;          // single AP, perfect CSI
};

// Cluster energy together with its complement. `out_of_cluster` is computed
// from its own integral rather than as sigma_phi_sq - sigma_c_sq, so it keeps
// full relative accuracy when the cluster captures nearly all the energy.
struct ClusterEnergy {
  double sigma_phi_sq = 0.0;
  double sigma_c_sq = 0.0;
  double out_of_cluster = 0.0;
};

// alpha lambda pi r0^2 / (alpha - 2).
double sigma_phi_sq(const SystemConfig& cfg);

// Mean energy of the n_a nearest access points by adaptive quadrature of
// int l(u) Q(n_a, u) du over u = lambda pi r^2, split at the reference disk.
// Throws NumericalError when the quadrature misses its tolerance.
double sigma_c_sq_exact(const SystemConfig& cfg);

// sigma_phi_sq - sigma_c_sq as int l(u) P(n_a, u) du.
double out_of_cluster_energy(const SystemConfig& cfg);

ClusterEnergy cluster_energy(const SystemConfig& cfg);

// Large-cluster closed form sigma_phi_sq (1 - (2/alpha)(lambda pi r0^2 / n_a)^(alpha/2 - 1)),
// clamped at zero with a warning.
double sigma_c_sq_approx(const SystemConfig& cfg);

// Limit of (N_p/N_a) tr((N_a b I + P^H P)^-1) for an N_p x N_a matrix of
// i.i.d. CN(0,1) entries with N_a/N_p -> a. Written as
// 2 / (1 - a + ab + sqrt((1 - a + ab)^2 + 4 a^2 b)), which is the
// Marchenko-Pastur Stieltjes transform at -ab without its cancellation.
template <typename Real>
Real stieltjes_factor(Real a, Real b) {
  if (!(a > Real(0)) || !(b > Real(0))) throw std::invalid_argument("stieltjes_factor: need a > 0, b > 0");
  const Real shifted = Real(1) - a + a * b;
  const Real disc = shifted * shifted + Real(4) * a * a * b;
  return Real(2) / (shifted + std::sqrt(disc));
}

// (N_a sigma_tilde^2 / N_p) f_{N_a/N_p}(sigma_tilde^2 / sigma_c_sq) with
// sigma_tilde^2 = sigma_w^2 + sigma_phi^2 - sigma_c^2, clamped to
// [0, sigma_c_sq] (warning when the clamp is active).
double sigma_e_sq_asymptotic(const SystemConfig& cfg, double sigma_c_sq, double sigma_phi_sq);
double sigma_e_sq_asymptotic(const SystemConfig& cfg, const ClusterEnergy& energy);

// Same formula for a real-valued pilot length.
double sigma_e_sq_asymptotic(int n_a, double n_p, double sigma_w_sq, const ClusterEnergy& energy);

// (sigma_c^2 - sigma_e^2) / (sigma_w^2 + sigma_e^2).
template <typename Real>
Real snr_effective(Real sigma_c_sq, Real sigma_e_sq, Real sigma_w_sq) {
  if (sigma_e_sq < Real(0) || sigma_e_sq > sigma_c_sq)
    throw std::invalid_argument("snr_effective: need 0 <= sigma_e_sq <= sigma_c_sq");
  const Real denom = sigma_w_sq + sigma_e_sq;
  if (!(denom > Real(0))) throw std::invalid_argument("snr_effective: undefined for zero noise and zero error");
  return (sigma_c_sq - sigma_e_sq) / denom;
}

// Noise level that makes the single-AP perfect-CSI SNR equal to snr0.
double noise_for_snr0(const SystemConfig& cfg, double snr0);

// Pilot-contamination SNR (sigma_w = 0) to leading order in N_a/N_p:
// (N_p/N_a - 1) sigma_c^2 / (sigma_phi^2 - sigma_c^2).
double snr_contamination_leading(const SystemConfig& cfg, double sigma_c_sq, double sigma_phi_sq);

// Density of the distance to the s-th nearest access point.
double nth_nearest_pdf(int s, double rho, const SystemConfig& cfg);

// Effective SNR from the quadrature energies and the asymptotic error.
double snr_analytic(const SystemConfig& cfg, const ClusterEnergy& energy);

EnergySummary energy_summary(const SystemConfig& cfg);

}  // namespace ncjt

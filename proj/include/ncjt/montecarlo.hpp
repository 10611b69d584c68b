#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "ncjt/analytic.hpp"
#include "ncjt/config.hpp"
#include "ncjt/rng.hpp"

namespace ncjt {

// How the training signal of a trial is produced.
//  full:    sample_network, every AP with its own pilot column, y = P h + w.
//  reduced: the sufficient statistic (P_C^H P_C, P_C^H y) drawn directly.
//           The Gram matrix is complex Wishart (Bartlett factor L) and,
//           given it, P_C^H y = G h_C + sqrt(I + sigma_w^2) L z with I the
//           out-of-cluster energy, which has the same law as the full path.
//           Used when n_p >= n_a; otherwise the cluster pilots are drawn
//           explicitly.
enum class Synthesis { full, reduced };

struct McOptions {
  long trials = 100000;
  std::uint64_t seed = 1;
  Synthesis synthesis = Synthesis::reduced;
  int symbols_per_trial = 10;  // data symbols per channel draw (SER runs)
  int threads = 0;             // 0: NCJT_THREADS or the hardware concurrency
};

// Worker count for a request of 0 (auto) or n.
int worker_count(int requested);

struct TrialResult {
  double squared_error = 0.0;   // |1^T h_C - 1^T h_hat_C|^2
  double cluster_energy = 0.0;  // |1^T h_C|^2
  double estimate_energy = 0.0; // |1^T h_hat_C|^2
  std::complex<double> cross;   // e conj(1^T h_hat_C)
  long symbol_errors = 0;
  long symbols_sent = 0;
  bool rejected = false;
  bool zero_estimate = false;
};

struct RunSummary {
  long trials = 0;  // accepted trials
  long rejected = 0;
  double mse = 0.0, mse_stderr = 0.0;
  double ser = 0.0, ser_stderr = 0.0;
  double mean_cluster_energy = 0.0, cluster_energy_stderr = 0.0;
  double mean_estimate_energy = 0.0, estimate_energy_stderr = 0.0;
  std::complex<double> cross_correlation;  // mean of e conj(chi_hat)
  double cross_stderr = 0.0;               // of the real and imaginary parts jointly
  long symbol_errors = 0, symbols_sent = 0;
  long zero_estimates = 0;
  std::uint64_t seed = 0;
};

// One training trial. `prior` supplies the sigma_c^2 and sigma_phi^2 the
// estimator assumes. Throws DegenerateDraw.
TrialResult mse_trial(const SystemConfig& cfg, const ClusterEnergy& prior, Synthesis synthesis, Engine& rng);

// Training followed by symbols_per_trial QPSK symbols through the same channel.
TrialResult ser_trial(const SystemConfig& cfg, const ClusterEnergy& prior, Synthesis synthesis,
                      int symbols, Engine& rng);

// Trials are pure functions of (seed, index); results are reduced in fixed
// chunks in index order, so the summary does not depend on the thread count.
// Throws std::runtime_error if every trial is rejected.
RunSummary run_mse_trials(const SystemConfig& cfg, const McOptions& options);
RunSummary run_ser_trials(const SystemConfig& cfg, const McOptions& options);

// Lower-triangular L with L L^H distributed as P^H P for an n_p x n_a matrix
// P of i.i.d. CN(0, 1) entries (n_p >= n_a).
Eigen::MatrixXcd sample_wishart_factor(int n_a, int n_p, Engine& rng);
Eigen::MatrixXcd sample_wishart_gram(int n_a, int n_p, Engine& rng);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

// Mean over draws of (n_p / n_a) tr((n_a b I + P^H P)^-1) with
// n_p = round(n_a / a) and P drawn entry by entry. Eigenvalues of each Gram
// draw are reused for every b.
std::vector<McEstimate> wishart_f_oracle(double a, std::span<const double> b, int n_a, int draws,
                                         std::uint64_t seed, int threads = 0);
McEstimate wishart_f_oracle(double a, double b, int n_a, int draws, std::uint64_t seed, int threads = 0);

// (1/K) sum |1^T h_C|^2 over independent deployments, each built from the
// n_a nearest points of an unbounded PPP (full: sample_network).
McEstimate estimate_cluster_energy(const SystemConfig& cfg, const McOptions& options);

// (1/K) sum over every AP in the window of |h_x|^2 (sample_network).
McEstimate estimate_window_energy(const SystemConfig& cfg, const McOptions& options);

}  // namespace ncjt

#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "ncjt/config.hpp"
#include "ncjt/rng.hpp"

namespace ncjt {

// Bounded power-law attenuation r0^alpha * max(r0, r)^-alpha.
template <typename Real>
Real path_loss(Real r, Real r0, Real alpha) {
  if (r < Real(0)) throw std::invalid_argument("path_loss: negative distance");
  return r <= r0 ? Real(1) : std::pow(r0 / r, alpha);
}

inline double path_loss(double r, const SystemConfig& cfg) { return path_loss(r, cfg.r0, cfg.alpha); }

// Radius beyond which the expected channel energy of the PPP is at most
// epsilon_trunc * sigma_phi_sq: r0 (2 / (alpha eps))^(1 / (alpha - 2)),
// never smaller than r0.
double truncation_radius(const SystemConfig& cfg);

// Sampling window: the truncation radius, widened when needed so that a draw
// holds fewer than n_a access points with probability below 1e-15.
double simulation_radius(const SystemConfig& cfg);

// Mean channel energy of the access points beyond radius r,
// int_{lambda pi r^2}^inf l(u) du.
double tail_energy(const SystemConfig& cfg, double r);

// Mean access point count inside the sampling window.
double expected_ap_count(const SystemConfig& cfg);

// Windows whose mean AP count exceeds this are refused.
inline constexpr double kMaxExpectedApCount = 2.0e7;

// One deployment seen from the typical UE at the origin. Access points are
// stored nearest first; the cluster is the first n_a of them.
struct NetworkRealization {
  Eigen::Matrix2Xd positions;
  Eigen::VectorXd distances;
  Eigen::VectorXcd fading;
  Eigen::MatrixXcd pilots;  // n_p rows, one column per access point
  std::vector<Eigen::Index> cluster_indices;
  double r_max = 0.0;

  Eigen::Index size() const { return distances.size(); }
};

struct ChannelVector {
  Eigen::VectorXcd amplitudes;
  std::complex<double> cluster_sum;
};

// Homogeneous PPP inside the disk of radius simulation_radius(cfg): Poisson
// count, uniform positions, unit Rayleigh fading and i.i.d. CN(0, 1) pilots.
// Deterministic in (cfg, seed). Throws DegenerateDraw when fewer than n_a
// access points fall inside the window.
NetworkRealization sample_network(const SystemConfig& cfg, std::uint64_t seed);
NetworkRealization sample_network(const SystemConfig& cfg, Engine& rng);

// Same law inside an explicit window radius.
NetworkRealization sample_network(const SystemConfig& cfg, double r_max, Engine& rng);

ChannelVector channel_vector(const NetworkRealization& net, const SystemConfig& cfg);

// What a training-phase trial needs when pilots are not materialized: the
// cluster channels (nearest first) and the out-of-cluster energy
// sum |h_x|^2 inside the window. Built from the radial construction of the
// PPP (squared distances times lambda*pi are the arrival times of a unit-rate
// Poisson process), which has the same law as sample_network.
// tail_energy is the mean energy beyond the window; callers that need an
// unbiased interference level add it as a deterministic term.
struct ClusterDraw {
  Eigen::VectorXcd cluster_channels;
  double interference_energy = 0.0;
  double tail_energy = 0.0;
  long ap_count = 0;
};

ClusterDraw sample_cluster_draw(const SystemConfig& cfg, Engine& rng);

// Distances of the `count` nearest access points of an unbounded PPP.
Eigen::VectorXd sample_nearest_distances(const SystemConfig& cfg, int count, Engine& rng);

}  // namespace ncjt

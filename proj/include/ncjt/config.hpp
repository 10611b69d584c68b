#pragma once

#include <cmath>
#include <numbers>

namespace ncjt {

// Scalar parameters of the network model. Distances are in the same unit as
// 1/sqrt(lambda); powers are normalized by the average transmit power.
struct SystemConfig {
  double lambda = 1.0;          // access points per unit area
  double alpha = 3.67;          // path loss factor, must exceed 2
  double r0 = 0.04;             // reference distance
  double sigma_w_sq = 0.0;      // noise-to-transmit-power ratio
  int n_a = 1;                  // cluster size
  int n_p = 1;                  // pilot length in symbols
  double epsilon_trunc = 1e-4;  // neglected tail energy, relative to sigma_phi_sq

  // Throws std::invalid_argument naming the first violated constraint.
  void validate() const;

  // lambda * pi * r0^2: mean number of access points inside the reference disk.
  double reference_load() const { return lambda * std::numbers::pi * r0 * r0; }

  SystemConfig with_cluster(int n) const {
    SystemConfig c = *this;
    c.n_a = n;
    return c;
  }
  SystemConfig with_pilots(int n) const {
    SystemConfig c = *this;
    c.n_p = n;
    return c;
  }
  SystemConfig with_noise(double s) const {
    SystemConfig c = *this;
    c.sigma_w_sq = s;
    return c;
  }
};

// r0 = 0.08 / (2 sqrt(lambda)): 8% of the mean nearest-AP distance.
inline double reference_distance_preset(double lambda) { return 0.08 / (2.0 * std::sqrt(lambda)); }

// Default model: lambda = 1, preset reference distance, alpha = 3.67.
inline SystemConfig preset_config(double lambda = 1.0, double alpha = 3.67) {
  SystemConfig c;
  c.lambda = lambda;
  c.alpha = alpha;
  c.r0 = reference_distance_preset(lambda);
  return c;
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace ncjt

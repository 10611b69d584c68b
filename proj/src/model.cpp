#include "ncjt/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "ncjt/error.hpp"

namespace ncjt {

using std::numbers::pi;

double truncation_radius(const SystemConfig& cfg) {
  cfg.validate();
  const double scale = 2.0 / (cfg.alpha * cfg.epsilon_trunc);
  const double r = cfg.r0 * std::pow(scale, 1.0 / (cfg.alpha - 2.0));
  return std::max(r, cfg.r0);
}

double simulation_radius(const SystemConfig& cfg) {
  const double n = cfg.n_a;
  const double cover_load = n + 8.0 * std::sqrt(n) + 35.0;
  const double cover = std::sqrt(cover_load / (cfg.lambda * pi));
  return std::max(truncation_radius(cfg), cover);
}

double tail_energy(const SystemConfig& cfg, double r) {
  cfg.validate();
  const double load = cfg.lambda * pi * r * r;
  const double ref = cfg.reference_load();
  const double s = 0.5 * cfg.alpha;
  const double edge = std::max(load, ref);
  return std::max(ref - load, 0.0) + ref * std::pow(ref / edge, s - 1.0) / (s - 1.0);
}

double expected_ap_count(const SystemConfig& cfg) {
  const double r = simulation_radius(cfg);
  return cfg.lambda * pi * r * r;
}

namespace {

void check_window(const SystemConfig& cfg, double mean_count) {
  if (!(mean_count <= kMaxExpectedApCount))
    throw std::invalid_argument("simulation window holds " + std::to_string(mean_count) +
                                " access points on average (alpha " + std::to_string(cfg.alpha) +
                                " too close to 2 for epsilon_trunc " +
                                std::to_string(cfg.epsilon_trunc) + ")");
}

}  // namespace

NetworkRealization sample_network(const SystemConfig& cfg, std::uint64_t seed) {
  Engine rng(mix64(seed));
  return sample_network(cfg, rng);
}

NetworkRealization sample_network(const SystemConfig& cfg, Engine& rng) {
  return sample_network(cfg, simulation_radius(cfg), rng);
}

NetworkRealization sample_network(const SystemConfig& cfg, double r_max, Engine& rng) {
  cfg.validate();
  if (!(r_max > 0.0)) throw std::invalid_argument("sample_network: window radius must be positive");
  const double mean_count = cfg.lambda * pi * r_max * r_max;
  check_window(cfg, mean_count);

  const long count = std::poisson_distribution<long>(mean_count)(rng);
  if (count < cfg.n_a) throw DegenerateDraw(count, cfg.n_a);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::Matrix2Xd raw(2, count);
  Eigen::VectorXd radius(count);
  for (long i = 0; i < count; ++i) {
    radius[i] = r_max * std::sqrt(unit(rng));
    const double theta = 2.0 * pi * unit(rng);
    raw.col(i) << radius[i] * std::cos(theta), radius[i] * std::sin(theta);
  }

  std::vector<Eigen::Index> order(count);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return radius[a] < radius[b]; });

  NetworkRealization net;
  net.r_max = r_max;
  net.positions.resize(2, count);
  net.distances.resize(count);
  for (long i = 0; i < count; ++i) {
    net.positions.col(i) = raw.col(order[i]);
    net.distances[i] = radius[order[i]];
  }
  net.fading.resize(count);
  for (long i = 0; i < count; ++i) net.fading[i] = complex_normal(rng);
  net.pilots.resize(cfg.n_p, count);
  for (long j = 0; j < count; ++j)
    for (int i = 0; i < cfg.n_p; ++i) net.pilots(i, j) = complex_normal(rng);
  net.cluster_indices.resize(cfg.n_a);
  std::iota(net.cluster_indices.begin(), net.cluster_indices.end(), Eigen::Index{0});
  return net;
}

ChannelVector channel_vector(const NetworkRealization& net, const SystemConfig& cfg) {
  ChannelVector h;
  h.amplitudes.resize(net.size());
  for (Eigen::Index i = 0; i < net.size(); ++i)
    h.amplitudes[i] = net.fading[i] * std::sqrt(path_loss(net.distances[i], cfg));
  h.cluster_sum = 0.0;
  for (auto i : net.cluster_indices) h.cluster_sum += h.amplitudes[i];
  return h;
}

ClusterDraw sample_cluster_draw(const SystemConfig& cfg, Engine& rng) {
  const double r_max = simulation_radius(cfg);
  const double load_max = cfg.lambda * pi * r_max * r_max;
  check_window(cfg, load_max);
  const double load_ref = cfg.reference_load();
  const double half_alpha = 0.5 * cfg.alpha;

  std::exponential_distribution<double> gap(1.0);
  ClusterDraw draw;
  draw.cluster_channels.resize(cfg.n_a);
  double load = 0.0;
  long k = 0;
  for (;;) {
    load += gap(rng);
    if (load > load_max) break;
    const double gain = load <= load_ref ? 1.0 : std::pow(load_ref / load, half_alpha);
    if (k < cfg.n_a)
      draw.cluster_channels[k] = complex_normal(rng) * std::sqrt(gain);
    else
      draw.interference_energy += gap(rng) * gain;  // |c|^2 ~ Exp(1)
    ++k;
  }
  draw.ap_count = k;
  draw.tail_energy = tail_energy(cfg, r_max);
  if (k < cfg.n_a) throw DegenerateDraw(k, cfg.n_a);
  return draw;
}

Eigen::VectorXd sample_nearest_distances(const SystemConfig& cfg, int count, Engine& rng) {
  std::exponential_distribution<double> gap(1.0);
  Eigen::VectorXd d(count);
  double load = 0.0;
  for (int k = 0; k < count; ++k) {
    load += gap(rng);
    d[k] = std::sqrt(load / (cfg.lambda * pi));
  }
  return d;
}

}  // namespace ncjt

#include "ncjt/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ncjt/error.hpp"
#include "ncjt/estimator.hpp"
#include "ncjt/log.hpp"
#include "ncjt/model.hpp"

namespace ncjt {

int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("NCJT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

// Runs body(i) for i in [0, count) on a small pool. The first exception is
// rethrown after all workers stop.
template <class F>
void parallel_for(long count, int threads, F&& body) {
  const int workers = static_cast<int>(std::min<long>(worker_count(threads), std::max(count, 1L)));
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (long i; (i = next.fetch_add(1)) < count;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Welford accumulation within a chunk, Chan's merge across chunks.
struct Moments {
  long n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.n == 0) return;
    if (n == 0) {
      *this = o;
      return;
    }
    const long total = n + o.n;
    const double d = o.mean - mean;
    mean += d * o.n / total;
    m2 += o.m2 + d * d * (static_cast<double>(n) * o.n / total);
    n = total;
  }
  double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double std_error() const { return n > 1 ? std::sqrt(variance() / n) : 0.0; }
};

struct Accumulator {
  Moments squared_error, cluster_energy, estimate_energy, cross_re, cross_im, error_rate;
  long rejected = 0, symbol_errors = 0, symbols_sent = 0, zero_estimates = 0;

  void add(const TrialResult& t) {
    if (t.rejected) {
      ++rejected;
      return;
    }
    squared_error.add(t.squared_error);
    cluster_energy.add(t.cluster_energy);
    estimate_energy.add(t.estimate_energy);
    cross_re.add(t.cross.real());
    cross_im.add(t.cross.imag());
    if (t.symbols_sent > 0) error_rate.add(static_cast<double>(t.symbol_errors) / t.symbols_sent);
    symbol_errors += t.symbol_errors;
    symbols_sent += t.symbols_sent;
    zero_estimates += t.zero_estimate ? 1 : 0;
  }
  void merge(const Accumulator& o) {
    squared_error.merge(o.squared_error);
    cluster_energy.merge(o.cluster_energy);
    estimate_energy.merge(o.estimate_energy);
    cross_re.merge(o.cross_re);
    cross_im.merge(o.cross_im);
    error_rate.merge(o.error_rate);
    rejected += o.rejected;
    symbol_errors += o.symbol_errors;
    symbols_sent += o.symbols_sent;
    zero_estimates += o.zero_estimates;
  }
};

constexpr long kChunk = 1024;

template <class Trial>
Accumulator run_chunked(const McOptions& options, Trial&& trial) {
  if (options.trials < 1) throw std::invalid_argument("trial count must be at least 1");
  const long chunks = (options.trials + kChunk - 1) / kChunk;
  std::vector<Accumulator> parts(chunks);
  parallel_for(chunks, options.threads, [&](long c) {
    const long end = std::min(options.trials, (c + 1) * kChunk);
    for (long i = c * kChunk; i < end; ++i) {
      Engine rng = derive_stream(options.seed, static_cast<std::uint64_t>(i));
      TrialResult r;
      try {
        r = trial(rng);
      } catch (const DegenerateDraw&) {
        r.rejected = true;
      }
      parts[c].add(r);
    }
  });
  Accumulator total;
  for (const auto& p : parts) total.merge(p);
  return total;
}

RunSummary summarize(const Accumulator& acc, std::uint64_t seed) {
  if (acc.squared_error.n == 0) throw std::runtime_error("every trial was rejected as a degenerate draw");
  RunSummary s;
  s.trials = acc.squared_error.n;
  s.rejected = acc.rejected;
  s.mse = acc.squared_error.mean;
  s.mse_stderr = acc.squared_error.std_error();
  s.mean_cluster_energy = acc.cluster_energy.mean;
  s.cluster_energy_stderr = acc.cluster_energy.std_error();
  s.mean_estimate_energy = acc.estimate_energy.mean;
  s.estimate_energy_stderr = acc.estimate_energy.std_error();
  s.cross_correlation = {acc.cross_re.mean, acc.cross_im.mean};
  s.cross_stderr = std::hypot(acc.cross_re.std_error(), acc.cross_im.std_error());
  s.symbol_errors = acc.symbol_errors;
  s.symbols_sent = acc.symbols_sent;
  if (acc.symbols_sent > 0) {
    s.ser = static_cast<double>(acc.symbol_errors) / acc.symbols_sent;
    s.ser_stderr = acc.error_rate.std_error();
  }
  s.zero_estimates = acc.zero_estimates;
  s.seed = seed;
  if (acc.rejected > 0) {
    std::ostringstream msg;
    msg << acc.rejected << " of " << acc.rejected + s.trials << " trials rejected as degenerate draws";
    warn(msg.str());
  }
  return s;
}

Eigen::VectorXcd complex_normal_vector(Eigen::Index n, Engine& rng) {
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = complex_normal(rng);
  return v;
}

struct Training {
  std::complex<double> chi;
  std::complex<double> chi_hat;
};

Training train(const SystemConfig& cfg, const ClusterEnergy& prior, Synthesis synthesis, Engine& rng) {
  const double sc = prior.sigma_c_sq, sp = prior.sigma_phi_sq, sw = cfg.sigma_w_sq;
  if (synthesis == Synthesis::full) {
    const auto net = sample_network(cfg, rng);
    const auto h = channel_vector(net, cfg);
    const double floor = sw + tail_energy(cfg, net.r_max);
    const Eigen::VectorXcd y = net.pilots * h.amplitudes + std::sqrt(floor) * complex_normal_vector(cfg.n_p, rng);
    const auto ctx = build_context(Eigen::MatrixXcd(net.pilots.leftCols(cfg.n_a)), sc, sp, sw);
    return {h.cluster_sum, estimate(ctx, y).sum_estimate};
  }

  const auto draw = sample_cluster_draw(cfg, rng);
  const double level = std::sqrt(draw.interference_energy + draw.tail_energy + sw);
  const Eigen::VectorXcd& hc = draw.cluster_channels;
  if (cfg.n_p >= cfg.n_a) {
    const Eigen::MatrixXcd l = sample_wishart_factor(cfg.n_a, cfg.n_p, rng);
    const Eigen::MatrixXcd gram = l * l.adjoint();
    const Eigen::VectorXcd corr = gram * hc + level * (l * complex_normal_vector(cfg.n_a, rng));
    const auto ctx = build_context_from_gram<double>(gram, sc, sp, sw);
    return {hc.sum(), estimate_from_correlation(ctx, corr).sum_estimate};
  }
  Eigen::MatrixXcd p(cfg.n_p, cfg.n_a);
  for (Eigen::Index j = 0; j < p.cols(); ++j)
    for (Eigen::Index i = 0; i < p.rows(); ++i) p(i, j) = complex_normal(rng);
  const Eigen::VectorXcd y = p * hc + level * complex_normal_vector(cfg.n_p, rng);
  const auto ctx = build_context(p, sc, sp, sw);
  return {hc.sum(), estimate(ctx, y).sum_estimate};
}

void record_training(const Training& t, TrialResult& r) {
  const std::complex<double> e = t.chi - t.chi_hat;
  r.squared_error = std::norm(e);
  r.cluster_energy = std::norm(t.chi);
  r.estimate_energy = std::norm(t.chi_hat);
  r.cross = e * std::conj(t.chi_hat);
}

}  // namespace

TrialResult mse_trial(const SystemConfig& cfg, const ClusterEnergy& prior, Synthesis synthesis, Engine& rng) {
  TrialResult r;
  record_training(train(cfg, prior, synthesis, rng), r);
  return r;
}

TrialResult ser_trial(const SystemConfig& cfg, const ClusterEnergy& prior, Synthesis synthesis, int symbols,
                      Engine& rng) {
  TrialResult r;
  const Training t = train(cfg, prior, synthesis, rng);
  record_training(t, r);
  const double amp = std::numbers::sqrt2 / 2.0;
  const double noise = std::sqrt(cfg.sigma_w_sq);
  std::uniform_int_distribution<int> bit(0, 1);
  r.symbols_sent = symbols;
  if (t.chi_hat == std::complex<double>(0.0, 0.0)) {
    // No decision is possible without a channel estimate.
    r.zero_estimate = true;
    r.symbol_errors = symbols;
    return r;
  }
  for (int k = 0; k < symbols; ++k) {
    const double re = bit(rng) ? amp : -amp;
    const double im = bit(rng) ? amp : -amp;
    const std::complex<double> y = std::complex<double>(re, im) * t.chi + noise * complex_normal(rng);
    const std::complex<double> z = y / t.chi_hat;
    const bool ok = (z.real() >= 0.0) == (re > 0.0) && (z.imag() >= 0.0) == (im > 0.0);
    r.symbol_errors += ok ? 0 : 1;
  }
  return r;
}

RunSummary run_mse_trials(const SystemConfig& cfg, const McOptions& options) {
  cfg.validate();
  const auto prior = cluster_energy(cfg);
  return summarize(run_chunked(options, [&](Engine& rng) { return mse_trial(cfg, prior, options.synthesis, rng); }),
                   options.seed);
}

RunSummary run_ser_trials(const SystemConfig& cfg, const McOptions& options) {
  cfg.validate();
  if (options.symbols_per_trial < 1) throw std::invalid_argument("symbols_per_trial must be at least 1");
  const auto prior = cluster_energy(cfg);
  auto s = summarize(run_chunked(options,
                                 [&](Engine& rng) {
                                   return ser_trial(cfg, prior, options.synthesis, options.symbols_per_trial, rng);
                                 }),
                     options.seed);
  if (s.zero_estimates > 0) {
    std::ostringstream msg;
    msg << s.zero_estimates << " trials produced a zero channel estimate; their symbols count as errors";
    warn(msg.str());
  }
  return s;
}

Eigen::MatrixXcd sample_wishart_factor(int n_a, int n_p, Engine& rng) {
  if (n_a < 1 || n_p < n_a) throw std::invalid_argument("sample_wishart_factor: need 1 <= n_a <= n_p");
  Eigen::MatrixXcd l = Eigen::MatrixXcd::Zero(n_a, n_a);
  for (int i = 0; i < n_a; ++i) {
    // |L_ii|^2 is a sum of n_p - i unit exponentials.
    l(i, i) = std::sqrt(std::gamma_distribution<double>(n_p - i, 1.0)(rng));
    for (int j = 0; j < i; ++j) l(i, j) = complex_normal(rng);
  }
  return l;
}

Eigen::MatrixXcd sample_wishart_gram(int n_a, int n_p, Engine& rng) {
  const Eigen::MatrixXcd l = sample_wishart_factor(n_a, n_p, rng);
  return l * l.adjoint();
}

std::vector<McEstimate> wishart_f_oracle(double a, std::span<const double> b, int n_a, int draws,
                                         std::uint64_t seed, int threads) {
  if (!(a > 0.0) || n_a < 1 || draws < 1) throw std::invalid_argument("wishart_f_oracle: need a > 0, n_a >= 1, draws >= 1");
  for (double x : b)
    if (!(x > 0.0)) throw std::invalid_argument("wishart_f_oracle: b must be positive");
  const int n_p = std::max(1, static_cast<int>(std::lround(n_a / a)));
  std::vector<Eigen::VectorXd> values(draws, Eigen::VectorXd(b.size()));
  parallel_for(draws, threads, [&](long d) {
    Engine rng = derive_stream(seed, static_cast<std::uint64_t>(d));
    Eigen::MatrixXcd p(n_p, n_a);
    for (int j = 0; j < n_a; ++j)
      for (int i = 0; i < n_p; ++i) p(i, j) = complex_normal(rng);
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Zero(n_a, n_a);
    gram.selfadjointView<Eigen::Lower>().rankUpdate(p.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    for (std::size_t k = 0; k < b.size(); ++k)
      values[d][k] = (static_cast<double>(n_p) / n_a) * (1.0 / (ev.array() + n_a * b[k])).sum();
  });
  std::vector<McEstimate> out;
  for (std::size_t k = 0; k < b.size(); ++k) {
    Moments m;
    for (const auto& v : values) m.add(v[k]);
    out.push_back({m.mean, m.std_error(), m.n});
  }
  return out;
}

McEstimate wishart_f_oracle(double a, double b, int n_a, int draws, std::uint64_t seed, int threads) {
  const double bs[1] = {b};
  return wishart_f_oracle(a, std::span<const double>(bs), n_a, draws, seed, threads).front();
}

namespace {

McEstimate to_estimate(const Accumulator& acc) {
  if (acc.cluster_energy.n == 0) throw std::runtime_error("every trial was rejected as a degenerate draw");
  return {acc.cluster_energy.mean, acc.cluster_energy.std_error(), acc.cluster_energy.n};
}

}  // namespace

McEstimate estimate_cluster_energy(const SystemConfig& cfg, const McOptions& options) {
  cfg.validate();
  return to_estimate(run_chunked(options, [&](Engine& rng) {
    TrialResult r;
    if (options.synthesis == Synthesis::full) {
      const auto net = sample_network(cfg, rng);
      r.cluster_energy = std::norm(channel_vector(net, cfg).cluster_sum);
      return r;
    }
    const auto d = sample_nearest_distances(cfg, cfg.n_a, rng);
    std::complex<double> chi = 0.0;
    for (Eigen::Index k = 0; k < d.size(); ++k) chi += complex_normal(rng) * std::sqrt(path_loss(d[k], cfg));
    r.cluster_energy = std::norm(chi);
    return r;
  }));
}

McEstimate estimate_window_energy(const SystemConfig& cfg, const McOptions& options) {
  cfg.validate();
  return to_estimate(run_chunked(options, [&](Engine& rng) {
    TrialResult r;
    const auto net = sample_network(cfg, rng);
    r.cluster_energy = channel_vector(net, cfg).amplitudes.squaredNorm();
    return r;
  }));
}

}  // namespace ncjt

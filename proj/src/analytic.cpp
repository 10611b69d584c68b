#include "ncjt/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "ncjt/error.hpp"
#include "ncjt/log.hpp"
#include "ncjt/quadrature.hpp"
#include "ncjt/special.hpp"

namespace ncjt {

using std::numbers::pi;

namespace {

// Everything below integrates over the normalized load u = lambda pi r^2, in
// which l(u) = min(1, (u_ref / u)^(alpha/2)) and the distance to the n-th
// nearest AP has the Gamma(n, 1) law.
struct LoadIntegrals {
  double u_ref;
  double half_alpha;
  int n;
  double u_cut;

  explicit LoadIntegrals(const SystemConfig& cfg)
      : u_ref(cfg.reference_load()), half_alpha(0.5 * cfg.alpha), n(cfg.n_a) {
    const double sn = std::sqrt(static_cast<double>(n));
    u_cut = std::max(n + 12.0 * sn + 40.0, 2.0 * u_ref);
  }

  // Log-spaced break points for the outer integral: the reference disk edge,
  // the bulk of Gamma(n, 1) and the cut-off.
  std::vector<double> outer_breaks() const {
    const double sn = std::sqrt(static_cast<double>(n));
    std::vector<double> pts{u_ref, n - 6.0 * sn, static_cast<double>(n), n + 6.0 * sn, u_cut};
    std::vector<double> t;
    for (double p : pts)
      if (p >= u_ref && p <= u_cut) t.push_back(std::log(p));
    std::sort(t.begin(), t.end());
    t.erase(std::unique(t.begin(), t.end()), t.end());
    return t;
  }

  // int_{u_ref}^{u_cut} l(u) g(u) du in t = ln u.
  template <class G>
  QuadratureResult outer(G&& g, double abs_tol, double rel_tol) const {
    const double log_ref = std::log(u_ref);
    auto integrand = [&](double t) {
      const double u = std::exp(t);
      return u * std::exp(half_alpha * (log_ref - t)) * g(u);
    };
    const auto breaks = outer_breaks();
    return integrate(integrand, std::span<const double>(breaks), abs_tol, rel_tol);
  }
};

void require_converged(const QuadratureResult& r, const char* what) {
  if (!r.converged) {
    std::ostringstream msg;
    msg << what << ": quadrature did not converge (estimated error " << r.abs_error << " after "
        << r.intervals << " intervals)";
    throw NumericalError(msg.str(), r.abs_error);
  }
}

}  // namespace

double sigma_phi_sq(const SystemConfig& cfg) {
  cfg.validate();
  return cfg.alpha * cfg.reference_load() / (cfg.alpha - 2.0);
}

double sigma_c_sq_exact(const SystemConfig& cfg) {
  const double phi = sigma_phi_sq(cfg);
  const LoadIntegrals li(cfg);
  const double abs_tol = 1e-10 * phi;
  auto q = [&](double u) { return gamma_q(li.n, u); };
  const auto inner = integrate(q, 0.0, li.u_ref, 0.5 * abs_tol, 1e-13);
  require_converged(inner, "sigma_c_sq_exact (reference disk)");
  const auto outer = li.outer(q, 0.5 * abs_tol, 1e-13);
  require_converged(outer, "sigma_c_sq_exact (path-loss region)");
  return inner.value + outer.value;
}

double out_of_cluster_energy(const SystemConfig& cfg) {
  const double phi = sigma_phi_sq(cfg);
  const LoadIntegrals li(cfg);
  auto p = [&](double u) { return gamma_p(li.n, u); };
  const double abs_tol = 1e-16 * phi;
  const auto inner = integrate(p, 0.0, li.u_ref, abs_tol, 1e-11);
  require_converged(inner, "out_of_cluster_energy (reference disk)");
  const auto outer = li.outer(p, abs_tol, 1e-11);
  require_converged(outer, "out_of_cluster_energy (path-loss region)");
  // Beyond u_cut, P(n, u) = 1 to double precision.
  const double s = li.half_alpha;
  const double tail = li.u_ref * std::pow(li.u_ref / li.u_cut, s - 1.0) / (s - 1.0);
  return inner.value + outer.value + tail;
}

ClusterEnergy cluster_energy(const SystemConfig& cfg) {
  return {sigma_phi_sq(cfg), sigma_c_sq_exact(cfg), out_of_cluster_energy(cfg)};
}

double sigma_c_sq_approx(const SystemConfig& cfg) {
  const double phi = sigma_phi_sq(cfg);
  const double correction =
      (2.0 / cfg.alpha) * std::pow(cfg.reference_load() / cfg.n_a, 0.5 * cfg.alpha - 1.0);
  if (correction > 1.0) {
    std::ostringstream msg;
    msg << "sigma_c_sq_approx: correction " << correction << " exceeds 1 for n_a = " << cfg.n_a
        << ", alpha = " << cfg.alpha << "; clamped to 0";
    warn(msg.str());
    return 0.0;
  }
  return phi * (1.0 - correction);
}

double sigma_e_sq_asymptotic(int n_a, double n_p, double sigma_w_sq, const ClusterEnergy& energy) {
  if (!(energy.sigma_c_sq > 0.0)) throw std::invalid_argument("sigma_e_sq_asymptotic: sigma_c_sq must be positive");
  if (!(energy.out_of_cluster >= 0.0))
    throw std::invalid_argument("sigma_e_sq_asymptotic: need sigma_c_sq <= sigma_phi_sq");
  if (!(n_p > 0.0) || n_a < 1) throw std::invalid_argument("sigma_e_sq_asymptotic: need n_a >= 1, n_p > 0");
  const double load = n_a / n_p;
  const double tilde = sigma_w_sq + energy.out_of_cluster;
  double value;
  if (tilde == 0.0) {
    // b -> 0: only the N_a - N_p unidentifiable directions keep their prior.
    value = load < 1.0 ? 0.0 : energy.sigma_c_sq * (1.0 - 1.0 / load);
  } else {
    value = load * tilde * stieltjes_factor(load, tilde / energy.sigma_c_sq);
  }
  if (value > energy.sigma_c_sq) {
    if (value > energy.sigma_c_sq * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "sigma_e_sq_asymptotic: " << value << " exceeds sigma_c_sq = " << energy.sigma_c_sq
          << "; clamped";
      warn(msg.str());
    }
    value = energy.sigma_c_sq;
  }
  return std::max(value, 0.0);
}

double sigma_e_sq_asymptotic(const SystemConfig& cfg, const ClusterEnergy& energy) {
  cfg.validate();
  return sigma_e_sq_asymptotic(cfg.n_a, cfg.n_p, cfg.sigma_w_sq, energy);
}

double sigma_e_sq_asymptotic(const SystemConfig& cfg, double sigma_c_sq, double sigma_phi_sq) {
  if (sigma_c_sq > sigma_phi_sq) throw std::invalid_argument("sigma_e_sq_asymptotic: need sigma_c_sq <= sigma_phi_sq");
  return sigma_e_sq_asymptotic(cfg, ClusterEnergy{sigma_phi_sq, sigma_c_sq, sigma_phi_sq - sigma_c_sq});
}

double noise_for_snr0(const SystemConfig& cfg, double snr0) {
  if (!(snr0 > 0.0)) throw std::invalid_argument("noise_for_snr0: snr0 must be positive");
  return sigma_c_sq_exact(cfg.with_cluster(1)) / snr0;
}

double snr_contamination_leading(const SystemConfig& cfg, double sigma_c_sq, double sigma_phi_sq) {
  if (cfg.n_p < cfg.n_a) throw std::invalid_argument("snr_contamination_leading: need n_p >= n_a");
  if (!(sigma_c_sq < sigma_phi_sq))
    throw std::invalid_argument("snr_contamination_leading: undefined for sigma_c_sq >= sigma_phi_sq");
  return (static_cast<double>(cfg.n_p) / cfg.n_a - 1.0) * sigma_c_sq / (sigma_phi_sq - sigma_c_sq);
}

double nth_nearest_pdf(int s, double rho, const SystemConfig& cfg) {
  if (s < 1) throw std::invalid_argument("nth_nearest_pdf: rank must be at least 1");
  if (!(rho > 0.0)) throw std::invalid_argument("nth_nearest_pdf: distance must be positive");
  const double pl = pi * cfg.lambda;
  const double log_pdf = std::log(2.0) + s * std::log(pl) - std::lgamma(static_cast<double>(s)) +
                         (2.0 * s - 1.0) * std::log(rho) - pl * rho * rho;
  return std::exp(log_pdf);
}

double snr_analytic(const SystemConfig& cfg, const ClusterEnergy& energy) {
  const double e = sigma_e_sq_asymptotic(cfg, energy);
  return snr_effective(energy.sigma_c_sq, e, cfg.sigma_w_sq);
}

EnergySummary energy_summary(const SystemConfig& cfg) {
  const auto energy = cluster_energy(cfg);
  EnergySummary s;
  s.sigma_phi_sq = energy.sigma_phi_sq;
  s.sigma_c_sq = energy.sigma_c_sq;
  s.sigma_e_sq = sigma_e_sq_asymptotic(cfg, energy);
  const double denom = cfg.sigma_w_sq + s.sigma_e_sq;
  s.snr = denom > 0.0 ? (s.sigma_c_sq - s.sigma_e_sq) / denom : std::numeric_limits<double>::infinity();
  s.snr0 = cfg.sigma_w_sq > 0.0 ? sigma_c_sq_exact(cfg.with_cluster(1)) / cfg.sigma_w_sq
                                : std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace ncjt

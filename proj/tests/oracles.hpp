#pragma once

// Reference implementations used only by the tests. They share no code with
// the library.

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>

namespace oracle {

// Non-regularized upper incomplete gamma for any real a; order zero is E1,
// negative orders by the downward recurrence
// Gamma(a, x) = (Gamma(a + 1, x) - x^a e^-x) / a.
inline double upper_gamma(double a, double x) {
  if (a > 0.0) return boost::math::tgamma(a, x);
  if (a == 0.0) return boost::math::expint(1, x);
  return (upper_gamma(a + 1.0, x) - std::pow(x, a) * std::exp(-x)) / a;
}

// log Gamma(a, x) for a > 0 without overflow.
inline double log_upper_gamma(double a, double x) {
  return std::log(boost::math::gamma_q(a, x)) + boost::math::lgamma(a);
}

// Mean path loss of the k-th nearest AP in the normalized load u:
// P(k, u0) + u0^s Gamma(k - s, u0) / Gamma(k).
inline double mean_gain_rank(int k, double u0, double s) {
  const double a = k - s;
  double tail;
  if (a > 0.0)
    tail = std::exp(s * std::log(u0) + log_upper_gamma(a, u0) - boost::math::lgamma(double(k)));
  else
    tail = std::pow(u0, s) * upper_gamma(a, u0) / boost::math::tgamma(double(k));
  return boost::math::gamma_p(double(k), u0) + tail;
}

// Cluster energy as the sum of the per-rank means.
inline double cluster_energy_by_rank(int n, double u0, double alpha) {
  double sum = 0.0;
  for (int k = 1; k <= n; ++k) sum += mean_gain_rank(k, u0, 0.5 * alpha);
  return sum;
}

// Energy outside the n-nearest cluster in closed form:
// u0 P(n, u0) - n P(n+1, u0) + u0 P(n, u0)/(s-1) + u0^s Gamma(n+1-s, u0)/((s-1) Gamma(n)).
inline double out_of_cluster_closed_form(int n, double u0, double alpha) {
  using boost::math::gamma_p;
  const double s = 0.5 * alpha;
  const double a = n + 1 - s;
  double last;
  if (a > 0.0)
    last = std::exp(s * std::log(u0) + log_upper_gamma(a, u0) - boost::math::lgamma(double(n))) / (s - 1.0);
  else
    last = std::pow(u0, s) * upper_gamma(a, u0) / ((s - 1.0) * boost::math::tgamma(double(n)));
  return u0 * gamma_p(double(n), u0) - n * gamma_p(n + 1.0, u0) + u0 * gamma_p(double(n), u0) / (s - 1.0) + last;
}

// CDF of the distance to the s-th nearest point of a PPP with density lambda.
inline double nth_distance_cdf(int s, double rho, double lambda) {
  return boost::math::gamma_p(double(s), lambda * std::numbers::pi * rho * rho);
}

}  // namespace oracle

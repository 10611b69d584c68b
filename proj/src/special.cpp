#include "ncjt/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "ncjt/error.hpp"

namespace ncjt {
namespace {

constexpr int kMaxIterations = 200000;
constexpr double kEps = std::numeric_limits<double>::epsilon();

double log_prefactor(double a, double x) { return a * std::log(x) - x - std::lgamma(a); }

// sum_{n>=0} x^n / (a (a+1) ... (a+n)), scaled by x^a e^-x / Gamma(a).
double lower_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < kMaxIterations; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) return sum * std::exp(log_prefactor(a, x));
  }
  throw NumericalError("incomplete gamma series did not converge", std::abs(term / sum));
}

double upper_fraction(double a, double x) {
  constexpr double tiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h * std::exp(log_prefactor(a, x));
  }
  throw NumericalError("incomplete gamma continued fraction did not converge");
}

}  // namespace

IncompleteGamma incomplete_gamma(double a, double x) {
  if (!(a > 0.0)) throw std::invalid_argument("incomplete_gamma: a must be positive");
  if (!(x >= 0.0)) throw std::invalid_argument("incomplete_gamma: x must be non-negative");
  if (x == 0.0) return {0.0, 1.0};
  if (std::isinf(x)) return {1.0, 0.0};
  if (x < a + 1.0) {
    const double p = lower_series(a, x);
    return {p, 1.0 - p};
  }
  const double q = upper_fraction(a, x);
  return {1.0 - q, q};
}

}  // namespace ncjt

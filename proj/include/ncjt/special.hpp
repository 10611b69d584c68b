#pragma once

namespace ncjt {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x),
// a > 0, x >= 0. Both members are accurate to near machine precision in
// relative terms: the smaller of the two is computed directly (power series
// below x = a + 1, Lentz continued fraction above) and never by subtraction.
struct IncompleteGamma {
  double p;
  double q;
};

IncompleteGamma incomplete_gamma(double a, double x);

inline double gamma_p(double a, double x) { return incomplete_gamma(a, x).p; }
inline double gamma_q(double a, double x) { return incomplete_gamma(a, x).q; }

}  // namespace ncjt

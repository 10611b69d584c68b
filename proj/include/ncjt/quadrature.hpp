#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

namespace ncjt {

struct QuadratureResult {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
  bool converged = false;
};

namespace detail {

struct GaussKronrod15 {
  static constexpr std::array<double, 8> nodes = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.0};
  static constexpr std::array<double, 8> kronrod = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  // Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
  static constexpr std::array<double, 4> gauss = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

struct Segment {
  double lo, hi, value, error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

template <class F>
Segment gauss_kronrod_segment(F& f, double lo, double hi) {
  using GK = GaussKronrod15;
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * GK::kronrod[7];
  double gauss = fc * GK::gauss[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * GK::nodes[j];
    const double pair = f(center - dx) + f(center + dx);
    kronrod += GK::kronrod[j] * pair;
    if (j % 2 == 1) gauss += GK::gauss[j / 2] * pair;
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

// Globally adaptive 15-point Gauss-Kronrod quadrature over consecutive
// intervals [breaks[0], breaks[1]], ..., sharing one error budget. Stops when
// the summed error estimate is below max(abs_tol, rel_tol * |value|).
template <class F>
QuadratureResult integrate(F&& f, std::span<const double> breaks, double abs_tol, double rel_tol,
                           int max_intervals = 4000) {
  if (breaks.size() < 2) throw std::invalid_argument("integrate: need at least two break points");
  std::priority_queue<detail::Segment> heap;
  double value = 0.0;
  double error = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (!(breaks[i + 1] >= breaks[i])) throw std::invalid_argument("integrate: break points must increase");
    if (breaks[i + 1] == breaks[i]) continue;
    auto s = detail::gauss_kronrod_segment(f, breaks[i], breaks[i + 1]);
    value += s.value;
    error += s.error;
    heap.push(s);
  }
  int count = static_cast<int>(heap.size());
  auto done = [&] { return error <= std::max(abs_tol, rel_tol * std::abs(value)); };
  while (!heap.empty() && !done() && count < max_intervals) {
    const auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (mid <= worst.lo || mid >= worst.hi) {  // interval exhausted at machine precision
      heap.push({worst.lo, worst.hi, worst.value, 0.0});
      error -= worst.error;
      continue;
    }
    auto left = detail::gauss_kronrod_segment(f, worst.lo, mid);
    auto right = detail::gauss_kronrod_segment(f, mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  // Re-sum to shed the drift of the incremental updates.
  value = 0.0;
  error = 0.0;
  while (!heap.empty()) {
    value += heap.top().value;
    error += heap.top().error;
    heap.pop();
  }
  return {value, error, count, done()};
}

template <class F>
QuadratureResult integrate(F&& f, double lo, double hi, double abs_tol, double rel_tol,
                           int max_intervals = 4000) {
  const std::array<double, 2> breaks{lo, hi};
  return integrate(std::forward<F>(f), std::span<const double>(breaks), abs_tol, rel_tol, max_intervals);
}

}  // namespace ncjt

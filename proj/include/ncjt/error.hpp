#pragma once

#include <stdexcept>
#include <string>

namespace ncjt {

// Raised when a numerical routine (quadrature, factorization, root search)
// cannot meet its tolerance. Carries the best accuracy that was reached.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double achieved = 0.0)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

// A Poisson draw produced fewer access points than the cluster size.
class DegenerateDraw : public std::runtime_error {
 public:
  DegenerateDraw(long count, int n_a)
      : std::runtime_error("network draw has " + std::to_string(count) +
                           " access points, fewer than cluster size " + std::to_string(n_a)),
        count_(count) {}
  long count() const noexcept { return count_; }

 private:
  long count_;
};

// A design target that no admissible parameter value can reach.
class UnreachableTarget : public std::runtime_error {
 public:
  UnreachableTarget(const std::string& what, double limit)
      : std::runtime_error(what), limit_(limit) {}
  double limit() const noexcept { return limit_; }

 private:
  double limit_;
};

}  // namespace ncjt

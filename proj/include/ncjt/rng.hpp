#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace ncjt {

using Engine = std::mt19937_64;

// SplitMix64 finalizer; used to decorrelate (seed, index) pairs.
std::uint64_t mix64(std::uint64_t x);

// Independent stream for trial `index` of a run with master seed `seed`.
// Streams depend only on the pair, so trials may execute in any order.
Engine derive_stream(std::uint64_t seed, std::uint64_t index);

// Circularly-symmetric complex Gaussian with unit variance.
template <typename Real = double>
std::complex<Real> complex_normal(Engine& rng) {
  std::normal_distribution<Real> n(Real(0), Real(1) / std::sqrt(Real(2)));
  const Real re = n(rng);
  const Real im = n(rng);
  return {re, im};
}

}  // namespace ncjt

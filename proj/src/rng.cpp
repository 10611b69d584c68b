#include "ncjt/rng.hpp"

namespace ncjt {

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Engine derive_stream(std::uint64_t seed, std::uint64_t index) {
  return Engine(mix64(mix64(seed) ^ mix64(index + 0x632be59bd9b4e019ULL)));
}

}  // namespace ncjt

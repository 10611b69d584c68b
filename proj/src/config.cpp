#include "ncjt/config.hpp"

#include <stdexcept>
#include <string>

namespace ncjt {

void SystemConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("invalid config: " + what); };
  if (!(lambda > 0.0) || !std::isfinite(lambda)) fail("lambda must be positive");
  if (!(alpha > 2.0) || !std::isfinite(alpha)) fail("alpha must exceed 2");
  if (!(r0 > 0.0) || !std::isfinite(r0)) fail("r0 must be positive");
  if (!(sigma_w_sq >= 0.0) || !std::isfinite(sigma_w_sq)) fail("sigma_w_sq must be non-negative");
  if (n_a < 1) fail("n_a must be at least 1");
  if (n_p < 1) fail("n_p must be at least 1");
  if (!(epsilon_trunc > 0.0 && epsilon_trunc < 1.0)) fail("epsilon_trunc must lie in (0, 1)");
}

}  // namespace ncjt

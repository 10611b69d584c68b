#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ncjt/analytic.hpp"
#include "ncjt/log.hpp"
#include "ncjt/quadrature.hpp"
#include "oracles.hpp"

using namespace ncjt;
using std::numbers::pi;

namespace {

// Collects warnings for the lifetime of the object.
struct WarningTrap {
  std::vector<std::string> messages;
  WarningHandler previous;
  WarningTrap() {
    previous = set_warning_handler([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~WarningTrap() { set_warning_handler(previous); }
};

// Marchenko-Pastur form as usually written; loses digits for small a.
double mp_textbook(double a, double b) {
  return (a - 1.0 - a * b + std::sqrt((1.0 + a + a * b) * (1.0 + a + a * b) - 4.0 * a)) / (2.0 * a * a * b);
}

}  // namespace

TEST_CASE("total energy") {
  SystemConfig c;
  c.alpha = 4.0;
  CHECK(sigma_phi_sq(c) == doctest::Approx(2.0 * pi * 0.0016).epsilon(1e-14));
  CHECK(sigma_phi_sq(c) == doctest::Approx(1.00531e-2).epsilon(1e-5));
  CHECK(c.reference_load() == doctest::Approx(5.0265e-3).epsilon(1e-4));
  CHECK(1.0 - std::exp(-c.reference_load()) == doctest::Approx(5e-3).epsilon(0.01));
  c.alpha = 1e6;
  CHECK(sigma_phi_sq(c) == doctest::Approx(c.reference_load()).epsilon(1e-5));
  c.alpha = 2.0;
  CHECK_THROWS_AS(sigma_phi_sq(c), std::invalid_argument);
}

TEST_CASE("cluster energy matches the per-rank closed form") {
  for (double alpha : {2.5, 3.0, 3.67, 4.0, 5.0}) {
    for (int n : {1, 2, 3, 5, 10, 50}) {
      SystemConfig c = preset_config(1.0, alpha);
      c.n_a = n;
      CAPTURE(alpha);
      CAPTURE(n);
      const double u0 = c.reference_load();
      CHECK(sigma_c_sq_exact(c) == doctest::Approx(oracle::cluster_energy_by_rank(n, u0, alpha)).epsilon(1e-9));
    }
  }
}

TEST_CASE("out-of-cluster energy matches its closed form to full relative accuracy") {
  for (double alpha : {2.1, 2.5, 3.67, 4.0, 4.5, 5.0}) {
    for (int n : {1, 2, 8, 30, 100, 1000, 10000}) {
      SystemConfig c = preset_config(1.0, alpha);
      c.n_a = n;
      CAPTURE(alpha);
      CAPTURE(n);
      const double ref = oracle::out_of_cluster_closed_form(n, c.reference_load(), alpha);
      CHECK(out_of_cluster_energy(c) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("cluster and out-of-cluster energies partition the total") {
  for (double alpha : {2.5, 3.67, 5.0})
    for (int n : {1, 4, 40, 400}) {
      SystemConfig c = preset_config(1.0, alpha);
      c.n_a = n;
      const auto e = cluster_energy(c);
      CHECK(e.sigma_c_sq + e.out_of_cluster == doctest::Approx(e.sigma_phi_sq).epsilon(1e-12));
      CHECK(e.sigma_c_sq > 0.0);
      CHECK(e.sigma_c_sq <= e.sigma_phi_sq);
    }
}

TEST_CASE("cluster energy grows with n_a towards the total") {
  SystemConfig c = preset_config();
  double prev = 0.0;
  for (int n = 1; n <= 200; ++n) {
    c.n_a = n;
    const double v = sigma_c_sq_exact(c);
    CHECK(v > prev);
    prev = v;
  }
  c.n_a = 10000;
  CHECK(sigma_c_sq_exact(c) == doctest::Approx(sigma_phi_sq(c)).epsilon(5e-3));
}

TEST_CASE("cluster energy is lambda-invariant under r0 = c / sqrt(lambda)") {
  for (int n : {1, 3, 20}) {
    SystemConfig a = preset_config(1.0), b = preset_config(4.0), d = preset_config(0.3);
    a.n_a = b.n_a = d.n_a = n;
    CHECK(sigma_c_sq_exact(b) == doctest::Approx(sigma_c_sq_exact(a)).epsilon(1e-11));
    CHECK(sigma_c_sq_exact(d) == doctest::Approx(sigma_c_sq_exact(a)).epsilon(1e-11));
  }
}

TEST_CASE("large-cluster approximation") {
  SystemConfig c;
  c.alpha = 4.0;
  c.n_a = 10;
  const double u0 = c.reference_load();
  const double corr = 0.5 * u0 / 10.0;
  CHECK(corr == doctest::Approx(2.513e-4).epsilon(1e-3));
  CHECK(sigma_c_sq_approx(c) == doctest::Approx(sigma_phi_sq(c) * (1.0 - corr)).epsilon(1e-14));
  CHECK(sigma_c_sq_exact(c) == doctest::Approx(sigma_c_sq_approx(c)).epsilon(0.03));
  c.n_a = 1000000;
  CHECK(sigma_c_sq_approx(c) == doctest::Approx(sigma_phi_sq(c)).epsilon(1e-8));

  SUBCASE("normalized gap ordering: decreasing in n_a and in alpha") {
    for (double alpha : {2.1, 2.5, 3.0, 3.67, 4.0, 5.0}) {
      double prev = 1.0;
      for (int n : {1, 2, 5, 10, 100, 1000}) {
        SystemConfig x = preset_config(1.0, alpha);
        x.n_a = n;
        const double gap = 1.0 - sigma_c_sq_approx(x) / sigma_phi_sq(x);
        CHECK(gap < prev);
        prev = gap;
      }
    }
    for (int n : {1, 10, 1000}) {
      double prev = 1.0;
      for (double alpha : {2.1, 2.5, 3.0, 3.67, 4.0, 5.0}) {
        SystemConfig x = preset_config(1.0, alpha);
        x.n_a = n;
        const double gap = 1.0 - sigma_c_sq_approx(x) / sigma_phi_sq(x);
        CHECK(gap < prev);
        prev = gap;
      }
    }
  }

  SUBCASE("clamped with a warning when the correction exceeds one") {
    WarningTrap trap;
    SystemConfig x;
    x.r0 = 1.0;
    x.alpha = 3.0;  // (2/3) pi^(1/2) > 1
    CHECK(sigma_c_sq_approx(x) == 0.0);
    CHECK(trap.messages.size() == 1);
  }
}

TEST_CASE("Stieltjes factor") {
  CHECK(stieltjes_factor(0.5, 1.0) == doctest::Approx(std::sqrt(2.0) - 1.0 + 1.0 - 0.585786437626905).epsilon(1e-12));
  CHECK(stieltjes_factor(0.5, 1.0) == doctest::Approx(0.828427).epsilon(1e-6));
  CHECK(stieltjes_factor(0.1, 0.5) == doctest::Approx(1.0469).epsilon(1e-4));
  for (double b : {0.01, 0.5, 3.0, 100.0}) CHECK(stieltjes_factor(1e-9, b) == doctest::Approx(1.0).epsilon(2e-9 * (1.0 + b)));

  SUBCASE("agrees with the textbook form where that form is well conditioned") {
    for (double a : {0.05, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0})
      for (double b : {0.1, 0.5, 1.0, 2.0, 10.0}) CHECK(stieltjes_factor(a, b) == doctest::Approx(mp_textbook(a, b)).epsilon(1e-10));
  }
  SUBCASE("first-order expansion in the load") {
    for (double b : {0.1, 0.5, 2.0}) {
      const double a = 1e-4;
      CHECK(std::abs(stieltjes_factor(a, b) - (1.0 + a * (1.0 - b))) < 10.0 * a * a * (1.0 + b * b));
    }
  }
  SUBCASE("positive on the domain") {
    for (double a = 1e-3; a < 1e3; a *= 3.7)
      for (double b = 1e-4; b < 1e4; b *= 4.1) CHECK(stieltjes_factor(a, b) > 0.0);
  }
  CHECK_THROWS_AS(stieltjes_factor(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(stieltjes_factor(0.5, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(stieltjes_factor(-0.5, 1.0), std::invalid_argument);
  CHECK(stieltjes_factor(0.5f, 1.0f) == doctest::Approx(0.828427f).epsilon(1e-5));
}

TEST_CASE("asymptotic error variance") {
  ClusterEnergy e{1.0, 0.8, 0.2};
  SUBCASE("composition with the factor") {
    // sigma_tilde^2 = 0.2 + 0.2 = 0.4 = 0.5 sigma_c^2
    const double v = sigma_e_sq_asymptotic(1, 10.0, 0.2, e);
    CHECK(v == doctest::Approx(0.1 * 0.4 * stieltjes_factor(0.1, 0.5)).epsilon(1e-14));
    CHECK(v == doctest::Approx(0.1 * 0.4 * 1.0469).epsilon(1e-4));
  }
  SUBCASE("vanishes with long pilots") {
    double prev = 1e9;
    for (double n_p : {1.0, 10.0, 100.0, 1e4, 1e8}) {
      const double v = sigma_e_sq_asymptotic(4, n_p, 0.1, e);
      CHECK(v < prev);
      prev = v;
    }
    CHECK(prev < 1e-7);
  }
  SUBCASE("never exceeds the prior, tends to it with huge noise") {
    for (int n_a : {1, 2, 8, 64})
      for (double n_p : {1.0, 2.0, 10.0, 100.0})
        for (double w : {0.0, 1e-3, 1.0, 1e3, 1e9}) CHECK(sigma_e_sq_asymptotic(n_a, n_p, w, e) <= e.sigma_c_sq);
    CHECK(sigma_e_sq_asymptotic(4, 20.0, 1e12, e) == doctest::Approx(e.sigma_c_sq).epsilon(1e-9));
  }
  SUBCASE("no interference and no noise") {
    ClusterEnergy all{1.0, 1.0, 0.0};
    CHECK(sigma_e_sq_asymptotic(2, 10.0, 0.0, all) == 0.0);
    CHECK(sigma_e_sq_asymptotic(20, 10.0, 0.0, all) == doctest::Approx(0.5).epsilon(1e-14));
  }
  SUBCASE("rejects zero cluster energy") {
    CHECK_THROWS_AS(sigma_e_sq_asymptotic(1, 10.0, 0.1, ClusterEnergy{1.0, 0.0, 1.0}), std::invalid_argument);
  }
  SUBCASE("config overloads agree") {
    SystemConfig c = preset_config();
    c.n_a = 3;
    c.n_p = 30;
    c.sigma_w_sq = 1e-5;
    const auto ce = cluster_energy(c);
    CHECK(sigma_e_sq_asymptotic(c, ce.sigma_c_sq, ce.sigma_phi_sq) == doctest::Approx(sigma_e_sq_asymptotic(c, ce)).epsilon(1e-6));
  }
}

TEST_CASE("effective SNR") {
  CHECK(snr_effective(0.9, 0.1, 0.1) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(snr_effective(0.9, 0.0, 0.1) == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(snr_effective(0.9, 0.9, 0.1) == 0.0);
  CHECK_THROWS_AS(snr_effective(0.9, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(snr_effective(0.9, 1.0, 0.1), std::invalid_argument);
  double prev_e = 1e9, prev_w = 1e9;
  for (double x = 0.0; x <= 0.9; x += 0.05) {
    CHECK(snr_effective(0.9, x, 0.1) < prev_e);
    CHECK(snr_effective(0.9, 0.1, 0.01 + x) < prev_w);
    prev_e = snr_effective(0.9, x, 0.1);
    prev_w = snr_effective(0.9, 0.1, 0.01 + x);
  }
}

TEST_CASE("noise for a reference SNR") {
  SystemConfig c = preset_config();
  c.n_a = 5;
  const double s1 = sigma_c_sq_exact(c.with_cluster(1));
  CHECK(noise_for_snr0(c, 1e4) == doctest::Approx(s1 / 1e4).epsilon(1e-14));
  CHECK(noise_for_snr0(c, 1.0) == doctest::Approx(s1).epsilon(1e-14));
  const double w = 3.3e-5;
  CHECK(noise_for_snr0(c, s1 / w) == doctest::Approx(w).epsilon(1e-13));
  CHECK(noise_for_snr0(c, 1e30) < 1e-31);
  CHECK_THROWS_AS(noise_for_snr0(c, 0.0), std::invalid_argument);

  c.sigma_w_sq = noise_for_snr0(c, 1e4);
  c.n_a = 1;
  CHECK(energy_summary(c).snr0 == doctest::Approx(1e4).epsilon(1e-12));
}

TEST_CASE("contamination-limited SNR") {
  SystemConfig c;
  c.n_a = 5;
  c.n_p = 100;
  CHECK(snr_contamination_leading(c, 2.0, 3.0) == doctest::Approx(38.0).epsilon(1e-14));
  c.n_p = 5;
  CHECK(snr_contamination_leading(c, 2.0, 3.0) == 0.0);
  CHECK_THROWS_AS(snr_contamination_leading(c, 3.0, 3.0), std::invalid_argument);

  SUBCASE("agrees with the full expression to O(n_a / n_p)") {
    for (double alpha : {3.0, 3.67, 5.0})
      for (int n_a : {1, 2, 4, 8}) {
        SystemConfig x = preset_config(1.0, alpha);
        x.n_a = n_a;
        const auto e = cluster_energy(x);
        for (int ratio : {50, 100, 1000}) {
          x.n_p = ratio * n_a;
          const double full = snr_effective(e.sigma_c_sq, sigma_e_sq_asymptotic(x, e), 0.0);
          const double lead = snr_contamination_leading(x, e.sigma_c_sq, e.sigma_phi_sq);
          CHECK(std::abs(full / lead - 1.0) < 2.0 / ratio);
        }
      }
  }
  SUBCASE("composite expansion of the factor") {
    // (1/a) / (b f_a(b)) - 1 against (1/a - 1) / b as a -> 0.
    for (double b : {0.01, 0.1, 1.0}) {
      double prev = 1e9;
      for (double a : {0.1, 0.01, 0.001, 1e-4}) {
        const double composite = (1.0 / a) / (b * stieltjes_factor(a, b)) - 1.0;
        const double lead = (1.0 / a - 1.0) / b;
        const double rel = std::abs(composite / lead - 1.0);
        CHECK(rel < prev);
        CHECK(rel < 2.0 * a * (1.0 + b));
        prev = rel;
      }
    }
  }
}

TEST_CASE("density of the s-th nearest distance") {
  SystemConfig c = preset_config();
  for (int s : {1, 5, 50}) {
    const double hi = std::sqrt((s + 20.0 * std::sqrt(s) + 40.0) / pi);
    const auto r = integrate([&](double rho) { return rho > 0 ? nth_nearest_pdf(s, rho, c) : 0.0; }, 0.0, hi, 1e-12, 1e-12);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));
  }
  for (double rho : {0.01, 0.3, 1.0, 2.5})
    CHECK(nth_nearest_pdf(1, rho, c) == doctest::Approx(2.0 * pi * rho * std::exp(-pi * rho * rho)).epsilon(1e-13));
  for (int s : {100, 1000}) {
    const double hi = std::sqrt((s + 20.0 * std::sqrt(s) + 40.0) / pi);
    const auto m = integrate([&](double rho) { return rho > 0 ? rho * nth_nearest_pdf(s, rho, c) : 0.0; }, 0.0, hi, 1e-12, 1e-12);
    CHECK(std::abs(m.value / std::sqrt(s / pi) - 1.0) < 1.0 / (4.0 * s));
  }
  // No factorial overflow.
  CHECK(std::isfinite(nth_nearest_pdf(5000, std::sqrt(5000.0 / pi), c)));
  CHECK_THROWS_AS(nth_nearest_pdf(0, 1.0, c), std::invalid_argument);
  CHECK_THROWS_AS(nth_nearest_pdf(1, 0.0, c), std::invalid_argument);
}

TEST_CASE("energy summary invariants") {
  for (double snr0_db : {0.0, 20.0, 40.0})
    for (int n_a : {1, 2, 8}) {
      SystemConfig c = preset_config();
      c.n_a = n_a;
      c.n_p = 20;
      c.sigma_w_sq = noise_for_snr0(c, std::pow(10.0, snr0_db / 10.0));
      const auto s = energy_summary(c);
      CHECK(s.sigma_c_sq > 0.0);
      CHECK(s.sigma_c_sq <= s.sigma_phi_sq);
      CHECK(s.sigma_e_sq >= 0.0);
      CHECK(s.sigma_e_sq <= s.sigma_c_sq);
      CHECK(s.snr <= s.sigma_c_sq / c.sigma_w_sq);
      CHECK(s.snr0 == doctest::Approx(std::pow(10.0, snr0_db / 10.0)).epsilon(1e-12));
    }
}

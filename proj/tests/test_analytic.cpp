#include <cmath>

#include "doctest.h"
#include "qclmi/analytic.hpp"
#include "qclmi/quantum_gaussian.hpp"
#include "qclmi/rng.hpp"

using namespace qclmi;

TEST_CASE("u(t) substitution values and period") {
  CHECK(rwa_u(0.0, 1.0) == 0.0);
  // λ=1, t=π/4: sin²(π/2)/32·[5+3cos π] = (1/32)(5−3) = 1/16
  CHECK(rwa_u(M_PI / 4.0, 1.0) == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
  for (double t : {0.1, 0.37, 1.9})
    CHECK(rwa_u(t + M_PI / 2.0, 1.0) == doctest::Approx(rwa_u(t, 1.0)).epsilon(1e-12));
  // λ scaling: u(t;λ) = u(λt;1)
  CHECK(rwa_u(0.4, 0.6) == doctest::Approx(rwa_u(0.24, 1.0)).epsilon(1e-13));
}

TEST_CASE("fock-fock closed forms") {
  const auto at_quarter = rwa_fock_fock(M_PI / 4.0, 1.0);
  CHECK(at_quarter.i_q == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(at_quarter.i_cl == doctest::Approx(31.0 / 256.0).epsilon(1e-14));

  const double tau0 = rwa_recurrence_time(1.0);
  CHECK(tau0 == doctest::Approx(M_PI / 2.0).epsilon(1e-15));
  const auto at_tau0 = rwa_fock_fock(tau0, 1.0);
  CHECK(std::abs(at_tau0.i_q) < 1e-14);
  CHECK(std::abs(at_tau0.i_cl) < 1e-14);

  double max_q = 0.0, max_cl = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const auto v = rwa_fock_fock(tau0 * k / 1000.0, 1.0);
    max_q = std::max(max_q, v.i_q);
    max_cl = std::max(max_cl, v.i_cl);
    CHECK(v.i_q >= 0.0);
    CHECK(v.i_q <= 1.0);
    CHECK(v.i_cl >= 0.0);
    CHECK(v.i_cl <= 1.0);
  }
  CHECK(max_q > max_cl);  // markedly different oscillation amplitudes
}

TEST_CASE("coherent-fock closed forms") {
  const auto at_zero = rwa_coh_fock(0.0, 1.0);
  CHECK(at_zero.i_q == 0.0);
  CHECK(at_zero.i_cl == 0.0);

  const auto at_quarter = rwa_coh_fock(M_PI / 4.0, 1.0);
  CHECK(at_quarter.i_q == doctest::Approx(0.75).epsilon(1e-14));
  CHECK(at_quarter.i_cl == doctest::Approx(7.0 / 32.0).epsilon(1e-14));

  const auto at_tau0 = rwa_coh_fock(rwa_recurrence_time(1.0), 1.0);
  CHECK(std::abs(at_tau0.i_q) < 1e-14);
  CHECK(std::abs(at_tau0.i_cl) < 1e-14);
}

TEST_CASE("recurrence time rejects the uncoupled case") {
  CHECK_THROWS_AS(rwa_recurrence_time(0.0), ConfigError);
  CHECK(rwa_recurrence_time(-0.5) == doctest::Approx(M_PI).epsilon(1e-15));
}

TEST_CASE("bilinear oracle basics") {
  const ModelSpec m{ModelKind::Bilinear, 1.0, 1.0, 0.9, 1.0};
  CHECK(bilinear_icl_oracle(m, {}, 0.0) == doctest::Approx(0.0).epsilon(1e-15));

  const ModelSpec un{ModelKind::Bilinear, 1.0, 1.0, 0.0, 1.0};
  for (double t : {0.5, 2.0, 9.0})
    CHECK(std::abs(bilinear_icl_oracle(un, {}, t)) < 1e-14);

  for (int k = 0; k <= 200; ++k) {
    const double v = bilinear_icl_oracle(m, {}, 10.0 * k / 200.0);
    CHECK(v >= -1e-14);
    CHECK(v <= 1.0);
  }

  const ModelSpec bad{ModelKind::Bilinear, 1.0, 1.0, 1.0, 1.0};
  CHECK_THROWS_AS(bilinear_icl_oracle(bad, {}, 1.0), ConfigError);
  const ModelSpec rw{ModelKind::Rwa, 1.0, 1.0, 0.5, 1.0};
  CHECK_THROWS_AS(bilinear_icl_oracle(rw, {}, 1.0), ConfigError);
}

TEST_CASE("bilinear oracle is center-independent") {
  const ModelSpec m{ModelKind::Bilinear, 1.0, 1.0, 0.9, 1.0};
  Rng rng(11);
  for (double t : {0.7, 3.3, 8.1}) {
    const double ref = bilinear_icl_oracle(m, {}, t);
    for (int k = 0; k < 10; ++k) {
      const PhasePoint c{4.0 * rng.normal(), 4.0 * rng.normal(), 4.0 * rng.normal(),
                         4.0 * rng.normal()};
      CHECK(std::abs(bilinear_icl_oracle(m, c, t) - ref) < 1e-12);
    }
  }
}

TEST_CASE("bilinear oracle equals the Gaussian quantum route") {
  const ModelSpec m{ModelKind::Bilinear, 1.0, 1.0, 0.9, 1.0};
  for (int k = 0; k <= 100; ++k) {
    const double t = 10.0 * k / 100.0;
    const double i_q = qlmi_gaussian_at(m, {0.3, -0.2, 0.1, 0.4}, t).i;
    CHECK(std::abs(i_q - bilinear_icl_oracle(m, {}, t)) < 1e-12);
  }
}

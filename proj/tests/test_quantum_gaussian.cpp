#include <cmath>

#include "doctest.h"
#include "qclmi/flows.hpp"
#include "qclmi/quantum_gaussian.hpp"

using namespace qclmi;

namespace {
const ModelSpec kBilinear{ModelKind::Bilinear, 1.0, 1.0, 0.9, 1.0};
const ModelSpec kRwa{ModelKind::Rwa, 1.0, 1.0, 0.7, 1.0};
}  // namespace

TEST_CASE("quadratic form encodes the couplings") {
  const Eigen::Matrix4d mb = quadratic_form(kBilinear);
  CHECK(mb(0, 0) == 1.0);
  CHECK(mb(1, 1) == 1.0);
  CHECK(mb(0, 2) == 0.9);
  CHECK(mb(2, 0) == 0.9);
  CHECK(mb(1, 3) == 0.0);
  CHECK((mb - mb.transpose()).norm() == 0.0);

  const ModelSpec w2{ModelKind::Bilinear, 1.3, 1.3, 0.0, 1.0};
  CHECK(quadratic_form(w2)(0, 0) == doctest::Approx(1.69).epsilon(1e-15));

  const Eigen::Matrix4d mr = quadratic_form(kRwa);
  CHECK(mr(0, 2) == 0.7);
  CHECK(mr(1, 3) == 0.7);

  const ModelSpec nelson{ModelKind::Nelson, std::sqrt(0.1), std::sqrt(2.0), 0.0, 0.05};
  CHECK_THROWS_AS(quadratic_form(nelson), ConfigError);
}

TEST_CASE("propagator is symplectic, unimodular, and correct at the quarter period") {
  const Eigen::Matrix4d J = symplectic_unit();
  for (const ModelSpec& m : {kBilinear, kRwa}) {
    for (double t : {0.0, 0.4, 2.0, 11.0}) {
      const Eigen::Matrix4d S = symplectic_propagator(m, t);
      CHECK((S.transpose() * J * S - J).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(S.determinant() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
  CHECK(symplectic_propagator(kBilinear, 0.0).isIdentity(1e-15));

  // λ=0, ω=1, t=π/2: (q,p) → (p,−q) per mode
  const ModelSpec free{ModelKind::Bilinear, 1.0, 1.0, 0.0, 1.0};
  const Eigen::Matrix4d S = symplectic_propagator(free, M_PI / 2.0);
  Eigen::Matrix4d expect = Eigen::Matrix4d::Zero();
  expect(0, 1) = expect(2, 3) = 1.0;
  expect(1, 0) = expect(3, 2) = -1.0;
  CHECK((S - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("propagator equals the classical flow matrix") {
  for (const ModelSpec& m : {kBilinear, kRwa}) {
    const auto flat = analytic_flow_matrix(m, 1.3);
    const Eigen::Matrix4d S = symplectic_propagator(m, 1.3);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(S(i, j) == flat[size_t(4 * i + j)]);
  }
}

TEST_CASE("evolve maps moments; isotropic covariance is rotation-invariant") {
  const double hbar = 0.05;
  const CovarianceState s0 = CovarianceState::coherent({0.2, -0.1, 0.3, 0.0}, hbar);
  CHECK((s0.cov - 0.5 * hbar * Eigen::Matrix4d::Identity()).norm() == 0.0);

  const ModelSpec free{ModelKind::Bilinear, 1.0, 1.0, 0.0, 1.0};
  for (double t : {0.5, 2.2}) {
    const CovarianceState st = evolve(s0, symplectic_propagator(free, t));
    CHECK((st.cov - s0.cov).cwiseAbs().maxCoeff() < 1e-14);
    // the mean rides the classical flow
    const double c = std::cos(t), s = std::sin(t);
    CHECK(st.mean(0) == doctest::Approx(0.2 * c - 0.1 * s).epsilon(1e-13));
    CHECK(st.mean(1) == doctest::Approx(-0.1 * c - 0.2 * s).epsilon(1e-13));
  }

  // det cov invariant under any symplectic evolution
  const Eigen::Matrix4d S = symplectic_propagator(kBilinear, 3.1);
  const CovarianceState st = evolve(s0, S);
  CHECK(st.cov.determinant() == doctest::Approx(s0.cov.determinant()).epsilon(1e-10));
}

TEST_CASE("reduced purity closed forms and the uncertainty guard") {
  const double hbar = 0.05;
  const CovarianceState pure = CovarianceState::coherent({}, hbar);
  CHECK(reduced_purity(pure, 1, hbar) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(reduced_purity(pure, 2, hbar) == doctest::Approx(1.0).epsilon(1e-14));

  CovarianceState spread = pure;
  spread.cov.block<2, 2>(0, 0) = hbar * Eigen::Matrix2d::Identity();
  CHECK(reduced_purity(spread, 1, hbar) == doctest::Approx(0.5).epsilon(1e-14));

  CovarianceState squeezed = pure;
  squeezed.cov.block<2, 2>(2, 2) = 0.4 * 0.5 * hbar * Eigen::Matrix2d::Identity();
  CHECK_THROWS_AS(reduced_purity(squeezed, 2, hbar), ConvergenceError);
  CHECK_THROWS_AS(reduced_purity(pure, 3, hbar), ConfigError);
}

TEST_CASE("subsystem entropies coincide for every evolved pure Gaussian state") {
  for (int k = 0; k <= 100; ++k) {
    const double t = 10.0 * k / 100.0;
    const GaussianEntropies e = qlmi_gaussian_at(kBilinear, {0.3, -0.2, 0.1, 0.4}, t);
    CHECK(std::abs(e.s1 - e.s2) < 1e-12);
    CHECK(std::abs(e.global_impurity) < 1e-10);
    CHECK(e.i >= -1e-14);
    CHECK(e.i == doctest::Approx(e.s1 + e.s2 - e.s1 * e.s2).epsilon(1e-14));
  }
}

TEST_CASE("qlmi vanishes iff the state stays uncorrelated") {
  const CovarianceState product = CovarianceState::coherent({1.0, 2.0, -1.0, 0.5}, 1.0);
  CHECK(qlmi_gaussian(product, 1.0) == doctest::Approx(0.0).epsilon(1e-14));

  // RWA with coherent inputs evolves each packet coherently: I ≡ 0
  for (int k = 0; k <= 50; ++k) {
    const double t = 2.0 * M_PI * k / 50.0;
    CHECK(std::abs(qlmi_gaussian_at(kRwa, {0.3, -0.2, 0.15, 0.25}, t).i) < 1e-10);
  }

  // whereas the plain bilinear coupling does correlate
  CHECK(qlmi_gaussian_at(kBilinear, {}, 1.0).i > 1e-3);
}

TEST_CASE("impure global states are rejected") {
  CovarianceState mixed = CovarianceState::coherent({}, 1.0);
  mixed.cov *= 1.5;  // uniform broadening: globally impure
  CHECK_THROWS_AS(gaussian_entropies(mixed, 1.0), ConvergenceError);
}

TEST_CASE("evolved covariance matches the classical second-moment transport") {
  // classical Gaussian with per-axis variance v transports to S·(vI)·Sᵀ; the
  // Wigner covariance uses v = ħ/2 and transports identically.
  const double hbar = 0.05;
  const Eigen::Matrix4d S = symplectic_propagator(kBilinear, 1.0);
  const CovarianceState st = evolve(CovarianceState::coherent({}, hbar), S);
  const Eigen::Matrix4d expect = S * (0.5 * hbar * Eigen::Matrix4d::Identity()) * S.transpose();
  CHECK((st.cov - expect).cwiseAbs().maxCoeff() < 1e-14);
}

#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "qclmi/flows.hpp"
#include "qclmi/rng.hpp"

using namespace qclmi;

namespace {

ModelSpec bilinear(double lambda, double omega = 1.0) {
  return {ModelKind::Bilinear, omega, omega, lambda, 1.0};
}

ModelSpec rwa(double lambda, double omega = 1.0) {
  return {ModelKind::Rwa, omega, omega, lambda, 1.0};
}

ModelSpec nelson() {
  return {ModelKind::Nelson, std::sqrt(0.1), std::sqrt(2.0), 0.0, 0.05};
}

double max_abs_diff(const PhasePoint& a, const PhasePoint& b) {
  double m = 0.0;
  for (int i = 0; i < 4; ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Finite-difference Jacobian of the flow at x0 (exact for linear flows).
std::array<double, 16> fd_jacobian(const FlowPlan& plan, const PhasePoint& x0, double t,
                                   double eps) {
  std::array<double, 16> J{};
  for (int j = 0; j < 4; ++j) {
    PhasePoint xp = x0, xm = x0;
    xp.set(j, x0[j] + eps);
    xm.set(j, x0[j] - eps);
    const PhasePoint fp = flow(plan, xp, t);
    const PhasePoint fm = flow(plan, xm, t);
    for (int i = 0; i < 4; ++i) J[size_t(4 * i + j)] = (fp[i] - fm[i]) / (2.0 * eps);
  }
  return J;
}

double det4(const std::array<double, 16>& m) {
  // expansion by LU with partial pivot on a 4x4 copy
  double a[4][4];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) a[i][j] = m[size_t(4 * i + j)];
  double det = 1.0;
  for (int c = 0; c < 4; ++c) {
    int piv = c;
    for (int r = c + 1; r < 4; ++r)
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    if (piv != c) {
      for (int j = 0; j < 4; ++j) std::swap(a[c][j], a[piv][j]);
      det = -det;
    }
    if (a[c][c] == 0.0) return 0.0;
    det *= a[c][c];
    for (int r = c + 1; r < 4; ++r) {
      const double f = a[r][c] / a[c][c];
      for (int j = c; j < 4; ++j) a[r][j] -= f * a[c][j];
    }
  }
  return det;
}

// max |SᵀJS − J| entry for a row-major 4×4 flow matrix
double symplectic_defect(const std::array<double, 16>& s) {
  const int J[4][4] = {{0, 1, 0, 0}, {-1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}};
  double worst = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double v = 0.0;
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          v += s[size_t(4 * k + i)] * J[k][l] * s[size_t(4 * l + j)];
      worst = std::max(worst, std::abs(v - J[i][j]));
    }
  return worst;
}

}  // namespace

TEST_CASE("energy evaluates the three Hamiltonians") {
  CHECK(energy(nelson(), {0.0, std::sqrt(0.1), 0.0, 0.0}) ==
        doctest::Approx(0.05).epsilon(1e-15));

  const PhasePoint x{0.1, 0.2, 0.3, 0.4};
  CHECK(energy(bilinear(0.9), x) ==
        doctest::Approx(0.5 * (0.04 + 0.16) + 0.5 * (0.01 + 0.09) + 0.9 * 0.03).epsilon(1e-14));
  CHECK(energy(rwa(0.9), x) ==
        doctest::Approx(0.5 * (0.04 + 0.16) + 0.5 * (0.01 + 0.09) + 0.9 * (0.03 + 0.08))
            .epsilon(1e-14));
  // −q1p1p2 + q1²q2²/2 on top of ω1²=0.1, ω2²=2 oscillators
  CHECK(energy(nelson(), x) ==
        doctest::Approx(0.5 * (0.04 + 0.16) + 0.5 * (0.1 * 0.01 + 2.0 * 0.09) -
                        0.1 * 0.2 * 0.4 + 0.5 * 0.01 * 0.09)
            .epsilon(1e-14));
}

TEST_CASE("hamilton_rhs matches hand-expanded equations of motion") {
  const PhasePoint x{0.1, 0.2, 0.3, 0.4};

  const PhasePoint db = hamilton_rhs(bilinear(0.9), x);
  CHECK(db.q1 == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(db.p1 == doctest::Approx(-0.1 - 0.9 * 0.3).epsilon(1e-15));
  CHECK(db.q2 == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(db.p2 == doctest::Approx(-0.3 - 0.9 * 0.1).epsilon(1e-15));

  const PhasePoint dr = hamilton_rhs(rwa(0.5), x);
  CHECK(dr.q1 == doctest::Approx(0.2 + 0.5 * 0.4).epsilon(1e-15));
  CHECK(dr.q2 == doctest::Approx(0.4 + 0.5 * 0.2).epsilon(1e-15));

  const PhasePoint dn = hamilton_rhs(nelson(), x);
  CHECK(dn.q1 == doctest::Approx(0.2 - 0.1 * 0.4).epsilon(1e-14));
  CHECK(dn.p1 == doctest::Approx(-0.1 * 0.1 + 0.2 * 0.4 - 0.1 * 0.09).epsilon(1e-14));
  CHECK(dn.q2 == doctest::Approx(0.4 - 0.1 * 0.2).epsilon(1e-14));
  CHECK(dn.p2 == doctest::Approx(-2.0 * 0.3 - 0.01 * 0.3).epsilon(1e-14));
}

TEST_CASE("lambda=0 flow is two independent harmonic rotations") {
  const ModelSpec m = bilinear(0.0, 1.7);
  const FlowPlan plan = FlowPlan::for_model(m);
  const PhasePoint x0{0.4, -0.3, 0.2, 0.8};
  const double w = 1.7;
  for (double t : {0.3, 1.0, 4.7}) {
    const PhasePoint x = flow(plan, x0, t);
    const double c = std::cos(w * t), s = std::sin(w * t);
    CHECK(x.q1 == doctest::Approx(x0.q1 * c + x0.p1 / w * s).epsilon(1e-12));
    CHECK(x.p1 == doctest::Approx(x0.p1 * c - w * x0.q1 * s).epsilon(1e-12));
    CHECK(x.q2 == doctest::Approx(x0.q2 * c + x0.p2 / w * s).epsilon(1e-12));
    CHECK(x.p2 == doctest::Approx(x0.p2 * c - w * x0.q2 * s).epsilon(1e-12));
  }
}

TEST_CASE("analytic bilinear flow agrees with a dense-step RK4 oracle") {
  const ModelSpec m = bilinear(0.9);
  const FlowPlan analytic = FlowPlan::for_model(m);
  const PhasePoint x0{0.3, -0.1, -0.2, 0.5};

  PhasePoint x = x0;
  const double t = 1.0, dt = 1e-5;
  for (int i = 0; i < 100000; ++i) x = rk4_step(m, x, dt);

  CHECK(max_abs_diff(flow(analytic, x0, t), x) < 1e-9);
}

TEST_CASE("analytic RWA flow agrees with a dense-step RK4 oracle") {
  const ModelSpec m = rwa(0.7);
  const FlowPlan analytic = FlowPlan::for_model(m);
  const PhasePoint x0{0.3, -0.1, -0.2, 0.5};

  PhasePoint x = x0;
  for (int i = 0; i < 100000; ++i) x = rk4_step(m, x, 1e-5);

  CHECK(max_abs_diff(flow(analytic, x0, 1.0), x) < 1e-9);
}

TEST_CASE("frozen RWA mode at lambda=omega=1 leaves the difference coordinates fixed") {
  const FlowPlan plan = FlowPlan::for_model(rwa(1.0));
  const PhasePoint x0{0.4, -0.3, 0.2, 0.8};
  for (double t : {0.3, 1.1, 6.0}) {
    const PhasePoint x = flow(plan, x0, t);
    CHECK(x.q1 - x.q2 == doctest::Approx(x0.q1 - x0.q2).epsilon(1e-13));
    CHECK(x.p1 - x.p2 == doctest::Approx(x0.p1 - x0.p2).epsilon(1e-13));
  }
}

TEST_CASE("analytic flow matrix is symplectic and matches the RK4 tangent map") {
  for (const ModelSpec& m : {bilinear(0.9), rwa(0.7), rwa(1.0)}) {
    for (double t : {0.5, 2.0, 7.3}) {
      const auto S = analytic_flow_matrix(m, t);
      CHECK(symplectic_defect(S) < 1e-10);
      CHECK(det4(S) == doctest::Approx(1.0).epsilon(1e-10));
    }
    // finite-difference Jacobian of the numerically integrated flow
    FlowPlan rk = FlowPlan::for_model(m);
    rk.method = FlowMethod::Rk4;
    rk.rk4_dt = 1e-4;
    const auto S = analytic_flow_matrix(m, 0.7);
    const auto Jfd = fd_jacobian(rk, {0.1, 0.0, -0.2, 0.3}, 0.7, 1e-6);
    for (int i = 0; i < 16; ++i)
      CHECK(S[size_t(i)] == doctest::Approx(Jfd[size_t(i)]).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("nelson flow is symplectic to finite-difference accuracy") {
  FlowPlan plan = FlowPlan::for_model(nelson(), 1e-3);
  const PhasePoint x0{0.0, 0.30618621784789724, -0.05590169943749455, 0.0};
  const auto J = fd_jacobian(plan, x0, 2.0, 1e-6);
  CHECK(det4(J) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(symplectic_defect(J) < 1e-5);
}

TEST_CASE("flows are reversible") {
  const FlowPlan analytic = FlowPlan::for_model(bilinear(0.9));
  const PhasePoint x0{0.3, -0.1, -0.2, 0.5};
  CHECK(max_abs_diff(flow(analytic, flow(analytic, x0, 3.7), -3.7), x0) < 1e-12);
  CHECK(max_abs_diff(inverse_flow(analytic, flow(analytic, x0, 3.7), 3.7), x0) < 1e-12);

  const FlowPlan rk = FlowPlan::for_model(nelson(), 1e-3);
  const PhasePoint y0{0.0, 0.3, -0.1, 0.05};
  CHECK(max_abs_diff(flow(rk, flow(rk, y0, 2.0), -2.0), y0) < 1e-9);
}

TEST_CASE("rk4 flow lands exactly on non-multiple times via one partial step") {
  const ModelSpec m = nelson();
  FlowPlan plan = FlowPlan::for_model(m, 1e-3);
  const PhasePoint x0{0.0, 0.3, -0.1, 0.05};
  const PhasePoint direct = flow(plan, x0, 0.0015);
  const PhasePoint manual = rk4_step(m, rk4_step(m, x0, 1e-3), 0.0015 - 1e-3);
  CHECK(max_abs_diff(direct, manual) < 1e-15);
}

TEST_CASE("rk4 energy drift stays below 1e-9 per unit time on the E=0.05 shell") {
  const FlowPlan plan = FlowPlan::for_model(nelson(), 1e-3);
  const PhasePoint x0 = section_seed_point(nelson(), 0.05, -0.0559016994374946, 0.0);
  FlowDiagnostics diag;
  flow_with_diagnostics(plan, x0, 10.0, diag);
  CHECK(diag.elapsed == doctest::Approx(10.0));
  CHECK(diag.drift_per_unit_time() < 1e-9);
}

TEST_CASE("section seeds lift onto the energy shell") {
  const ModelSpec m = nelson();
  const PhasePoint x = section_seed_point(m, 0.05, -0.05, 0.1);
  CHECK(x.q1 == 0.0);
  CHECK(x.p1 > 0.0);
  CHECK(std::abs(energy(m, x) - 0.05) < 1e-15);
  CHECK_THROWS_AS(section_seed_point(m, 0.05, 10.0, 0.0), ConfigError);
}

TEST_CASE("poincare section crossings sit on the shell; off-shell seeds are non-fatal") {
  const ModelSpec m = nelson();
  const std::array<std::array<double, 2>, 3> seeds = {
      {{-0.0559016994374946, 0.0}, {25.0, 0.0}, {-0.1118033988749891, 0.0}}};
  const SectionResult res = poincare_section(m, 0.05, seeds, 40, 1e-3);

  REQUIRE(res.seeds.size() == 3);
  CHECK(res.seeds[0].crossings == 40);
  CHECK(res.seeds[0].max_energy_error < 1e-8);
  CHECK(res.seeds[1].aborted);
  CHECK(res.seeds[1].crossings == 0);
  CHECK(res.seeds[2].crossings == 40);
  CHECK(res.seeds[2].max_energy_error < 1e-8);
  CHECK(res.points.size() == 80);
  for (const auto& p : res.points) CHECK((p.seed_index == 0 || p.seed_index == 2));
}

TEST_CASE("tiny energy confines the section to near-origin regular curves") {
  const ModelSpec m = nelson();
  const double E = 1e-9;
  const std::array<std::array<double, 2>, 1> seeds = {{{0.5 * std::sqrt(2.0 * E) / m.omega2, 0.0}}};
  const SectionResult res = poincare_section(m, E, seeds, 60, 1e-3);
  REQUIRE(res.seeds[0].crossings == 60);
  const double q2max = std::sqrt(2.0 * E) / m.omega2;
  const double p2max = std::sqrt(2.0 * E);
  for (const auto& p : res.points) {
    CHECK(std::abs(p.q2) <= q2max * 1.001);
    CHECK(std::abs(p.p2) <= p2max * 1.001);
  }
  CHECK(section_dispersion(res.points) < 0.5);  // a closed curve, not scatter
}

TEST_CASE("dispersion statistic separates curves from scatter") {
  std::vector<SectionPoint> circle, scatter;
  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double th = 2.0 * M_PI * i / 200.0;
    circle.push_back({std::cos(th), std::sin(th), 0, i});
    scatter.push_back({2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0, 1, i});
  }
  const double dc = section_dispersion(circle);
  const double ds = section_dispersion(scatter);
  CHECK(dc < 0.5);
  CHECK(ds > 2.0 * dc);
}

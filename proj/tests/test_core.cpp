#include "doctest.h"
#include "qclmi/core.hpp"

using namespace qclmi;

TEST_CASE("time grid hits both endpoints exactly") {
  const TimeGrid g(10.0, 200);
  CHECK(g.size() == 201);
  CHECK(g.t(0) == 0.0);
  CHECK(g.t(200) == 10.0);  // t_max·(k/n): exact at both ends
  CHECK(g.dt() == doctest::Approx(0.05).epsilon(1e-15));

  const auto ts = g.times();
  REQUIRE(ts.size() == 201);
  for (size_t k = 1; k < ts.size(); ++k) CHECK(ts[k] > ts[k - 1]);
}

TEST_CASE("time grid rejects degenerate input") {
  CHECK_THROWS_AS(build_time_grid(0.0, 10), ConfigError);
  CHECK_THROWS_AS(build_time_grid(-1.0, 10), ConfigError);
  CHECK_THROWS_AS(build_time_grid(1.0, 0), ConfigError);
  CHECK_THROWS_AS(build_time_grid(1.0 / 0.0, 10), ConfigError);
}

TEST_CASE("model and state names round-trip") {
  for (auto k : {ModelKind::Bilinear, ModelKind::Nelson, ModelKind::Rwa})
    CHECK(model_kind_from_string(to_string(k)) == k);
  CHECK(model_kind_from_string("RWA") == ModelKind::Rwa);  // case-insensitive
  CHECK_THROWS_AS(model_kind_from_string("harmonic"), ConfigError);

  CHECK(factor_kind_from_string("gaussian") == FactorKind::GaussianHusimi);
  CHECK(factor_kind_from_string("coherent") == FactorKind::GaussianHusimi);
  CHECK(factor_kind_from_string("fock1") == FactorKind::FockHusimi);
  CHECK_THROWS_AS(factor_kind_from_string("fock2"), ConfigError);
}

TEST_CASE("phase point algebra and indexing") {
  PhasePoint x{1.0, 2.0, 3.0, 4.0};
  for (int i = 0; i < 4; ++i) CHECK(x[i] == double(i + 1));
  x.set(2, -5.0);
  CHECK(x.q2 == -5.0);

  const PhasePoint y = 2.0 * PhasePoint{1, 0, 0, 1} + PhasePoint{0, 1, 1, 0};
  CHECK(y.q1 == 2.0);
  CHECK(y.p1 == 1.0);
  CHECK(y.q2 == 1.0);
  CHECK(y.p2 == 2.0);

  CHECK(x.finite());
  x.set(0, std::nan(""));
  CHECK(!x.finite());
}

namespace {
ValidatedConfig base_config(ModelKind kind) {
  ValidatedConfig c;
  c.model.kind = kind;
  c.model.omega1 = 1.0;
  c.model.omega2 = 1.0;
  c.model.lambda = 0.5;
  c.model.hbar = 0.05;
  c.grid = TimeGrid(1.0, 10);
  return c;
}
}  // namespace

TEST_CASE("validate accepts the stable quadratic models") {
  auto v = validate(base_config(ModelKind::Bilinear));
  CHECK(v.flow_method == FlowMethod::AnalyticNormalMode);

  v = validate(base_config(ModelKind::Rwa));
  CHECK(v.flow_method == FlowMethod::AnalyticNormalMode);

  auto n = base_config(ModelKind::Nelson);
  n.model.omega1 = std::sqrt(0.1);
  n.model.omega2 = std::sqrt(2.0);
  v = validate(n);
  CHECK(v.flow_method == FlowMethod::Rk4);
}

TEST_CASE("validate rejects unstable or ill-posed models") {
  auto c = base_config(ModelKind::Bilinear);
  c.model.lambda = 1.0;  // |λ| ≥ ω²: Ω− imaginary
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.model.lambda = -1.2;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = base_config(ModelKind::Rwa);
  c.model.omega1 = c.model.omega2 = std::sqrt(2.0);
  c.model.lambda = 1.5;  // (1−λ)(ω²−λ) < 0
  CHECK_THROWS_AS(validate(c), ConfigError);

  // λ = ω = 1 freezes the − mode but stays valid.
  c = base_config(ModelKind::Rwa);
  c.model.lambda = 1.0;
  CHECK_NOTHROW(validate(c));

  c = base_config(ModelKind::Bilinear);
  c.model.omega2 = 2.0;  // normal modes need ω1 == ω2
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = base_config(ModelKind::Bilinear);
  c.model.hbar = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
  c = base_config(ModelKind::Bilinear);
  c.model.omega1 = -1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("validate pins the Fock factor to the origin") {
  auto c = base_config(ModelKind::Rwa);
  c.density.sub2.kind = FactorKind::FockHusimi;
  CHECK_NOTHROW(validate(c));
  c.density.sub2.qc = 0.1;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("validate checks the numeric knobs") {
  auto c = base_config(ModelKind::Bilinear);
  c.grid_n = 5;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = base_config(ModelKind::Bilinear);
  c.grid_n = 0;
  c.mc_samples = 0;  // no classical estimator left
  CHECK_THROWS_AS(validate(c), ConfigError);
  c.mc_samples = 1000;
  CHECK_NOTHROW(validate(c));

  c = base_config(ModelKind::Bilinear);
  c.rk4_dt = 0.0;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = base_config(ModelKind::Bilinear);
  c.fock_nmax = 1;
  CHECK_THROWS_AS(validate(c), ConfigError);

  c = base_config(ModelKind::Bilinear);
  c.grid_span_sigmas = -1.0;
  CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("entropy series invariants catch bad values") {
  EntropySeries s;
  s.records.push_back({0.0});
  s.records.back().i_cl = 0.0;
  s.records.back().i_q = 0.0;
  s.records.push_back({1.0});
  s.records.back().i_cl = 0.3;
  s.records.back().i_q = 0.3;
  CHECK_NOTHROW(s.check_invariants());

  s.records.back().i_cl = -1e-3;  // negative beyond tolerance
  CHECK_THROWS_AS(s.check_invariants(), ConvergenceError);
  s.records.back().i_cl = -1e-8;  // within tolerance: fine
  CHECK_NOTHROW(s.check_invariants());

  s.records.front().i_q = 1e-3;  // nonzero at t=0 for a product state
  CHECK_THROWS_AS(s.check_invariants(), ConvergenceError);
}

TEST_CASE("error types carry the offending field") {
  try {
    validate([] {
      auto c = base_config(ModelKind::Bilinear);
      c.model.lambda = 2.0;
      return c;
    }());
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.field == "lambda");
    CHECK(std::string(e.what()).find("lambda") == 0);
  }
}

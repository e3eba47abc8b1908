#include <cmath>

#include "doctest.h"
#include "qclmi/config.hpp"

using namespace qclmi;

namespace {
const char* kFull = R"(# a full run description
model = "nelson"   # trailing comment
omega1 = 0.31622776601683794
omega2 = 1.4142135623730951
lambda = 0
hbar = 0.05
state1 = gaussian
state2 = "gaussian"
center1_q = 0
center1_p = 0.30618621784789724
center2_q = -0.05590169943749455
center2_p = 0

tmax = 5
steps = 50
grid_n = 24
grid_span_sigmas = 6
mc_samples = 100000
rk4_dt = 1e-3
fock_nmax = 40
seed = 12345
)";
}

TEST_CASE("parse reads every key, comments and quoting aside") {
  const SimConfig c = parse_config_text(kFull);
  CHECK(c.model == "nelson");
  CHECK(c.omega1 == doctest::Approx(std::sqrt(0.1)).epsilon(1e-15));
  CHECK(c.omega2 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(c.state1 == "gaussian");
  CHECK(c.center1_p == 0.30618621784789724);
  CHECK(c.center2_q == -0.05590169943749455);
  CHECK(c.tmax == 5.0);
  CHECK(c.steps == 50);
  CHECK(c.grid_n == 24);
  CHECK(c.mc_samples == 100000);
  CHECK(c.rk4_dt == 1e-3);
  CHECK(c.fock_nmax == 40);
  CHECK(c.seed == 12345);
}

TEST_CASE("omitted optional keys keep their defaults") {
  const SimConfig c = parse_config_text("model=bilinear\ntmax=1\nsteps=10\n");
  CHECK(c.omega1 == 1.0);
  CHECK(c.lambda == 0.0);
  CHECK(c.hbar == 0.05);
  CHECK(c.state1 == "gaussian");
  CHECK(c.grid_n == 64);
  CHECK(c.grid_span_sigmas == 6.0);
  CHECK(c.mc_samples == 0);
  CHECK(c.rk4_dt == 1e-3);
  CHECK(c.fock_nmax == 40);
  CHECK(c.seed == 1);
}

TEST_CASE("parse rejects malformed input") {
  CHECK_THROWS_AS(parse_config_text("model=bilinear\ntmax=1\n"), ConfigError);  // steps missing
  CHECK_THROWS_AS(parse_config_text("tmax=1\nsteps=2\n"), ConfigError);         // model missing
  CHECK_THROWS_AS(parse_config_text("model=bilinear\ntmax=1\nsteps=2\ntmax=2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model=bilinear\ntmax=1\nsteps=2\ncolor=red\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model=bilinear\ntmax=one\nsteps=2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model=bilinear\ntmax=1\nsteps=2.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model=bilinear\ntmax 1\nsteps=2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model=bilinear\ntmax=\nsteps=2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model=bi linear\ntmax=1\nsteps=2\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("model=bilinear\ntmax=1\nsteps=2\nseed=-1\n"), ConfigError);
}

TEST_CASE("accepted configs round-trip through serialization unchanged") {
  const SimConfig a = parse_config_text(kFull);
  const std::string text = serialize_config(a);
  const SimConfig b = parse_config_text(text);
  CHECK(serialize_config(b) == text);

  // field-level equality, including awkward doubles
  CHECK(b.omega1 == a.omega1);
  CHECK(b.omega2 == a.omega2);
  CHECK(b.center1_p == a.center1_p);
  CHECK(b.center2_q == a.center2_q);
  CHECK(b.rk4_dt == a.rk4_dt);
  CHECK(b.seed == a.seed);

  SimConfig c;
  c.model = "rwa";
  c.lambda = 0.1 + 0.2;  // not exactly 0.3
  c.hbar = 1.0 / 3.0;
  c.tmax = 3.141592653589793;
  c.steps = 128;
  const SimConfig d = parse_config_text(serialize_config(c));
  CHECK(d.lambda == c.lambda);
  CHECK(d.hbar == c.hbar);
  CHECK(d.tmax == c.tmax);
}

TEST_CASE("build_config produces a validated run") {
  const ValidatedConfig v = build_config(parse_config_text(kFull));
  CHECK(v.model.kind == ModelKind::Nelson);
  CHECK(v.flow_method == FlowMethod::Rk4);
  CHECK(v.density.sub1.pc == 0.30618621784789724);
  CHECK(v.grid.size() == 51);
  CHECK(v.mc_samples == 100000);

  SimConfig bad = parse_config_text(kFull);
  bad.steps = 2'000'000;
  CHECK_THROWS_AS(build_config(bad), ConfigError);
  bad = parse_config_text(kFull);
  bad.state2 = "fock1";
  CHECK_THROWS_AS(build_config(bad), ConfigError);  // fock factor off origin
  bad.center2_q = 0.0;
  CHECK_NOTHROW(build_config(bad));
}

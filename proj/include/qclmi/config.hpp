#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "qclmi/core.hpp"

namespace qclmi {

// Flat key=value config (TOML subset: comments, blank lines, bare or quoted
// scalars, no tables). Unknown or duplicate keys are rejected.
struct SimConfig {
  std::string model;  // required
  double omega1 = 1.0;
  double omega2 = 1.0;
  double lambda = 0.0;
  double hbar = 0.05;
  std::string state1 = "gaussian";
  std::string state2 = "gaussian";
  double center1_q = 0.0;
  double center1_p = 0.0;
  double center2_q = 0.0;
  double center2_p = 0.0;
  double tmax = 0.0;       // required
  long long steps = 0;     // required
  int grid_n = 64;
  double grid_span_sigmas = 6.0;
  long long mc_samples = 0;
  double rk4_dt = 1e-3;
  int fock_nmax = 40;
  std::uint64_t seed = 1;
};

SimConfig parse_config_text(std::string_view text);
SimConfig parse_config_file(const std::string& path);

// Canonical form: every key once, declaration order, shortest round-trip
// number formatting. parse(serialize(c)) reproduces c exactly.
std::string serialize_config(const SimConfig& c);

// Typed + semantic validation; throws ConfigError with the offending field.
ValidatedConfig build_config(const SimConfig& c);

}  // namespace qclmi

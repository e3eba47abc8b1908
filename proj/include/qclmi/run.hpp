#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "qclmi/config.hpp"
#include "qclmi/core.hpp"
#include "qclmi/flows.hpp"

namespace qclmi {

struct RunOptions {
  int threads = 0;  // 0: hardware concurrency
  std::optional<std::uint64_t> seed_override;
};

// Everything the manifest reports about how the series was produced.
struct SeriesDiagnostics {
  std::string flow_method;
  std::string classical_route;  // "quadrature", "mc" or "quadrature+mc"
  std::string quantum_route;    // "gaussian" or "fock"
  double min_marginal_mass = 1.0;
  double purity_drift = 0.0;     // quadrature: max |∫P²(t)/∫P²(0) − 1|
  double mc_purity_drift = 0.0;  // MC histogram version of the same check
  double mc_stderr_max = 0.0;
  double gaussian_impurity = 0.0;  // max |1 − global purity| on the Gaussian route
  double fock_trunc_loss = 0.0;
  double fock_trunc_pop = 0.0;
  double fock_norm_drift = 0.0;
  double fock_energy_drift = 0.0;
  int fock_nmax_used = 0;
  bool fock_escalated = false;
  double classical_ms = 0.0;
  double quantum_ms = 0.0;
};

// Classical pipeline + applicable quantum pipeline + analytic overlays on the
// shared time grid; invariant-checked before returning.
EntropySeries compute_entropy_series(const ValidatedConfig& cfg, int threads,
                                     SeriesDiagnostics* diag = nullptr);

struct SimulateResult {
  std::filesystem::path csv_path;
  std::filesystem::path manifest_path;
  EntropySeries series;
};

SimulateResult run_simulate(const SimConfig& raw, const std::filesystem::path& out_dir,
                            const RunOptions& opts);

struct PoincareResult {
  std::filesystem::path csv_path;
  std::filesystem::path manifest_path;
  SectionResult section;
};

// Section of the Nelson flow at the reference energy E = 0.05 (the config
// schema carries no energy key) over a deterministic fan of seeds.
PoincareResult run_poincare(const SimConfig& raw, const std::filesystem::path& out_dir,
                            const RunOptions& opts);

void run_plot(const std::filesystem::path& csv_in, const std::filesystem::path& svg_out);

}  // namespace qclmi

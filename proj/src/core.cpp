#include "qclmi/core.hpp"

#include <algorithm>
#include <cctype>

namespace qclmi {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Bilinear: return "bilinear";
    case ModelKind::Nelson: return "nelson";
    case ModelKind::Rwa: return "rwa";
  }
  return "?";
}

namespace {
std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}
}  // namespace

ModelKind model_kind_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "bilinear") return ModelKind::Bilinear;
  if (v == "nelson") return ModelKind::Nelson;
  if (v == "rwa") return ModelKind::Rwa;
  throw ConfigError("model", "unknown model '" + s + "' (expected bilinear|nelson|rwa)");
}

std::string to_string(FactorKind kind) {
  return kind == FactorKind::GaussianHusimi ? "gaussian" : "fock1";
}

FactorKind factor_kind_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "gaussian" || v == "coherent") return FactorKind::GaussianHusimi;
  if (v == "fock1" || v == "fock") return FactorKind::FockHusimi;
  throw ConfigError("state", "unknown state '" + s + "' (expected gaussian|fock1)");
}

TimeGrid::TimeGrid(double t_max, int n_steps) : t_max_(t_max), n_steps_(n_steps) {
  if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ConfigError("tmax", "must be positive and finite");
  if (n_steps < 1) throw ConfigError("steps", "must be >= 1");
}

std::vector<double> TimeGrid::times() const {
  std::vector<double> out(static_cast<std::size_t>(size()));
  for (int k = 0; k < size(); ++k) out[static_cast<std::size_t>(k)] = t(k);
  return out;
}

TimeGrid build_time_grid(double t_max, int n_steps) { return TimeGrid(t_max, n_steps); }

namespace {

void validate_model(const ModelSpec& m) {
  if (!(m.hbar > 0.0)) throw ConfigError("hbar", "must be > 0");
  if (!(m.omega1 > 0.0)) throw ConfigError("omega1", "must be > 0");
  if (!(m.omega2 > 0.0)) throw ConfigError("omega2", "must be > 0");
  if (!std::isfinite(m.lambda)) throw ConfigError("lambda", "must be finite");

  if (m.kind == ModelKind::Nelson) return;

  // Analytic normal modes (q1±q2)/√2 decouple only for degenerate frequencies.
  if (m.omega1 != m.omega2)
    throw ConfigError("omega2", "analytic normal modes require omega1 == omega2 for " + to_string(m.kind));

  const double w2 = m.omega1 * m.omega1;
  if (m.kind == ModelKind::Bilinear) {
    if (std::abs(m.lambda) >= w2)
      throw ConfigError("lambda", "unstable: |lambda| >= omega^2 makes a normal-mode frequency imaginary");
  } else {  // Rwa: modes ½(1±λ)P² + ½(ω²±λ)Q²
    for (double s : {+1.0, -1.0}) {
      const double b = 1.0 + s * m.lambda;
      const double k = w2 + s * m.lambda;
      const bool frozen = b == 0.0 && k == 0.0;
      if (!frozen && b * k <= 0.0)
        throw ConfigError("lambda", "unstable: RWA normal mode has (1±lambda)(omega^2±lambda) <= 0");
    }
  }
}

void validate_density(const DensitySpec& d) {
  for (const DensityFactor* f : {&d.sub1, &d.sub2}) {
    if (!std::isfinite(f->qc) || !std::isfinite(f->pc))
      throw ConfigError("center", "must be finite");
    if (f->kind == FactorKind::FockHusimi && (f->qc != 0.0 || f->pc != 0.0))
      throw ConfigError("center", "fock1 factor is defined at the origin only");
  }
}

}  // namespace

ValidatedConfig validate(const ModelSpec& model, const DensitySpec& density, const TimeGrid& grid) {
  ValidatedConfig cfg;
  cfg.model = model;
  cfg.density = density;
  cfg.grid = grid;
  return validate(std::move(cfg));
}

ValidatedConfig validate(ValidatedConfig cfg) {
  validate_model(cfg.model);
  validate_density(cfg.density);

  if (cfg.grid_n != 0 && cfg.grid_n < 8) throw ConfigError("grid_n", "must be 0 (disabled) or >= 8");
  if (!(cfg.grid_span_sigmas > 0.0)) throw ConfigError("grid_span_sigmas", "must be > 0");
  if (cfg.mc_samples < 0) throw ConfigError("mc_samples", "must be >= 0");
  if (cfg.grid_n == 0 && cfg.mc_samples == 0)
    throw ConfigError("grid_n", "grid_n=0 requires mc_samples > 0 (no classical estimator left)");
  if (!(cfg.rk4_dt > 0.0)) throw ConfigError("rk4_dt", "must be > 0");
  if (cfg.fock_nmax < 2) throw ConfigError("fock_nmax", "must be >= 2");

  cfg.flow_method =
      cfg.model.kind == ModelKind::Nelson ? FlowMethod::Rk4 : FlowMethod::AnalyticNormalMode;
  return cfg;
}

void EntropySeries::check_invariants(double tol_cl, double tol_q) const {
  for (const auto& r : records) {
    if (r.i_cl && *r.i_cl < -tol_cl)
      throw ConvergenceError("cslmi", "I_cl < 0 beyond tolerance at t=" + std::to_string(r.t));
    if (r.i_q && *r.i_q < -tol_q)
      throw ConvergenceError("qlmi", "I_q < 0 beyond tolerance at t=" + std::to_string(r.t));
    if (r.t == 0.0) {
      if (r.i_cl && std::abs(*r.i_cl) > tol_cl)
        throw ConvergenceError("cslmi", "I_cl(0) != 0 for a product initial state");
      if (r.i_q && std::abs(*r.i_q) > 1e-8)
        throw ConvergenceError("qlmi", "I_q(0) != 0 for a product initial state");
    }
  }
}

}  // namespace qclmi

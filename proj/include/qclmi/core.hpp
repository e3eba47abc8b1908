#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace qclmi {

// Raised for invalid configuration; `field` names the offending key.
struct ConfigError : std::runtime_error {
  ConfigError(std::string field_, const std::string& msg)
      : std::runtime_error(field_ + ": " + msg), field(std::move(field_)) {}
  std::string field;
};

// Raised when a numerical self-check trips (truncation, conservation, ...).
struct ConvergenceError : std::runtime_error {
  ConvergenceError(std::string check_, const std::string& msg)
      : std::runtime_error(check_ + ": " + msg), check(std::move(check_)) {}
  std::string check;
};

// Point (q1,p1,q2,p2) in the 4D phase space; mass = 1 throughout.
struct PhasePoint {
  double q1 = 0.0, p1 = 0.0, q2 = 0.0, p2 = 0.0;

  double operator[](int i) const {
    switch (i) {
      case 0: return q1;
      case 1: return p1;
      case 2: return q2;
      default: return p2;
    }
  }
  void set(int i, double v) {
    switch (i) {
      case 0: q1 = v; break;
      case 1: p1 = v; break;
      case 2: q2 = v; break;
      default: p2 = v; break;
    }
  }
  bool finite() const {
    return std::isfinite(q1) && std::isfinite(p1) && std::isfinite(q2) && std::isfinite(p2);
  }
};

inline PhasePoint operator+(const PhasePoint& a, const PhasePoint& b) {
  return {a.q1 + b.q1, a.p1 + b.p1, a.q2 + b.q2, a.p2 + b.p2};
}
inline PhasePoint operator-(const PhasePoint& a, const PhasePoint& b) {
  return {a.q1 - b.q1, a.p1 - b.p1, a.q2 - b.q2, a.p2 - b.p2};
}
inline PhasePoint operator*(double s, const PhasePoint& a) {
  return {s * a.q1, s * a.p1, s * a.q2, s * a.p2};
}

enum class ModelKind { Bilinear, Nelson, Rwa };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

// Hamiltonian family: H = (p1²+ω1²q1²)/2 + (p2²+ω2²q2²)/2 + H_I, where H_I is
//   Bilinear: λ q1 q2
//   Rwa:      λ (q1 q2 + p1 p2)
//   Nelson:   −q1 p1 p2 + q1² q2²/2            (λ unused)
struct ModelSpec {
  ModelKind kind = ModelKind::Bilinear;
  double omega1 = 1.0;
  double omega2 = 1.0;
  double lambda = 0.0;
  double hbar = 0.05;
};

enum class FactorKind { GaussianHusimi, FockHusimi };

std::string to_string(FactorKind kind);
FactorKind factor_kind_from_string(const std::string& s);

// One subsystem's initial phase-space factor. GaussianHusimi is the coherent-state
// projection (per-axis variance ħ); FockHusimi is the n=1 number-state projection,
// defined at the origin only.
struct DensityFactor {
  FactorKind kind = FactorKind::GaussianHusimi;
  double qc = 0.0;
  double pc = 0.0;
};

struct DensitySpec {
  DensityFactor sub1;
  DensityFactor sub2;

  PhasePoint center() const { return {sub1.qc, sub1.pc, sub2.qc, sub2.pc}; }
  bool has_fock() const {
    return sub1.kind == FactorKind::FockHusimi || sub2.kind == FactorKind::FockHusimi;
  }
};

// Uniform output grid on [0, t_max]. Sample times are t_max·(k/n) so both
// endpoints are exact in double precision.
class TimeGrid {
 public:
  TimeGrid(double t_max, int n_steps);

  double t_max() const { return t_max_; }
  int n_steps() const { return n_steps_; }
  int size() const { return n_steps_ + 1; }
  double dt() const { return t_max_ / n_steps_; }
  double t(int k) const { return t_max_ * (static_cast<double>(k) / n_steps_); }
  std::vector<double> times() const;

 private:
  double t_max_;
  int n_steps_;
};

TimeGrid build_time_grid(double t_max, int n_steps);

enum class FlowMethod { AnalyticNormalMode, Rk4 };

// A fully validated run configuration. Immutable after validate(); safe to share.
struct ValidatedConfig {
  ModelSpec model;
  DensitySpec density;
  TimeGrid grid{1.0, 1};
  FlowMethod flow_method = FlowMethod::AnalyticNormalMode;

  int grid_n = 64;               // marginal-plane points per axis; 0 disables quadrature
  double grid_span_sigmas = 6.0; // padding in units of √ħ (times the local stretch)
  long mc_samples = 0;           // 0 disables the Monte Carlo estimator
  double rk4_dt = 1e-3;
  int fock_nmax = 40;
  std::uint64_t seed = 1;
};

// Checks every invariant of the (model, density, grid) triple and the numeric
// knobs; throws ConfigError naming the offending field.
ValidatedConfig validate(const ModelSpec& model, const DensitySpec& density, const TimeGrid& grid);
ValidatedConfig validate(ValidatedConfig cfg);

// Per-time entropy record; absent columns stay disengaged depending on run mode.
struct EntropyRecord {
  double t = 0.0;
  std::optional<double> s1_cl, s2_cl, i_cl, purity_check, mc_stderr;
  std::optional<double> s1_q, s2_q, i_q, trunc_pop;
  std::optional<double> i_ref, icl_ref;
};

struct EntropySeries {
  std::vector<EntropyRecord> records;

  bool empty() const { return records.empty(); }
  // Invariants: I ≥ −tol everywhere, and I(0) ≈ 0 (initial states are products).
  void check_invariants(double tol_cl = 1e-6, double tol_q = 1e-10) const;
};

}  // namespace qclmi

#pragma once

#include <array>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "qclmi/core.hpp"

namespace qclmi {

// How a model's flow φ_t is evaluated. Bilinear/RWA are solved exactly through
// their normal modes; Nelson is integrated with fixed-step RK4.
struct FlowPlan {
  ModelSpec model;
  FlowMethod method = FlowMethod::AnalyticNormalMode;
  double rk4_dt = 1e-3;

  static FlowPlan for_model(const ModelSpec& model, double rk4_dt = 1e-3);
};

double energy(const ModelSpec& model, const PhasePoint& x);

// Hamilton's equations ẋ = J ∇H(x).
PhasePoint hamilton_rhs(const ModelSpec& model, const PhasePoint& x);

// One classic RK4 step of size h (h may be negative).
PhasePoint rk4_step(const ModelSpec& model, const PhasePoint& x, double h);

// φ_t(x0). Negative t runs the flow backwards. For RK4 the trajectory takes
// floor(|t|/dt) full steps plus one partial step landing exactly on t.
PhasePoint flow(const FlowPlan& plan, const PhasePoint& x0, double t);

// φ_t^{-1}(x) = φ_{−t}(x); Hamiltonian flows are reversible.
PhasePoint inverse_flow(const FlowPlan& plan, const PhasePoint& x, double t);

// Normal-mode data of one quadratic mode H = ½ b P² + ½ k Q².
struct QuadraticMode {
  double b = 1.0;
  double k = 1.0;
  bool frozen() const { return b == 0.0 && k == 0.0; }
  double omega() const { return std::sqrt(b * k); }
};

// The ± modes of a Bilinear/RWA model in coordinates (q1±q2)/√2, (p1±p2)/√2.
std::array<QuadraticMode, 2> normal_modes(const ModelSpec& model);

// The 2×2 elliptic rotation advancing one mode by time t.
std::array<double, 4> mode_rotation(const QuadraticMode& mode, double t);

// Linear map of the analytic flow as a row-major 4×4 matrix (Bilinear/RWA only).
std::array<double, 16> analytic_flow_matrix(const ModelSpec& model, double t);

// Max |H(x(t))−H(x0)| seen along an RK4 trajectory, for the conservation checks.
struct FlowDiagnostics {
  double energy_drift = 0.0;
  double elapsed = 0.0;
  double drift_per_unit_time() const { return elapsed > 0 ? energy_drift / elapsed : 0.0; }
};

PhasePoint flow_with_diagnostics(const FlowPlan& plan, const PhasePoint& x0, double t,
                                 FlowDiagnostics& diag);

// --- Poincaré section (q1 = 0, p1 > 0, fixed energy) ---

struct SectionPoint {
  double q2 = 0.0;
  double p2 = 0.0;
  int seed_index = 0;
  int crossing_index = 0;
};

struct SectionSeedReport {
  int seed_index = 0;
  int crossings = 0;
  double max_energy_error = 0.0;
  bool aborted = false;
  std::string error;
};

struct SectionResult {
  std::vector<SectionPoint> points;
  std::vector<SectionSeedReport> seeds;
};

struct SectionOptions {
  double bounding_box = 10.0;   // abort a seed once any coordinate leaves ±box
  double max_time = 1e6;        // abort a seed that never reaches the crossing count
  double refine_tol = 1e-10;    // |q1| at an accepted crossing
};

// Integrates each (q2,p2) seed on the E-shell (q1=0, p1>0 fixed by energy) and
// collects section crossings. Off-shell seeds are reported, not fatal.
SectionResult poincare_section(const ModelSpec& model, double E,
                               std::span<const std::array<double, 2>> seeds,
                               int crossings_per_seed, double rk4_dt,
                               const SectionOptions& opts = {});

// Lifts a section seed to the full phase point on the energy shell; throws
// ConfigError if 2E − p2² − ω2²q2² < 0.
PhasePoint section_seed_point(const ModelSpec& model, double E, double q2, double p2);

// Mean nearest-neighbour distance of a seed's crossings, normalised by the RMS
// spread of the set. Curve-confined (regular) orbits score low, area-filling
// (chaotic) ones high.
double section_dispersion(std::span<const SectionPoint> pts);

}  // namespace qclmi

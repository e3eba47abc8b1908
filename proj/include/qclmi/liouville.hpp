#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "qclmi/core.hpp"
#include "qclmi/flows.hpp"

namespace qclmi {

// --- quadrature grids ---

struct Axis {
  double lo = -1.0, hi = 1.0;
  int n = 2;

  double h() const { return (hi - lo) / (n - 1); }
  double x(int i) const { return lo + h() * i; }
  double w(int i) const { return (i == 0 || i == n - 1) ? 0.5 * h() : h(); }  // trapezoid
};

struct QuadratureGrid {
  Axis q1, p1, q2, p2;

  const Axis& axis(int i) const {
    switch (i) {
      case 0: return q1;
      case 1: return p1;
      case 2: return q2;
      default: return p2;
    }
  }
};

struct AxisRange {
  double lo = 0.0, hi = 0.0;
};

// Axis-aligned envelope of the flowed density support over the whole grid:
// center trajectory ± span·√ħ·stretch per axis, stretch from the flow Jacobian
// (exact rows for the analytic flows, finite differences along the center
// trajectory for RK4).
std::array<AxisRange, 4> support_envelope(const FlowPlan& plan, const DensitySpec& density,
                                          double hbar, double span_sigmas, const TimeGrid& grid);

// Grid with `fine_n` points on `subsystem`'s axes and `coarse_n` on the other
// two, spanning the given envelope.
QuadratureGrid make_grid(const std::array<AxisRange, 4>& env, int subsystem, int fine_n,
                         int coarse_n);

// --- density evaluation ---

double initial_density(const DensitySpec& density, double hbar, const PhasePoint& x);

// ∫ f² of one factor over its 2D plane: 1/(4πħ) Gaussian, 1/(8πħ) Fock n=1.
double factor_purity(FactorKind kind, double hbar);

struct DensityEvaluator {
  DensitySpec density;
  double hbar = 0.05;
  FlowPlan plan;

  double initial(const PhasePoint& x) const { return initial_density(density, hbar, x); }
  double at(const PhasePoint& x, double t) const;
};

double density_at(const DensityEvaluator& ev, const PhasePoint& x, double t);

// --- grid quadrature operations ---

struct MarginalField {
  Axis a, b;                   // the marginal plane's axes
  std::vector<double> values;  // row-major values[i*b.n + j]
  double mass = 0.0;           // ∫ P_k
  bool mass_deficit = false;   // ∫ P_k < 1 − 1e−2: grid too small

  double purity() const;  // ∫ P_k² on the same grid
};

MarginalField marginal(const DensityEvaluator& ev, int subsystem, double t,
                       const QuadratureGrid& grid);

// S_k^cl(t) = 1 − ∫P_k²(t)/∫P_k²(0); both integrals on the given grid.
double csle(const DensityEvaluator& ev, int subsystem, double t, const QuadratureGrid& grid);

struct CslmiDetail {
  double value = 0.0;   // composed form S1 + S2 − S1·S2
  double direct = 0.0;  // direct ratio 1 − ∫P1²∫P2² / ∫P²(0)
  double s1 = 0.0, s2 = 0.0;
};

CslmiDetail cslmi_detail(const DensityEvaluator& ev, double t, const QuadratureGrid& grid);
double cslmi(const DensityEvaluator& ev, double t, const QuadratureGrid& grid);

// 4D ∫P²(x,t) dx — the Liouville invariant used as a quadrature diagnostic.
double purity_integral(const DensityEvaluator& ev, double t, const QuadratureGrid& grid);

// --- Monte Carlo route ---

struct McEntropies {
  double s1 = 0.0, s2 = 0.0, i = 0.0;
  double stderr_i = 0.0;  // jackknife over sample blocks
};

McEntropies mc_entropies(const DensityEvaluator& ev, double t, long n_samples, int bins,
                         std::uint64_t seed);

// --- whole-series pipelines (shared grids/denominators, incremental flows) ---

struct ClassicalSeriesOptions {
  int threads = 1;
  int mc_bins = 64;       // marginal histogram bins per axis
  int mc_blocks = 20;     // jackknife blocks
  int purity_bins = 24;   // 4D histogram bins per axis (MC purity check)
};

struct ClassicalSeries {
  // Quadrature route (present when grid_n > 0):
  std::vector<double> s1, s2, i, purity_check;
  double min_marginal_mass = 1.0;
  // Monte Carlo route (present when mc_samples > 0):
  std::vector<double> mc_s1, mc_s2, mc_i, mc_stderr, mc_purity_check;

  bool has_quadrature() const { return !i.empty(); }
  bool has_mc() const { return !mc_i.empty(); }
};

ClassicalSeries classical_series(const ValidatedConfig& cfg, const ClassicalSeriesOptions& opts);

}  // namespace qclmi

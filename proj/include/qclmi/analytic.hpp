#pragma once

#include "qclmi/core.hpp"

namespace qclmi {

// Closed-form reference values for the RWA cases (ω1 = ω2 = 1) and the bilinear
// Gaussian case. Kept free of the simulation code paths on purpose: these are
// the oracles the pipelines are tested against.

// u(t) = sin²(2λt)/32 · [5 + 3cos(4λt)]; equals S1_cl = S2_cl for Fock⊗Fock.
double rwa_u(double t, double lambda);

struct OraclePair {
  double i_q = 0.0;
  double i_cl = 0.0;
};

// |1⟩⊗|1⟩: I = 8u(2−8u), I_cl = u(2−u).
OraclePair rwa_fock_fock(double t, double lambda);

// |0⟩⊗|1⟩: I = sin²(2λt)[7+cos(4λt)]/8, I_cl = sin²(2λt)[15+cos(4λt)]/64.
OraclePair rwa_coh_fock(double t, double lambda);

// τ0 = π/(2λ): both subsystems purify again.
double rwa_recurrence_time(double lambda);

// Bilinear coherent⊗coherent: I_cl(t) (= I_q(t)) from exact Gaussian moment
// algebra in the normal modes. Independent of `center` — that is the point.
double bilinear_icl_oracle(const ModelSpec& model, const PhasePoint& center, double t);

}  // namespace qclmi

#pragma once

#include <Eigen/Dense>

#include "qclmi/core.hpp"

namespace qclmi {

// Gaussian (Wigner) state: first and second central moments over (q1,p1,q2,p2).
struct CovarianceState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Identity();

  // Coherent product state: mean at the center, cov = (ħ/2)·I.
  static CovarianceState coherent(const PhasePoint& center, double hbar);
};

// H = ½ xᵀ M x for the quadratic models; throws ConfigError for Nelson.
Eigen::Matrix4d quadratic_form(const ModelSpec& model);

// Standard symplectic form J (ẋ = J M x).
Eigen::Matrix4d symplectic_unit();

// S(t) = exp(J M t), in closed form through the normal modes.
Eigen::Matrix4d symplectic_propagator(const ModelSpec& model, double t);

CovarianceState evolve(const CovarianceState& state, const Eigen::Matrix4d& S);

// tr ρ_k² = (ħ/2)/√det σ_k from the subsystem's 2×2 covariance block.
// Throws ConvergenceError if det σ_k < (ħ/2)² beyond roundoff (uncertainty).
double reduced_purity(const CovarianceState& state, int subsystem, double hbar);

double global_purity(const CovarianceState& state, double hbar);

struct GaussianEntropies {
  double s1 = 0.0;
  double s2 = 0.0;
  double i = 0.0;
  double global_impurity = 0.0;  // 1 − global purity; pure-evolution drift check
};

// QLE/QLMI of a globally pure Gaussian state. Throws ConvergenceError when the
// global purity has drifted off 1 beyond `purity_tol`.
GaussianEntropies gaussian_entropies(const CovarianceState& state, double hbar,
                                     double purity_tol = 1e-8);

double qlmi_gaussian(const CovarianceState& state, double hbar);

// Full quantum series entry point for coherent inputs under Bilinear/RWA.
GaussianEntropies qlmi_gaussian_at(const ModelSpec& model, const PhasePoint& center, double t);

}  // namespace qclmi

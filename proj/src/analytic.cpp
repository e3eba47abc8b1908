#include "qclmi/analytic.hpp"

#include <cmath>
#include <numbers>

namespace qclmi {

double rwa_u(double t, double lambda) {
  const double s = std::sin(2.0 * lambda * t);
  return s * s / 32.0 * (5.0 + 3.0 * std::cos(4.0 * lambda * t));
}

OraclePair rwa_fock_fock(double t, double lambda) {
  const double u = rwa_u(t, lambda);
  return {8.0 * u * (2.0 - 8.0 * u), u * (2.0 - u)};
}

OraclePair rwa_coh_fock(double t, double lambda) {
  const double s = std::sin(2.0 * lambda * t);
  const double s2 = s * s;
  const double c4 = std::cos(4.0 * lambda * t);
  return {s2 * (7.0 + c4) / 8.0, s2 * (15.0 + c4) / 64.0};
}

double rwa_recurrence_time(double lambda) {
  if (lambda == 0.0) throw ConfigError("lambda", "no recurrence for lambda = 0");
  return std::numbers::pi / (2.0 * std::abs(lambda));
}

double bilinear_icl_oracle(const ModelSpec& m, const PhasePoint& center, double t) {
  (void)center;  // the center drops out of I^cl entirely (linear flow, Gaussian ratio)
  if (m.kind != ModelKind::Bilinear)
    throw ConfigError("model", "oracle defined for the bilinear coupling only");
  if (m.omega1 != m.omega2) throw ConfigError("omega2", "oracle requires omega1 == omega2");
  const double w2 = m.omega1 * m.omega1;
  if (std::abs(m.lambda) >= w2) throw ConfigError("lambda", "unstable normal mode");

  // Marginal covariance block of either subsystem after time t, for an initial
  // isotropic Gaussian (unit variance; the scale cancels in the ratio):
  //   B = ½ (R₊R₊ᵀ + R₋R₋ᵀ),  R± the mode rotations with Ω± = √(ω²±λ).
  double b11 = 0.0, b12 = 0.0, b22 = 0.0;
  for (double sgn : {+1.0, -1.0}) {
    const double W = std::sqrt(w2 + sgn * m.lambda);
    const double c = std::cos(W * t), s = std::sin(W * t);
    b11 += 0.5 * (c * c + s * s / (W * W));
    b12 += 0.5 * (s * c * (1.0 / W - W));
    b22 += 0.5 * (c * c + W * W * s * s);
  }
  const double det = b11 * b22 - b12 * b12;  // same for both subsystems
  return 1.0 - 1.0 / det;                    // 1 − 1/√(det·det)
}

}  // namespace qclmi

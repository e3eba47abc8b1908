#include "qclmi/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qclmi {

FlowPlan FlowPlan::for_model(const ModelSpec& model, double rk4_dt) {
  FlowPlan plan;
  plan.model = model;
  plan.method = model.kind == ModelKind::Nelson ? FlowMethod::Rk4 : FlowMethod::AnalyticNormalMode;
  plan.rk4_dt = rk4_dt;
  return plan;
}

double energy(const ModelSpec& m, const PhasePoint& x) {
  const double quad = 0.5 * (x.p1 * x.p1 + x.p2 * x.p2) +
                      0.5 * (m.omega1 * m.omega1 * x.q1 * x.q1 +
                             m.omega2 * m.omega2 * x.q2 * x.q2);
  switch (m.kind) {
    case ModelKind::Bilinear:
      return quad + m.lambda * x.q1 * x.q2;
    case ModelKind::Rwa:
      return quad + m.lambda * (x.q1 * x.q2 + x.p1 * x.p2);
    case ModelKind::Nelson:
      return quad - x.q1 * x.p1 * x.p2 + 0.5 * x.q1 * x.q1 * x.q2 * x.q2;
  }
  return quad;
}

PhasePoint hamilton_rhs(const ModelSpec& m, const PhasePoint& x) {
  const double w1sq = m.omega1 * m.omega1;
  const double w2sq = m.omega2 * m.omega2;
  PhasePoint d;
  switch (m.kind) {
    case ModelKind::Bilinear:
      d.q1 = x.p1;
      d.p1 = -w1sq * x.q1 - m.lambda * x.q2;
      d.q2 = x.p2;
      d.p2 = -w2sq * x.q2 - m.lambda * x.q1;
      break;
    case ModelKind::Rwa:
      d.q1 = x.p1 + m.lambda * x.p2;
      d.p1 = -w1sq * x.q1 - m.lambda * x.q2;
      d.q2 = x.p2 + m.lambda * x.p1;
      d.p2 = -w2sq * x.q2 - m.lambda * x.q1;
      break;
    case ModelKind::Nelson:
      d.q1 = x.p1 - x.q1 * x.p2;
      d.p1 = -w1sq * x.q1 + x.p1 * x.p2 - x.q1 * x.q2 * x.q2;
      d.q2 = x.p2 - x.q1 * x.p1;
      d.p2 = -w2sq * x.q2 - x.q1 * x.q1 * x.q2;
      break;
  }
  return d;
}

PhasePoint rk4_step(const ModelSpec& m, const PhasePoint& x, double h) {
  const PhasePoint k1 = hamilton_rhs(m, x);
  const PhasePoint k2 = hamilton_rhs(m, x + (0.5 * h) * k1);
  const PhasePoint k3 = hamilton_rhs(m, x + (0.5 * h) * k2);
  const PhasePoint k4 = hamilton_rhs(m, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::array<QuadraticMode, 2> normal_modes(const ModelSpec& m) {
  const double wsq = m.omega1 * m.omega1;  // omega1 == omega2 enforced by validate()
  if (m.kind == ModelKind::Rwa)
    return {QuadraticMode{1.0 + m.lambda, wsq + m.lambda},
            QuadraticMode{1.0 - m.lambda, wsq - m.lambda}};
  return {QuadraticMode{1.0, wsq + m.lambda}, QuadraticMode{1.0, wsq - m.lambda}};
}

std::array<double, 4> mode_rotation(const QuadraticMode& mode, double t) {
  const double bk = mode.b * mode.k;
  if (bk > 0.0) {
    const double w = std::sqrt(bk);
    const double c = std::cos(w * t), s = std::sin(w * t);
    return {c, mode.b / w * s, -mode.k / w * s, c};
  }
  if (bk < 0.0) {  // hyperbolic mode; validate() rejects these models
    const double w = std::sqrt(-bk);
    const double c = std::cosh(w * t), s = std::sinh(w * t);
    return {c, mode.b / w * s, -mode.k / w * s, c};
  }
  // Degenerate: free shear, or frozen when b == k == 0.
  return {1.0, mode.b * t, -mode.k * t, 1.0};
}

namespace {

// (q1,p1,q2,p2) -> (Q+,P+,Q-,P-) with Q± = (q1±q2)/√2, P± = (p1±p2)/√2.
constexpr double kInvSqrt2 = 0.70710678118654752440;

PhasePoint to_modes(const PhasePoint& x) {
  return {(x.q1 + x.q2) * kInvSqrt2, (x.p1 + x.p2) * kInvSqrt2,
          (x.q1 - x.q2) * kInvSqrt2, (x.p1 - x.p2) * kInvSqrt2};
}

PhasePoint from_modes(const PhasePoint& y) {
  return {(y.q1 + y.q2) * kInvSqrt2, (y.p1 + y.p2) * kInvSqrt2,
          (y.q1 - y.q2) * kInvSqrt2, (y.p1 - y.p2) * kInvSqrt2};
}

PhasePoint analytic_flow(const ModelSpec& m, const PhasePoint& x0, double t) {
  const auto modes = normal_modes(m);
  const auto rp = mode_rotation(modes[0], t);
  const auto rm = mode_rotation(modes[1], t);
  const PhasePoint y = to_modes(x0);
  return from_modes({rp[0] * y.q1 + rp[1] * y.p1, rp[2] * y.q1 + rp[3] * y.p1,
                     rm[0] * y.q2 + rm[1] * y.p2, rm[2] * y.q2 + rm[3] * y.p2});
}

PhasePoint rk4_flow(const ModelSpec& m, const PhasePoint& x0, double t, double dt,
                    FlowDiagnostics* diag) {
  const double dir = t < 0.0 ? -1.0 : 1.0;
  const double span = std::abs(t);
  const auto n_full = static_cast<long long>(span / dt);
  const double e0 = diag ? energy(m, x0) : 0.0;
  PhasePoint x = x0;
  for (long long i = 0; i < n_full; ++i) {
    x = rk4_step(m, x, dir * dt);
    if (diag) diag->energy_drift = std::max(diag->energy_drift, std::abs(energy(m, x) - e0));
  }
  const double rest = span - static_cast<double>(n_full) * dt;
  if (rest > 0.0) {
    x = rk4_step(m, x, dir * rest);
    if (diag) diag->energy_drift = std::max(diag->energy_drift, std::abs(energy(m, x) - e0));
  }
  if (diag) diag->elapsed = span;
  return x;
}

}  // namespace

std::array<double, 16> analytic_flow_matrix(const ModelSpec& m, double t) {
  std::array<double, 16> out{};
  for (int j = 0; j < 4; ++j) {
    PhasePoint e;
    e.set(j, 1.0);
    const PhasePoint col = analytic_flow(m, e, t);
    for (int i = 0; i < 4; ++i) out[static_cast<size_t>(4 * i + j)] = col[i];
  }
  return out;
}

PhasePoint flow(const FlowPlan& plan, const PhasePoint& x0, double t) {
  if (t == 0.0) return x0;
  if (plan.method == FlowMethod::AnalyticNormalMode) return analytic_flow(plan.model, x0, t);
  return rk4_flow(plan.model, x0, t, plan.rk4_dt, nullptr);
}

PhasePoint inverse_flow(const FlowPlan& plan, const PhasePoint& x, double t) {
  return flow(plan, x, -t);
}

PhasePoint flow_with_diagnostics(const FlowPlan& plan, const PhasePoint& x0, double t,
                                 FlowDiagnostics& diag) {
  diag = {};
  if (t == 0.0) return x0;
  if (plan.method == FlowMethod::AnalyticNormalMode) {
    const PhasePoint x = analytic_flow(plan.model, x0, t);
    diag.energy_drift = std::abs(energy(plan.model, x) - energy(plan.model, x0));
    diag.elapsed = std::abs(t);
    return x;
  }
  return rk4_flow(plan.model, x0, t, plan.rk4_dt, &diag);
}

PhasePoint section_seed_point(const ModelSpec& m, double E, double q2, double p2) {
  const double p1sq = 2.0 * E - p2 * p2 - m.omega2 * m.omega2 * q2 * q2;
  if (p1sq < 0.0)
    throw ConfigError("seed", "section seed lies outside the energy shell");
  return {0.0, std::sqrt(p1sq), q2, p2};
}

namespace {

// Newton in the step size h ∈ [0, dt] for q1(x_prev advanced by h) = 0,
// bisection-guarded with the bracketing endpoints.
PhasePoint refine_crossing(const ModelSpec& m, const PhasePoint& x_prev, double dt,
                           double q1_prev, double q1_next, double tol) {
  double lo = 0.0, hi = dt;
  double glo = q1_prev, ghi = q1_next;
  double h = dt * glo / (glo - ghi);  // secant from the bracket
  PhasePoint x = x_prev;
  for (int it = 0; it < 80; ++it) {
    if (!(h > lo && h < hi)) h = 0.5 * (lo + hi);
    x = rk4_step(m, x_prev, h);
    const double g = x.q1;
    if (std::abs(g) < tol) return x;
    if ((g < 0.0) == (glo < 0.0)) {
      lo = h;
      glo = g;
    } else {
      hi = h;
      ghi = g;
    }
    const double dq1 = hamilton_rhs(m, x).q1;
    h = dq1 != 0.0 ? h - g / dq1 : 0.5 * (lo + hi);
  }
  return x;  // bisection floor: interval collapsed to rounding
}

}  // namespace

SectionResult poincare_section(const ModelSpec& m, double E,
                               std::span<const std::array<double, 2>> seeds,
                               int crossings_per_seed, double rk4_dt,
                               const SectionOptions& opts) {
  if (crossings_per_seed < 1) throw ConfigError("crossings", "need at least one crossing per seed");
  if (!(rk4_dt > 0.0)) throw ConfigError("rk4_dt", "rk4_dt must be positive");
  SectionResult out;
  out.points.reserve(seeds.size() * static_cast<size_t>(crossings_per_seed));
  for (size_t s = 0; s < seeds.size(); ++s) {
    SectionSeedReport rep;
    rep.seed_index = static_cast<int>(s);
    PhasePoint x;
    try {
      x = section_seed_point(m, E, seeds[s][0], seeds[s][1]);
    } catch (const ConfigError& e) {
      rep.aborted = true;
      rep.error = e.what();
      out.seeds.push_back(rep);
      continue;
    }
    double t = 0.0;
    double q1_prev = x.q1;
    while (rep.crossings < crossings_per_seed) {
      const PhasePoint x_prev = x;
      x = rk4_step(m, x, rk4_dt);
      t += rk4_dt;
      if (!x.finite() || std::max({std::abs(x.q1), std::abs(x.p1), std::abs(x.q2),
                                   std::abs(x.p2)}) > opts.bounding_box) {
        rep.aborted = true;
        rep.error = "trajectory left the bounding box";
        break;
      }
      if (t > opts.max_time) {
        rep.aborted = true;
        rep.error = "crossing budget not reached within max_time";
        break;
      }
      if (q1_prev < 0.0 && x.q1 >= 0.0) {
        const PhasePoint hit = refine_crossing(m, x_prev, rk4_dt, q1_prev, x.q1, opts.refine_tol);
        if (hit.p1 > 0.0) {
          out.points.push_back({hit.q2, hit.p2, rep.seed_index, rep.crossings});
          rep.max_energy_error = std::max(rep.max_energy_error, std::abs(energy(m, hit) - E));
          ++rep.crossings;
        }
      }
      q1_prev = x.q1;
    }
    out.seeds.push_back(rep);
  }
  return out;
}

double section_dispersion(std::span<const SectionPoint> pts) {
  const size_t n = pts.size();
  if (n < 2) return 0.0;
  double cq = 0.0, cp = 0.0;
  for (const auto& p : pts) {
    cq += p.q2;
    cp += p.p2;
  }
  cq /= static_cast<double>(n);
  cp /= static_cast<double>(n);
  double spread2 = 0.0;
  for (const auto& p : pts)
    spread2 += (p.q2 - cq) * (p.q2 - cq) + (p.p2 - cp) * (p.p2 - cp);
  const double sigma = std::sqrt(spread2 / static_cast<double>(n));
  if (sigma == 0.0) return 0.0;
  double mean_nn = 0.0;
  for (size_t i = 0; i < n; ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const double dq = pts[i].q2 - pts[j].q2, dp = pts[i].p2 - pts[j].p2;
      best = std::min(best, dq * dq + dp * dp);
    }
    mean_nn += std::sqrt(best);
  }
  mean_nn /= static_cast<double>(n);
  return mean_nn * std::sqrt(static_cast<double>(n)) / sigma;
}

}  // namespace qclmi

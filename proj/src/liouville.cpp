#include "qclmi/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>

#include "qclmi/parallel.hpp"
#include "qclmi/rng.hpp"

namespace qclmi {

double initial_density(const DensitySpec& d, double hbar, const PhasePoint& x) {
  // A backward orbit that escaped to infinity (possible for the cubic flow far
  // outside the packet) lies outside the forward image of the support: zero
  // density, not NaN.
  if (!x.finite()) return 0.0;
  // Single-exponential evaluation: all factors share exp(−Σ r_k²/2ħ); Fock
  // factors contribute a polynomial prefactor r_k²/2ħ on top.
  double expo = 0.0, poly = 1.0;
  {
    const double dq = x.q1 - d.sub1.qc, dp = x.p1 - d.sub1.pc;
    const double u = (dq * dq + dp * dp) / (2.0 * hbar);
    expo += u;
    if (d.sub1.kind == FactorKind::FockHusimi) poly *= u;
  }
  {
    const double dq = x.q2 - d.sub2.qc, dp = x.p2 - d.sub2.pc;
    const double u = (dq * dq + dp * dp) / (2.0 * hbar);
    expo += u;
    if (d.sub2.kind == FactorKind::FockHusimi) poly *= u;
  }
  const double norm = 1.0 / (4.0 * std::numbers::pi * std::numbers::pi * hbar * hbar);
  return norm * poly * std::exp(-expo);
}

double factor_purity(FactorKind kind, double hbar) {
  return kind == FactorKind::GaussianHusimi ? 1.0 / (4.0 * std::numbers::pi * hbar)
                                            : 1.0 / (8.0 * std::numbers::pi * hbar);
}

double DensityEvaluator::at(const PhasePoint& x, double t) const {
  return initial(inverse_flow(plan, x, t));
}

double density_at(const DensityEvaluator& ev, const PhasePoint& x, double t) {
  return ev.at(x, t);
}

// --- support envelope ---

namespace {

std::array<AxisRange, 4> envelope_for_times(const FlowPlan& plan, const DensitySpec& density,
                                            double hbar, double span_sigmas,
                                            const std::vector<double>& times) {
  const double pad = span_sigmas * std::sqrt(hbar);
  const PhasePoint c0 = density.center();
  std::array<AxisRange, 4> env;

  if (plan.method == FlowMethod::AnalyticNormalMode) {
    bool first = true;
    for (double t : times) {
      const auto M = analytic_flow_matrix(plan.model, t);
      const PhasePoint c = flow(plan, c0, t);
      for (int a = 0; a < 4; ++a) {
        double rn = 0.0;
        for (int j = 0; j < 4; ++j) {
          const double m = M[static_cast<size_t>(4 * a + j)];
          rn += m * m;
        }
        rn = std::sqrt(rn);
        const double lo = c[a] - pad * rn, hi = c[a] + pad * rn;
        if (first) {
          env[static_cast<size_t>(a)] = {lo, hi};
        } else {
          env[static_cast<size_t>(a)].lo = std::min(env[static_cast<size_t>(a)].lo, lo);
          env[static_cast<size_t>(a)].hi = std::max(env[static_cast<size_t>(a)].hi, hi);
        }
      }
      first = false;
    }
    return env;
  }

  // RK4: finite-difference Jacobian along the center trajectory. The 1.2
  // margin absorbs nonlinear spreading beyond the tangent-map estimate.
  const double eps = 1e-6;
  const double margin = 1.2;
  std::array<PhasePoint, 9> pts;  // center, then ±eps per axis
  pts[0] = c0;
  for (int j = 0; j < 4; ++j) {
    PhasePoint plus = c0, minus = c0;
    plus.set(j, c0[j] + eps);
    minus.set(j, c0[j] - eps);
    pts[static_cast<size_t>(1 + 2 * j)] = plus;
    pts[static_cast<size_t>(2 + 2 * j)] = minus;
  }
  double t_prev = 0.0;
  bool first = true;
  for (double t : times) {
    const double dt = t - t_prev;
    if (dt > 0.0)
      for (auto& x : pts) x = flow(plan, x, dt);
    t_prev = t;
    for (int a = 0; a < 4; ++a) {
      double rn = 0.0;
      for (int j = 0; j < 4; ++j) {
        const double m =
            (pts[static_cast<size_t>(1 + 2 * j)][a] - pts[static_cast<size_t>(2 + 2 * j)][a]) /
            (2.0 * eps);
        rn += m * m;
      }
      rn = std::sqrt(rn) * margin;
      if (t == 0.0) rn = std::max(rn, 1.0);
      const double lo = pts[0][a] - pad * rn, hi = pts[0][a] + pad * rn;
      if (first) {
        env[static_cast<size_t>(a)] = {lo, hi};
      } else {
        env[static_cast<size_t>(a)].lo = std::min(env[static_cast<size_t>(a)].lo, lo);
        env[static_cast<size_t>(a)].hi = std::max(env[static_cast<size_t>(a)].hi, hi);
      }
    }
    first = false;
  }
  return env;
}

std::vector<double> scan_times(const TimeGrid& grid, int refine) {
  const int n = grid.n_steps() * refine;
  std::vector<double> out(static_cast<size_t>(n) + 1);
  for (int k = 0; k <= n; ++k)
    out[static_cast<size_t>(k)] = grid.t_max() * (static_cast<double>(k) / n);
  return out;
}

}  // namespace

std::array<AxisRange, 4> support_envelope(const FlowPlan& plan, const DensitySpec& density,
                                          double hbar, double span_sigmas, const TimeGrid& grid) {
  return envelope_for_times(plan, density, hbar, span_sigmas, scan_times(grid, 4));
}

QuadratureGrid make_grid(const std::array<AxisRange, 4>& env, int subsystem, int fine_n,
                         int coarse_n) {
  if (subsystem != 1 && subsystem != 2) throw ConfigError("subsystem", "must be 1 or 2");
  QuadratureGrid g;
  const int n1 = subsystem == 1 ? fine_n : coarse_n;
  const int n2 = subsystem == 2 ? fine_n : coarse_n;
  g.q1 = {env[0].lo, env[0].hi, n1};
  g.p1 = {env[1].lo, env[1].hi, n1};
  g.q2 = {env[2].lo, env[2].hi, n2};
  g.p2 = {env[3].lo, env[3].hi, n2};
  return g;
}

// --- oriented grid reduction ---

namespace {

struct OrientedAxes {
  Axis a, b;  // marginal plane
  Axis c, d;  // integrated-out plane
  int sub = 1;
};

OrientedAxes orient(const QuadratureGrid& g, int subsystem) {
  if (subsystem == 1) return {g.q1, g.p1, g.q2, g.p2, 1};
  return {g.q2, g.p2, g.q1, g.p1, 2};
}

inline PhasePoint assemble(const OrientedAxes& o, double xa, double xb, double xc, double xd) {
  if (o.sub == 1) return {xa, xb, xc, xd};
  return {xc, xd, xa, xb};
}

struct ReduceOut {
  double marg2 = 0.0;  // ∫ P_k² over the marginal plane
  double p4 = 0.0;     // ∫ P² over all four axes
  double mass = 0.0;   // ∫ P
};

// value_at(i,j,k,l) must be pure. Reduction order is fixed: inner (k,l) Kahan
// per marginal cell, per-row Kahan over j, final Kahan over rows in index
// order — bitwise identical for any thread count.
template <class ValueAt>
ReduceOut reduce_oriented(const OrientedAxes& o, int threads, ValueAt&& value_at,
                          std::vector<double>* field_out) {
  const int na = o.a.n, nb = o.b.n, nc = o.c.n, nd = o.d.n;
  if (field_out) field_out->assign(static_cast<size_t>(na) * nb, 0.0);
  std::vector<double> row_m2(static_cast<size_t>(na)), row_p4(static_cast<size_t>(na)),
      row_mass(static_cast<size_t>(na));

  const auto blocks = make_blocks(na, std::max(1, na / (4 * std::max(1, threads)) ));
  parallel_blocks(blocks, threads, [&](size_t, BlockRange r) {
    for (long i = r.begin; i < r.end; ++i) {
      KahanSum m2, p4, mass;
      for (int j = 0; j < nb; ++j) {
        KahanSum inner_p, inner_p2;
        for (int k = 0; k < nc; ++k) {
          const double wk = o.c.w(k);
          for (int l = 0; l < nd; ++l) {
            const double w = wk * o.d.w(l);
            const double v = value_at(static_cast<int>(i), j, k, l);
            inner_p.add(w * v);
            inner_p2.add(w * v * v);
          }
        }
        const double pm = inner_p.value();
        if (field_out) (*field_out)[static_cast<size_t>(i) * nb + j] = pm;
        const double wj = o.b.w(j);
        m2.add(wj * pm * pm);
        p4.add(wj * inner_p2.value());
        mass.add(wj * pm);
      }
      const double wi = o.a.w(static_cast<int>(i));
      row_m2[static_cast<size_t>(i)] = wi * m2.value();
      row_p4[static_cast<size_t>(i)] = wi * p4.value();
      row_mass[static_cast<size_t>(i)] = wi * mass.value();
    }
  });

  KahanSum m2, p4, mass;
  for (int i = 0; i < na; ++i) {
    m2.add(row_m2[static_cast<size_t>(i)]);
    p4.add(row_p4[static_cast<size_t>(i)]);
    mass.add(row_mass[static_cast<size_t>(i)]);
  }
  return {m2.value(), p4.value(), mass.value()};
}

// x ↦ φ_t^{-1}(x) with the linear map cached for the analytic flows.
class BackwardMap {
 public:
  BackwardMap(const FlowPlan& plan, double t) : plan_(plan), t_(t) {
    if (plan.method == FlowMethod::AnalyticNormalMode) {
      linear_ = true;
      m_ = analytic_flow_matrix(plan.model, -t);
    }
  }
  PhasePoint operator()(const PhasePoint& x) const {
    if (linear_) {
      PhasePoint y;
      for (int i = 0; i < 4; ++i) {
        const size_t r = static_cast<size_t>(4 * i);
        y.set(i, m_[r] * x.q1 + m_[r + 1] * x.p1 + m_[r + 2] * x.q2 + m_[r + 3] * x.p2);
      }
      return y;
    }
    return inverse_flow(plan_, x, t_);
  }

 private:
  FlowPlan plan_;
  double t_;
  bool linear_ = false;
  std::array<double, 16> m_{};
};

ReduceOut reduce_at_time(const DensityEvaluator& ev, int subsystem, double t,
                         const QuadratureGrid& grid, int threads, std::vector<double>* field) {
  const OrientedAxes o = orient(grid, subsystem);
  const BackwardMap back(ev.plan, t);
  return reduce_oriented(
      o, threads,
      [&](int i, int j, int k, int l) {
        return ev.initial(back(assemble(o, o.a.x(i), o.b.x(j), o.c.x(k), o.d.x(l))));
      },
      field);
}

}  // namespace

double MarginalField::purity() const {
  KahanSum total;
  for (int i = 0; i < a.n; ++i) {
    KahanSum row;
    for (int j = 0; j < b.n; ++j) {
      const double v = values[static_cast<size_t>(i) * b.n + j];
      row.add(b.w(j) * v * v);
    }
    total.add(a.w(i) * row.value());
  }
  return total.value();
}

MarginalField marginal(const DensityEvaluator& ev, int subsystem, double t,
                       const QuadratureGrid& grid) {
  const OrientedAxes o = orient(grid, subsystem);
  MarginalField f;
  f.a = o.a;
  f.b = o.b;
  const ReduceOut out = reduce_at_time(ev, subsystem, t, grid, 1, &f.values);
  f.mass = out.mass;
  f.mass_deficit = out.mass < 1.0 - 1e-2;
  return f;
}

double csle(const DensityEvaluator& ev, int subsystem, double t, const QuadratureGrid& grid) {
  const ReduceOut num = reduce_at_time(ev, subsystem, t, grid, 1, nullptr);
  const ReduceOut den = reduce_at_time(ev, subsystem, 0.0, grid, 1, nullptr);
  return 1.0 - num.marg2 / den.marg2;
}

CslmiDetail cslmi_detail(const DensityEvaluator& ev, double t, const QuadratureGrid& grid) {
  const ReduceOut n1 = reduce_at_time(ev, 1, t, grid, 1, nullptr);
  const ReduceOut n2 = reduce_at_time(ev, 2, t, grid, 1, nullptr);
  const ReduceOut d1 = reduce_at_time(ev, 1, 0.0, grid, 1, nullptr);
  const ReduceOut d2 = reduce_at_time(ev, 2, 0.0, grid, 1, nullptr);
  CslmiDetail out;
  out.s1 = 1.0 - n1.marg2 / d1.marg2;
  out.s2 = 1.0 - n2.marg2 / d2.marg2;
  out.value = out.s1 + out.s2 - out.s1 * out.s2;
  out.direct = 1.0 - n1.marg2 * n2.marg2 / d1.p4;  // d1.p4 = ∫P²(0) over 4D
  return out;
}

double cslmi(const DensityEvaluator& ev, double t, const QuadratureGrid& grid) {
  return cslmi_detail(ev, t, grid).value;
}

double purity_integral(const DensityEvaluator& ev, double t, const QuadratureGrid& grid) {
  return reduce_at_time(ev, 1, t, grid, 1, nullptr).p4;
}

// --- Monte Carlo route ---

namespace {

struct Hist2Spec {
  double qlo = 0, qh = 0, plo = 0, ph = 0;  // ranges and cell sizes
  int bins = 64;
  double cell_area() const { return qh * ph; }
};

Hist2Spec hist_spec(const AxisRange& q, const AxisRange& p, int bins) {
  Hist2Spec h;
  h.bins = bins;
  h.qlo = q.lo;
  h.plo = p.lo;
  h.qh = (q.hi - q.lo) / bins;
  h.ph = (p.hi - p.lo) / bins;
  return h;
}

inline bool hist_cell(const Hist2Spec& h, double q, double p, size_t& cell) {
  const int iq = static_cast<int>(std::floor((q - h.qlo) / h.qh));
  const int ip = static_cast<int>(std::floor((p - h.plo) / h.ph));
  if (iq < 0 || iq >= h.bins || ip < 0 || ip >= h.bins) return false;
  cell = static_cast<size_t>(iq) * h.bins + static_cast<size_t>(ip);
  return true;
}

// Collision estimate ∫P̂² = (Σ n_c² − N) / (N(N−1)·A); subtracting the
// diagonal removes the 1/(N·A) sampling bias of the naive plug-in, which no
// longer cancels between numerator and denominator once their cells differ.
// Cells are summed in index order.
double plugin_purity(const std::vector<std::uint32_t>& counts, double n_total, double cell_vol) {
  KahanSum s;
  for (const auto c : counts) s.add(static_cast<double>(c) * static_cast<double>(c));
  return (s.value() - n_total) / (n_total * (n_total - 1.0) * cell_vol);
}

struct McEstimate {
  double s1 = 0, s2 = 0, i = 0;
};

McEstimate mc_estimate(double m1t, double m2t, double m10, double m20) {
  McEstimate e;
  e.s1 = 1.0 - m1t / m10;
  e.s2 = 1.0 - m2t / m20;
  e.i = e.s1 + e.s2 - e.s1 * e.s2;
  return e;
}

struct McContext {
  const DensityEvaluator* ev = nullptr;
  std::vector<double> times;
  long n_samples = 0;
  int bins = 64;
  int blocks = 20;
  int purity_bins = 0;  // 0: skip the 4D purity histogram
  std::uint64_t seed = 1;
  int threads = 1;
  std::array<AxisRange, 4> env{};

  std::vector<double> s1, s2, i, stderr_i, purity_check;
};

// Enough bins to resolve the packet width √ħ with ~5% cells even when chaotic
// stretching has inflated the box; the configured count acts as a floor and the
// cap bounds the pooled-histogram memory. Bin-averaging shaves ∫P̂² by
// (w/σ)²/24 per axis, so w ≈ σ/20 keeps that bias below the MC noise.
int resolved_bins(const AxisRange& q, const AxisRange& p, double hbar, int floor_bins) {
  const double target = 0.05 * std::sqrt(hbar);
  const double span = std::max(q.hi - q.lo, p.hi - p.lo);
  const int need = static_cast<int>(std::ceil(span / target));
  return std::clamp(need, floor_bins, 256);
}

void run_mc(McContext& ctx) {
  const DensityEvaluator& ev = *ctx.ev;
  const long n = ctx.n_samples;
  const int nb = ctx.blocks;
  const bool do_purity = ctx.purity_bins > 0;
  const int pb = ctx.purity_bins;
  const size_t pcells = do_purity ? static_cast<size_t>(pb) * pb * pb * pb : 0;
  std::array<Hist2Spec, 2> hp{};
  if (do_purity) {
    hp[0] = hist_spec(ctx.env[0], ctx.env[1], pb);
    hp[1] = hist_spec(ctx.env[2], ctx.env[3], pb);
  }

  // Per-block sample sets for deterministic, thread-count-independent results.
  std::vector<std::vector<PhasePoint>> samples(static_cast<size_t>(nb));
  std::vector<long> block_n(static_cast<size_t>(nb));
  for (int b = 0; b < nb; ++b)
    block_n[static_cast<size_t>(b)] = n / nb + (b < n % nb ? 1 : 0);

  const auto blocks = make_blocks(nb, 1);
  parallel_blocks(blocks, ctx.threads, [&](size_t, BlockRange r) {
    for (long b = r.begin; b < r.end; ++b) {
      Rng rng = Rng::stream(ctx.seed, static_cast<std::uint64_t>(b));
      auto& v = samples[static_cast<size_t>(b)];
      v.resize(static_cast<size_t>(block_n[static_cast<size_t>(b)]));
      for (auto& x : v) x = sample_initial(ev.density, ev.hbar, rng);
    }
  });

  const bool analytic = ev.plan.method == FlowMethod::AnalyticNormalMode;
  std::vector<std::vector<PhasePoint>> current;  // RK4: advance samples in place
  if (!analytic) current = samples;

  std::vector<std::vector<std::uint32_t>> c1(static_cast<size_t>(nb)),
      c2(static_cast<size_t>(nb));
  std::vector<std::uint32_t> cp;                          // 4D counts, pooled
  std::vector<std::vector<std::uint32_t>> cp_blk;         // per block (transient)
  std::vector<std::vector<std::uint32_t>> c1_0, c2_0;     // t=0 marginal counts
  double p4_0 = 0.0;

  // The marginal histograms are rebuilt each sample time on the extent of the
  // evolved ensemble (clipped to the global envelope): a single box sized for
  // the late-time filaments would waste all its resolution on the still-compact
  // early density. The t=0 spec is kept for the shared denominators.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::array<double, 8>> ext(static_cast<size_t>(nb));
  Hist2Spec h1_0{}, h2_0{};
  size_t cells1_0 = 0, cells2_0 = 0;
  std::vector<std::uint32_t> d1, d2;  // pooled t=0 counts
  double m10 = 0.0, m20 = 0.0;

  const size_t n_times = ctx.times.size();
  ctx.s1.assign(n_times, 0.0);
  ctx.s2.assign(n_times, 0.0);
  ctx.i.assign(n_times, 0.0);
  ctx.stderr_i.assign(n_times, 0.0);
  if (do_purity) ctx.purity_check.assign(n_times, 0.0);

  double t_prev = 0.0;
  for (size_t ti = 0; ti < n_times; ++ti) {
    const double t = ctx.times[ti];
    std::array<double, 16> M{};
    if (analytic) M = analytic_flow_matrix(ev.plan.model, t);
    const double dt = t - t_prev;
    t_prev = t;

    const auto map_sample = [&](const PhasePoint& x0) {
      PhasePoint x;
      for (int a = 0; a < 4; ++a) {
        const size_t row = static_cast<size_t>(4 * a);
        x.set(a,
              M[row] * x0.q1 + M[row + 1] * x0.p1 + M[row + 2] * x0.q2 + M[row + 3] * x0.p2);
      }
      return x;
    };

    // Advance (RK4 in place) and measure the ensemble extent at this time.
    parallel_blocks(blocks, ctx.threads, [&](size_t, BlockRange r) {
      for (long b = r.begin; b < r.end; ++b) {
        auto& e = ext[static_cast<size_t>(b)];
        e = {kInf, -kInf, kInf, -kInf, kInf, -kInf, kInf, -kInf};
        auto& src = analytic ? samples[static_cast<size_t>(b)] : current[static_cast<size_t>(b)];
        for (auto& x0 : src) {
          PhasePoint x;
          if (analytic) {
            x = map_sample(x0);
          } else {
            if (dt > 0.0) x0 = flow(ev.plan, x0, dt);
            x = x0;
          }
          if (!x.finite()) continue;
          for (int a = 0; a < 4; ++a) {
            const size_t j = static_cast<size_t>(2 * a);
            e[j] = std::min(e[j], x[a]);
            e[j + 1] = std::max(e[j + 1], x[a]);
          }
        }
      }
    });
    std::array<AxisRange, 4> box = ctx.env;
    for (int a = 0; a < 4; ++a) {
      double lo = kInf, hi = -kInf;
      for (int b = 0; b < nb; ++b) {
        lo = std::min(lo, ext[static_cast<size_t>(b)][static_cast<size_t>(2 * a)]);
        hi = std::max(hi, ext[static_cast<size_t>(b)][static_cast<size_t>(2 * a) + 1]);
      }
      if (!(lo < hi)) continue;  // degenerate ensemble: keep the envelope axis
      const double pad = 1e-3 * (hi - lo) + 1e-12;
      lo = std::max(lo - pad, ctx.env[static_cast<size_t>(a)].lo);
      hi = std::min(hi + pad, ctx.env[static_cast<size_t>(a)].hi);
      if (lo < hi) box[static_cast<size_t>(a)] = {lo, hi};
    }
    const int b1 = resolved_bins(box[0], box[1], ev.hbar, ctx.bins);
    const int b2 = resolved_bins(box[2], box[3], ev.hbar, ctx.bins);
    const auto h1 = hist_spec(box[0], box[1], b1);
    const auto h2 = hist_spec(box[2], box[3], b2);
    const size_t cells1 = static_cast<size_t>(b1) * b1;
    const size_t cells2 = static_cast<size_t>(b2) * b2;

    if (do_purity) {
      cp.assign(pcells, 0);
      cp_blk.assign(static_cast<size_t>(nb), {});
    }
    parallel_blocks(blocks, ctx.threads, [&](size_t, BlockRange r) {
      for (long b = r.begin; b < r.end; ++b) {
        auto& m1 = c1[static_cast<size_t>(b)];
        auto& m2 = c2[static_cast<size_t>(b)];
        m1.assign(cells1, 0);
        m2.assign(cells2, 0);
        std::vector<std::uint32_t>* p4 = nullptr;
        if (do_purity) {
          cp_blk[static_cast<size_t>(b)].assign(pcells, 0);
          p4 = &cp_blk[static_cast<size_t>(b)];
        }
        const auto& src =
            analytic ? samples[static_cast<size_t>(b)] : current[static_cast<size_t>(b)];
        for (const auto& x0 : src) {
          const PhasePoint x = analytic ? map_sample(x0) : x0;
          size_t cell;
          if (hist_cell(h1, x.q1, x.p1, cell)) ++m1[cell];
          if (hist_cell(h2, x.q2, x.p2, cell)) ++m2[cell];
          if (p4) {
            size_t ca, cb;
            if (hist_cell(hp[0], x.q1, x.p1, ca) && hist_cell(hp[1], x.q2, x.p2, cb))
              ++(*p4)[ca * (static_cast<size_t>(pb) * pb) + cb];
          }
        }
      }
    });
    if (do_purity)
      for (int b = 0; b < nb; ++b) {
        const auto& src = cp_blk[static_cast<size_t>(b)];
        for (size_t c = 0; c < pcells; ++c) cp[c] += src[c];
      }

    // Pool the marginal counts (block order fixed).
    std::vector<std::uint32_t> t1(cells1, 0), t2(cells2, 0);
    for (int b = 0; b < nb; ++b) {
      for (size_t c = 0; c < cells1; ++c) t1[c] += c1[static_cast<size_t>(b)][c];
      for (size_t c = 0; c < cells2; ++c) t2[c] += c2[static_cast<size_t>(b)][c];
    }

    const double nd = static_cast<double>(n);
    const double m1t = plugin_purity(t1, nd, h1.cell_area());
    const double m2t = plugin_purity(t2, nd, h2.cell_area());

    if (ti == 0) {
      c1_0 = c1;
      c2_0 = c2;
      h1_0 = h1;
      h2_0 = h2;
      cells1_0 = cells1;
      cells2_0 = cells2;
      d1 = t1;
      d2 = t2;
      m10 = m1t;
      m20 = m2t;
      if (do_purity) p4_0 = plugin_purity(cp, nd, hp[0].cell_area() * hp[1].cell_area());
    }

    const McEstimate est = mc_estimate(m1t, m2t, m10, m20);
    ctx.s1[ti] = est.s1;
    ctx.s2[ti] = est.s2;
    ctx.i[ti] = est.i;
    if (do_purity) {
      const double p4t = plugin_purity(cp, nd, hp[0].cell_area() * hp[1].cell_area());
      ctx.purity_check[ti] = p4_0 > 0.0 ? p4t / p4_0 : 0.0;
    }

    // Jackknife over blocks: drop block b from numerators and denominators.
    if (nb >= 2) {
      std::vector<double> theta(static_cast<size_t>(nb));
      std::vector<std::uint32_t> w1(cells1), w2(cells2), w10(cells1_0), w20(cells2_0);
      for (int b = 0; b < nb; ++b) {
        const double nl = nd - static_cast<double>(block_n[static_cast<size_t>(b)]);
        for (size_t c = 0; c < cells1; ++c) w1[c] = t1[c] - c1[static_cast<size_t>(b)][c];
        for (size_t c = 0; c < cells2; ++c) w2[c] = t2[c] - c2[static_cast<size_t>(b)][c];
        for (size_t c = 0; c < cells1_0; ++c) w10[c] = d1[c] - c1_0[static_cast<size_t>(b)][c];
        for (size_t c = 0; c < cells2_0; ++c) w20[c] = d2[c] - c2_0[static_cast<size_t>(b)][c];
        theta[static_cast<size_t>(b)] =
            mc_estimate(plugin_purity(w1, nl, h1.cell_area()),
                        plugin_purity(w2, nl, h2.cell_area()),
                        plugin_purity(w10, nl, h1_0.cell_area()),
                        plugin_purity(w20, nl, h2_0.cell_area()))
                .i;
      }
      double mean = 0.0;
      for (double v : theta) mean += v;
      mean /= nb;
      double var = 0.0;
      for (double v : theta) var += (v - mean) * (v - mean);
      var *= static_cast<double>(nb - 1) / nb;
      ctx.stderr_i[ti] = std::sqrt(var);
    }
  }
}

}  // namespace

McEntropies mc_entropies(const DensityEvaluator& ev, double t, long n_samples, int bins,
                         std::uint64_t seed) {
  if (n_samples < 100) throw ConfigError("mc_samples", "need at least 100 samples");
  if (bins < 4) throw ConfigError("bins", "need at least 4 bins per axis");
  if (t < 0.0) throw ConfigError("t", "time must be >= 0");
  McContext ctx;
  ctx.ev = &ev;
  ctx.times = t > 0.0 ? std::vector<double>{0.0, t} : std::vector<double>{0.0};
  ctx.n_samples = n_samples;
  ctx.bins = bins;
  ctx.seed = seed;
  {
    std::vector<double> scan;
    const int steps = 32;
    for (int k = 0; k <= steps; ++k) scan.push_back(t * k / steps);
    if (t == 0.0) scan = {0.0};
    ctx.env = envelope_for_times(ev.plan, ev.density, ev.hbar, 6.0, scan);
  }
  run_mc(ctx);
  const size_t last = ctx.times.size() - 1;
  return {ctx.s1[last], ctx.s2[last], ctx.i[last], ctx.stderr_i[last]};
}

// --- series pipeline ---

namespace {

// Incremental pullback state for the RK4 (Nelson) quadrature route: one
// backward-evolved preimage per grid node, advanced dt per output step.
struct PullbackGrid {
  OrientedAxes o;
  std::vector<PhasePoint> y;

  void init(const QuadratureGrid& g, int subsystem, int threads) {
    o = orient(g, subsystem);
    const long total = static_cast<long>(o.a.n) * o.b.n * o.c.n * o.d.n;
    y.resize(static_cast<size_t>(total));
    const auto blocks = make_blocks(total, 1 << 14);
    parallel_blocks(blocks, threads, [&](size_t, BlockRange r) {
      for (long idx = r.begin; idx < r.end; ++idx) {
        long rest = idx;
        const int l = static_cast<int>(rest % o.d.n);
        rest /= o.d.n;
        const int k = static_cast<int>(rest % o.c.n);
        rest /= o.c.n;
        const int j = static_cast<int>(rest % o.b.n);
        const int i = static_cast<int>(rest / o.b.n);
        y[static_cast<size_t>(idx)] = assemble(o, o.a.x(i), o.b.x(j), o.c.x(k), o.d.x(l));
      }
    });
  }

  void advance(const FlowPlan& plan, double dt, int threads) {
    const long nsub = std::max(1L, static_cast<long>(std::ceil(dt / plan.rk4_dt)));
    const double h = -dt / static_cast<double>(nsub);
    const auto blocks = make_blocks(static_cast<long>(y.size()), 1 << 14);
    parallel_blocks(blocks, threads, [&](size_t, BlockRange r) {
      for (long idx = r.begin; idx < r.end; ++idx) {
        PhasePoint x = y[static_cast<size_t>(idx)];
        for (long s = 0; s < nsub; ++s) x = rk4_step(plan.model, x, h);
        y[static_cast<size_t>(idx)] = x;
      }
    });
  }

  ReduceOut reduce(const DensityEvaluator& ev, int threads) const {
    const int nbm = o.b.n, ncm = o.c.n, ndm = o.d.n;
    return reduce_oriented(
        o, threads,
        [&](int i, int j, int k, int l) {
          const size_t idx =
              ((static_cast<size_t>(i) * nbm + j) * ncm + k) * ndm + static_cast<size_t>(l);
          return ev.initial(y[idx]);
        },
        nullptr);
  }
};

}  // namespace

ClassicalSeries classical_series(const ValidatedConfig& cfg, const ClassicalSeriesOptions& opts) {
  ClassicalSeries out;
  DensityEvaluator ev;
  ev.density = cfg.density;
  ev.hbar = cfg.model.hbar;
  ev.plan = FlowPlan::for_model(cfg.model, cfg.rk4_dt);
  const auto times = cfg.grid.times();
  const auto env = support_envelope(ev.plan, cfg.density, cfg.model.hbar, cfg.grid_span_sigmas,
                                    cfg.grid);

  if (cfg.grid_n > 0) {
    const int fine = cfg.grid_n;
    const int coarse = std::max(8, 3 * cfg.grid_n / 4);
    const QuadratureGrid g1 = make_grid(env, 1, fine, coarse);
    const QuadratureGrid g2 = make_grid(env, 2, fine, coarse);
    const size_t n_times = times.size();
    out.s1.resize(n_times);
    out.s2.resize(n_times);
    out.i.resize(n_times);
    out.purity_check.resize(n_times);

    double den1 = 0.0, den2 = 0.0, p40 = 0.0;
    if (ev.plan.method == FlowMethod::AnalyticNormalMode) {
      const OrientedAxes o1 = orient(g1, 1), o2 = orient(g2, 2);
      for (size_t ti = 0; ti < n_times; ++ti) {
        const BackwardMap back(ev.plan, times[ti]);
        const auto eval = [&](const OrientedAxes& o, int i, int j, int k, int l) {
          return ev.initial(back(assemble(o, o.a.x(i), o.b.x(j), o.c.x(k), o.d.x(l))));
        };
        const ReduceOut r1 = reduce_oriented(
            o1, opts.threads,
            [&](int i, int j, int k, int l) { return eval(o1, i, j, k, l); }, nullptr);
        const ReduceOut r2 = reduce_oriented(
            o2, opts.threads,
            [&](int i, int j, int k, int l) { return eval(o2, i, j, k, l); }, nullptr);
        if (ti == 0) {
          den1 = r1.marg2;
          den2 = r2.marg2;
          p40 = r1.p4;
        }
        out.s1[ti] = 1.0 - r1.marg2 / den1;
        out.s2[ti] = 1.0 - r2.marg2 / den2;
        out.i[ti] = out.s1[ti] + out.s2[ti] - out.s1[ti] * out.s2[ti];
        out.purity_check[ti] = r1.p4 / p40;
        out.min_marginal_mass = std::min({out.min_marginal_mass, r1.mass, r2.mass});
      }
    } else {
      PullbackGrid pg1, pg2;
      pg1.init(g1, 1, opts.threads);
      pg2.init(g2, 2, opts.threads);
      for (size_t ti = 0; ti < n_times; ++ti) {
        if (ti > 0) {
          const double dt = times[ti] - times[ti - 1];
          pg1.advance(ev.plan, dt, opts.threads);
          pg2.advance(ev.plan, dt, opts.threads);
        }
        const ReduceOut r1 = pg1.reduce(ev, opts.threads);
        const ReduceOut r2 = pg2.reduce(ev, opts.threads);
        if (ti == 0) {
          den1 = r1.marg2;
          den2 = r2.marg2;
          p40 = r1.p4;
        }
        out.s1[ti] = 1.0 - r1.marg2 / den1;
        out.s2[ti] = 1.0 - r2.marg2 / den2;
        out.i[ti] = out.s1[ti] + out.s2[ti] - out.s1[ti] * out.s2[ti];
        out.purity_check[ti] = r1.p4 / p40;
        out.min_marginal_mass = std::min({out.min_marginal_mass, r1.mass, r2.mass});
      }
    }
  }

  if (cfg.mc_samples > 0) {
    McContext ctx;
    ctx.ev = &ev;
    ctx.times = times;
    ctx.n_samples = cfg.mc_samples;
    ctx.bins = opts.mc_bins;
    ctx.blocks = opts.mc_blocks;
    ctx.purity_bins = opts.purity_bins;
    ctx.seed = cfg.seed;
    ctx.threads = opts.threads;
    ctx.env = env;
    run_mc(ctx);
    out.mc_s1 = std::move(ctx.s1);
    out.mc_s2 = std::move(ctx.s2);
    out.mc_i = std::move(ctx.i);
    out.mc_stderr = std::move(ctx.stderr_i);
    out.mc_purity_check = std::move(ctx.purity_check);
  }
  return out;
}

}  // namespace qclmi

#include "qclmi/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "json.hpp"
#include "qclmi/analytic.hpp"
#include "qclmi/csv.hpp"
#include "qclmi/liouville.hpp"
#include "qclmi/parallel.hpp"
#include "qclmi/quantum_fock.hpp"
#include "qclmi/quantum_gaussian.hpp"
#include "qclmi/sha1.hpp"
#include "qclmi/svg.hpp"

namespace qclmi {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

constexpr double kSectionEnergy = 0.05;

bool gaussian_route(const ValidatedConfig& cfg) {
  return cfg.model.kind != ModelKind::Nelson && !cfg.density.has_fock();
}

bool factor_at_origin(const DensityFactor& f) { return f.qc == 0.0 && f.pc == 0.0; }

// RWA closed forms hold at ω1 = ω2 = 1; ħ scales out of every curve.
enum class RwaOverlay { None, CohCoh, CohFock, FockFock };

RwaOverlay rwa_overlay_kind(const ValidatedConfig& cfg) {
  if (cfg.model.kind != ModelKind::Rwa || cfg.model.omega1 != 1.0 || cfg.model.omega2 != 1.0)
    return RwaOverlay::None;
  const bool f1 = cfg.density.sub1.kind == FactorKind::FockHusimi;
  const bool f2 = cfg.density.sub2.kind == FactorKind::FockHusimi;
  if (f1 && f2) return RwaOverlay::FockFock;
  if (f1 != f2) {
    const auto& coh = f1 ? cfg.density.sub2 : cfg.density.sub1;
    return factor_at_origin(coh) ? RwaOverlay::CohFock : RwaOverlay::None;
  }
  return RwaOverlay::CohCoh;
}

}  // namespace

EntropySeries compute_entropy_series(const ValidatedConfig& cfg, int threads,
                                     SeriesDiagnostics* diag) {
  const int nthreads = resolve_threads(threads);
  const auto times = cfg.grid.times();
  EntropySeries series;
  series.records.resize(times.size());
  for (size_t k = 0; k < times.size(); ++k) series.records[k].t = times[k];

  SeriesDiagnostics local;
  local.flow_method = cfg.flow_method == FlowMethod::AnalyticNormalMode ? "analytic" : "rk4";

  // Classical pipeline.
  const auto t_cl = Clock::now();
  const ClassicalSeries cl = classical_series(cfg, ClassicalSeriesOptions{nthreads, 64, 20, 24});
  local.classical_ms = ms_since(t_cl);
  if (cl.has_quadrature() && cl.has_mc())
    local.classical_route = "quadrature+mc";
  else
    local.classical_route = cl.has_quadrature() ? "quadrature" : "mc";
  local.min_marginal_mass = cl.min_marginal_mass;
  for (size_t k = 0; k < times.size(); ++k) {
    auto& r = series.records[k];
    if (cl.has_quadrature()) {
      r.s1_cl = cl.s1[k];
      r.s2_cl = cl.s2[k];
      r.i_cl = cl.i[k];
      r.purity_check = cl.purity_check[k];
      local.purity_drift = std::max(local.purity_drift, std::abs(cl.purity_check[k] - 1.0));
    } else {
      r.s1_cl = cl.mc_s1[k];
      r.s2_cl = cl.mc_s2[k];
      r.i_cl = cl.mc_i[k];
      r.purity_check = cl.mc_purity_check[k];
    }
    if (cl.has_mc()) {
      r.mc_stderr = cl.mc_stderr[k];
      local.mc_stderr_max = std::max(local.mc_stderr_max, cl.mc_stderr[k]);
      local.mc_purity_drift =
          std::max(local.mc_purity_drift, std::abs(cl.mc_purity_check[k] - 1.0));
    }
  }

  // Quantum pipeline.
  const auto t_q = Clock::now();
  if (gaussian_route(cfg)) {
    local.quantum_route = "gaussian";
    const auto blocks = make_blocks(static_cast<long>(times.size()), 16);
    std::vector<GaussianEntropies> ge(times.size());
    parallel_blocks(blocks, nthreads, [&](size_t, BlockRange rg) {
      for (long k = rg.begin; k < rg.end; ++k)
        ge[static_cast<size_t>(k)] =
            qlmi_gaussian_at(cfg.model, cfg.density.center(), times[static_cast<size_t>(k)]);
    });
    for (size_t k = 0; k < times.size(); ++k) {
      series.records[k].s1_q = ge[k].s1;
      series.records[k].s2_q = ge[k].s2;
      series.records[k].i_q = ge[k].i;
      local.gaussian_impurity = std::max(local.gaussian_impurity, ge[k].global_impurity);
    }
  } else {
    local.quantum_route = "fock";
    const QuantumSeries qs = quantum_series_fock(cfg, nthreads);
    for (size_t k = 0; k < times.size(); ++k) {
      series.records[k].s1_q = qs.s1[k];
      series.records[k].s2_q = qs.s2[k];
      series.records[k].i_q = qs.i[k];
      series.records[k].trunc_pop = qs.trunc_pop[k];
    }
    local.fock_trunc_loss = qs.trunc_loss;
    local.fock_trunc_pop = *std::max_element(qs.trunc_pop.begin(), qs.trunc_pop.end());
    local.fock_norm_drift = qs.max_norm_drift;
    local.fock_energy_drift = qs.max_energy_drift;
    local.fock_nmax_used = qs.nmax_used;
    local.fock_escalated = qs.escalated;
  }
  local.quantum_ms = ms_since(t_q);

  // Analytic overlays.
  if (cfg.model.kind == ModelKind::Bilinear && !cfg.density.has_fock()) {
    for (size_t k = 0; k < times.size(); ++k) {
      const double v = bilinear_icl_oracle(cfg.model, cfg.density.center(), times[k]);
      series.records[k].i_ref = v;
      series.records[k].icl_ref = v;
    }
  } else {
    switch (rwa_overlay_kind(cfg)) {
      case RwaOverlay::FockFock:
        for (size_t k = 0; k < times.size(); ++k) {
          const OraclePair o = rwa_fock_fock(times[k], cfg.model.lambda);
          series.records[k].i_ref = o.i_q;
          series.records[k].icl_ref = o.i_cl;
        }
        break;
      case RwaOverlay::CohFock:
        for (size_t k = 0; k < times.size(); ++k) {
          const OraclePair o = rwa_coh_fock(times[k], cfg.model.lambda);
          series.records[k].i_ref = o.i_q;
          series.records[k].icl_ref = o.i_cl;
        }
        break;
      case RwaOverlay::CohCoh:
        for (auto& r : series.records) {
          r.i_ref = 0.0;
          r.icl_ref = 0.0;
        }
        break;
      case RwaOverlay::None:
        break;
    }
  }

  // Tolerances follow the route: exact flows on exact grids sit at roundoff,
  // RK4 quadrature and histograms carry method error.
  double tol_cl = 1e-6;
  if (cfg.flow_method == FlowMethod::Rk4) tol_cl = 1e-3;
  if (!cl.has_quadrature()) tol_cl = std::max(1e-3, 4.0 * local.mc_stderr_max);
  series.check_invariants(tol_cl, 1e-10);

  if (diag) *diag = local;
  return series;
}

namespace {

json config_json(const SimConfig& c) {
  json j;
  j["model"] = c.model;
  j["omega1"] = c.omega1;
  j["omega2"] = c.omega2;
  j["lambda"] = c.lambda;
  j["hbar"] = c.hbar;
  j["state1"] = c.state1;
  j["state2"] = c.state2;
  j["center1_q"] = c.center1_q;
  j["center1_p"] = c.center1_p;
  j["center2_q"] = c.center2_q;
  j["center2_p"] = c.center2_p;
  j["tmax"] = c.tmax;
  j["steps"] = c.steps;
  j["grid_n"] = c.grid_n;
  j["grid_span_sigmas"] = c.grid_span_sigmas;
  j["mc_samples"] = c.mc_samples;
  j["rk4_dt"] = c.rk4_dt;
  j["fock_nmax"] = c.fock_nmax;
  j["seed"] = c.seed;
  return j;
}

json module_versions() {
  return json{{"core", "1.0.0"},    {"flows", "1.0.0"},          {"liouville", "1.0.0"},
              {"quantum-gaussian", "1.0.0"}, {"quantum-fock", "1.0.0"}, {"analytic", "1.0.0"},
              {"cli", "1.0.0"}};
}

SimConfig resolve(const SimConfig& raw, const RunOptions& opts) {
  SimConfig r = raw;
  if (opts.seed_override) r.seed = *opts.seed_override;
  return r;
}

}  // namespace

SimulateResult run_simulate(const SimConfig& raw, const std::filesystem::path& out_dir,
                            const RunOptions& opts) {
  const auto t0 = Clock::now();
  const SimConfig resolved = resolve(raw, opts);
  const ValidatedConfig cfg = build_config(resolved);

  SeriesDiagnostics diag;
  EntropySeries series = compute_entropy_series(cfg, opts.threads, &diag);

  std::filesystem::create_directories(out_dir);
  const std::string csv = entropy_csv_text(series, "manifest.json");

  json manifest;
  manifest["command"] = "simulate";
  manifest["config"] = config_json(resolved);
  manifest["config_sha1"] = git_blob_sha1(serialize_config(resolved));
  manifest["seed"] = resolved.seed;
  manifest["modules"] = module_versions();
  manifest["outputs"] = {{"series.csv", git_blob_sha1(csv)}};
  json d;
  d["flow_method"] = diag.flow_method;
  d["classical_route"] = diag.classical_route;
  d["quantum_route"] = diag.quantum_route;
  d["min_marginal_mass"] = diag.min_marginal_mass;
  d["purity_drift"] = diag.purity_drift;
  if (diag.classical_route != "quadrature") {
    d["mc_purity_drift"] = diag.mc_purity_drift;
    d["mc_stderr_max"] = diag.mc_stderr_max;
  }
  if (diag.quantum_route == "gaussian") {
    d["gaussian_impurity"] = diag.gaussian_impurity;
  } else {
    d["fock_nmax_used"] = diag.fock_nmax_used;
    d["fock_escalated"] = diag.fock_escalated;
    d["fock_trunc_loss"] = diag.fock_trunc_loss;
    d["fock_trunc_pop"] = diag.fock_trunc_pop;
    d["fock_norm_drift"] = diag.fock_norm_drift;
    d["fock_energy_drift"] = diag.fock_energy_drift;
  }
  manifest["diagnostics"] = d;
  manifest["timing_ms"] = {{"classical", diag.classical_ms},
                           {"quantum", diag.quantum_ms},
                           {"total", ms_since(t0)}};

  SimulateResult out;
  out.csv_path = out_dir / "series.csv";
  out.manifest_path = out_dir / "manifest.json";
  out.series = std::move(series);
  atomic_write(out.csv_path, csv);
  atomic_write(out.manifest_path, manifest.dump(2) + "\n");
  return out;
}

PoincareResult run_poincare(const SimConfig& raw, const std::filesystem::path& out_dir,
                            const RunOptions& opts) {
  const auto t0 = Clock::now();
  const SimConfig resolved = resolve(raw, opts);
  const ValidatedConfig cfg = build_config(resolved);
  if (cfg.model.kind != ModelKind::Nelson)
    throw ConfigError("model", "poincare requires the nelson model");

  // Deterministic fan of seeds across the allowed section disk
  // p2² + ω2²q2² < 2E: eight along p2 = 0, four along q2 = 0.
  const double E = kSectionEnergy;
  const double q2max = std::sqrt(2.0 * E) / cfg.model.omega2;
  const double p2max = std::sqrt(2.0 * E);
  std::vector<std::array<double, 2>> seeds;
  for (const double f : {-0.9, -0.7, -0.5, -0.25, 0.25, 0.5, 0.7, 0.9})
    seeds.push_back({f * q2max, 0.0});
  for (const double f : {-0.8, -0.4, 0.4, 0.8}) seeds.push_back({0.0, f * p2max});

  const int crossings = 250;
  const SectionResult section =
      poincare_section(cfg.model, E, seeds, crossings, cfg.rk4_dt, SectionOptions{});

  // Per-seed dispersion; the extremes become the recommended wave-packet
  // centers (scattered → chaotic, curve-confined → regular).
  std::vector<std::vector<SectionPoint>> by_seed(seeds.size());
  for (const auto& p : section.points) by_seed[static_cast<size_t>(p.seed_index)].push_back(p);
  json seed_rows = json::array();
  int best_chaotic = -1, best_regular = -1;
  double disp_max = -1.0, disp_min = 1e300;
  std::vector<double> dispersion(seeds.size(), 0.0);
  for (size_t s = 0; s < seeds.size(); ++s) {
    const auto& rep = section.seeds[s];
    json row;
    row["seed_index"] = rep.seed_index;
    row["q2"] = seeds[s][0];
    row["p2"] = seeds[s][1];
    row["crossings"] = rep.crossings;
    row["max_energy_error"] = rep.max_energy_error;
    if (rep.aborted) row["error"] = rep.error;
    if (by_seed[s].size() >= 32) {
      dispersion[s] = section_dispersion(by_seed[s]);
      row["dispersion"] = dispersion[s];
      if (dispersion[s] > disp_max) {
        disp_max = dispersion[s];
        best_chaotic = static_cast<int>(s);
      }
      if (dispersion[s] < disp_min) {
        disp_min = dispersion[s];
        best_regular = static_cast<int>(s);
      }
    }
    seed_rows.push_back(row);
  }

  std::filesystem::create_directories(out_dir);
  const std::string csv = section_csv_text(section.points, "manifest.json");

  json manifest;
  manifest["command"] = "poincare";
  manifest["config"] = config_json(resolved);
  manifest["config_sha1"] = git_blob_sha1(serialize_config(resolved));
  manifest["modules"] = module_versions();
  manifest["energy"] = E;
  manifest["crossings_per_seed"] = crossings;
  manifest["seeds"] = seed_rows;
  manifest["outputs"] = {{"section.csv", git_blob_sha1(csv)}};
  auto center_json = [&](int s) {
    const PhasePoint x = section_seed_point(cfg.model, E, seeds[static_cast<size_t>(s)][0],
                                            seeds[static_cast<size_t>(s)][1]);
    return json{{"seed_index", s},
                {"dispersion", dispersion[static_cast<size_t>(s)]},
                {"center", {x.q1, x.p1, x.q2, x.p2}}};
  };
  if (best_chaotic >= 0 && best_regular >= 0) {
    manifest["selected_centers"] = {{"chaotic", center_json(best_chaotic)},
                                    {"regular", center_json(best_regular)}};
  }
  manifest["timing_ms"] = {{"total", ms_since(t0)}};

  PoincareResult out;
  out.csv_path = out_dir / "section.csv";
  out.manifest_path = out_dir / "manifest.json";
  out.section = section;
  atomic_write(out.csv_path, csv);
  atomic_write(out.manifest_path, manifest.dump(2) + "\n");
  return out;
}

void run_plot(const std::filesystem::path& csv_in, const std::filesystem::path& svg_out) {
  const std::string text = read_file(csv_in);
  std::string svg;
  if (is_section_csv(text))
    svg = render_section_svg(parse_section_csv(text));
  else
    svg = render_entropy_svg(parse_entropy_csv(text));
  if (svg_out.has_parent_path()) std::filesystem::create_directories(svg_out.parent_path());
  atomic_write(svg_out, svg);
}

}  // namespace qclmi

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qclmi/config.hpp"
#include "qclmi/core.hpp"
#include "qclmi/csv.hpp"
#include "qclmi/run.hpp"

namespace {

std::optional<std::uint64_t> seed_from_env() {
  const char* env = std::getenv("SIM_SEED");
  if (!env || !*env) return std::nullopt;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (end == env || *end != '\0')
    throw qclmi::ConfigError("SIM_SEED", std::string("not an unsigned integer: '") + env + "'");
  return static_cast<std::uint64_t>(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qclmi: quantum vs classical linear mutual information for coupled oscillators"};
  app.require_subcommand(1);

  std::string config_path, out_dir, in_csv, out_svg;
  int threads = 0;

  auto* sim = app.add_subcommand("simulate", "Run the entropy pipelines for one config");
  sim->add_option("--config", config_path, "Config file (key = value)")->required();
  sim->add_option("--out", out_dir, "Output directory")->required();
  sim->add_option("--threads", threads, "Worker threads (0 = auto)");

  auto* poinc = app.add_subcommand("poincare", "Poincaré section of the Nelson flow");
  poinc->add_option("--config", config_path, "Config file (key = value)")->required();
  poinc->add_option("--out", out_dir, "Output directory")->required();
  poinc->add_option("--threads", threads, "Worker threads (0 = auto)");

  auto* plot = app.add_subcommand("plot", "Render a CSV from simulate/poincare as SVG");
  plot->add_option("--in", in_csv, "Input CSV")->required();
  plot->add_option("--out", out_svg, "Output SVG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    qclmi::RunOptions opts;
    opts.threads = threads;
    opts.seed_override = seed_from_env();
    if (sim->parsed()) {
      const auto res =
          qclmi::run_simulate(qclmi::parse_config_file(config_path), out_dir, opts);
      std::cout << "wrote " << res.csv_path.string() << " (" << res.series.records.size()
                << " rows) and " << res.manifest_path.string() << "\n";
    } else if (poinc->parsed()) {
      const auto res =
          qclmi::run_poincare(qclmi::parse_config_file(config_path), out_dir, opts);
      std::cout << "wrote " << res.csv_path.string() << " (" << res.section.points.size()
                << " points) and " << res.manifest_path.string() << "\n";
    } else {
      qclmi::run_plot(in_csv, out_svg);
      std::cout << "wrote " << out_svg << "\n";
    }
  } catch (const qclmi::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qclmi::EmptyInput& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const qclmi::ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

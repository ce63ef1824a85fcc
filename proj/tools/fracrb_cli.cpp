// Command-line driver for the fractional reduced basis experiments.
//
//   fracrb study   --config cfg.json --out DIR [--serial] [--seed U64] [--safety REAL]
//   fracrb sweep   --config cfg.json --out DIR [--n-list 8,16,32] [...]
//   fracrb rates   [--kappa K ...] [--out DIR]
//   fracrb zpoints --delta D --r R [--lower a --upper b] [--out DIR]

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fracrb/elliptic.hpp"
#include "fracrb/errors.hpp"
#include "fracrb/experiment.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::string out_dir = "out";
  bool serial = false;
  std::optional<std::uint64_t> seed;
  std::optional<double> safety;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "flat JSON experiment config")->check(CLI::ExistingFile);
  cmd->add_option("--out", flags.out_dir, "output directory")->capture_default_str();
  cmd->add_flag("--serial", flags.serial, "single-threaded, byte-reproducible output");
  cmd->add_option("--seed", flags.seed, "overrides the random right-hand side seed");
  cmd->add_option("--safety", flags.safety, "overrides the spectral bound safety factor");
}

fracrb::ExperimentConfig resolve_config(const CommonFlags& flags) {
  fracrb::ExperimentConfig config =
      flags.config_path.empty() ? fracrb::ExperimentConfig{} : fracrb::load_config(flags.config_path);
  if (flags.seed) config.rhs.seed = *flags.seed;
  if (flags.safety) config.bounds.safety = *flags.safety;
  fracrb::validate_config(config);
  return config;
}

// Writes to DIR/name when an output directory was given, else to stdout.
template <class Writer>
void emit(const std::string& dir, const std::string& name, Writer&& write) {
  if (dir.empty()) {
    write(std::cout);
    return;
  }
  std::filesystem::create_directories(dir);
  const auto path = std::filesystem::path(dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fracrb::ConfigError("--out", "cannot write " + path.string());
  write(out);
  std::cerr << "wrote " << path.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced basis solvers for spectral fractional diffusion"};
  app.require_subcommand(1);

  CommonFlags study_flags;
  auto* study = app.add_subcommand("study", "convergence study over r and s");
  add_common(study, study_flags);

  CommonFlags sweep_flags;
  std::vector<int> n_list;
  auto* sweep = app.add_subcommand("sweep", "convergence studies over a list of mesh sizes");
  add_common(sweep, sweep_flags);
  sweep->add_option("--n-list", n_list, "mesh divisions (defaults to the config's n_list)")->delimiter(',');

  std::vector<double> kappas;
  std::string rates_out;
  auto* rates = app.add_subcommand("rates", "decay constant C*(kappa) table");
  rates->add_option("--kappa", kappas, "condition numbers (repeatable or comma separated)")->delimiter(',');
  rates->add_option("--out", rates_out, "output directory (stdout if omitted)");

  double delta = 0.0;
  int r = 0;
  std::optional<double> lower, upper;
  std::string zpoints_out;
  auto* zpoints = app.add_subcommand("zpoints", "Zolotarev points on [delta, 1] or a transformed interval");
  zpoints->add_option("--delta", delta, "interval lower end delta in (0,1)");
  zpoints->add_option("--r", r, "number of points")->required();
  zpoints->add_option("--lower", lower, "transformed interval lower end a > 0");
  zpoints->add_option("--upper", upper, "transformed interval upper end b > a");
  zpoints->add_option("--out", zpoints_out, "output directory (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*study) {
      const fracrb::ExperimentConfig config = resolve_config(study_flags);
      const fracrb::RunOptions options{study_flags.serial};
      const fracrb::StudyResult result = fracrb::run_convergence_study(config, options);
      fracrb::write_study_outputs(study_flags.out_dir, result, options);
      std::cerr << "study: N = " << result.N << ", kappa = " << result.kappa << ", C* = " << result.c_star
                << ", " << result.rows.size() << " rows -> " << study_flags.out_dir << '\n';
    } else if (*sweep) {
      fracrb::ExperimentConfig config = resolve_config(sweep_flags);
      if (!n_list.empty()) config.n_list = n_list;
      if (config.n_list.empty()) config.n_list = {config.n};
      const fracrb::RunOptions options{sweep_flags.serial};
      const fracrb::SweepResult result = fracrb::run_mesh_sweep(config, config.n_list, options);
      fracrb::write_sweep_outputs(sweep_flags.out_dir, result, config, options);
      std::cerr << "sweep: " << result.studies.size() << " meshes -> " << sweep_flags.out_dir << '\n';
    } else if (*rates) {
      if (kappas.empty()) kappas = {18083.0 / 18.0, 1721511.0 / (2.0 * std::numbers::pi * std::numbers::pi)};
      const auto rows = fracrb::emit_rate_table(kappas);
      emit(rates_out, "rates.csv", [&](std::ostream& out) { fracrb::write_rate_csv(out, rows); });
      int rejected = 0;
      for (const auto& row : rows) {
        if (!row.rate) {
          std::cerr << "kappa = " << row.kappa << ": " << row.note << '\n';
          ++rejected;
        }
      }
      return rejected ? 2 : 0;
    } else if (*zpoints) {
      const fracrb::elliptic::ZolotarevSet set =
          (lower || upper) ? fracrb::elliptic::transformed_zolotarev(lower.value_or(0.0), upper.value_or(0.0), r)
                           : fracrb::elliptic::zolotarev_points(delta, r);
      emit(zpoints_out, "zpoints.csv", [&](std::ostream& out) { fracrb::write_zpoints_csv(out, set); });
    }
  } catch (const fracrb::ConfigError& e) {
    std::cerr << "config error in " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

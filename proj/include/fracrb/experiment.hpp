#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracrb/elliptic.hpp"
#include "fracrb/fem.hpp"
#include "fracrb/spectral.hpp"
#include "fracrb/truth.hpp"

namespace fracrb {

struct RhsSpec {
  enum class Kind { ConstantOne, Eigenfunction, Random };
  Kind kind = Kind::ConstantOne;
  int index = 1;             // eigenfunction(k), 1-based
  std::uint64_t seed = 42;   // random(seed)
};

struct BoundsSpec {
  enum class Kind { Auto, Manual };
  Kind kind = Kind::Auto;
  double safety = 1.01;
  double lambda_L_sq = 0.0;
  double lambda_U_sq = 0.0;
};

struct ExperimentConfig {
  std::string domain = "square";  // interval | square | lshape
  int n = 16;
  int order = 1;
  RhsSpec rhs{};
  std::vector<double> s_list{0.1, 0.5, 0.9};
  int r_min = 1;
  int r_max = 20;
  BoundsSpec bounds{};
  double solver_rel_tol = 1e-12;
  double drop_tol = 1e-10;
  std::size_t truth_cap = 4000;
  std::vector<int> n_list{};  // sweep only
  std::string output = "study.csv";
};

/// Parses the flat JSON config; missing keys keep their defaults, unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
/// Every field, defaults included.
nlohmann::json config_to_json(const ExperimentConfig& config);
/// Throws ConfigError naming the first offending field.
void validate_config(const ExperimentConfig& config);

/// Mesh, matrices, right-hand side, spectral interval and truth basis shared by all (r, s).
struct Problem {
  fem::Discretization disc;
  SparseSymMatrix M;
  SparseSymMatrix A;
  DofVector f;
  double f_norm0 = 0.0;
  double f_norm1 = 0.0;
  SpectralInterval interval{1.0, 2.0};
  TruthBasis truth;
};

Problem setup_problem(const ExperimentConfig& config);

struct StudyRow {
  int r = 0;
  double s = 0.0;
  double h = 0.0;
  std::size_t N = 0;
  std::size_t r_effective = 0;
  double e_star = 0.0;  // dual RB norm minus truth norm, signed
  double e = 0.0;       // |extrapolation RB norm minus truth norm|
  double E_star = 0.0;  // L2 error of the dual RB solution
  double E = 0.0;       // L2 error of the extrapolation RB solution
  double kappa = 0.0;
  double c_star = 0.0;
  double t_offline_ms = 0.0;
  double t_online_us = 0.0;
};

/// Least-squares fit of ln(err) against r over the points with err in [lo, hi].
struct LogFit {
  double slope = 0.0;
  double intercept = 0.0;
  int points = 0;
};
inline constexpr double kFitWindowLo = 1e-10;
inline constexpr double kFitWindowHi = 1e-2;
std::optional<LogFit> fit_log_slope(const std::vector<int>& r, const std::vector<double>& err,
                                    double lo = kFitWindowLo, double hi = kFitWindowHi);

struct FittedRate {
  double s = 0.0;
  std::string metric;        // e_star | e | E_star | E
  std::optional<LogFit> fit;
  double predicted_slope = 0.0;  // -2 C* for norm errors, -C* for solution errors
};

struct StudyResult {
  ExperimentConfig config;
  double h = 0.0;
  std::size_t N = 0;
  double kappa = 0.0;
  double c_star = 0.0;
  double f_norm0 = 0.0;
  double f_norm1 = 0.0;
  std::vector<StudyRow> rows;  // r-major, then s in config order
  std::vector<FittedRate> fits;
};

struct RunOptions {
  /// Single-threaded, and timing columns written as zero so output is reproducible.
  bool serial = false;
};

StudyResult run_convergence_study(const ExperimentConfig& config, const RunOptions& options = {});
/// Same, on a problem that was already set up (reuses matrices and truth basis).
StudyResult run_convergence_study(const ExperimentConfig& config, const Problem& problem,
                                  const RunOptions& options = {});

struct SweepResult {
  std::vector<StudyResult> studies;  // in n_list order
};

SweepResult run_mesh_sweep(const ExperimentConfig& config, const std::vector<int>& n_list,
                           const RunOptions& options = {});

struct RateRow {
  double kappa = 0.0;
  std::optional<elliptic::DecayRate> rate;
  std::string note;
};
std::vector<RateRow> emit_rate_table(const std::vector<double>& kappa_list);

// CSV writers.  Error columns carry 17 significant digits.
void write_study_csv(std::ostream& out, const std::vector<const StudyResult*>& studies, bool zero_timings);
void write_timings_csv(std::ostream& out, const std::vector<const StudyResult*>& studies);
void write_summary_csv(std::ostream& out, const std::vector<const StudyResult*>& studies);
void write_sweep_summary_csv(std::ostream& out, const SweepResult& sweep);
void write_rate_csv(std::ostream& out, const std::vector<RateRow>& rows);
void write_zpoints_csv(std::ostream& out, const elliptic::ZolotarevSet& set);

/// Writes the study CSV, summary.csv, config.json (and timings.csv in serial mode) into dir.
void write_study_outputs(const std::string& dir, const StudyResult& result, const RunOptions& options);
void write_sweep_outputs(const std::string& dir, const SweepResult& sweep, const ExperimentConfig& config,
                         const RunOptions& options);

}  // namespace fracrb

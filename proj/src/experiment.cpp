#include "fracrb/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "fracrb/elliptic.hpp"
#include "fracrb/errors.hpp"
#include "fracrb/mesh.hpp"
#include "fracrb/random.hpp"
#include "fracrb/reduced_basis.hpp"

namespace fracrb {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

// Online queries are a few microseconds; average over this many repetitions.
constexpr int kOnlineRepeats = 32;

const std::set<std::string> kKnownKeys = {
    "domain",      "n",           "order",       "rhs",          "rhs_index",      "seed",
    "s_list",      "r_min",       "r_max",       "bounds",       "safety",         "lambda_L_sq",
    "lambda_U_sq", "solver_rel_tol", "drop_tol", "truth_cap",    "n_list",         "output"};

template <class T>
T get_field(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(key, std::string("wrong type (") + e.what() + ")");
  }
}

std::string rhs_name(RhsSpec::Kind kind) {
  switch (kind) {
    case RhsSpec::Kind::ConstantOne: return "constant_one";
    case RhsSpec::Kind::Eigenfunction: return "eigenfunction";
    case RhsSpec::Kind::Random: return "random";
  }
  return "?";
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}
std::string fmt_err(double v) { return fmt("%.16e", v); }
std::string fmt_real(double v) { return fmt("%.17g", v); }

fem::Mesh make_mesh(const ExperimentConfig& config) {
  if (config.domain == "interval") return fem::unit_interval_mesh(config.n);
  if (config.domain == "square") return fem::unit_square_mesh(config.n);
  return fem::lshape_mesh(config.n);
}

double m_norm(const SparseSymMatrix& M, const DofVector& x) {
  return std::sqrt(std::max(0.0, x.dot(M.multiply(x))));
}

double elapsed_ms(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

}  // namespace

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("<root>", "config must be a JSON object");
  for (const auto& item : doc.items()) {
    if (!kKnownKeys.count(item.key())) throw ConfigError(item.key(), "unknown field");
  }
  ExperimentConfig c;
  c.domain = get_field(doc, "domain", c.domain);
  c.n = get_field(doc, "n", c.n);
  c.order = get_field(doc, "order", c.order);

  const std::string rhs = get_field(doc, "rhs", rhs_name(c.rhs.kind));
  if (rhs == "constant_one") {
    c.rhs.kind = RhsSpec::Kind::ConstantOne;
  } else if (rhs == "eigenfunction") {
    c.rhs.kind = RhsSpec::Kind::Eigenfunction;
  } else if (rhs == "random") {
    c.rhs.kind = RhsSpec::Kind::Random;
  } else {
    throw ConfigError("rhs", "expected constant_one, eigenfunction or random, got '" + rhs + "'");
  }
  c.rhs.index = get_field(doc, "rhs_index", c.rhs.index);
  c.rhs.seed = get_field(doc, "seed", c.rhs.seed);

  c.s_list = get_field(doc, "s_list", c.s_list);
  c.r_min = get_field(doc, "r_min", c.r_min);
  c.r_max = get_field(doc, "r_max", c.r_max);

  const std::string bounds = get_field(doc, "bounds", std::string("auto"));
  if (bounds == "auto") {
    c.bounds.kind = BoundsSpec::Kind::Auto;
  } else if (bounds == "manual") {
    c.bounds.kind = BoundsSpec::Kind::Manual;
  } else {
    throw ConfigError("bounds", "expected auto or manual, got '" + bounds + "'");
  }
  c.bounds.safety = get_field(doc, "safety", c.bounds.safety);
  c.bounds.lambda_L_sq = get_field(doc, "lambda_L_sq", c.bounds.lambda_L_sq);
  c.bounds.lambda_U_sq = get_field(doc, "lambda_U_sq", c.bounds.lambda_U_sq);

  c.solver_rel_tol = get_field(doc, "solver_rel_tol", c.solver_rel_tol);
  c.drop_tol = get_field(doc, "drop_tol", c.drop_tol);
  c.truth_cap = get_field(doc, "truth_cap", c.truth_cap);
  c.n_list = get_field(doc, "n_list", c.n_list);
  c.output = get_field(doc, "output", c.output);
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("--config", "cannot open " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("--config", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

json config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["domain"] = c.domain;
  doc["n"] = c.n;
  doc["order"] = c.order;
  doc["rhs"] = rhs_name(c.rhs.kind);
  doc["rhs_index"] = c.rhs.index;
  doc["seed"] = c.rhs.seed;
  doc["s_list"] = c.s_list;
  doc["r_min"] = c.r_min;
  doc["r_max"] = c.r_max;
  doc["bounds"] = c.bounds.kind == BoundsSpec::Kind::Auto ? "auto" : "manual";
  doc["safety"] = c.bounds.safety;
  doc["lambda_L_sq"] = c.bounds.lambda_L_sq;
  doc["lambda_U_sq"] = c.bounds.lambda_U_sq;
  doc["solver_rel_tol"] = c.solver_rel_tol;
  doc["drop_tol"] = c.drop_tol;
  doc["truth_cap"] = c.truth_cap;
  doc["n_list"] = c.n_list;
  doc["output"] = c.output;
  return doc;
}

void validate_config(const ExperimentConfig& c) {
  if (c.domain != "interval" && c.domain != "square" && c.domain != "lshape") {
    throw ConfigError("domain", "expected interval, square or lshape, got '" + c.domain + "'");
  }
  if (c.n < 2) throw ConfigError("n", "need at least 2 divisions");
  if (c.domain == "lshape" && c.n % 2 != 0) throw ConfigError("n", "lshape needs an even number of divisions");
  if (c.order != 1 && c.order != 2) throw ConfigError("order", "expected 1 or 2");
  if (c.order == 2 && c.domain == "interval") throw ConfigError("order", "P2 is only available on 2D domains");
  if (c.rhs.kind == RhsSpec::Kind::Eigenfunction && c.rhs.index < 1) {
    throw ConfigError("rhs_index", "eigenfunction index is 1-based");
  }
  if (c.s_list.empty()) throw ConfigError("s_list", "must not be empty");
  for (double s : c.s_list) {
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("s_list", "every s must lie in (0,1), got " + fmt_real(s));
  }
  if (c.r_max < 1) throw ConfigError("r_max", "must be at least 1");
  if (c.r_min < 0 || c.r_min > c.r_max) throw ConfigError("r_min", "must lie in [0, r_max]");
  if (!(c.bounds.safety >= 1.0)) throw ConfigError("safety", "must be at least 1");
  if (c.bounds.kind == BoundsSpec::Kind::Manual) {
    if (!(c.bounds.lambda_L_sq > 0.0)) throw ConfigError("lambda_L_sq", "must be positive");
    if (!(c.bounds.lambda_L_sq < c.bounds.lambda_U_sq)) {
      throw ConfigError("lambda_U_sq", "must exceed lambda_L_sq");
    }
  }
  if (!(c.solver_rel_tol > 0.0 && c.solver_rel_tol < 1.0)) throw ConfigError("solver_rel_tol", "must lie in (0,1)");
  if (!(c.drop_tol > 0.0 && c.drop_tol < 1.0)) throw ConfigError("drop_tol", "must lie in (0,1)");
  if (c.truth_cap < 1) throw ConfigError("truth_cap", "must be positive");
  for (int n : c.n_list) {
    if (n < 2) throw ConfigError("n_list", "every entry needs at least 2 divisions");
  }
  if (c.output.empty()) throw ConfigError("output", "must not be empty");
}

Problem setup_problem(const ExperimentConfig& config) {
  validate_config(config);
  linalg::SolverOptions solver;
  solver.rel_tol = config.solver_rel_tol;

  fem::Discretization disc = fem::make_discretization(make_mesh(config), config.order);
  const std::size_t N = disc.num_free();
  if (N == 0) throw ConfigError("n", "mesh has no interior degrees of freedom");
  if (N > config.truth_cap) {
    throw CapacityError("truth solver refuses N = " + std::to_string(N) + " above truth_cap = " +
                        std::to_string(config.truth_cap));
  }
  fem::FemMatrices mats = fem::assemble(disc);
  linalg::GenEigBasis eig = linalg::gen_eig(mats.stiffness, mats.mass, config.truth_cap);

  DofVector f;
  switch (config.rhs.kind) {
    case RhsSpec::Kind::ConstantOne:
      f = fem::l2_project(disc, mats.mass, [](const fem::Point&) { return 1.0; }, solver);
      break;
    case RhsSpec::Kind::Eigenfunction:
      if (static_cast<std::size_t>(config.rhs.index) > N) {
        throw ConfigError("rhs_index", "exceeds the number of degrees of freedom " + std::to_string(N));
      }
      f = eig.eigenvectors.col(config.rhs.index - 1);
      break;
    case RhsSpec::Kind::Random: {
      SplitMix64 rng(config.rhs.seed);
      f.resize(static_cast<Eigen::Index>(N));
      for (Eigen::Index i = 0; i < f.size(); ++i) f[i] = rng.uniform(-1.0, 1.0);
      f /= m_norm(mats.mass, f);
      break;
    }
  }

  std::optional<SpectralInterval> interval;
  if (config.bounds.kind == BoundsSpec::Kind::Manual) {
    interval.emplace(config.bounds.lambda_L_sq, config.bounds.lambda_U_sq);
  } else {
    SpectralEstimateOptions est;
    est.safety = config.bounds.safety;
    est.solver = solver;
    interval = estimate_spectral_bounds(mats.mass, mats.stiffness, est);
  }

  Problem p{std::move(disc), std::move(mats.mass), std::move(mats.stiffness), std::move(f), 0.0, 0.0, *interval,
            TruthBasis{}};
  p.f_norm0 = m_norm(p.M, p.f);
  p.f_norm1 = std::sqrt(std::max(0.0, p.f.dot(p.A.multiply(p.f))));
  p.truth = make_truth_basis(eig, p.M, p.f);
  return p;
}

std::optional<LogFit> fit_log_slope(const std::vector<int>& r, const std::vector<double>& err, double lo,
                                    double hi) {
  if (r.size() != err.size()) throw ArgumentError("fit_log_slope: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!(err[i] >= lo && err[i] <= hi)) continue;
    const double x = r[i];
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return std::nullopt;
  const double denom = m * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  LogFit fit;
  fit.slope = (m * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / m;
  fit.points = m;
  return fit;
}

StudyResult run_convergence_study(const ExperimentConfig& config, const RunOptions& options) {
  const Problem problem = setup_problem(config);
  return run_convergence_study(config, problem, options);
}

StudyResult run_convergence_study(const ExperimentConfig& config, const Problem& problem,
                                  const RunOptions& options) {
  validate_config(config);
  StudyResult result;
  result.config = config;
  result.h = problem.disc.mesh.h;
  result.N = problem.disc.num_free();
  result.kappa = problem.interval.kappa();
  result.c_star = elliptic::decay_rate_C_star(result.kappa);
  result.f_norm0 = problem.f_norm0;
  result.f_norm1 = problem.f_norm1;

  std::vector<DofVector> truth_u;
  std::vector<double> truth_norm;
  for (double s : config.s_list) {
    truth_u.push_back(truth_solve(problem.truth, s));
    truth_norm.push_back(truth_dual_norm(problem.truth, s));
  }

  BuildOptions build;
  build.solver.rel_tol = config.solver_rel_tol;
  build.drop_tol = config.drop_tol;
  build.parallel = !options.serial;

  for (int r = config.r_min; r <= config.r_max; ++r) {
    const auto t0 = Clock::now();
    const ReducedSpace space = build_reduced_space(problem.M, problem.A, problem.f, r, problem.interval, build);
    const double offline_ms = elapsed_ms(t0);

    for (std::size_t k = 0; k < config.s_list.size(); ++k) {
      const double s = config.s_list[k];
      StudyRow row;
      row.r = r;
      row.s = s;
      row.h = result.h;
      row.N = result.N;
      row.r_effective = space.effective_dimension();
      row.kappa = result.kappa;
      row.c_star = result.c_star;
      row.t_offline_ms = offline_ms;

      // Online cost: everything s-dependent that does not touch N-sized data.
      double sink = 0.0;
      const auto t1 = Clock::now();
      for (int rep = 0; rep < kOnlineRepeats; ++rep) {
        sink += dual_rb_norm(space, s) + extrap_rb_norm(space, s);
        const Eigen::VectorXd c = extrap_rb_coefficients(space, s);
        if (c.size() > 0) sink += c[0];
      }
      row.t_online_us = 1e3 * elapsed_ms(t1) / kOnlineRepeats;
      if (std::isnan(sink)) throw AssemblyError("reduced query produced NaN");

      row.e_star = dual_rb_norm(space, s) - truth_norm[k];
      row.e = std::abs(extrap_rb_norm(space, s) - truth_norm[k]);
      const DofVector u_dual = dual_rb_solve(space, problem.M, space.stiffness_solver(), problem.f, s);
      const DofVector u_extrap = extrap_rb_solve(space, s);
      row.E_star = m_norm(problem.M, u_dual - truth_u[k]);
      row.E = m_norm(problem.M, u_extrap - truth_u[k]);
      result.rows.push_back(row);
    }
  }

  const std::map<std::string, double> predicted = {
      {"e_star", -2.0 * result.c_star}, {"e", -2.0 * result.c_star}, {"E_star", -result.c_star}, {"E", -result.c_star}};
  for (double s : config.s_list) {
    for (const char* metric : {"e_star", "e", "E_star", "E"}) {
      std::vector<int> rs;
      std::vector<double> errs;
      for (const StudyRow& row : result.rows) {
        if (row.s != s) continue;
        rs.push_back(row.r);
        const std::string m = metric;
        errs.push_back(m == "e_star" ? row.e_star : m == "e" ? row.e : m == "E_star" ? row.E_star : row.E);
      }
      result.fits.push_back(FittedRate{s, metric, fit_log_slope(rs, errs), predicted.at(metric)});
    }
  }
  return result;
}

SweepResult run_mesh_sweep(const ExperimentConfig& config, const std::vector<int>& n_list,
                           const RunOptions& options) {
  if (n_list.empty()) throw ConfigError("n_list", "must not be empty");
  SweepResult sweep;
  for (int n : n_list) {
    ExperimentConfig c = config;
    c.n = n;
    c.n_list.clear();
    sweep.studies.push_back(run_convergence_study(c, options));
  }
  return sweep;
}

std::vector<RateRow> emit_rate_table(const std::vector<double>& kappa_list) {
  std::vector<RateRow> rows;
  for (double kappa : kappa_list) {
    RateRow row;
    row.kappa = kappa;
    if (!(kappa > 1.0)) {
      row.note = "rejected: kappa must exceed 1";
    } else {
      row.rate = elliptic::decay_rate(kappa);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_study_csv(std::ostream& out, const std::vector<const StudyResult*>& studies, bool zero_timings) {
  out << "r,s,h,N,r_effective,e_star,e,E_star,E,kappa,c_star_predicted,t_offline_ms,t_online_us\n";
  for (const StudyResult* study : studies) {
    for (const StudyRow& row : study->rows) {
      out << row.r << ',' << fmt_real(row.s) << ',' << fmt_real(row.h) << ',' << row.N << ',' << row.r_effective
          << ',' << fmt_err(row.e_star) << ',' << fmt_err(row.e) << ',' << fmt_err(row.E_star) << ','
          << fmt_err(row.E) << ',' << fmt_real(row.kappa) << ',' << fmt_real(row.c_star) << ','
          << (zero_timings ? std::string("0") : fmt("%.6g", row.t_offline_ms)) << ','
          << (zero_timings ? std::string("0") : fmt("%.6g", row.t_online_us)) << '\n';
    }
  }
}

void write_timings_csv(std::ostream& out, const std::vector<const StudyResult*>& studies) {
  out << "N,r,s,t_offline_ms,t_online_us\n";
  for (const StudyResult* study : studies) {
    for (const StudyRow& row : study->rows) {
      out << row.N << ',' << row.r << ',' << fmt_real(row.s) << ',' << fmt("%.6g", row.t_offline_ms) << ','
          << fmt("%.6g", row.t_online_us) << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const std::vector<const StudyResult*>& studies) {
  out << "domain,n,order,h,N,kappa,c_star,f_norm0,f_norm1,s,metric,slope,points,predicted_slope,ratio\n";
  for (const StudyResult* study : studies) {
    for (const FittedRate& fr : study->fits) {
      const double slope = fr.fit ? fr.fit->slope : std::nan("");
      out << study->config.domain << ',' << study->config.n << ',' << study->config.order << ','
          << fmt_real(study->h) << ',' << study->N << ',' << fmt_real(study->kappa) << ','
          << fmt_real(study->c_star) << ',' << fmt_err(study->f_norm0) << ',' << fmt_err(study->f_norm1) << ','
          << fmt_real(fr.s) << ',' << fr.metric << ',' << fmt_real(slope) << ',' << (fr.fit ? fr.fit->points : 0)
          << ',' << fmt_real(fr.predicted_slope) << ',' << fmt_real(slope / fr.predicted_slope) << '\n';
    }
  }
}

void write_sweep_summary_csv(std::ostream& out, const SweepResult& sweep) {
  out << "n,h,N,kappa,c_star,s,E_star_rate,E_star_ratio,e_star_rate,e_star_ratio\n";
  for (const StudyResult& study : sweep.studies) {
    for (double s : study.config.s_list) {
      double E_rate = std::nan(""), e_rate = std::nan("");
      for (const FittedRate& fr : study.fits) {
        if (fr.s != s || !fr.fit) continue;
        if (fr.metric == "E_star") E_rate = -fr.fit->slope;
        if (fr.metric == "e_star") e_rate = -fr.fit->slope / 2.0;
      }
      out << study.config.n << ',' << fmt_real(study.h) << ',' << study.N << ',' << fmt_real(study.kappa) << ','
          << fmt_real(study.c_star) << ',' << fmt_real(s) << ',' << fmt_real(E_rate) << ','
          << fmt_real(E_rate / study.c_star) << ',' << fmt_real(e_rate) << ',' << fmt_real(e_rate / study.c_star)
          << '\n';
    }
  }
}

void write_rate_csv(std::ostream& out, const std::vector<RateRow>& rows) {
  out << "kappa,delta,mu,mu1,c_star,note\n";
  for (const RateRow& row : rows) {
    out << fmt_real(row.kappa);
    if (row.rate) {
      out << ',' << fmt_real(row.rate->delta) << ',' << fmt_real(row.rate->mu) << ',' << fmt_real(row.rate->mu1)
          << ',' << fmt_real(row.rate->c_star);
    } else {
      out << ",,,,";
    }
    out << ',' << row.note << '\n';
  }
}

void write_zpoints_csv(std::ostream& out, const elliptic::ZolotarevSet& set) {
  out << "j,z\n";
  for (std::size_t j = 0; j < set.points.size(); ++j) out << j + 1 << ',' << fmt_real(set.points[j]) << '\n';
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("--out", "cannot write " + path.string());
  return out;
}

}  // namespace

void write_study_outputs(const std::string& dir, const StudyResult& result, const RunOptions& options) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  const std::vector<const StudyResult*> one{&result};
  {
    auto out = open_output(root / result.config.output);
    write_study_csv(out, one, options.serial);
  }
  {
    auto out = open_output(root / "summary.csv");
    write_summary_csv(out, one);
  }
  if (options.serial) {
    auto out = open_output(root / "timings.csv");
    write_timings_csv(out, one);
  }
  auto out = open_output(root / "config.json");
  out << config_to_json(result.config).dump(2) << '\n';
}

void write_sweep_outputs(const std::string& dir, const SweepResult& sweep, const ExperimentConfig& config,
                         const RunOptions& options) {
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  std::vector<const StudyResult*> all;
  for (const StudyResult& s : sweep.studies) all.push_back(&s);
  {
    auto out = open_output(root / config.output);
    write_study_csv(out, all, options.serial);
  }
  {
    auto out = open_output(root / "summary.csv");
    write_summary_csv(out, all);
  }
  {
    auto out = open_output(root / "sweep_summary.csv");
    write_sweep_summary_csv(out, sweep);
  }
  if (options.serial) {
    auto out = open_output(root / "timings.csv");
    write_timings_csv(out, all);
  }
  auto out = open_output(root / "config.json");
  out << config_to_json(config).dump(2) << '\n';
}

}  // namespace fracrb

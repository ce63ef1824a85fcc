#include "fracrb/interpolation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fracrb/errors.hpp"
#include "fracrb/truth.hpp"

namespace fracrb {

double interpolation_constant(double s) {
  require_open_unit_interval(s, "interpolation_constant");
  return std::sqrt(2.0 * std::sin(std::numbers::pi * s) / std::numbers::pi);
}

PrimalCouple::PrimalCouple(SparseSymMatrix M, SparseSymMatrix A, linalg::SolverOptions options)
    : M_(std::move(M)), A_(std::move(A)), options_(options) {
  if (M_.size() != A_.size()) throw ArgumentError("PrimalCouple: M and A differ in size");
}

DofVector PrimalCouple::minimizer(double t, const DofVector& f) const {
  return linalg::shifted_solve(M_, A_, t, f, options_);
}

DualCouple::DualCouple(const SparseSymMatrix& M, const SparseSymMatrix& A) : g1_(M.to_dense()) {
  if (M.size() != A.size()) throw ArgumentError("DualCouple: M and A differ in size");
  const Eigen::LLT<Eigen::MatrixXd> llt(A.to_dense());
  if (llt.info() != Eigen::Success) throw DefinitenessError("DualCouple: A is not positive definite");
  g0_ = g1_ * llt.solve(g1_);
  g0_ = 0.5 * (g0_ + g0_.transpose()).eval();
}

DofVector DualCouple::minimizer(double t, const DofVector& f) const {
  if (!(t >= 0.0)) throw DomainError("DualCouple::minimizer: t must be >= 0");
  const Eigen::MatrixXd system = g0_ + t * t * g1_;
  return system.ldlt().solve(g0_ * f);
}

linalg::GenEigBasis DualCouple::eigenpairs() const { return linalg::gen_eig_dense(g1_, g0_); }

double k_functional_value(const InterpolationCouple& couple, const DofVector& f, double t) {
  if (!(t > 0.0)) throw DomainError("k_functional_value: t must be positive");
  const double norm_sq = f.dot(couple.gram0(f));
  const double value = t * t * couple.gram1(f).dot(couple.minimizer(t, f));
  if (value < -1e-12 * norm_sq) {
    throw ConvergenceError("k_functional_value: negative K-functional " + std::to_string(value), value);
  }
  return std::max(0.0, value);
}

double k_functional_value(const SparseSymMatrix& M, const SparseSymMatrix& A, const DofVector& f, double t,
                          const linalg::SolverOptions& options) {
  return k_functional_value(PrimalCouple(M, A, options), f, t);
}

KNormResult k_norm_by_quadrature(const InterpolationCouple& couple, const DofVector& f, double s,
                                 const SpectralInterval& interval, const KQuadratureOptions& options) {
  const double cs = interpolation_constant(s);
  KNormResult result;
  const double norm_sq = f.dot(couple.gram0(f));
  if (norm_sq == 0.0) return result;

  // Lower bound of the integral from the smallest eigenvalue, and the two tail
  // bounds K^2 <= t^2 lambda_U^2 ||f||^2 and K^2 <= ||f||^2.
  const double integral_lower =
      norm_sq * std::pow(interval.lambda_L_sq(), s) * std::numbers::pi / (2.0 * std::sin(std::numbers::pi * s));
  const double tail_budget = options.rel_tol / 8.0 * integral_lower;
  const double two_minus = 2.0 - 2.0 * s;
  result.t_min = std::pow(tail_budget * two_minus / (interval.lambda_U_sq() * norm_sq), 1.0 / two_minus);
  result.t_max = std::pow(norm_sq / (2.0 * s * tail_budget), 1.0 / (2.0 * s));
  const double y_min = std::log(result.t_min);
  const double y_max = std::log(result.t_max);

  auto integrand = [&](double y) {
    ++result.evaluations;
    const double t = std::exp(y);
    return std::exp(-2.0 * s * y) * k_functional_value(couple, f, t);
  };

  int panels = std::max(2, options.initial_panels);
  double step = (y_max - y_min) / panels;
  double sum = 0.5 * (integrand(y_min) + integrand(y_max));
  for (int i = 1; i < panels; ++i) sum += integrand(y_min + i * step);
  double estimate = step * sum;

  double difference = std::abs(estimate);
  bool converged = false;
  for (int level = 0; level < options.max_halvings; ++level) {
    double midpoints = 0.0;
    for (int i = 0; i < panels; ++i) midpoints += integrand(y_min + (i + 0.5) * step);
    sum += midpoints;
    panels *= 2;
    step *= 0.5;
    const double refined = step * sum;
    difference = std::abs(refined - estimate);
    estimate = refined;
    if (level >= 1 && difference <= options.rel_tol / 4.0 * std::abs(estimate)) {
      converged = true;
      break;
    }
  }

  result.integral = estimate;
  result.value = cs * std::sqrt(estimate);
  // Tails contribute at most 2 * tail_budget to the integral; sqrt halves relative errors.
  result.estimated_rel_error = 0.5 * (difference + 2.0 * tail_budget) / estimate;
  result.tolerance_met = converged && result.estimated_rel_error <= options.rel_tol;
  return result;
}

KNormResult k_norm_by_quadrature(const SparseSymMatrix& M, const SparseSymMatrix& A, const DofVector& f,
                                 double s, double rel_tol) {
  const SpectralInterval interval = estimate_spectral_bounds(M, A);
  KQuadratureOptions options;
  options.rel_tol = rel_tol;
  return k_norm_by_quadrature(PrimalCouple(M, A), f, s, interval, options);
}

}  // namespace fracrb

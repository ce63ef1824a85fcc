#include "fracrb/spectral.hpp"

#include <cmath>
#include <string>

#include "fracrb/errors.hpp"
#include "fracrb/random.hpp"

namespace fracrb {

SpectralInterval::SpectralInterval(double lambda_L_sq, double lambda_U_sq)
    : lower_(lambda_L_sq), upper_(lambda_U_sq) {
  if (!(lambda_L_sq > 0.0) || !std::isfinite(lambda_U_sq)) {
    throw DomainError("spectral interval requires a positive finite lower bound");
  }
  if (!(lambda_U_sq > lambda_L_sq)) {
    throw DomainError("spectral interval requires lambda_U^2 > lambda_L^2");
  }
}

namespace {

// Iterates z <- apply(z) in the norm induced by `weight`, returning the Rayleigh
// quotient z^T A z / z^T M z at convergence.
template <class Apply>
double rayleigh_iteration(const SparseSymMatrix& M, const SparseSymMatrix& A, Apply apply,
                          const SpectralEstimateOptions& options, const char* label) {
  const auto n = static_cast<Eigen::Index>(M.size());
  SplitMix64 rng(0x5eed5eed5eedULL);
  DofVector z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.uniform(-1.0, 1.0);

  double previous = 0.0;
  double rho = 0.0;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double mnorm = std::sqrt(z.dot(M.multiply(z)));
    z /= mnorm;
    rho = z.dot(A.multiply(z));
    if (it > 0 && std::abs(rho - previous) <= options.rel_tol * std::abs(rho)) return rho;
    previous = rho;
    z = apply(z);
  }
  throw ConvergenceError(std::string(label) + " did not converge within " +
                             std::to_string(options.max_iterations) + " iterations",
                         std::abs(rho - previous) / std::abs(rho));
}

}  // namespace

SpectralInterval estimate_spectral_bounds(const SparseSymMatrix& M, const SparseSymMatrix& A,
                                          const SpectralEstimateOptions& options) {
  if (M.size() != A.size() || M.size() == 0) throw ArgumentError("estimate_spectral_bounds: bad sizes");
  if (!(options.safety >= 1.0)) throw DomainError("estimate_spectral_bounds: safety must be >= 1");

  const linalg::SpdSolver mass_solver(M, options.solver);
  const linalg::SpdSolver stiffness_solver(A, options.solver);

  const double upper = rayleigh_iteration(
      M, A, [&](const DofVector& z) { return mass_solver.solve(A.multiply(z)); }, options,
      "power iteration");
  const double lower = rayleigh_iteration(
      M, A, [&](const DofVector& z) { return stiffness_solver.solve(M.multiply(z)); }, options,
      "inverse iteration");
  return SpectralInterval(lower / options.safety, upper * options.safety);
}

}  // namespace fracrb

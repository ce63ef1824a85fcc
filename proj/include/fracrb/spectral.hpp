#pragma once

#include "fracrb/linalg.hpp"
#include "fracrb/sparse_sym_matrix.hpp"

namespace fracrb {

/// Interval [lambda_L^2, lambda_U^2] enclosing the spectrum of the pencil (A, M).
class SpectralInterval {
 public:
  /// Requires 0 < lambda_L_sq < lambda_U_sq.
  SpectralInterval(double lambda_L_sq, double lambda_U_sq);

  double lambda_L_sq() const noexcept { return lower_; }
  double lambda_U_sq() const noexcept { return upper_; }
  double kappa() const noexcept { return upper_ / lower_; }
  double delta() const noexcept { return lower_ / upper_; }
  bool contains(double value) const noexcept { return value >= lower_ && value <= upper_; }

 private:
  double lower_;
  double upper_;
};

struct SpectralEstimateOptions {
  double safety = 1.01;
  double rel_tol = 1e-6;
  int max_iterations = 5000;
  linalg::SolverOptions solver{};
};

/**
 * Extremal generalized eigenvalues of (A, M) by power iteration
 * (z <- M^{-1} A z) and inverse iteration (z <- A^{-1} M z).  The upper
 * estimate is multiplied by safety and the lower one divided by it.
 * Throws ConvergenceError after max_iterations.
 */
SpectralInterval estimate_spectral_bounds(const SparseSymMatrix& M, const SparseSymMatrix& A,
                                          const SpectralEstimateOptions& options = {});

}  // namespace fracrb

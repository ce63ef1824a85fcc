#pragma once

#include <memory>

#include <Eigen/Dense>

#include "fracrb/linalg.hpp"
#include "fracrb/spectral.hpp"
#include "fracrb/sparse_sym_matrix.hpp"

namespace fracrb {

/// C_s = sqrt(2 sin(pi s) / pi), relating the Hilbert and K interpolation norms.
double interpolation_constant(double s);

/**
 * Discrete interpolation couple (V_0, V_1) given by the Gram matrices G0 and
 * G1 of the two inner products on a common coefficient space.
 */
class InterpolationCouple {
 public:
  virtual ~InterpolationCouple() = default;

  virtual std::size_t size() const = 0;
  /// G0 x
  virtual DofVector gram0(const DofVector& x) const = 0;
  /// G1 x
  virtual DofVector gram1(const DofVector& x) const = 0;
  /// Minimizer v(t) of ||f - v||_0^2 + t^2 ||v||_1^2, i.e. (G0 + t^2 G1) v = G0 f.
  virtual DofVector minimizer(double t, const DofVector& f) const = 0;
};

/// (L2, H^1_0)-type couple: G0 = M, G1 = A.
class PrimalCouple final : public InterpolationCouple {
 public:
  PrimalCouple(SparseSymMatrix M, SparseSymMatrix A, linalg::SolverOptions options = {});

  std::size_t size() const override { return M_.size(); }
  DofVector gram0(const DofVector& x) const override { return M_.multiply(x); }
  DofVector gram1(const DofVector& x) const override { return A_.multiply(x); }
  DofVector minimizer(double t, const DofVector& f) const override;

 private:
  SparseSymMatrix M_;
  SparseSymMatrix A_;
  linalg::SolverOptions options_;
};

/**
 * Dual couple (V_{-1}, V_0) for functionals identified with coefficient
 * vectors through F = M f: G0 = M A^{-1} M (the -1 inner product) and G1 = M.
 * Dense; desk-scale only.
 */
class DualCouple final : public InterpolationCouple {
 public:
  DualCouple(const SparseSymMatrix& M, const SparseSymMatrix& A);

  std::size_t size() const override { return static_cast<std::size_t>(g1_.rows()); }
  DofVector gram0(const DofVector& x) const override { return g0_ * x; }
  DofVector gram1(const DofVector& x) const override { return g1_ * x; }
  DofVector minimizer(double t, const DofVector& f) const override;

  const Eigen::MatrixXd& gram_minus_one() const noexcept { return g0_; }
  const Eigen::MatrixXd& gram_zero() const noexcept { return g1_; }

  /// Eigenpairs of <Psi, f>_0 = lambda^2 <Psi, F>_{-1}, Psi orthonormal in the -1 inner product.
  linalg::GenEigBasis eigenpairs() const;

 private:
  Eigen::MatrixXd g0_;
  Eigen::MatrixXd g1_;
};

/// K^2(t; f) = ||f||_0^2 - <f, v(t)>_0, evaluated as t^2 <f, v(t)>_1 (equal by the
/// optimality condition, and free of cancellation for small t).  Throws if it comes
/// out negative beyond -1e-12 ||f||_0^2; smaller round-off is clamped to zero.
double k_functional_value(const InterpolationCouple& couple, const DofVector& f, double t);
double k_functional_value(const SparseSymMatrix& M, const SparseSymMatrix& A, const DofVector& f, double t,
                          const linalg::SolverOptions& options = {});

struct KNormResult {
  double value = 0.0;               // C_s * sqrt(integral)
  double integral = 0.0;            // int_0^inf t^{-2s-1} K^2(t; f) dt
  double estimated_rel_error = 0.0; // quadrature refinement difference plus tail bound, on value
  bool tolerance_met = true;        // false: result carries an inflated tolerance
  int evaluations = 0;
  double t_min = 0.0;
  double t_max = 0.0;
};

struct KQuadratureOptions {
  double rel_tol = 1e-8;
  /// Initial number of trapezoid panels in y = ln t before halving.
  int initial_panels = 16;
  int max_halvings = 10;
};

/**
 * K-interpolation norm by quadrature of t^{-2s-1} K^2(t; f) after t = e^y.
 * Truncation points come from `interval` (enclosing the couple's spectrum) so
 * that each tail is below rel_tol / 8 of the integral; the trapezoid step is
 * halved until successive values agree to rel_tol / 4.
 */
KNormResult k_norm_by_quadrature(const InterpolationCouple& couple, const DofVector& f, double s,
                                 const SpectralInterval& interval, const KQuadratureOptions& options = {});

/// Primal couple with bounds from estimate_spectral_bounds.
KNormResult k_norm_by_quadrature(const SparseSymMatrix& M, const SparseSymMatrix& A, const DofVector& f,
                                 double s, double rel_tol);

}  // namespace fracrb

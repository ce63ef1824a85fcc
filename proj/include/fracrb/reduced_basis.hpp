#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "fracrb/linalg.hpp"
#include "fracrb/spectral.hpp"
#include "fracrb/sparse_sym_matrix.hpp"

namespace fracrb {

struct BuildOptions {
  linalg::SolverOptions solver{};
  double drop_tol = linalg::kDefaultDropTol;
  /// Run the r shifted snapshot solves concurrently.
  bool parallel = false;
};

/**
 * Zolotarev reduced space V_r = span{v(t_0), ..., v(t_r)} with t_0 = 0 and
 * t_j^2 the transformed Zolotarev points on [lambda_U^{-2}, lambda_L^{-2}].
 *
 * Holds the M-orthonormal basis, the projected stiffness A_r = V^T A V and
 * the projected dual matrix A_{*,r} = V^T M A^{-1} M V, together with their
 * eigendecompositions so that every s-query is a cheap online operation.
 * Immutable after construction; safe for concurrent queries.
 */
class ReducedSpace {
 public:
  int r() const noexcept { return r_; }
  const SpectralInterval& interval() const noexcept { return interval_; }
  /// t_0 = 0 < t_1 < ... < t_r, including snapshots that were later dropped.
  const std::vector<double>& snapshot_parameters() const noexcept { return t_; }
  const std::vector<std::size_t>& dropped_snapshots() const noexcept { return dropped_; }

  const Eigen::MatrixXd& basis() const noexcept { return V_; }
  std::size_t effective_dimension() const noexcept { return static_cast<std::size_t>(V_.cols()); }
  /// ||f||_0; the reduced coordinates of f are beta e_1.
  double beta() const noexcept { return beta_; }

  const Eigen::MatrixXd& projected_stiffness() const noexcept { return A_r_; }
  const Eigen::MatrixXd& projected_dual() const noexcept { return A_star_r_; }
  const linalg::DenseSymEig& stiffness_eig() const noexcept { return A_r_eig_; }
  const linalg::DenseSymEig& dual_eig() const noexcept { return A_star_r_eig_; }

  /// Factorization of A used while assembling A_{*,r}; reusable for dual solves.
  const linalg::SpdSolver& stiffness_solver() const noexcept { return *stiffness_solver_; }

  /// V^T M x: reduced coordinates of an element of V_r.
  Eigen::VectorXd reduced_coordinates(const SparseSymMatrix& M, const DofVector& x) const;

 private:
  friend ReducedSpace build_reduced_space(const SparseSymMatrix&, const SparseSymMatrix&, const DofVector&,
                                          int, const SpectralInterval&, const BuildOptions&);
  explicit ReducedSpace(const SpectralInterval& interval) : interval_(interval) {}

  int r_ = 0;
  SpectralInterval interval_;
  std::vector<double> t_;
  std::vector<std::size_t> dropped_;
  Eigen::MatrixXd V_;
  double beta_ = 0.0;
  Eigen::MatrixXd A_r_;
  Eigen::MatrixXd A_star_r_;
  linalg::DenseSymEig A_r_eig_;
  linalg::DenseSymEig A_star_r_eig_;
  std::shared_ptr<const linalg::SpdSolver> stiffness_solver_;
};

/// Snapshot parameters t_0 = 0, t_j = sqrt(Zhat_j), j = 1..r.  r = 0 gives span{f}.
std::vector<double> zolotarev_snapshot_parameters(int r, const SpectralInterval& interval);

ReducedSpace build_reduced_space(const SparseSymMatrix& M, const SparseSymMatrix& A, const DofVector& f,
                                 int r, const SpectralInterval& interval, const BuildOptions& options = {});

/// ||f||_{H_{*,r}^{-s}} = ||beta e_1||_{A_{*,r}^s}.
double dual_rb_norm(const ReducedSpace& space, double s);

/// u_r^*(s) = A^{-1} M V A_{*,r}^{s-1} V^T M f.
DofVector dual_rb_solve(const ReducedSpace& space, const SparseSymMatrix& M, const linalg::SpdSolver& stiffness,
                        const DofVector& f, double s);
DofVector dual_rb_solve(const ReducedSpace& space, const SparseSymMatrix& M, const SparseSymMatrix& A,
                        const DofVector& f, double s);

/// ||f||_{H_r^{-s}} = sqrt(f_r^T A_r^{-s} f_r).
double extrap_rb_norm(const ReducedSpace& space, double s);

/// u_r(s) = V A_r^{-s} V^T M f.  No solve with A.
DofVector extrap_rb_solve(const ReducedSpace& space, const SparseSymMatrix& M, const DofVector& f, double s);
/// Coordinates A_r^{-s} (beta e_1) of u_r(s) in the basis V; the s-dependent online work, O(r^2).
Eigen::VectorXd extrap_rb_coefficients(const ReducedSpace& space, double s);
/// Same for the right-hand side the space was built from (f_r = beta e_1); O(r^2 + N r).
DofVector extrap_rb_solve(const ReducedSpace& space, double s);

namespace detail {
// Endpoint-admitting variants (s in [0, 1]) for tests.
DofVector dual_rb_solve_unchecked(const ReducedSpace& space, const SparseSymMatrix& M,
                                  const linalg::SpdSolver& stiffness, const DofVector& f, double s);
DofVector extrap_rb_solve_unchecked(const ReducedSpace& space, const SparseSymMatrix& M, const DofVector& f,
                                    double s);
}  // namespace detail

}  // namespace fracrb

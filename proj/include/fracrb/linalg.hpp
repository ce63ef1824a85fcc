#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "fracrb/sparse_sym_matrix.hpp"

namespace fracrb::linalg {

struct SolverOptions {
  enum class Method { Auto, ConjugateGradient, Direct };
  Method method = Method::Auto;
  /// Accept x once ||Bx - b||_2 <= rel_tol ||b||_2, or once the normwise backward
  /// error ||Bx - b||_inf / (||B||_inf ||x||_inf + ||b||_inf) <= rel_tol.  The second
  /// test matters when the first sits below the rounding floor (cond(B) eps > rel_tol).
  double rel_tol = 1e-12;
  /// Auto picks the sparse Cholesky path up to this size, CG above.
  std::size_t direct_max_size = 20000;
};

/**
 * Solver bound to one SPD matrix.  The factorization (direct path) is computed
 * once and shared between copies, so repeated solves with the same matrix are
 * cheap.  solve() is const and may be called concurrently.
 */
class SpdSolver {
 public:
  explicit SpdSolver(const SparseSymMatrix& B, SolverOptions options = {});

  DofVector solve(const DofVector& b) const;

  std::size_t size() const noexcept { return matrix_.size(); }
  bool uses_direct() const noexcept { return static_cast<bool>(factor_); }
  const SparseSymMatrix& matrix() const noexcept { return matrix_; }

 private:
  struct Factor;
  SparseSymMatrix matrix_;
  SolverOptions options_;
  double norm_ = 0.0;  // ||B||_inf
  std::shared_ptr<const Factor> factor_;
};

/// Jacobi-preconditioned conjugate gradients with the stopping rule of SolverOptions::rel_tol.
/// max_iter = 0 means 10 N.
DofVector conjugate_gradient(const SparseSymMatrix& B, const DofVector& b, double rel_tol,
                             std::size_t max_iter = 0);

DofVector sparse_solve_spd(const SparseSymMatrix& B, const DofVector& b,
                           const SolverOptions& options = {});

/// Snapshot v(t) solving (M + t^2 A) v = M f.  t = 0 returns f unchanged.
DofVector shifted_solve(const SparseSymMatrix& M, const SparseSymMatrix& A, double t,
                        const DofVector& f, const SolverOptions& options = {});

struct DenseSymEig {
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns
};

/// Cyclic Jacobi rotations until off-diagonal Frobenius mass <= 1e-14 ||B||_F.
DenseSymEig dense_sym_eig(const Eigen::MatrixXd& B);

/// Generalized eigenpairs A phi = lambda^2 M phi with Phi^T M Phi = I.
struct GenEigBasis {
  Eigen::VectorXd eigenvalues;   // lambda_k^2, ascending
  Eigen::MatrixXd eigenvectors;  // columns phi_k, M-orthonormal
};

inline constexpr std::size_t kDefaultTruthCap = 4000;

/// Dense generalized eigensolve; refuses problems larger than cap.
GenEigBasis gen_eig(const SparseSymMatrix& A, const SparseSymMatrix& M,
                    std::size_t cap = kDefaultTruthCap);
GenEigBasis gen_eig_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M,
                          std::size_t cap = kDefaultTruthCap);

/// Q Lambda^s Q^T for an SPD matrix.
Eigen::MatrixXd spd_fractional_power(const Eigen::MatrixXd& B, double s);
Eigen::MatrixXd spd_fractional_power(const DenseSymEig& eig, double s);

struct OrthonormalBasis {
  Eigen::MatrixXd basis;              // N x kept.size(), V^T M V = I
  std::vector<std::size_t> kept;      // input indices that produced a column
  std::vector<std::size_t> dropped;   // input indices found (numerically) dependent
};

inline constexpr double kDefaultDropTol = 1e-10;

/**
 * Chronological Gram-Schmidt in the M inner product with one full
 * reorthogonalization pass.  A vector whose M-norm after orthogonalization
 * falls below drop_tol times its original M-norm is dropped.
 */
OrthonormalBasis m_gram_schmidt(std::span<const DofVector> vectors, const SparseSymMatrix& M,
                                double drop_tol = kDefaultDropTol);

}  // namespace fracrb::linalg

#pragma once

#include "fracrb/linalg.hpp"
#include "fracrb/sparse_sym_matrix.hpp"

namespace fracrb {

/**
 * Discrete eigenfunction method: the generalized eigenbasis of (A, M) plus the
 * load coefficients c_k = <f, phi_k>_0.  Desk-scale only (dense O(N^3) setup).
 */
struct TruthBasis {
  linalg::GenEigBasis eig;
  Eigen::VectorXd coefficients;
};

TruthBasis make_truth_basis(const linalg::GenEigBasis& eig, const SparseSymMatrix& M, const DofVector& f);
TruthBasis make_truth_basis(const SparseSymMatrix& M, const SparseSymMatrix& A, const DofVector& f,
                            std::size_t cap = linalg::kDefaultTruthCap);

/// u(s) = sum_k lambda_k^{-2s} c_k phi_k, s in (0,1).
DofVector truth_solve(const TruthBasis& basis, double s);

/// ||f||_{H^{-s}} = sqrt(sum_k lambda_k^{-2s} c_k^2), s in (0,1).
double truth_dual_norm(const TruthBasis& basis, double s);

/// ||f||_{H^s} = sqrt(sum_k lambda_k^{2s} c_k^2), s in (0,1).
double truth_interp_norm(const TruthBasis& basis, double s);

namespace detail {
// Exponent checks relaxed to the closed interval [-1, 1]; for tests at the endpoints.
DofVector truth_solve_unchecked(const TruthBasis& basis, double s);
double truth_dual_norm_unchecked(const TruthBasis& basis, double s);
}  // namespace detail

/// Throws DomainError unless 0 < s < 1.
void require_open_unit_interval(double s, const char* who);

}  // namespace fracrb

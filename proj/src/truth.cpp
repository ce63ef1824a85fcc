#include "fracrb/truth.hpp"

#include <cmath>
#include <string>

#include "fracrb/errors.hpp"

namespace fracrb {

void require_open_unit_interval(double s, const char* who) {
  if (!(s > 0.0 && s < 1.0)) {
    throw DomainError(std::string(who) + ": fractional order must lie in (0, 1), got " + std::to_string(s));
  }
}

TruthBasis make_truth_basis(const linalg::GenEigBasis& eig, const SparseSymMatrix& M, const DofVector& f) {
  if (static_cast<std::size_t>(f.size()) != M.size() || eig.eigenvectors.rows() != f.size()) {
    throw ArgumentError("make_truth_basis: size mismatch");
  }
  return {eig, eig.eigenvectors.transpose() * M.multiply(f)};
}

TruthBasis make_truth_basis(const SparseSymMatrix& M, const SparseSymMatrix& A, const DofVector& f,
                            std::size_t cap) {
  return make_truth_basis(linalg::gen_eig(A, M, cap), M, f);
}

namespace detail {

DofVector truth_solve_unchecked(const TruthBasis& basis, double s) {
  const Eigen::VectorXd weights =
      basis.eig.eigenvalues.array().pow(-s).matrix().cwiseProduct(basis.coefficients);
  return basis.eig.eigenvectors * weights;
}

double truth_dual_norm_unchecked(const TruthBasis& basis, double s) {
  const Eigen::ArrayXd c2 = basis.coefficients.array().square();
  return std::sqrt((basis.eig.eigenvalues.array().pow(-s) * c2).sum());
}

}  // namespace detail

DofVector truth_solve(const TruthBasis& basis, double s) {
  require_open_unit_interval(s, "truth_solve");
  return detail::truth_solve_unchecked(basis, s);
}

double truth_dual_norm(const TruthBasis& basis, double s) {
  require_open_unit_interval(s, "truth_dual_norm");
  return detail::truth_dual_norm_unchecked(basis, s);
}

double truth_interp_norm(const TruthBasis& basis, double s) {
  require_open_unit_interval(s, "truth_interp_norm");
  return detail::truth_dual_norm_unchecked(basis, -s);
}

}  // namespace fracrb

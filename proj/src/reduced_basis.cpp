#include "fracrb/reduced_basis.hpp"

#include <cmath>
#include <future>
#include <string>

#include "fracrb/elliptic.hpp"
#include "fracrb/errors.hpp"
#include "fracrb/truth.hpp"

namespace fracrb {

namespace {

// x^T B^s x through a stored eigendecomposition of B.
double quadratic_power(const linalg::DenseSymEig& eig, const Eigen::VectorXd& x, double s) {
  const Eigen::VectorXd y = eig.eigenvectors.transpose() * x;
  return (y.array().square() * eig.eigenvalues.array().pow(s)).sum();
}

// B^s x through a stored eigendecomposition of B.
Eigen::VectorXd apply_power(const linalg::DenseSymEig& eig, const Eigen::VectorXd& x, double s) {
  const Eigen::VectorXd y = eig.eigenvectors.transpose() * x;
  return eig.eigenvectors * (eig.eigenvalues.array().pow(s) * y.array()).matrix();
}

Eigen::MatrixXd checked_symmetric(const Eigen::MatrixXd& B, const char* name) {
  const double scale = B.size() ? B.cwiseAbs().maxCoeff() : 0.0;
  const double asym = B.size() ? (B - B.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > 1e-12 * scale) {
    throw AssemblyError(std::string(name) + " is not symmetric (asymmetry " + std::to_string(asym) + ")");
  }
  return 0.5 * (B + B.transpose());
}

linalg::DenseSymEig checked_spd_eig(const Eigen::MatrixXd& B, const char* name) {
  linalg::DenseSymEig eig = linalg::dense_sym_eig(B);
  if (eig.eigenvalues.size() > 0 && !(eig.eigenvalues.minCoeff() > 0.0)) {
    throw AssemblyError(std::string(name) + " is not positive definite");
  }
  return eig;
}

void check_space_vector(const ReducedSpace& space, const DofVector& f) {
  if (f.size() != space.basis().rows()) throw ArgumentError("reduced basis: vector size mismatch");
}

}  // namespace

Eigen::VectorXd ReducedSpace::reduced_coordinates(const SparseSymMatrix& M, const DofVector& x) const {
  return V_.transpose() * M.multiply(x);
}

std::vector<double> zolotarev_snapshot_parameters(int r, const SpectralInterval& interval) {
  if (r < 0) throw DomainError("zolotarev_snapshot_parameters: r must be nonnegative");
  std::vector<double> t{0.0};
  if (r == 0) return t;
  const auto points =
      elliptic::transformed_zolotarev(1.0 / interval.lambda_U_sq(), 1.0 / interval.lambda_L_sq(), r);
  for (double z : points.points) t.push_back(std::sqrt(z));
  return t;
}

ReducedSpace build_reduced_space(const SparseSymMatrix& M, const SparseSymMatrix& A, const DofVector& f, int r,
                                 const SpectralInterval& interval, const BuildOptions& options) {
  if (M.size() != A.size() || static_cast<std::size_t>(f.size()) != M.size()) {
    throw ArgumentError("build_reduced_space: size mismatch");
  }
  ReducedSpace space(interval);
  space.r_ = r;
  space.t_ = zolotarev_snapshot_parameters(r, interval);
  space.stiffness_solver_ = std::make_shared<const linalg::SpdSolver>(A, options.solver);

  const auto n = static_cast<Eigen::Index>(M.size());
  space.beta_ = std::sqrt(std::max(0.0, f.dot(M.multiply(f))));
  if (space.beta_ == 0.0) {
    // Zero data: every norm and solve is exactly zero.
    space.V_ = Eigen::MatrixXd::Zero(n, 0);
    for (std::size_t j = 0; j < space.t_.size(); ++j) space.dropped_.push_back(j);
    return space;
  }

  std::vector<DofVector> snapshots(space.t_.size());
  snapshots[0] = f;
  if (options.parallel) {
    std::vector<std::future<DofVector>> pending;
    for (std::size_t j = 1; j < space.t_.size(); ++j) {
      pending.push_back(std::async(std::launch::async, [&, j] {
        return linalg::shifted_solve(M, A, space.t_[j], f, options.solver);
      }));
    }
    for (std::size_t j = 1; j < space.t_.size(); ++j) snapshots[j] = pending[j - 1].get();
  } else {
    for (std::size_t j = 1; j < space.t_.size(); ++j) {
      snapshots[j] = linalg::shifted_solve(M, A, space.t_[j], f, options.solver);
    }
  }

  auto orthonormal = linalg::m_gram_schmidt(snapshots, M, options.drop_tol);
  space.dropped_ = std::move(orthonormal.dropped);
  space.V_ = std::move(orthonormal.basis);

  const Eigen::Index m = space.V_.cols();
  Eigen::MatrixXd MV(n, m);
  Eigen::MatrixXd AV(n, m);
  Eigen::MatrixXd AinvMV(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    const DofVector col = space.V_.col(j);
    MV.col(j) = M.multiply(col);
    AV.col(j) = A.multiply(col);
    AinvMV.col(j) = space.stiffness_solver_->solve(MV.col(j));
  }
  space.A_r_ = checked_symmetric(space.V_.transpose() * AV, "projected stiffness A_r");
  space.A_star_r_ = checked_symmetric(MV.transpose() * AinvMV, "projected dual matrix A_*r");
  space.A_r_eig_ = checked_spd_eig(space.A_r_, "projected stiffness A_r");
  space.A_star_r_eig_ = checked_spd_eig(space.A_star_r_, "projected dual matrix A_*r");
  return space;
}

double dual_rb_norm(const ReducedSpace& space, double s) {
  require_open_unit_interval(s, "dual_rb_norm");
  if (space.effective_dimension() == 0) return 0.0;
  Eigen::VectorXd fr = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.effective_dimension()));
  fr[0] = space.beta();
  return std::sqrt(quadratic_power(space.dual_eig(), fr, s));
}

double extrap_rb_norm(const ReducedSpace& space, double s) {
  require_open_unit_interval(s, "extrap_rb_norm");
  if (space.effective_dimension() == 0) return 0.0;
  Eigen::VectorXd fr = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.effective_dimension()));
  fr[0] = space.beta();
  return std::sqrt(quadratic_power(space.stiffness_eig(), fr, -s));
}

namespace detail {

DofVector dual_rb_solve_unchecked(const ReducedSpace& space, const SparseSymMatrix& M,
                                  const linalg::SpdSolver& stiffness, const DofVector& f, double s) {
  check_space_vector(space, f);
  if (space.effective_dimension() == 0) return DofVector::Zero(f.size());
  const Eigen::VectorXd fr = space.reduced_coordinates(M, f);
  const DofVector lifted = space.basis() * apply_power(space.dual_eig(), fr, s - 1.0);
  return stiffness.solve(M.multiply(lifted));
}

DofVector extrap_rb_solve_unchecked(const ReducedSpace& space, const SparseSymMatrix& M, const DofVector& f,
                                    double s) {
  check_space_vector(space, f);
  if (space.effective_dimension() == 0) return DofVector::Zero(f.size());
  const Eigen::VectorXd fr = space.reduced_coordinates(M, f);
  return space.basis() * apply_power(space.stiffness_eig(), fr, -s);
}

}  // namespace detail

DofVector dual_rb_solve(const ReducedSpace& space, const SparseSymMatrix& M, const linalg::SpdSolver& stiffness,
                        const DofVector& f, double s) {
  require_open_unit_interval(s, "dual_rb_solve");
  return detail::dual_rb_solve_unchecked(space, M, stiffness, f, s);
}

DofVector dual_rb_solve(const ReducedSpace& space, const SparseSymMatrix& M, const SparseSymMatrix& A,
                        const DofVector& f, double s) {
  require_open_unit_interval(s, "dual_rb_solve");
  return detail::dual_rb_solve_unchecked(space, M, linalg::SpdSolver(A), f, s);
}

DofVector extrap_rb_solve(const ReducedSpace& space, const SparseSymMatrix& M, const DofVector& f, double s) {
  require_open_unit_interval(s, "extrap_rb_solve");
  return detail::extrap_rb_solve_unchecked(space, M, f, s);
}

Eigen::VectorXd extrap_rb_coefficients(const ReducedSpace& space, double s) {
  require_open_unit_interval(s, "extrap_rb_coefficients");
  if (space.effective_dimension() == 0) return Eigen::VectorXd();
  const linalg::DenseSymEig& eig = space.stiffness_eig();
  // Q^T (beta e_1) is beta times the first row of Q.
  const Eigen::VectorXd y = space.beta() * eig.eigenvectors.row(0).transpose();
  return eig.eigenvectors * (eig.eigenvalues.array().pow(-s) * y.array()).matrix();
}

DofVector extrap_rb_solve(const ReducedSpace& space, double s) {
  if (space.effective_dimension() == 0) {
    require_open_unit_interval(s, "extrap_rb_solve");
    return DofVector::Zero(space.basis().rows());
  }
  return space.basis() * extrap_rb_coefficients(space, s);
}

}  // namespace fracrb

#include "fracrb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>

#include "fracrb/errors.hpp"

namespace fracrb::linalg {

namespace {

double norm_inf(const SparseSymMatrix& B) {
  const Eigen::SparseMatrix<double> full = B.to_eigen();
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(full.rows());
  for (Eigen::Index k = 0; k < full.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(full, k); it; ++it) row_sums[it.row()] += std::abs(it.value());
  }
  return full.rows() ? row_sums.maxCoeff() : 0.0;
}

// Normwise backward error ||b - Bx|| / (||B|| ||x|| + ||b||) in the infinity norm.
bool backward_error_ok(const DofVector& r, const DofVector& x, const DofVector& b, double B_norm, double tol,
                       double* error = nullptr) {
  const double denom = B_norm * x.lpNorm<Eigen::Infinity>() + b.lpNorm<Eigen::Infinity>();
  const double eta = denom > 0.0 ? r.lpNorm<Eigen::Infinity>() / denom : 0.0;
  if (error) *error = eta;
  return eta <= tol;
}

}  // namespace

struct SpdSolver::Factor {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> llt;
};

SpdSolver::SpdSolver(const SparseSymMatrix& B, SolverOptions options)
    : matrix_(B), options_(options), norm_(norm_inf(B)) {
  const bool direct =
      options_.method == SolverOptions::Method::Direct ||
      (options_.method == SolverOptions::Method::Auto && B.size() <= options_.direct_max_size);
  if (!direct || B.size() == 0) return;
  auto factor = std::make_shared<Factor>();
  factor->llt.compute(B.to_eigen());
  if (factor->llt.info() != Eigen::Success) {
    throw DefinitenessError("sparse Cholesky failed: matrix is not positive definite");
  }
  factor_ = std::move(factor);
}

DofVector SpdSolver::solve(const DofVector& b) const {
  if (static_cast<std::size_t>(b.size()) != matrix_.size()) {
    throw ArgumentError("SpdSolver::solve: right-hand side size mismatch");
  }
  if (!factor_) return conjugate_gradient(matrix_, b, options_.rel_tol);

  DofVector x = factor_->llt.solve(b);
  if (b.norm() == 0.0) return x;
  DofVector r = b - matrix_.multiply(x);
  // A few steps of iterative refinement recover the last digits on ill-conditioned shifts.
  double eta = 0.0;
  for (int step = 0; step < 3 && !backward_error_ok(r, x, b, norm_, options_.rel_tol); ++step) {
    x += factor_->llt.solve(r);
    r = b - matrix_.multiply(x);
  }
  if (!backward_error_ok(r, x, b, norm_, options_.rel_tol, &eta)) {
    throw ConvergenceError("direct solve missed residual target, backward error " + std::to_string(eta), eta);
  }
  return x;
}

DofVector conjugate_gradient(const SparseSymMatrix& B, const DofVector& b, double rel_tol,
                             std::size_t max_iter) {
  const auto n = static_cast<Eigen::Index>(B.size());
  if (b.size() != n) throw ArgumentError("conjugate_gradient: size mismatch");
  if (max_iter == 0) max_iter = 10 * B.size();

  DofVector x = DofVector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return x;

  const double B_norm = norm_inf(B);
  const DofVector diag = B.diagonal();
  DofVector inv_diag(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(diag[i] > 0.0)) throw DefinitenessError("conjugate_gradient: nonpositive diagonal entry");
    inv_diag[i] = 1.0 / diag[i];
  }

  DofVector r = b;
  DofVector z = inv_diag.cwiseProduct(r);
  DofVector p = z;
  double rz = r.dot(z);
  double rnorm = bnorm;
  for (std::size_t it = 0; it < max_iter; ++it) {
    const DofVector q = B.multiply(p);
    const double pq = p.dot(q);
    if (!(pq > 0.0)) throw DefinitenessError("conjugate_gradient: matrix is not positive definite");
    const double alpha = rz / pq;
    x += alpha * p;
    r -= alpha * q;
    rnorm = r.norm();
    if (rnorm <= rel_tol * bnorm || backward_error_ok(r, x, b, B_norm, rel_tol)) {
      // Confirm against the true residual; recurrence drift can fake convergence.
      r = b - B.multiply(x);
      rnorm = r.norm();
      if (rnorm <= rel_tol * bnorm || backward_error_ok(r, x, b, B_norm, rel_tol)) return x;
    }
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  throw ConvergenceError("conjugate_gradient: iteration cap reached, relative residual " +
                             std::to_string(rnorm / bnorm),
                         rnorm / bnorm);
}

DofVector sparse_solve_spd(const SparseSymMatrix& B, const DofVector& b,
                           const SolverOptions& options) {
  return SpdSolver(B, options).solve(b);
}

DofVector shifted_solve(const SparseSymMatrix& M, const SparseSymMatrix& A, double t,
                        const DofVector& f, const SolverOptions& options) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("shifted_solve: t must be >= 0");
  if (t == 0.0) return f;
  const SparseSymMatrix shifted = M.linear_combination(1.0, A, t * t);
  return sparse_solve_spd(shifted, M.multiply(f), options);
}

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

void check_symmetric(const Eigen::MatrixXd& B, const char* who) {
  if (B.rows() != B.cols()) throw ArgumentError(std::string(who) + ": matrix is not square");
  const double scale = std::max(1.0, B.cwiseAbs().maxCoeff());
  if ((B - B.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw ArgumentError(std::string(who) + ": matrix is not symmetric");
  }
}

// Largest-magnitude component of each column made positive, for reproducible output.
void fix_signs(Eigen::MatrixXd& vectors) {
  for (Eigen::Index j = 0; j < vectors.cols(); ++j) {
    Eigen::Index imax = 0;
    vectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (vectors(imax, j) < 0.0) vectors.col(j) *= -1.0;
  }
}

}  // namespace

DenseSymEig dense_sym_eig(const Eigen::MatrixXd& B) {
  check_symmetric(B, "dense_sym_eig");
  const Eigen::Index m = B.rows();
  Eigen::MatrixXd a = 0.5 * (B + B.transpose());
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(m, m);
  const double target = 1e-14 * a.norm();

  constexpr int kMaxSweeps = 100;
  int sweep = 0;
  for (; sweep < kMaxSweeps && off_diagonal_norm(a) > target; ++sweep) {
    for (Eigen::Index p = 0; p < m - 1; ++p) {
      for (Eigen::Index r = p + 1; r < m; ++r) {
        const double apr = a(p, r);
        if (apr == 0.0) continue;
        // Symmetric Schur decomposition of the 2x2 block (Golub & Van Loan 8.5.2).
        const double tau = (a(r, r) - a(p, p)) / (2.0 * apr);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (Eigen::Index k = 0; k < m; ++k) {
          const double akp = a(k, p);
          const double akr = a(k, r);
          a(k, p) = c * akp - s * akr;
          a(k, r) = s * akp + c * akr;
        }
        for (Eigen::Index k = 0; k < m; ++k) {
          const double apk = a(p, k);
          const double ark = a(r, k);
          a(p, k) = c * apk - s * ark;
          a(r, k) = s * apk + c * ark;
        }
        for (Eigen::Index k = 0; k < m; ++k) {
          const double qkp = q(k, p);
          const double qkr = q(k, r);
          q(k, p) = c * qkp - s * qkr;
          q(k, r) = s * qkp + c * qkr;
        }
      }
    }
  }
  if (sweep == kMaxSweeps && off_diagonal_norm(a) > target) {
    throw ConvergenceError("dense_sym_eig: Jacobi sweeps did not converge", off_diagonal_norm(a));
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });
  DenseSymEig result{Eigen::VectorXd(m), Eigen::MatrixXd(m, m)};
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index src = order[static_cast<std::size_t>(i)];
    result.eigenvalues[i] = a(src, src);
    result.eigenvectors.col(i) = q.col(src);
  }
  return result;
}

GenEigBasis gen_eig_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& M, std::size_t cap) {
  check_symmetric(A, "gen_eig");
  check_symmetric(M, "gen_eig");
  if (A.rows() != M.rows()) throw ArgumentError("gen_eig: A and M differ in size");
  if (static_cast<std::size_t>(A.rows()) > cap) {
    throw CapacityError("gen_eig: N = " + std::to_string(A.rows()) + " exceeds cap " +
                        std::to_string(cap) + "; the truth solver is desk-scale only");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw DefinitenessError("gen_eig: M is not positive definite");
  const auto L = llt.matrixL();
  // C = L^{-1} A L^{-T}
  Eigen::MatrixXd C = L.solve(A);
  C = L.solve(C.transpose()).eval();
  C = 0.5 * (C + C.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
  if (eig.info() != Eigen::Success) throw ConvergenceError("gen_eig: eigensolver failed", 0.0);
  GenEigBasis basis;
  basis.eigenvalues = eig.eigenvalues();
  basis.eigenvectors = llt.matrixU().solve(eig.eigenvectors());
  fix_signs(basis.eigenvectors);
  return basis;
}

GenEigBasis gen_eig(const SparseSymMatrix& A, const SparseSymMatrix& M, std::size_t cap) {
  if (A.size() != M.size()) throw ArgumentError("gen_eig: A and M differ in size");
  if (A.size() > cap) {
    throw CapacityError("gen_eig: N = " + std::to_string(A.size()) + " exceeds cap " +
                        std::to_string(cap) + "; the truth solver is desk-scale only");
  }
  return gen_eig_dense(A.to_dense(), M.to_dense(), cap);
}

Eigen::MatrixXd spd_fractional_power(const DenseSymEig& eig, double s) {
  if (eig.eigenvalues.size() > 0 && !(eig.eigenvalues.minCoeff() > 0.0)) {
    throw DefinitenessError("spd_fractional_power: nonpositive eigenvalue " +
                            std::to_string(eig.eigenvalues.minCoeff()));
  }
  const Eigen::VectorXd powered = eig.eigenvalues.array().pow(s).matrix();
  return eig.eigenvectors * powered.asDiagonal() * eig.eigenvectors.transpose();
}

Eigen::MatrixXd spd_fractional_power(const Eigen::MatrixXd& B, double s) {
  return spd_fractional_power(dense_sym_eig(B), s);
}

OrthonormalBasis m_gram_schmidt(std::span<const DofVector> vectors, const SparseSymMatrix& M,
                                double drop_tol) {
  if (vectors.empty()) throw ArgumentError("m_gram_schmidt: no input vectors");
  const auto n = static_cast<Eigen::Index>(M.size());

  OrthonormalBasis out;
  std::vector<DofVector> columns;
  std::vector<DofVector> m_columns;  // M times each column
  for (std::size_t idx = 0; idx < vectors.size(); ++idx) {
    if (vectors[idx].size() != n) throw ArgumentError("m_gram_schmidt: vector size mismatch");
    DofVector w = vectors[idx];
    const double original = std::sqrt(std::max(0.0, w.dot(M.multiply(w))));
    for (int pass = 0; pass < 2; ++pass) {
      std::vector<double> coeffs(columns.size());
      for (std::size_t j = 0; j < columns.size(); ++j) coeffs[j] = m_columns[j].dot(w);
      for (std::size_t j = 0; j < columns.size(); ++j) w -= coeffs[j] * columns[j];
    }
    DofVector mw = M.multiply(w);
    const double remaining = std::sqrt(std::max(0.0, w.dot(mw)));
    if (original == 0.0 || remaining <= drop_tol * original) {
      out.dropped.push_back(idx);
      continue;
    }
    columns.push_back(w / remaining);
    m_columns.push_back(mw / remaining);
    out.kept.push_back(idx);
  }
  if (columns.empty()) throw EmptyBasisError("m_gram_schmidt: every input vector was dropped");

  out.basis.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t j = 0; j < columns.size(); ++j) {
    out.basis.col(static_cast<Eigen::Index>(j)) = columns[j];
  }
  return out;
}

}  // namespace fracrb::linalg

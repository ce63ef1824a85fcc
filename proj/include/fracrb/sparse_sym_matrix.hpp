#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace fracrb {

/// Coefficient vector over the free (interior) degrees of freedom.
using DofVector = Eigen::VectorXd;

/**
 * Symmetric sparse matrix stored as the lower triangle (diagonal included)
 * in compressed-row form.  The upper triangle is implicit, so the matrix is
 * exactly symmetric by construction.
 */
class SparseSymMatrix {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    double value;
  };

  SparseSymMatrix() = default;

  /// Sums duplicate entries.  Entries with col > row are mirrored into the lower triangle.
  static SparseSymMatrix from_entries(std::size_t n, std::vector<Entry> entries);
  static SparseSymMatrix identity(std::size_t n);
  /// Lower triangle of a dense matrix; entries with |a_ij| == 0 are skipped.
  static SparseSymMatrix from_dense(const Eigen::MatrixXd& dense);

  std::size_t size() const noexcept { return n_; }
  std::size_t nonzeros_stored() const noexcept { return values_.size(); }

  /// y = B x
  DofVector multiply(const DofVector& x) const;
  /// alpha * this + beta * other; patterns are merged.
  SparseSymMatrix linear_combination(double alpha, const SparseSymMatrix& other, double beta) const;
  /// P^T B P for the permutation mapping new index i to old index perm[i].
  SparseSymMatrix permuted(const std::vector<std::size_t>& perm) const;

  DofVector diagonal() const;
  double operator()(std::size_t i, std::size_t j) const;
  Eigen::MatrixXd to_dense() const;
  /// Full (both triangles) Eigen sparse matrix.
  Eigen::SparseMatrix<double> to_eigen() const;

  const std::vector<std::size_t>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<std::size_t>& col_index() const noexcept { return col_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> col_;  // ascending within a row, col <= row
  std::vector<double> values_;
};

}  // namespace fracrb

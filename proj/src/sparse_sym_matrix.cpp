#include "fracrb/sparse_sym_matrix.hpp"

#include <algorithm>

#include "fracrb/errors.hpp"

namespace fracrb {

SparseSymMatrix SparseSymMatrix::from_entries(std::size_t n, std::vector<Entry> entries) {
  for (auto& e : entries) {
    if (e.row >= n || e.col >= n) throw ArgumentError("sparse entry index out of range");
    if (e.col > e.row) std::swap(e.row, e.col);
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseSymMatrix m;
  m.n_ = n;
  m.row_ptr_.assign(n + 1, 0);
  for (std::size_t i = 0; i < entries.size();) {
    const std::size_t r = entries[i].row;
    const std::size_t c = entries[i].col;
    double sum = 0.0;
    for (; i < entries.size() && entries[i].row == r && entries[i].col == c; ++i) {
      sum += entries[i].value;
    }
    m.col_.push_back(c);
    m.values_.push_back(sum);
    ++m.row_ptr_[r + 1];
  }
  for (std::size_t r = 0; r < n; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

SparseSymMatrix SparseSymMatrix::identity(std::size_t n) {
  std::vector<Entry> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) entries.push_back({i, i, 1.0});
  return from_entries(n, std::move(entries));
}

SparseSymMatrix SparseSymMatrix::from_dense(const Eigen::MatrixXd& dense) {
  if (dense.rows() != dense.cols()) throw ArgumentError("from_dense requires a square matrix");
  const auto n = static_cast<std::size_t>(dense.rows());
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      if (v != 0.0) entries.push_back({i, j, v});
    }
  }
  return from_entries(n, std::move(entries));
}

DofVector SparseSymMatrix::multiply(const DofVector& x) const {
  if (static_cast<std::size_t>(x.size()) != n_) throw ArgumentError("multiply: size mismatch");
  DofVector y = DofVector::Zero(static_cast<Eigen::Index>(n_));
  for (std::size_t r = 0; r < n_; ++r) {
    double acc = 0.0;
    const double xr = x[static_cast<Eigen::Index>(r)];
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const std::size_t c = col_[p];
      const double v = values_[p];
      acc += v * x[static_cast<Eigen::Index>(c)];
      if (c != r) y[static_cast<Eigen::Index>(c)] += v * xr;
    }
    y[static_cast<Eigen::Index>(r)] += acc;
  }
  return y;
}

SparseSymMatrix SparseSymMatrix::linear_combination(double alpha, const SparseSymMatrix& other,
                                                    double beta) const {
  if (other.n_ != n_) throw ArgumentError("linear_combination: size mismatch");
  std::vector<Entry> entries;
  entries.reserve(values_.size() + other.values_.size());
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      entries.push_back({r, col_[p], alpha * values_[p]});
    }
    for (std::size_t p = other.row_ptr_[r]; p < other.row_ptr_[r + 1]; ++p) {
      entries.push_back({r, other.col_[p], beta * other.values_[p]});
    }
  }
  return from_entries(n_, std::move(entries));
}

SparseSymMatrix SparseSymMatrix::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != n_) throw ArgumentError("permuted: permutation size mismatch");
  std::vector<std::size_t> inverse(n_, n_);
  for (std::size_t i = 0; i < n_; ++i) {
    if (perm[i] >= n_ || inverse[perm[i]] != n_) throw ArgumentError("permuted: not a permutation");
    inverse[perm[i]] = i;
  }
  std::vector<Entry> entries;
  entries.reserve(values_.size());
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      entries.push_back({inverse[r], inverse[col_[p]], values_[p]});
    }
  }
  return from_entries(n_, std::move(entries));
}

DofVector SparseSymMatrix::diagonal() const {
  DofVector d = DofVector::Zero(static_cast<Eigen::Index>(n_));
  for (std::size_t r = 0; r < n_; ++r) {
    const std::size_t last = row_ptr_[r + 1];
    if (last > row_ptr_[r] && col_[last - 1] == r) d[static_cast<Eigen::Index>(r)] = values_[last - 1];
  }
  return d;
}

double SparseSymMatrix::operator()(std::size_t i, std::size_t j) const {
  if (j > i) std::swap(i, j);
  const auto first = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i]);
  const auto last = col_.begin() + static_cast<std::ptrdiff_t>(row_ptr_[i + 1]);
  const auto it = std::lower_bound(first, last, j);
  return (it != last && *it == j) ? values_[static_cast<std::size_t>(it - col_.begin())] : 0.0;
}

Eigen::MatrixXd SparseSymMatrix::to_dense() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const auto i = static_cast<Eigen::Index>(r);
      const auto j = static_cast<Eigen::Index>(col_[p]);
      d(i, j) = values_[p];
      d(j, i) = values_[p];
    }
  }
  return d;
}

Eigen::SparseMatrix<double> SparseSymMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * values_.size());
  for (std::size_t r = 0; r < n_; ++r) {
    for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const auto i = static_cast<int>(r);
      const auto j = static_cast<int>(col_[p]);
      triplets.emplace_back(i, j, values_[p]);
      if (i != j) triplets.emplace_back(j, i, values_[p]);
    }
  }
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::SparseMatrix<double> m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  return m;
}

}  // namespace fracrb

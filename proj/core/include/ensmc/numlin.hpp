#pragma once

#include <initializer_list>
#include <span>
#include <vector>

namespace ensmc::numlin {

// Dense symmetric matrix, row-major doubles.  Symmetry is maintained by
// construction: set() writes both (i,j) and (j,i).
class SymMatrix {
 public:
  explicit SymMatrix(int n);
  static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  int size() const { return n_; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * n_ + j]; }
  void set(int i, int j, double v);

  double max_abs() const;
  double frobenius() const;

  std::span<const double> data() const { return a_; }
  std::span<double> mutable_data() { return a_; }

 private:
  int n_;
  std::vector<double> a_;
};

// Lower-triangular Cholesky factor L with L L^T equal to the source matrix.
class CholFactor {
 public:
  CholFactor(int n, std::vector<double> lower) : n_(n), lower_(std::move(lower)) {}
  int size() const { return n_; }
  double operator()(int i, int j) const { return lower_[static_cast<std::size_t>(i) * n_ + j]; }
  std::span<const double> lower() const { return lower_; }

 private:
  int n_;
  std::vector<double> lower_;
};

// Symmetric eigendecomposition: values ascending, vector(i) the unit
// eigenvector paired with values()[i] (column i of the orthogonal matrix).
class EigenDecomp {
 public:
  EigenDecomp(int n, std::vector<double> values, std::vector<double> vectors_rowwise)
      : n_(n), values_(std::move(values)), vectors_(std::move(vectors_rowwise)) {}
  int size() const { return n_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> vector(int i) const {
    return std::span<const double>(vectors_).subspan(static_cast<std::size_t>(i) * n_, n_);
  }

 private:
  int n_;
  std::vector<double> values_;
  std::vector<double> vectors_;  // row i = eigenvector i
};

// Throws NotPositiveDefinite when a pivot fails (including NaN input).
CholFactor cholesky(const SymMatrix& m);

// log det of the source matrix: 2 sum_i log L_ii.
double chol_logdet(const CholFactor& f);

// y^T source^{-1} y via one forward substitution.  Throws DimensionMismatch.
double chol_quadform(const CholFactor& f, std::span<const double> y);

// source^{-1} y via forward then back substitution.
std::vector<double> chol_solve(const CholFactor& f, std::span<const double> y);

// Householder tridiagonalization followed by implicit-shift QL.
// Throws NoConvergence past the per-eigenvalue iteration cap.
EigenDecomp sym_eigen(const SymMatrix& m);

}  // namespace ensmc::numlin

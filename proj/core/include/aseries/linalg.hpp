#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <memory>
#include <stdexcept>
#include <string>

namespace aseries {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplets = std::vector<Eigen::Triplet<double>>;

class SingularMatrixError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix stored as  sparse + left * right^T  with a handful of dense
/// low-rank columns. The augmented Jacobians carry dense rank-one blocks
/// (alpha alpha^T and friends) that would otherwise fill the sparse part.
struct LowRankSparse {
  SparseMatrix sparse;
  Matrix left;   // rows x r
  Matrix right;  // cols x r

  LowRankSparse() = default;
  explicit LowRankSparse(SparseMatrix s)
      : sparse(std::move(s)), left(sparse.rows(), 0), right(sparse.cols(), 0) {}

  Eigen::Index rows() const { return sparse.rows(); }
  Eigen::Index cols() const { return sparse.cols(); }
  Eigen::Index rank_terms() const { return left.cols(); }

  Vector apply(const Vector& x) const;
  Matrix to_dense() const;

  /// Adds the rank-one term  a b^T.
  void add_rank_one(const Vector& a, const Vector& b);

  /// Copy with one extra dense row appended at the bottom.
  LowRankSparse with_row(const Vector& row) const;
};

/// LU factorization of a square LowRankSparse matrix. The low-rank terms are
/// folded into an equivalent bordered sparse system
///   [S  A; B^T  -I] [x; y] = [b; 0],
/// which is nonsingular exactly when S + A B^T is.
class LowRankSparseSolver {
 public:
  explicit LowRankSparseSolver(const LowRankSparse& a);
  Vector solve(const Vector& b) const;
  Eigen::Index size() const { return n_; }

 private:
  Eigen::Index n_ = 0;
  Eigen::Index r_ = 0;
  SparseMatrix extended_;
  std::unique_ptr<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>> lu_;
};

/// One-shot solve; throws SingularMatrixError.
Vector solve(const LowRankSparse& a, const Vector& b);
Vector solve(const SparseMatrix& a, const Vector& b);

enum class Sign { negative = -1, degenerate = 0, positive = 1 };

std::string to_string(Sign s);

/// Sign of det(h) for a symmetric dense matrix from an LU factorization
/// without pivoting (parity of negative pivots). When a pivot drops below
/// pivot_tol * max|h_ij| the eigenvalues decide: degenerate if one of them is
/// below degenerate_tol relative to the largest.
Sign dense_determinant_sign(const Matrix& h, double pivot_tol = 1e-12,
                            double degenerate_tol = 1e-10);

/// Sign of det(h) for a sparse symmetric matrix from an LDL^T factorization
/// (fill-reducing symmetric permutation only, no numerical pivoting). Small
/// pivots fall back to Sylvester inertia counts of h -+ eps I with
/// eps = degenerate_tol * ||h||_inf.
Sign sparse_symmetric_determinant_sign(const SparseMatrix& h, double pivot_tol = 1e-12,
                                       double degenerate_tol = 1e-10);

/// Sparse identity of size n.
SparseMatrix sparse_identity(Eigen::Index n);

/// Inserts `block` into triplets at the given offset.
void append_block(Triplets& t, const SparseMatrix& block, Eigen::Index row0, Eigen::Index col0);

}  // namespace aseries

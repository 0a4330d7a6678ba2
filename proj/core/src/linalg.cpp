#include "aseries/linalg.hpp"

#include <Eigen/SparseCholesky>

#include <cmath>

namespace aseries {

Vector LowRankSparse::apply(const Vector& x) const {
  Vector y = sparse * x;
  if (left.cols() > 0) y.noalias() += left * (right.transpose() * x);
  return y;
}

Matrix LowRankSparse::to_dense() const {
  Matrix d = Matrix(sparse);
  if (left.cols() > 0) d.noalias() += left * right.transpose();
  return d;
}

void LowRankSparse::add_rank_one(const Vector& a, const Vector& b) {
  const Eigen::Index r = left.cols();
  left.conservativeResize(sparse.rows(), r + 1);
  right.conservativeResize(sparse.cols(), r + 1);
  left.col(r) = a;
  right.col(r) = b;
}

LowRankSparse LowRankSparse::with_row(const Vector& row) const {
  const Eigen::Index n = rows();
  const Eigen::Index m = cols();
  Triplets t;
  t.reserve(static_cast<std::size_t>(sparse.nonZeros() + m));
  append_block(t, sparse, 0, 0);
  for (Eigen::Index j = 0; j < m; ++j)
    if (row[j] != 0.0) t.emplace_back(n, j, row[j]);
  LowRankSparse out;
  out.sparse.resize(n + 1, m);
  out.sparse.setFromTriplets(t.begin(), t.end());
  out.left = Matrix::Zero(n + 1, left.cols());
  out.left.topRows(n) = left;
  out.right = right;
  return out;
}

LowRankSparseSolver::LowRankSparseSolver(const LowRankSparse& a)
    : n_(a.rows()), r_(a.rank_terms()) {
  if (a.rows() != a.cols()) throw std::invalid_argument("LowRankSparseSolver: matrix not square");
  if (r_ == 0) {
    extended_ = a.sparse;
  } else {
    Triplets t;
    t.reserve(static_cast<std::size_t>(a.sparse.nonZeros() + 2 * n_ * r_ + r_));
    append_block(t, a.sparse, 0, 0);
    for (Eigen::Index k = 0; k < r_; ++k) {
      for (Eigen::Index i = 0; i < n_; ++i) {
        if (a.left(i, k) != 0.0) t.emplace_back(i, n_ + k, a.left(i, k));
        if (a.right(i, k) != 0.0) t.emplace_back(n_ + k, i, a.right(i, k));
      }
      t.emplace_back(n_ + k, n_ + k, -1.0);
    }
    extended_.resize(n_ + r_, n_ + r_);
    extended_.setFromTriplets(t.begin(), t.end());
  }
  extended_.makeCompressed();
  lu_ = std::make_unique<Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>>>();
  lu_->analyzePattern(extended_);
  lu_->factorize(extended_);
  if (lu_->info() != Eigen::Success)
    throw SingularMatrixError("sparse LU failed: " + lu_->lastErrorMessage());
}

Vector LowRankSparseSolver::solve(const Vector& b) const {
  Vector rhs = Vector::Zero(n_ + r_);
  rhs.head(n_) = b;
  Vector x = lu_->solve(rhs);
  if (lu_->info() != Eigen::Success || !x.allFinite())
    throw SingularMatrixError("sparse LU solve produced a non-finite result");
  // Near-singular factorizations show up as a poor backward error.
  const Vector res = extended_ * x - rhs;
  const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
  const double xnorm = x.lpNorm<Eigen::Infinity>();
  double anorm = 0.0;
  for (Eigen::Index k = 0; k < extended_.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(extended_, k); it; ++it) anorm = std::max(anorm, std::abs(it.value()));
  if (res.lpNorm<Eigen::Infinity>() > 1e-6 * (scale + anorm * xnorm))
    throw SingularMatrixError("sparse LU solve is numerically singular");
  return x.head(n_);
}

Vector solve(const LowRankSparse& a, const Vector& b) { return LowRankSparseSolver(a).solve(b); }

Vector solve(const SparseMatrix& a, const Vector& b) {
  return LowRankSparseSolver(LowRankSparse(a)).solve(b);
}

std::string to_string(Sign s) {
  switch (s) {
    case Sign::negative: return "-1";
    case Sign::positive: return "+1";
    case Sign::degenerate: return "degenerate";
  }
  return "?";
}

namespace {

Sign sign_from_negatives(int negatives) { return negatives % 2 == 0 ? Sign::positive : Sign::negative; }

Sign eigen_sign(const Matrix& h, double degenerate_tol) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  const Vector& ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  if (scale == 0.0) return Sign::degenerate;
  int negatives = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i]) <= degenerate_tol * scale) return Sign::degenerate;
    if (ev[i] < 0) ++negatives;
  }
  return sign_from_negatives(negatives);
}

struct LdltCount {
  bool ok = false;
  int negatives = 0;
  double min_pivot = 0.0;
};

LdltCount ldlt_count(const SparseMatrix& h) {
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt(h);
  LdltCount c;
  if (ldlt.info() != Eigen::Success) return c;
  const Vector d = ldlt.vectorD();
  if (!d.allFinite()) return c;
  c.ok = true;
  c.min_pivot = d.cwiseAbs().minCoeff();
  for (Eigen::Index i = 0; i < d.size(); ++i)
    if (d[i] < 0) ++c.negatives;
  return c;
}

}  // namespace

Sign dense_determinant_sign(const Matrix& h, double pivot_tol, double degenerate_tol) {
  const Eigen::Index n = h.rows();
  if (n == 0) return Sign::positive;
  const double scale = h.cwiseAbs().maxCoeff();
  if (scale == 0.0) return Sign::degenerate;
  Matrix a = h;
  int negatives = 0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double p = a(k, k);
    if (std::abs(p) <= pivot_tol * scale) return eigen_sign(h, degenerate_tol);
    if (p < 0) ++negatives;
    for (Eigen::Index i = k + 1; i < n; ++i) {
      const double l = a(i, k) / p;
      if (l != 0.0) a.row(i).tail(n - k - 1) -= l * a.row(k).tail(n - k - 1);
    }
  }
  return sign_from_negatives(negatives);
}

Sign sparse_symmetric_determinant_sign(const SparseMatrix& h, double pivot_tol,
                                       double degenerate_tol) {
  double scale = 0.0;
  for (Eigen::Index k = 0; k < h.outerSize(); ++k) {
    double row = 0.0;
    for (SparseMatrix::InnerIterator it(h, k); it; ++it) row += std::abs(it.value());
    scale = std::max(scale, row);
  }
  if (h.rows() == 0) return Sign::positive;
  if (scale == 0.0) return Sign::degenerate;

  const LdltCount plain = ldlt_count(h);
  if (plain.ok && plain.min_pivot > pivot_tol * scale) return sign_from_negatives(plain.negatives);

  const double eps = degenerate_tol * scale;
  const SparseMatrix id = sparse_identity(h.rows());
  const LdltCount lower = ldlt_count(h - eps * id);
  const LdltCount upper = ldlt_count(h + eps * id);
  if (!lower.ok || !upper.ok || lower.negatives != upper.negatives) return Sign::degenerate;
  return sign_from_negatives(upper.negatives);
}

SparseMatrix sparse_identity(Eigen::Index n) {
  SparseMatrix id(n, n);
  id.setIdentity();
  return id;
}

void append_block(Triplets& t, const SparseMatrix& block, Eigen::Index row0, Eigen::Index col0) {
  for (Eigen::Index k = 0; k < block.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(block, k); it; ++it)
      t.emplace_back(row0 + it.row(), col0 + it.col(), it.value());
}

}  // namespace aseries

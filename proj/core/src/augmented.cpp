#include "aseries/augmented.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace aseries {

int scalar_equations(Level level) { return static_cast<int>(level); }

namespace {

// Row blocks: G, G_u alpha, normalization, cusp, vbar equation, swallowtail.
// Column blocks: u, alpha, vbar, lambda.
enum RowBlock { kG = 0, kGa, kNorm, kCusp, kR5, kR6, kRowBlocks };
enum ColBlock { kU = 0, kAlpha, kVbar, kLambda, kColBlocks };

class Assembler {
 public:
  Assembler(const std::array<int, kRowBlocks>& rows, const std::array<int, kColBlocks>& cols) {
    int acc = 0;
    for (int b = 0; b < kRowBlocks; ++b) {
      row0_[b] = acc;
      acc += rows[b];
    }
    nrows_ = acc;
    acc = 0;
    for (int b = 0; b < kColBlocks; ++b) {
      col0_[b] = acc;
      acc += cols[b];
    }
    ncols_ = acc;
  }

  void add(int rb, int cb, const SparseMatrix& m) { append_block(t_, m, row0_[rb], col0_[cb]); }

  void add_diag(int rb, int cb, const Vector& d) {
    for (Eigen::Index k = 0; k < d.size(); ++k)
      if (d[k] != 0.0) t_.emplace_back(row0_[rb] + k, col0_[cb] + k, d[k]);
  }

  // Dense block given row-major as a matrix.
  void add_dense(int rb, int cb, const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j)
        if (m(i, j) != 0.0) t_.emplace_back(row0_[rb] + i, col0_[cb] + j, m(i, j));
  }

  void add_row(int rb, int cb, const Vector& r) { add_dense(rb, cb, r.transpose()); }

  void add_rank_one(int rb, const Vector& a, int cb, const Vector& b) {
    Vector l = Vector::Zero(nrows_);
    Vector r = Vector::Zero(ncols_);
    l.segment(row0_[rb], a.size()) = a;
    r.segment(col0_[cb], b.size()) = b;
    terms_.emplace_back(std::move(l), std::move(r));
  }

  LowRankSparse finish() {
    SparseMatrix s(nrows_, ncols_);
    s.setFromTriplets(t_.begin(), t_.end());
    s.makeCompressed();
    LowRankSparse out(std::move(s));
    for (const auto& [l, r] : terms_) out.add_rank_one(l, r);
    return out;
  }

 private:
  std::array<int, kRowBlocks> row0_{};
  std::array<int, kColBlocks> col0_{};
  int nrows_ = 0;
  int ncols_ = 0;
  Triplets t_;
  std::vector<std::pair<Vector, Vector>> terms_;
};

// Componentwise lambda-derivative columns scaled by a grid vector.
Matrix scale_rows(const Eigen::MatrixX3d& p, const Vector& s) { return s.asDiagonal() * p; }

void check_state(const AugmentedState& s, int n, Level need) {
  auto fail = [](const std::string& what) { throw std::invalid_argument("augmented state: " + what); };
  if (s.u.size() != n) fail("u has the wrong length");
  if (need >= Level::fold && s.alpha.size() != n) fail("alpha has the wrong length");
  if (need >= Level::swallowtail && s.vbar.size() != n) fail("vbar has the wrong length");
}

Evaluation assemble(const Grid& grid, const Nonlinearity& nl, const SparseMatrix& L,
                    const AugmentedState& s, Level level) {
  const int n = grid.size();
  check_state(s, n, level);
  const int lv = static_cast<int>(level);
  const double h = grid.cell();

  const Vector f0 = eval_derivative(nl, 0, s.u, s.lambda);
  const SparseMatrix gu = jacobian(s.u, s.lambda, nl, L);
  const Eigen::MatrixX3d p0 = eval_parameter_gradient(nl, 0, s.u, s.lambda);

  std::array<int, kRowBlocks> rows{n, 0, 0, 0, 0, 0};
  std::array<int, kColBlocks> cols{n, 0, 0, 3};
  if (lv >= 1) rows[kGa] = n, rows[kNorm] = 1, cols[kAlpha] = n;
  if (lv >= 2) rows[kCusp] = 1;
  if (lv >= 3) rows[kR5] = n, rows[kR6] = 1, cols[kVbar] = n;

  Assembler as(rows, cols);
  Evaluation ev;
  ev.residual.resize(static_cast<Eigen::Index>(rows[0] + rows[1] + rows[2] + rows[3] + rows[4] + rows[5]));
  Eigen::Index r = 0;

  ev.residual.segment(r, n) = L * s.u + f0;
  r += n;
  as.add(kG, kU, gu);
  as.add_dense(kG, kLambda, p0);

  if (lv >= 1) {
    const Vector& a = s.alpha;
    const Vector fuu = eval_derivative(nl, 2, s.u, s.lambda);
    const Eigen::MatrixX3d p1 = eval_parameter_gradient(nl, 1, s.u, s.lambda);
    const Vector a2 = a.cwiseProduct(a);
    const Vector a3 = a2.cwiseProduct(a);

    ev.residual.segment(r, n) = gu * a;
    r += n;
    as.add_diag(kGa, kU, fuu.cwiseProduct(a));
    as.add(kGa, kAlpha, gu);
    as.add_dense(kGa, kLambda, scale_rows(p1, a));

    ev.residual[r++] = h * a.squaredNorm() - 1.0;
    as.add_row(kNorm, kAlpha, 2.0 * h * a);

    if (lv >= 2) {
      const Vector fuuu = eval_derivative(nl, 3, s.u, s.lambda);
      const Eigen::MatrixX3d p2 = eval_parameter_gradient(nl, 2, s.u, s.lambda);
      ev.residual[r++] = fuu.dot(a3);
      as.add_row(kCusp, kU, fuuu.cwiseProduct(a3));
      as.add_row(kCusp, kAlpha, 3.0 * fuu.cwiseProduct(a2));
      as.add_row(kCusp, kLambda, p2.transpose() * a3);

      if (lv >= 3) {
        const Vector& vb = s.vbar;
        const Vector fuuuu = eval_derivative(nl, 4, s.u, s.lambda);
        const Eigen::MatrixX3d p3 = eval_parameter_gradient(nl, 3, s.u, s.lambda);
        const Vector a4 = a2.cwiseProduct(a2);
        const Vector y = gu * vb;    // v
        const Vector y2 = gu * y;    // G_u^2 vbar
        const Vector w = fuu.cwiseProduct(a2);

        ev.residual.segment(r, n) = y2 + a * a.dot(vb) + w;
        r += n;
        const Vector fuu_vb = fuu.cwiseProduct(vb);
        SparseMatrix d5u = gu * fuu_vb.asDiagonal();
        as.add(kR5, kU, d5u);
        as.add_diag(kR5, kU, fuu.cwiseProduct(y) + fuuu.cwiseProduct(a2));
        as.add_diag(kR5, kAlpha, Vector::Constant(n, a.dot(vb)) + 2.0 * fuu.cwiseProduct(a));
        as.add_rank_one(kR5, a, kAlpha, vb);
        SparseMatrix gu2 = gu * gu;
        as.add(kR5, kVbar, gu2);
        as.add_rank_one(kR5, a, kVbar, a);
        Matrix d5l(n, 3);
        for (int i = 0; i < 3; ++i)
          d5l.col(i) = p1.col(i).cwiseProduct(y) + gu * p1.col(i).cwiseProduct(vb) +
                       p2.col(i).cwiseProduct(a2);
        as.add_dense(kR5, kLambda, d5l);

        ev.residual[r++] = fuuu.dot(a4) + 6.0 * w.dot(y) + 3.0 * y.dot(y2);
        const Vector dq_u = fuu.cwiseProduct(2.0 * y2.cwiseProduct(vb) + y.cwiseProduct(y));
        as.add_row(kR6, kU,
                   fuuuu.cwiseProduct(a4) + 6.0 * fuuu.cwiseProduct(a2).cwiseProduct(y) +
                       6.0 * fuu.cwiseProduct(w).cwiseProduct(vb) + 3.0 * dq_u);
        as.add_row(kR6, kAlpha, 4.0 * fuuu.cwiseProduct(a3) + 12.0 * fuu.cwiseProduct(a).cwiseProduct(y));
        as.add_row(kR6, kVbar, 6.0 * (gu * w) + 6.0 * (gu * y2));
        const Vector q = 2.0 * y2.cwiseProduct(vb) + y.cwiseProduct(y);
        Vector d6l(3);
        for (int i = 0; i < 3; ++i)
          d6l[i] = p3.col(i).dot(a4) + 6.0 * p2.col(i).cwiseProduct(a2).dot(y) +
                   6.0 * w.dot(p1.col(i).cwiseProduct(vb)) + 3.0 * p1.col(i).dot(q);
        as.add_row(kR6, kLambda, d6l);
      }
    }
  }
  ev.jacobian = as.finish();
  return ev;
}

// Column offsets of the full Jacobian for a level.
struct Columns {
  int state = 0;   // u, alpha, vbar
  int lambda = 0;  // first parameter column
};

Columns full_columns(int n, Level level) {
  int state = n;
  if (level >= Level::fold) state += n;
  if (level >= Level::swallowtail) state += n;
  return {state, state};
}

}  // namespace

AugmentedSystem::AugmentedSystem(Grid grid, const Nonlinearity& nl)
    : grid_(grid), nl_(nl), L_(build_laplacian(grid)) {}

SparseMatrix AugmentedSystem::gu(const AugmentedState& s) const { return jacobian(s.u, s.lambda, nl_, L_); }

Evaluation AugmentedSystem::f0(const AugmentedState& s) const {
  return assemble(grid_, nl_, L_, s, Level::solution);
}
Evaluation AugmentedSystem::f1(const AugmentedState& s) const {
  return assemble(grid_, nl_, L_, s, Level::fold);
}
Evaluation AugmentedSystem::f2(const AugmentedState& s) const {
  return assemble(grid_, nl_, L_, s, Level::cusp);
}
Evaluation AugmentedSystem::f3(const AugmentedState& s) const {
  return assemble(grid_, nl_, L_, s, Level::swallowtail);
}
Evaluation AugmentedSystem::evaluate_full(const AugmentedState& s) const {
  return assemble(grid_, nl_, L_, s, s.level);
}

int AugmentedSystem::unknowns(const SystemLayout& layout) const {
  const Columns c = full_columns(n(), layout.level);
  return c.state - (layout.pinned ? n() : 0) + static_cast<int>(layout.active.size());
}

int AugmentedSystem::equations(const SystemLayout& layout) const {
  int rows = n();
  if (layout.level >= Level::fold) rows += n() + 1;
  if (layout.level >= Level::cusp) rows += 1;
  if (layout.level >= Level::swallowtail) rows += n() + 1;
  return rows - (layout.pinned ? n() : 0);
}

namespace {

void check_layout(const SystemLayout& layout) {
  if (layout.pinned && layout.level == Level::solution)
    throw std::invalid_argument("pinned layout needs level >= 1");
  for (int i : layout.active)
    if (i < 0 || i > 2) throw std::invalid_argument("active parameter index out of range");
}

}  // namespace

Evaluation AugmentedSystem::evaluate(const AugmentedState& s, const SystemLayout& layout) const {
  check_layout(layout);
  AugmentedState st = s;
  st.level = layout.level;
  Evaluation full = assemble(grid_, nl_, L_, st, layout.level);

  const Columns c = full_columns(n(), layout.level);
  const int skip = layout.pinned ? n() : 0;
  const Eigen::Index rows = full.residual.size() - skip;
  const int ncols = unknowns(layout);
  std::vector<int> colmap(static_cast<std::size_t>(c.lambda + 3), -1);
  for (int j = skip; j < c.state; ++j) colmap[static_cast<std::size_t>(j)] = j - skip;
  for (std::size_t a = 0; a < layout.active.size(); ++a)
    colmap[static_cast<std::size_t>(c.lambda + layout.active[a])] = c.state - skip + static_cast<int>(a);

  Evaluation out;
  out.residual = full.residual.tail(rows);
  Triplets t;
  t.reserve(static_cast<std::size_t>(full.jacobian.sparse.nonZeros()));
  const SparseMatrix& js = full.jacobian.sparse;
  for (Eigen::Index k = 0; k < js.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(js, k); it; ++it) {
      const int col = colmap[static_cast<std::size_t>(it.col())];
      if (it.row() >= skip && col >= 0) t.emplace_back(it.row() - skip, col, it.value());
    }
  SparseMatrix sp(rows, ncols);
  sp.setFromTriplets(t.begin(), t.end());
  sp.makeCompressed();
  out.jacobian = LowRankSparse(std::move(sp));
  for (Eigen::Index k = 0; k < full.jacobian.rank_terms(); ++k) {
    Vector right = Vector::Zero(ncols);
    for (std::size_t j = 0; j < colmap.size(); ++j)
      if (colmap[j] >= 0) right[colmap[j]] = full.jacobian.right(static_cast<Eigen::Index>(j), k);
    out.jacobian.add_rank_one(full.jacobian.left.col(k).tail(rows), right);
  }
  return out;
}

Vector AugmentedSystem::residual(const AugmentedState& s, const SystemLayout& layout) const {
  return evaluate(s, layout).residual;
}

Vector AugmentedSystem::pack(const AugmentedState& s, const SystemLayout& layout) const {
  check_layout(layout);
  Vector z(unknowns(layout));
  Eigen::Index p = 0;
  const int m = n();
  if (!layout.pinned) z.segment(p, m) = s.u, p += m;
  if (layout.level >= Level::fold) z.segment(p, m) = s.alpha, p += m;
  if (layout.level >= Level::swallowtail) z.segment(p, m) = s.vbar, p += m;
  for (int i : layout.active) z[p++] = s.lambda[i];
  return z;
}

AugmentedState AugmentedSystem::unpack(const Vector& z, const AugmentedState& base,
                                       const SystemLayout& layout) const {
  if (z.size() != unknowns(layout)) throw std::invalid_argument("unpack: wrong vector length");
  AugmentedState s = base;
  s.level = layout.level;
  Eigen::Index p = 0;
  const int m = n();
  if (!layout.pinned) s.u = z.segment(p, m), p += m;
  if (layout.level >= Level::fold) s.alpha = z.segment(p, m), p += m;
  if (layout.level >= Level::swallowtail) s.vbar = z.segment(p, m), p += m;
  for (int i : layout.active) s.lambda[i] = z[p++];
  return s;
}

double AugmentedSystem::cusp_monitor(const AugmentedState& s) const {
  const Vector fuu = eval_derivative(nl_, 2, s.u, s.lambda);
  return fuu.dot(s.alpha.array().cube().matrix());
}

namespace {

// Solves (G_u^2 + alpha alpha^T) x = rhs.
Vector normal_solve(const SparseMatrix& gu, const Vector& alpha, const Vector& rhs) {
  LowRankSparse a(gu * gu);
  a.add_rank_one(alpha, alpha);
  return solve(a, rhs);
}

}  // namespace

VSolve AugmentedSystem::solve_v(const AugmentedState& s) const {
  const SparseMatrix g = gu(s);
  const Vector& a = s.alpha;
  const Vector w = eval_derivative(nl_, 2, s.u, s.lambda).cwiseProduct(a.cwiseProduct(a));
  VSolve out;
  out.vbar = normal_solve(g, a, -w);
  out.v = g * out.vbar;
  Vector res = g * out.v + w;
  res -= a * (a.dot(res) / a.squaredNorm());
  out.projected_residual = res.lpNorm<Eigen::Infinity>();
  return out;
}

double AugmentedSystem::swallowtail_monitor(const AugmentedState& s, const Vector& v) const {
  const Vector& a = s.alpha;
  const Vector a2 = a.cwiseProduct(a);
  const Vector fuu = eval_derivative(nl_, 2, s.u, s.lambda);
  const Vector fuuu = eval_derivative(nl_, 3, s.u, s.lambda);
  return fuuu.dot(a2.cwiseProduct(a2)) + 6.0 * fuu.cwiseProduct(a2).dot(v) + 3.0 * v.dot(gu(s) * v);
}

double AugmentedSystem::swallowtail_row_cubic_form(const AugmentedState& s) const {
  const SparseMatrix g = gu(s);
  const Vector& a = s.alpha;
  const Vector a2 = a.cwiseProduct(a);
  const Vector fuu = eval_derivative(nl_, 2, s.u, s.lambda);
  const Vector fuuu = eval_derivative(nl_, 3, s.u, s.lambda);
  const Vector g3 = g * (g * (g * s.vbar));
  return fuuu.dot(a2.cwiseProduct(a2)) + 6.0 * fuu.cwiseProduct(a2).dot(g * s.vbar) + 3.0 * s.vbar.dot(g3);
}

double AugmentedSystem::butterfly_monitor(const AugmentedState& s, const Vector& v) const {
  const SparseMatrix g = gu(s);
  const Vector& a = s.alpha;
  const Vector a2 = a.cwiseProduct(a);
  const Vector fuu = eval_derivative(nl_, 2, s.u, s.lambda);
  const Vector fuuu = eval_derivative(nl_, 3, s.u, s.lambda);
  const Vector fuuuu = eval_derivative(nl_, 4, s.u, s.lambda);
  const Vector rhs = -(3.0 * fuu.cwiseProduct(a).cwiseProduct(v) + fuuu.cwiseProduct(a2).cwiseProduct(a));
  const Vector w = g * normal_solve(g, a, rhs);
  return fuuuu.dot(a2.cwiseProduct(a2).cwiseProduct(a)) -
         15.0 * fuu.cwiseProduct(a).dot(v.cwiseProduct(v)) + 10.0 * fuu.cwiseProduct(a2).dot(w);
}

Vector AugmentedSystem::normalized(const Vector& alpha) const {
  const double nrm = std::sqrt(grid_.cell() * alpha.squaredNorm());
  if (nrm == 0.0) throw std::invalid_argument("normalized: zero vector");
  return alpha / nrm;
}

Sign solution_signature(const SparseMatrix& gu) { return sparse_symmetric_determinant_sign(gu); }

bool monitor_blows_up(double previous, double current, const BlowupThresholds& t) {
  if (!std::isfinite(current)) return true;
  if (std::abs(current) > t.absolute) return true;
  return std::abs(current) > t.growth_floor && std::abs(current) >= t.growth * std::abs(previous);
}

}  // namespace aseries

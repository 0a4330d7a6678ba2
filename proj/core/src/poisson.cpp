#include "aseries/poisson.hpp"

#include "aseries/bell.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace aseries {

Grid::Grid(int n, int m) : N(n), M(m) {
  if (n < 1 || m < 1) throw std::invalid_argument("Grid: N and M must be >= 1");
}

GridFunction::GridFunction(Grid g, Vector v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size())
    throw std::invalid_argument("GridFunction: expected " + std::to_string(grid.size()) +
                                " values, got " + std::to_string(values.size()));
}

double GridFunction::operator()(int i, int j) const {
  if (i < 1 || i > grid.N || j < 1 || j > grid.M) return 0.0;
  return values[grid.index(i, j)];
}

void write_grid_function(std::ostream& os, const GridFunction& f) {
  os << f.grid.N << ' ' << f.grid.M << '\n';
  os << std::setprecision(17);
  for (Eigen::Index k = 0; k < f.values.size(); ++k) os << f.values[k] << '\n';
}

GridFunction read_grid_function(std::istream& is) {
  int n = 0, m = 0;
  if (!(is >> n >> m) || n < 1 || m < 1)
    throw std::runtime_error("grid function: malformed header, expected 'N M'");
  Grid g(n, m);
  Vector v(g.size());
  for (int k = 0; k < g.size(); ++k) {
    if (!(is >> v[k]))
      throw std::runtime_error("grid function: expected " + std::to_string(g.size()) +
                               " values, read " + std::to_string(k));
  }
  return GridFunction(g, std::move(v));
}

void save_grid_function(const std::string& path, const GridFunction& f) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  write_grid_function(os, f);
}

GridFunction load_grid_function(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read " + path);
  return read_grid_function(is);
}

namespace {

// Position on the source grid in units of its spacing; snaps to nodes.
double node_coordinate(int i, int target_n, int source_n) {
  const double p = static_cast<double>(i) * (source_n + 1) / (target_n + 1);
  const double r = std::round(p);
  return std::abs(p - r) < 1e-12 ? r : p;
}

}  // namespace

GridFunction interpolate(const GridFunction& f, const Grid& target) {
  const Grid& src = f.grid;
  GridFunction out = GridFunction::zeros(target);
  for (int j = 1; j <= target.M; ++j) {
    const double py = node_coordinate(j, target.M, src.M);
    const int j0 = std::min(static_cast<int>(std::floor(py)), src.M);
    const double ty = py - j0;
    for (int i = 1; i <= target.N; ++i) {
      const double px = node_coordinate(i, target.N, src.N);
      const int i0 = std::min(static_cast<int>(std::floor(px)), src.N);
      const double tx = px - i0;
      const double v = (1 - tx) * (1 - ty) * f(i0, j0) + tx * (1 - ty) * f(i0 + 1, j0) +
                       (1 - tx) * ty * f(i0, j0 + 1) + tx * ty * f(i0 + 1, j0 + 1);
      out.values[target.index(i, j)] = v;
    }
  }
  return out;
}

// --- nonlinearities -----------------------------------------------------------

namespace {

const std::vector<BellMonomial>& cached_monomials(int n) {
  static const auto table = [] {
    std::array<std::vector<BellMonomial>, kMaxBellOrder + 1> t;
    for (int k = 0; k <= kMaxBellOrder; ++k) t[static_cast<std::size_t>(k)] = bell_monomials(k);
    return t;
  }();
  return table.at(static_cast<std::size_t>(n));
}

// B_n(x[1], ..., x[n]); x[0] is unused.
double bell_at(int n, const double* x) {
  double sum = 0.0;
  for (const auto& m : cached_monomials(n)) {
    double term = static_cast<double>(m.coefficient);
    for (std::size_t l = 0; l < m.index.entries.size(); ++l)
      for (int p = 0; p < m.index.entries[l]; ++p) term *= x[l + 1];
    sum += term;
  }
  return sum;
}

constexpr double kHalfPi = 1.5707963267948966;

void check_order(int order, int max) {
  if (order < 0 || order > max)
    throw std::invalid_argument("nonlinearity: derivative order " + std::to_string(order) +
                                " not available");
}

// Pieces of the exponential part E(t) = exp(g(t)), g(t) = t / (b t + 1).
struct ExpPart {
  double E = 0.0;
  std::array<double, kMaxBellOrder + 1> g{};   // g[k] = g^(k)(t), k >= 1
  std::array<double, kMaxBellOrder + 1> gb{};  // d/db of g^(k)(t); gb[0] = d/db g
};

ExpPart exp_part(int order, double t, double b) {
  const double w = b * t + 1.0;
  if (std::abs(w) < 1e-8) {
    std::ostringstream os;
    os << "bratu nonlinearity: pole at l2 t + 1 = " << w << " (t = " << t << ", l2 = " << b << ")";
    throw DomainError(os.str());
  }
  ExpPart p;
  p.E = std::exp(t / w);
  p.gb[0] = -t * t / (w * w);
  double fact = 1.0;
  for (int k = 1; k <= order; ++k) {
    fact *= k;
    const double c = (k % 2 == 1 ? 1.0 : -1.0) * fact;
    p.g[static_cast<std::size_t>(k)] = c * std::pow(b, k - 1) / std::pow(w, k + 1);
    const double first = k == 1 ? 0.0 : (k - 1) * std::pow(b, k - 2) / std::pow(w, k + 1);
    p.gb[static_cast<std::size_t>(k)] = c * (first - (k + 1) * std::pow(b, k - 1) * t / std::pow(w, k + 2));
  }
  return p;
}

}  // namespace

int BratuNonlinearity::max_order() const { return kMaxBellOrder - 1; }

double BratuNonlinearity::derivative(int order, double t, const Params& lambda) const {
  check_order(order, max_order());
  const ExpPart p = exp_part(order, t, lambda[1]);
  const double en = p.E * bell_at(order, p.g.data());
  const double l1 = lambda[0];
  return l1 * en + lambda[2] * std::pow(l1, order) * std::sin(l1 * t + order * kHalfPi);
}

Params BratuNonlinearity::parameter_gradient(int order, double t, const Params& lambda) const {
  check_order(order, max_order());
  const ExpPart p = exp_part(order, t, lambda[1]);
  const double l1 = lambda[0];
  const double l3 = lambda[2];
  const double en = p.E * bell_at(order, p.g.data());

  // d/db [E B_n(g', ..., g^(n))] = E (g_b B_n + sum_l C(n,l) B_{n-l} d/db g^(l)).
  double db = p.gb[0] * bell_at(order, p.g.data());
  for (int l = 1; l <= order; ++l)
    db += static_cast<double>(binomial(order, l)) * bell_at(order - l, p.g.data()) *
          p.gb[static_cast<std::size_t>(l)];
  db *= p.E;

  const double phase = l1 * t + order * kHalfPi;
  const double pn = std::pow(l1, order);
  const double dsin_dl1 = (order > 0 ? order * std::pow(l1, order - 1) * std::sin(phase) : 0.0) +
                          pn * t * std::cos(phase);
  return Params(en + l3 * dsin_dl1, l1 * db, pn * std::sin(phase));
}

double BratuNonlinearity::antiderivative(double t, const Params& lambda) const {
  const double l1 = lambda[0];
  const double b = lambda[1];
  // The pole b s + 1 = 0 must not lie between 0 and t.
  if (std::abs(b * t + 1.0) < 1e-8 || (b * t + 1.0) < 0.0)
    throw DomainError("bratu antiderivative: pole inside the integration interval");
  double exp_int = 0.0;
  if (t != 0.0 && l1 != 0.0) {
    auto integrand = [b](double s) { return std::exp(s / (b * s + 1.0)); };
    exp_int = boost::math::quadrature::gauss_kronrod<double, 21>::integrate(integrand, 0.0, t, 15,
                                                                              1e-14);
  }
  const double sin_int = l1 != 0.0 ? lambda[2] * (1.0 - std::cos(l1 * t)) / l1 : 0.0;
  return l1 * exp_int + sin_int;
}

PolynomialNonlinearity::PolynomialNonlinearity(std::vector<double> higher)
    : higher_(std::move(higher)) {
  if (higher_.size() + 3 > 12) throw std::invalid_argument("polynomial nonlinearity: degree above 12");
}

std::vector<double> PolynomialNonlinearity::coefficients(const Params& lambda) const {
  std::vector<double> a{0.0, lambda[0], lambda[1], lambda[2]};
  a.insert(a.end(), higher_.begin(), higher_.end());
  return a;
}

double PolynomialNonlinearity::derivative(int order, double t, const Params& lambda) const {
  check_order(order, max_order());
  const auto a = coefficients(lambda);
  // sum_{l >= order} a_l t^(l-order) / (l-order)!, by Horner in t.
  double s = 0.0;
  for (int l = static_cast<int>(a.size()) - 1; l >= order; --l) {
    s = s * t / (l - order + 1) + a[static_cast<std::size_t>(l)];
  }
  return s;
}

Params PolynomialNonlinearity::parameter_gradient(int order, double t, const Params&) const {
  check_order(order, max_order());
  Params g = Params::Zero();
  for (int i = 1; i <= 3; ++i)
    if (i >= order) g[i - 1] = std::pow(t, i - order) / static_cast<double>(factorial(i - order));
  return g;
}

double PolynomialNonlinearity::antiderivative(double t, const Params& lambda) const {
  const auto a = coefficients(lambda);
  double s = 0.0;
  for (std::size_t l = 1; l < a.size(); ++l)
    s += a[l] * std::pow(t, static_cast<double>(l + 1)) / static_cast<double>(factorial(static_cast<int>(l) + 1));
  return s;
}

Vector eval_derivative(const Nonlinearity& nl, int order, const Vector& u, const Params& lambda) {
  Vector out(u.size());
  for (Eigen::Index k = 0; k < u.size(); ++k) out[k] = nl.derivative(order, u[k], lambda);
  return out;
}

Eigen::MatrixX3d eval_parameter_gradient(const Nonlinearity& nl, int order, const Vector& u,
                                         const Params& lambda) {
  Eigen::MatrixX3d out(u.size(), 3);
  for (Eigen::Index k = 0; k < u.size(); ++k)
    out.row(k) = nl.parameter_gradient(order, u[k], lambda).transpose();
  return out;
}

// --- discretization -------------------------------------------------------------

namespace {

SparseMatrix second_difference(int n, double h) {
  Triplets t;
  const double s = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    t.emplace_back(i, i, -2.0 * s);
    if (i + 1 < n) {
      t.emplace_back(i, i + 1, s);
      t.emplace_back(i + 1, i, s);
    }
  }
  SparseMatrix d(n, n);
  d.setFromTriplets(t.begin(), t.end());
  return d;
}

SparseMatrix kron(const SparseMatrix& a, const SparseMatrix& b) {
  Triplets t;
  t.reserve(static_cast<std::size_t>(a.nonZeros() * b.nonZeros()));
  for (Eigen::Index ka = 0; ka < a.outerSize(); ++ka)
    for (SparseMatrix::InnerIterator ia(a, ka); ia; ++ia)
      for (Eigen::Index kb = 0; kb < b.outerSize(); ++kb)
        for (SparseMatrix::InnerIterator ib(b, kb); ib; ++ib)
          t.emplace_back(ia.row() * b.rows() + ib.row(), ia.col() * b.cols() + ib.col(),
                         ia.value() * ib.value());
  SparseMatrix k(a.rows() * b.rows(), a.cols() * b.cols());
  k.setFromTriplets(t.begin(), t.end());
  return k;
}

void check_size(const Vector& u, const SparseMatrix& L) {
  if (u.size() != L.rows())
    throw std::invalid_argument("grid vector has " + std::to_string(u.size()) +
                                " entries, operator has " + std::to_string(L.rows()) + " rows");
}

}  // namespace

SparseMatrix build_laplacian(const Grid& grid) {
  const SparseMatrix dxx = second_difference(grid.N, grid.dx());
  const SparseMatrix dyy = second_difference(grid.M, grid.dy());
  SparseMatrix L = kron(sparse_identity(grid.M), dxx) + kron(dyy, sparse_identity(grid.N));
  L.makeCompressed();
  return L;
}

Vector residual(const Vector& u, const Params& lambda, const Nonlinearity& nl, const SparseMatrix& L) {
  check_size(u, L);
  return L * u + eval_derivative(nl, 0, u, lambda);
}

SparseMatrix jacobian(const Vector& u, const Params& lambda, const Nonlinearity& nl,
                      const SparseMatrix& L) {
  check_size(u, L);
  const Vector fu = eval_derivative(nl, 1, u, lambda);
  SparseMatrix d(L.rows(), L.cols());
  d.reserve(Eigen::VectorXi::Constant(L.cols(), 1));
  for (Eigen::Index k = 0; k < fu.size(); ++k) d.insert(k, k) = fu[k];
  SparseMatrix g = L + d;
  g.makeCompressed();
  return g;
}

double discrete_functional(const Vector& u, const Params& lambda, const Nonlinearity& nl,
                           const Grid& grid) {
  if (u.size() != grid.size()) throw std::invalid_argument("discrete_functional: size mismatch");
  const GridFunction f(grid, u);
  double ex = 0.0;
  for (int j = 1; j <= grid.M; ++j)
    for (int i = 0; i <= grid.N; ++i) {
      const double d = f(i + 1, j) - f(i, j);
      ex += d * d;
    }
  double ey = 0.0;
  for (int i = 1; i <= grid.N; ++i)
    for (int j = 0; j <= grid.M; ++j) {
      const double d = f(i, j + 1) - f(i, j);
      ey += d * d;
    }
  double s = -0.5 * (ex / (grid.dx() * grid.dx()) + ey / (grid.dy() * grid.dy()));
  for (Eigen::Index k = 0; k < u.size(); ++k) s += nl.antiderivative(u[k], lambda);
  return s;
}

// --- oracle ---------------------------------------------------------------------

namespace {
constexpr int kCachedOrders = 7;
}

PoissonOracle::PoissonOracle(Vector u, Params lambda, const Nonlinearity& nl, SparseMatrix L)
    : u_(std::move(u)), lambda_(lambda), nl_(nl), L_(std::move(L)) {
  gu_ = jacobian(u_, lambda_, nl_, L_);
  const int top = std::min(kCachedOrders, nl_.max_order());
  for (int k = 0; k <= top; ++k) diag_.push_back(eval_derivative(nl_, k, u_, lambda_));
}

Vector PoissonOracle::diagonal(int order) const {
  if (order < static_cast<int>(diag_.size())) return diag_[static_cast<std::size_t>(order)];
  return eval_derivative(nl_, order, u_, lambda_);
}

Vector PoissonOracle::partial(std::span<const Vector* const> args) const {
  const int k = static_cast<int>(args.size());
  if (k + 1 > max_order()) throw std::invalid_argument("PoissonOracle: order beyond the nonlinearity");
  if (k == 0) return L_ * u_ + diagonal(0);
  if (k == 1) return gu_ * *args[0];
  Vector p = diagonal(k);
  for (const Vector* a : args) p.array() *= a->array();
  return p;
}

double PoissonOracle::contract(std::span<const Vector* const> args) const {
  const int k = static_cast<int>(args.size());
  if (k < 1 || k > max_order()) throw std::invalid_argument("PoissonOracle: order out of range");
  return args[0]->dot(partial(args.subspan(1)));
}

}  // namespace aseries

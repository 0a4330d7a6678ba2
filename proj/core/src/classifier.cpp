#include "aseries/classifier.hpp"

#include "aseries/bell.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace aseries {

Vector DerivativeOracle::partial(std::span<const Vector* const> args) const {
  const int m = dimension();
  std::vector<const Vector*> full(args.size() + 1);
  std::copy(args.begin(), args.end(), full.begin() + 1);
  Vector e = Vector::Zero(m);
  Vector out(m);
  full[0] = &e;
  for (int i = 0; i < m; ++i) {
    e[i] = 1.0;
    out[i] = contract(full);
    e[i] = 0.0;
  }
  return out;
}

Matrix DerivativeOracle::hessian() const {
  const int m = dimension();
  Matrix h(m, m);
  Vector e = Vector::Zero(m);
  for (int j = 0; j < m; ++j) {
    e[j] = 1.0;
    const Vector* arg = &e;
    h.col(j) = partial(std::span<const Vector* const>(&arg, 1));
    e[j] = 0.0;
  }
  return h;
}

// --- DenseTensorOracle -------------------------------------------------------

namespace {

std::size_t ipow(std::size_t b, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

DenseTensorOracle::DenseTensorOracle(int dimension, std::vector<std::vector<double>> tensors,
                                     double symmetry_tol)
    : m_(dimension), tensors_(std::move(tensors)) {
  if (m_ < 1) throw std::invalid_argument("DenseTensorOracle: dimension must be >= 1");
  const auto m = static_cast<std::size_t>(m_);
  for (std::size_t k = 1; k <= tensors_.size(); ++k) {
    const auto& t = tensors_[k - 1];
    const std::size_t size = ipow(m, static_cast<int>(k));
    if (t.size() != size) {
      std::ostringstream os;
      os << "DenseTensorOracle: order " << k << " tensor has " << t.size() << " entries, expected "
         << size;
      throw std::invalid_argument(os.str());
    }
    std::vector<std::size_t> digits(k);
    double scale = 0.0;
    for (double x : t) scale = std::max(scale, std::abs(x));
    for (std::size_t flat = 0; flat < size; ++flat) {
      std::size_t rest = flat;
      for (std::size_t d = k; d-- > 0;) {
        digits[d] = rest % m;
        rest /= m;
      }
      std::sort(digits.begin(), digits.end());
      std::size_t canon = 0;
      for (std::size_t d = 0; d < k; ++d) canon = canon * m + digits[d];
      if (std::abs(t[flat] - t[canon]) > symmetry_tol * std::max(1.0, scale)) {
        std::ostringstream os;
        os << "DenseTensorOracle: order " << k << " tensor is not symmetric at entry " << flat;
        throw std::invalid_argument(os.str());
      }
    }
  }
}

double DenseTensorOracle::contract(std::span<const Vector* const> args) const {
  const int k = static_cast<int>(args.size());
  if (k < 1 || k > max_order())
    throw std::invalid_argument("DenseTensorOracle::contract: order out of range");
  const auto m = static_cast<std::size_t>(m_);
  std::vector<double> cur = tensors_[static_cast<std::size_t>(k - 1)];
  // Contract the trailing index first; cur shrinks by a factor m each pass.
  for (int a = k - 1; a >= 0; --a) {
    const Vector& v = *args[static_cast<std::size_t>(a)];
    const std::size_t outer = cur.size() / m;
    std::vector<double> next(outer, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
      double s = 0.0;
      for (std::size_t i = 0; i < m; ++i) s += cur[o * m + i] * v[static_cast<Eigen::Index>(i)];
      next[o] = s;
    }
    cur.swap(next);
  }
  return cur[0];
}

LinearlyTransformedOracle::LinearlyTransformedOracle(const DerivativeOracle& base, Matrix q)
    : base_(base), qt_(q.transpose()) {
  if (qt_.rows() != base.dimension() || qt_.cols() != base.dimension())
    throw std::invalid_argument("LinearlyTransformedOracle: matrix size mismatch");
}

double LinearlyTransformedOracle::contract(std::span<const Vector* const> args) const {
  std::vector<Vector> mapped;
  mapped.reserve(args.size());
  std::vector<const Vector*> ptrs;
  for (const Vector* a : args) {
    mapped.push_back(qt_ * *a);
  }
  for (const auto& v : mapped) ptrs.push_back(&v);
  return base_.contract(ptrs);
}

// --- kernel --------------------------------------------------------------------

namespace {

void canonical_sign(Vector& v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  if (v[idx] < 0) v = -v;
}

}  // namespace

KernelResult kernel_of_hessian(const DerivativeOracle& oracle, double tol_ratio) {
  if (oracle.max_order() < 2) throw std::invalid_argument("kernel_of_hessian: oracle lacks S^(2)");
  const Matrix h = oracle.hessian();
  const Matrix sym = 0.5 * (h + h.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  const Eigen::Index m = sym.rows();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) order[static_cast<std::size_t>(i)] = i;
  const Vector& ev = es.eigenvalues();
  std::sort(order.begin(), order.end(),
            [&](Eigen::Index a, Eigen::Index b) { return std::abs(ev[a]) > std::abs(ev[b]); });

  KernelResult r;
  r.singular_values.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) r.singular_values[i] = std::abs(ev[order[static_cast<std::size_t>(i)]]);

  if (m == 0) return r;
  Eigen::Index rank = m;
  if (r.singular_values[0] == 0.0) {
    rank = 0;
  } else {
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      if (r.singular_values[i + 1] <= tol_ratio * r.singular_values[i]) {
        rank = i + 1;
        break;
      }
    }
  }
  r.dimension = static_cast<int>(m - rank);
  if (r.dimension == 1) {
    Vector a = es.eigenvectors().col(order.back());
    a.normalize();
    canonical_sign(a);
    r.alpha = a;
  }
  return r;
}

// --- Bell contractions -----------------------------------------------------------

namespace {

// Arguments x_1..x_n of a Bell polynomial, one vector per slot.
using Slots = std::vector<const Vector*>;

std::vector<const Vector*> monomial_arguments(const BellMonomial& mono, const Slots& slots) {
  std::vector<const Vector*> args;
  args.reserve(static_cast<std::size_t>(mono.index.k));
  for (std::size_t l = 0; l < mono.index.entries.size(); ++l)
    for (int p = 0; p < mono.index.entries[l]; ++p) args.push_back(slots[l]);
  return args;
}

}  // namespace

Vector solve_on_complement(const Matrix& hessian, const Vector& alpha, const Vector& rhs) {
  const double aa = alpha.squaredNorm();
  if (aa == 0.0) throw std::invalid_argument("solve_on_complement: alpha is zero");
  const Matrix h = 0.5 * (hessian + hessian.transpose());
  double scale = h.cwiseAbs().rowwise().sum().maxCoeff();
  if (scale == 0.0) scale = 1.0;
  const Matrix a = h + (scale / aa) * alpha * alpha.transpose();
  const Vector b = rhs - alpha * (alpha.dot(rhs) / aa);

  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Vector& ev = es.eigenvalues();
  const double big = ev.cwiseAbs().maxCoeff();
  const double small = ev.cwiseAbs().minCoeff();
  if (!(small > 1e-12 * big))
    throw SingularSystemError("restricted Hessian is numerically singular (kernel dimension > 1?)");
  const Matrix& q = es.eigenvectors();
  Vector x = q * ((q.transpose() * b).array() / ev.array()).matrix();
  x -= alpha * (alpha.dot(x) / aa);
  return x;
}

Vector solve_jet_step(const DerivativeOracle& oracle, const Vector& alpha, const JetOfF& jet, int n) {
  if (n < 4) throw std::invalid_argument("solve_jet_step: n must be >= 4");
  const int p = n - 2;  // order of the jet derivative being determined
  if (static_cast<int>(jet.size()) < p - 2)
    throw InsufficientJetError("solve_jet_step: jet must contain F''(0) .. F^(n-3)(0)");
  if (oracle.max_order() < p + 1)
    throw std::invalid_argument("solve_jet_step: oracle order too small");

  const Vector zero = Vector::Zero(oracle.dimension());
  Slots slots(static_cast<std::size_t>(p));
  slots[0] = &alpha;
  for (int l = 2; l < p; ++l) slots[static_cast<std::size_t>(l - 1)] = &jet.derivatives[static_cast<std::size_t>(l - 2)];
  slots[static_cast<std::size_t>(p - 1)] = &zero;  // the unknown F^(p)(0)

  Vector g = Vector::Zero(oracle.dimension());
  for (const auto& mono : bell_monomials(p)) {
    // The single monomial x_p carries the unknown through S^(2).
    if (mono.index.k == 1) continue;
    const auto args = monomial_arguments(mono, slots);
    g += static_cast<double>(mono.coefficient) * oracle.partial(args);
  }
  return solve_on_complement(oracle.hessian(), alpha, -g);
}

double test_value(const DerivativeOracle& oracle, const Vector& alpha, const JetOfF& jet, int n,
                  const Vector* placeholder_c2, const Vector* placeholder_c1) {
  if (n < 3) throw std::invalid_argument("test_value: n must be >= 3");
  if (static_cast<int>(jet.size()) < n - 3)
    throw InsufficientJetError("test_value: jet must contain F''(0) .. F^(n-2)(0)");
  if (oracle.max_order() < n) throw std::invalid_argument("test_value: oracle order too small");

  const Vector zero = Vector::Zero(oracle.dimension());
  Slots slots(static_cast<std::size_t>(n));
  slots[0] = &alpha;
  for (int l = 2; l <= n - 2; ++l) slots[static_cast<std::size_t>(l - 1)] = &jet.derivatives[static_cast<std::size_t>(l - 2)];
  slots[static_cast<std::size_t>(n - 2)] = placeholder_c2 ? placeholder_c2 : &zero;
  slots[static_cast<std::size_t>(n - 1)] = placeholder_c1 ? placeholder_c1 : &zero;

  double r = 0.0;
  for (const auto& mono : bell_monomials(n)) {
    const auto args = monomial_arguments(mono, slots);
    r += static_cast<double>(mono.coefficient) * oracle.contract(args);
  }
  return r;
}

ClosedFormTests closed_form_tests(const DerivativeOracle& oracle, const Vector& alpha,
                                  double zero_tol, bool require_solvable) {
  if (oracle.max_order() < 4) throw std::invalid_argument("closed_form_tests: oracle order < 4");
  const Matrix h = oracle.hessian();
  const double anorm = alpha.norm();
  auto check = [&](const Vector& rhs, const char* what) {
    if (require_solvable && std::abs(alpha.dot(rhs)) / anorm > zero_tol)
      throw SolvabilityError(std::string("closed_form_tests: equation for ") + what +
                             " has a right-hand side component along the kernel");
  };
  const Vector* a = &alpha;

  ClosedFormTests t;
  {
    const Vector* args[] = {a, a, a};
    t.cusp = oracle.contract(args);
  }
  {
    const Vector* args[] = {a, a};
    const Vector rhs = -oracle.partial(args);
    check(rhs, "v");
    t.v = solve_on_complement(h, alpha, rhs);
  }
  {
    const Vector* args[] = {a, a, a, a};
    t.swallowtail = oracle.contract(args) - 3.0 * t.v.dot(h * t.v);
  }
  if (oracle.max_order() >= 5) {
    const Vector* a3[] = {a, a, a};
    const Vector* av[] = {a, &t.v};
    const Vector rhs = -oracle.partial(a3) - 3.0 * oracle.partial(av);
    check(rhs, "w");
    t.w = solve_on_complement(h, alpha, rhs);
    const Vector* a5[] = {a, a, a, a, a};
    const Vector* avv[] = {a, &t.v, &t.v};
    const Vector* aaw[] = {a, a, &t.w};
    t.butterfly = oracle.contract(a5) - 15.0 * oracle.contract(avv) + 10.0 * oracle.contract(aaw);
  } else {
    t.butterfly = std::numeric_limits<double>::quiet_NaN();
  }

  if (std::abs(t.cusp) > zero_tol)
    t.first_nonzero = 3;
  else if (std::abs(t.swallowtail) > zero_tol)
    t.first_nonzero = 4;
  else if (std::isfinite(t.butterfly) && std::abs(t.butterfly) > zero_tol)
    t.first_nonzero = 5;
  return t;
}

// --- detection --------------------------------------------------------------------

std::string to_string(SingularityKind k) {
  switch (k) {
    case SingularityKind::not_critical: return "not-critical";
    case SingularityKind::not_a_series: return "not-A-series";
    case SingularityKind::a_series: return "A-series";
    case SingularityKind::undetermined: return "undetermined";
  }
  return "?";
}

std::string SingularityReport::describe() const {
  std::ostringstream os;
  switch (kind) {
    case SingularityKind::not_critical: os << "not critical"; break;
    case SingularityKind::not_a_series:
      os << "not A-series (kernel dimension " << kernel_dimension << ")";
      break;
    case SingularityKind::a_series:
      os << "A" << order;
      if (signature) os << ", " << (*signature == Sign::positive ? "positive" : "negative");
      break;
    case SingularityKind::undetermined: os << "undetermined (at least A" << order << ")"; break;
  }
  return os.str();
}

SingularityReport detect_with_alpha(const DerivativeOracle& oracle, const Vector& alpha,
                                    const Tolerances& tol, int max_order) {
  if (max_order < 3) throw std::invalid_argument("detect: max_order must be >= 3");
  if (oracle.max_order() < max_order) throw std::invalid_argument("detect: oracle order below max_order");

  SingularityReport rep;
  rep.kernel_dimension = 1;
  rep.alpha = alpha;
  const double anorm = alpha.norm();

  for (int n = 3; n <= max_order; ++n) {
    if (n >= 4) rep.jet.derivatives.push_back(solve_jet_step(oracle, alpha, rep.jet, n));
    const double r = test_value(oracle, alpha, rep.jet, n);
    rep.test_values.push_back(r);
    if (std::abs(r) > tol.zero_test * std::pow(anorm, n)) {
      rep.kind = SingularityKind::a_series;
      rep.order = n - 1;
      if (n % 2 == 0) rep.signature = r > 0 ? Sign::positive : Sign::negative;
      return rep;
    }
  }
  rep.kind = SingularityKind::undetermined;
  rep.order = max_order;
  return rep;
}

SingularityReport detect(const DerivativeOracle& oracle, const Tolerances& tol, int max_order) {
  SingularityReport rep;
  const Vector grad = oracle.partial({});
  if (grad.lpNorm<Eigen::Infinity>() > tol.gradient) {
    rep.kind = SingularityKind::not_critical;
    rep.order = 1;
    return rep;
  }
  const KernelResult ker = kernel_of_hessian(oracle, tol.kernel_ratio);
  if (ker.dimension != 1) {
    rep.kind = SingularityKind::not_a_series;
    rep.kernel_dimension = ker.dimension;
    return rep;
  }
  return detect_with_alpha(oracle, *ker.alpha, tol, max_order);
}

Sign signature_of_hessian(const Matrix& h) { return dense_determinant_sign(h); }
Sign signature_of_hessian(const SparseMatrix& h) { return sparse_symmetric_determinant_sign(h); }

}  // namespace aseries

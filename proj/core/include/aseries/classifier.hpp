#pragma once

#include "aseries/linalg.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aseries {

/// Supplier of the symmetric multilinear forms S^(k)_0 of a functional on R^m.
class DerivativeOracle {
 public:
  virtual ~DerivativeOracle() = default;

  virtual int dimension() const = 0;
  virtual int max_order() const = 0;

  /// S^(k)_0(v_1, ..., v_k) with k = args.size(), 1 <= k <= max_order().
  virtual double contract(std::span<const Vector* const> args) const = 0;

  /// The covector xi -> S^(k+1)_0(xi, v_1, ..., v_k) for k = args.size().
  /// The default implementation contracts against the unit vectors.
  virtual Vector partial(std::span<const Vector* const> args) const;

  /// Dense Hessian S^(2)_0.
  virtual Matrix hessian() const;
};

/// Oracle backed by dense, fully stored symmetric tensors. Suitable for
/// small m; tensor k holds m^k entries in row-major multi-index order.
class DenseTensorOracle final : public DerivativeOracle {
 public:
  /// tensors[k-1] is S^(k)_0 for k = 1..K. Throws std::invalid_argument on
  /// size mismatch or if a tensor is not symmetric to `symmetry_tol`.
  DenseTensorOracle(int dimension, std::vector<std::vector<double>> tensors,
                    double symmetry_tol = 1e-12);

  int dimension() const override { return m_; }
  int max_order() const override { return static_cast<int>(tensors_.size()); }
  double contract(std::span<const Vector* const> args) const override;

  const std::vector<double>& tensor(int k) const { return tensors_.at(static_cast<std::size_t>(k - 1)); }

 private:
  int m_;
  std::vector<std::vector<double>> tensors_;
};

/// Oracle for S(Q^T z): every argument is mapped through Q^T before being
/// handed to the wrapped oracle.
class LinearlyTransformedOracle final : public DerivativeOracle {
 public:
  LinearlyTransformedOracle(const DerivativeOracle& base, Matrix q);
  int dimension() const override { return base_.dimension(); }
  int max_order() const override { return base_.max_order(); }
  double contract(std::span<const Vector* const> args) const override;

 private:
  const DerivativeOracle& base_;
  Matrix qt_;
};

/// Thrown when the restricted linear system of a jet step is singular,
/// which indicates a kernel of dimension > 1 or a wrong kernel vector.
class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when an auxiliary equation S^(2)(v, .) = rhs has a right-hand side
/// with a significant component along the kernel.
class SolvabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientJetError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct KernelResult {
  int dimension = 0;
  std::optional<Vector> alpha;  ///< unit vector, present iff dimension == 1
  Vector singular_values;       ///< descending
};

/// Kernel of the Hessian from its singular values: the kernel starts after
/// the first consecutive pair with sigma_{i+1} <= tol_ratio * sigma_i.
/// The returned alpha has unit Euclidean norm and its largest-magnitude
/// component positive.
KernelResult kernel_of_hessian(const DerivativeOracle& oracle, double tol_ratio = 1e-6);

/// Derivatives F''(0), F'''(0), ... of the kernel-to-range map.
struct JetOfF {
  std::vector<Vector> derivatives;  ///< derivatives[i] = F^{(i+2)}(0)

  std::size_t size() const { return derivatives.size(); }
};

/// F^{(n-2)}(0) from the Bell relation of order n-2, restricted to the
/// complement of alpha. Requires jet to hold F''(0) ... F^{(n-3)}(0).
Vector solve_jet_step(const DerivativeOracle& oracle, const Vector& alpha, const JetOfF& jet, int n);

/// r^{(n)}(0) = B_n(alpha, F''(0), ..., F^{(n-2)}(0), c_2, c_1) with each
/// monomial of degree k contracted by S^(k)_0. The two placeholder slots
/// default to zero; any values give the same result at a critical point.
double test_value(const DerivativeOracle& oracle, const Vector& alpha, const JetOfF& jet, int n,
                  const Vector* placeholder_c2 = nullptr, const Vector* placeholder_c1 = nullptr);

struct ClosedFormTests {
  double cusp = 0.0;         ///< S3(a,a,a)
  Vector v;                  ///< S2(v, .) = -S3(a, a, .)
  double swallowtail = 0.0;  ///< S4(a^4) - 3 S2(v, v)
  Vector w;                  ///< S2(w, .) = -S4(a, a, a, .) - 3 S3(a, v, .)
  double butterfly = 0.0;    ///< S5(a^5) - 15 S3(a, v, v) + 10 S3(a, a, w)
  /// Order n of the first test r^(n) that does not vanish (3, 4 or 5), or 0.
  int first_nonzero = 0;
};

/// Low-order tests in closed form. v and w are the least-squares solutions
/// on the complement of alpha. With require_solvable, a right-hand side
/// whose alpha-component exceeds zero_tol raises SolvabilityError.
ClosedFormTests closed_form_tests(const DerivativeOracle& oracle, const Vector& alpha,
                                  double zero_tol = 1e-8, bool require_solvable = false);

/// Least-squares solution of S2(x, xi) = rhs(xi) for xi orthogonal to alpha,
/// with x orthogonal to alpha. Uses the regularized matrix H + s alpha alpha^T.
Vector solve_on_complement(const Matrix& hessian, const Vector& alpha, const Vector& rhs);

enum class SingularityKind { not_critical, not_a_series, a_series, undetermined };

std::string to_string(SingularityKind k);

struct Tolerances {
  double gradient = 1e-10;
  double kernel_ratio = 1e-6;
  double zero_test = 1e-8;
};

struct SingularityReport {
  SingularityKind kind = SingularityKind::undetermined;
  int order = 0;                     ///< n of A_n; kernel dimension for not_a_series
  int kernel_dimension = 0;
  std::vector<double> test_values;   ///< r^(3)(0), r^(4)(0), ...
  std::optional<Sign> signature;     ///< A_{2k+1}: sign of r^(2k+2)(0)
  Vector alpha;
  JetOfF jet;

  /// "A3, positive", "A2", "not critical", ...
  std::string describe() const;
};

/// Runs gradient test, kernel test and the test loop up to r^(max_order).
SingularityReport detect(const DerivativeOracle& oracle, const Tolerances& tol = {}, int max_order = 6);

/// The test loop for a given kernel vector alpha (skips the kernel test).
SingularityReport detect_with_alpha(const DerivativeOracle& oracle, const Vector& alpha,
                                    const Tolerances& tol = {}, int max_order = 6);

/// Sign of det(H) by LU without pivoting; see dense_determinant_sign.
Sign signature_of_hessian(const Matrix& h);
Sign signature_of_hessian(const SparseMatrix& h);

}  // namespace aseries

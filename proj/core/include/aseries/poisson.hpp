#pragma once

#include "aseries/classifier.hpp"
#include "aseries/linalg.hpp"

#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace aseries {

/// Uniform interior grid of (0,1)^2 with N points in x and M points in y.
struct Grid {
  int N = 1;
  int M = 1;

  Grid() = default;
  Grid(int n, int m);

  double dx() const { return 1.0 / (N + 1); }
  double dy() const { return 1.0 / (M + 1); }
  double cell() const { return dx() * dy(); }
  int size() const { return N * M; }
  /// Flat position of U_{i,j}, 1 <= i <= N, 1 <= j <= M.
  int index(int i, int j) const { return (j - 1) * N + (i - 1); }

  bool operator==(const Grid&) const = default;
};

/// Interior values of a grid function; the zero boundary is never stored.
struct GridFunction {
  Grid grid;
  Vector values;

  GridFunction() = default;
  GridFunction(Grid g, Vector v);
  static GridFunction zeros(Grid g) { return GridFunction(g, Vector::Zero(g.size())); }

  double operator()(int i, int j) const;
};

/// Text format: "N M" on the first line, then N*M values, one per line.
void write_grid_function(std::ostream& os, const GridFunction& f);
GridFunction read_grid_function(std::istream& is);
void save_grid_function(const std::string& path, const GridFunction& f);
GridFunction load_grid_function(const std::string& path);

/// Bilinear interpolation onto another grid, treating the boundary as zero.
GridFunction interpolate(const GridFunction& f, const Grid& target);

using Params = Eigen::Vector3d;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A scalar nonlinearity f(t, lambda) with lambda in R^3.
class Nonlinearity {
 public:
  virtual ~Nonlinearity() = default;

  virtual std::string name() const = 0;
  /// Highest t-derivative order available.
  virtual int max_order() const = 0;
  /// d^n f / dt^n.
  virtual double derivative(int order, double t, const Params& lambda) const = 0;
  /// Gradient in lambda of d^n f / dt^n.
  virtual Params parameter_gradient(int order, double t, const Params& lambda) const = 0;
  /// Antiderivative in t with value 0 at t = 0.
  virtual double antiderivative(double t, const Params& lambda) const = 0;
};

/// f(t) = l1 exp(t / (l2 t + 1)) + l3 sin(l1 t).
class BratuNonlinearity final : public Nonlinearity {
 public:
  std::string name() const override { return "bratu"; }
  int max_order() const override;
  double derivative(int order, double t, const Params& lambda) const override;
  Params parameter_gradient(int order, double t, const Params& lambda) const override;
  double antiderivative(double t, const Params& lambda) const override;
};

/// f(t) = l1 t + l2 t^2/2 + l3 t^3/6 + sum_{l>=4} c_l t^l / l!.
class PolynomialNonlinearity final : public Nonlinearity {
 public:
  /// higher[0] is c_4, higher[1] is c_5, ...
  explicit PolynomialNonlinearity(std::vector<double> higher = {});

  std::string name() const override { return "polynomial"; }
  int max_order() const override { return 12; }
  double derivative(int order, double t, const Params& lambda) const override;
  Params parameter_gradient(int order, double t, const Params& lambda) const override;
  double antiderivative(double t, const Params& lambda) const override;

  const std::vector<double>& higher() const { return higher_; }

 private:
  std::vector<double> coefficients(const Params& lambda) const;
  std::vector<double> higher_;
};

/// Componentwise d^n f / dt^n over a grid vector.
Vector eval_derivative(const Nonlinearity& nl, int order, const Vector& u, const Params& lambda);
/// Componentwise lambda-gradient of d^n f / dt^n; one row per grid point.
Eigen::MatrixX3d eval_parameter_gradient(const Nonlinearity& nl, int order, const Vector& u,
                                         const Params& lambda);

/// L = Id_M (x) D_xx + D_yy (x) Id_N with zero Dirichlet boundary.
SparseMatrix build_laplacian(const Grid& grid);

/// G(u, lambda) = L u + f(u, lambda).
Vector residual(const Vector& u, const Params& lambda, const Nonlinearity& nl, const SparseMatrix& L);

/// G_u = L + diag(f_u(u, lambda)).
SparseMatrix jacobian(const Vector& u, const Params& lambda, const Nonlinearity& nl,
                      const SparseMatrix& L);

/// S(u) = 1/2 u^T L u + sum_k fbar(u_k), with the quadratic part summed as
/// squared differences over grid edges (boundary values zero).
double discrete_functional(const Vector& u, const Params& lambda, const Nonlinearity& nl,
                           const Grid& grid);

/// Classifier oracle of the discrete functional at (u, lambda): S^(1) = G,
/// S^(2) = G_u and, for k >= 3, diagonal tensors with entries f^(k-1)(u_j).
class PoissonOracle final : public DerivativeOracle {
 public:
  PoissonOracle(Vector u, Params lambda, const Nonlinearity& nl, SparseMatrix L);

  int dimension() const override { return static_cast<int>(u_.size()); }
  int max_order() const override { return nl_.max_order() + 1; }
  double contract(std::span<const Vector* const> args) const override;
  Vector partial(std::span<const Vector* const> args) const override;
  Matrix hessian() const override { return Matrix(gu_); }

  const SparseMatrix& gu() const { return gu_; }

 private:
  Vector diagonal(int order) const;

  Vector u_;
  Params lambda_;
  const Nonlinearity& nl_;
  SparseMatrix L_;
  SparseMatrix gu_;
  std::vector<Vector> diag_;  // f^(k)(u) for the low orders
};

}  // namespace aseries

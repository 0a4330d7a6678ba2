#include "aseries/poisson.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace aseries;

namespace {

Vector random_vector(int n, std::mt19937_64& rng, double lo = -0.5, double hi = 0.5) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

Params random_bratu_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> l1(0.5, 2.5), l2(0.0, 0.3), l3(-1.0, 1.0);
  return Params(l1(rng), l2(rng), l3(rng));
}

double call(const DerivativeOracle& o, std::initializer_list<const Vector*> args) {
  const std::vector<const Vector*> v(args);
  return o.contract(v);
}

}  // namespace

TEST(Grid, SpacingAndIndex) {
  const Grid g(3, 2);
  EXPECT_DOUBLE_EQ(g.dx(), 0.25);
  EXPECT_DOUBLE_EQ(g.dy(), 1.0 / 3.0);
  EXPECT_EQ(g.size(), 6);
  EXPECT_EQ(g.index(1, 1), 0);
  EXPECT_EQ(g.index(3, 1), 2);
  EXPECT_EQ(g.index(1, 2), 3);
  EXPECT_THROW(Grid(0, 1), std::invalid_argument);
}

TEST(Laplacian, SmallExamples) {
  EXPECT_EQ(Matrix(build_laplacian(Grid(1, 1))), Matrix::Constant(1, 1, -16.0));
  Matrix want(2, 2);
  want << -26, 9, 9, -26;
  EXPECT_EQ(Matrix(build_laplacian(Grid(2, 1))), want);
}

TEST(Laplacian, EigenvaluesMatchKroneckerSum) {
  for (int n = 1; n <= 8; ++n)
    for (int m = 1; m <= 8; m += 3) {
      const Grid g(n, m);
      const Matrix l(build_laplacian(g));
      ASSERT_EQ((l - l.transpose()).cwiseAbs().maxCoeff(), 0.0);
      Eigen::SelfAdjointEigenSolver<Matrix> es(l);
      std::vector<double> got(es.eigenvalues().data(), es.eigenvalues().data() + g.size());
      std::vector<double> want;
      for (int p = 1; p <= n; ++p)
        for (int q = 1; q <= m; ++q) {
          const double sx = std::sin(p * std::numbers::pi * g.dx() / 2);
          const double sy = std::sin(q * std::numbers::pi * g.dy() / 2);
          want.push_back(-4.0 / (g.dx() * g.dx()) * sx * sx - 4.0 / (g.dy() * g.dy()) * sy * sy);
        }
      std::sort(got.begin(), got.end());
      std::sort(want.begin(), want.end());
      for (std::size_t k = 0; k < want.size(); ++k)
        EXPECT_NEAR(got[k], want[k], 1e-10 * std::abs(want[k])) << n << "x" << m;
    }
}

TEST(Laplacian, SmallestMagnitudeEigenvalue) {
  for (int n : {1, 4, 8}) {
    const Matrix l(build_laplacian(Grid(n, n)));
    const double top = Eigen::SelfAdjointEigenSolver<Matrix>(l).eigenvalues().maxCoeff();
    const double s = std::sin(std::numbers::pi / (2.0 * (n + 1)));
    EXPECT_NEAR(top, -8.0 * (n + 1) * (n + 1) * s * s, 1e-10 * std::abs(top));
  }
}

TEST(Residual, Examples) {
  const BratuNonlinearity bratu;
  const PolynomialNonlinearity poly;
  const SparseMatrix l1 = build_laplacian(Grid(1, 1));
  EXPECT_DOUBLE_EQ(residual(Vector::Zero(1), Params(1, 0, 0), bratu, l1)[0], 1.0);
  const SparseMatrix l4 = build_laplacian(Grid(4, 3));
  EXPECT_EQ(residual(Vector::Zero(12), Params::Zero(), bratu, l4).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(residual(Vector::Zero(12), Params(3.0, -2.0, 5.0), poly, l4).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_THROW(residual(Vector::Zero(5), Params::Zero(), bratu, l4), std::invalid_argument);
}

TEST(Jacobian, Examples) {
  const BratuNonlinearity bratu;
  const PolynomialNonlinearity poly;
  EXPECT_DOUBLE_EQ(Matrix(jacobian(Vector::Zero(1), Params(1, 0, 0), bratu, build_laplacian(Grid(1, 1))))(0, 0),
                   -15.0);
  const SparseMatrix l = build_laplacian(Grid(3, 3));
  const Matrix j(jacobian(Vector::Zero(9), Params(2.5, 0, 0), poly, l));
  EXPECT_EQ(j, Matrix(l) + 2.5 * Matrix::Identity(9, 9));
}

TEST(Jacobian, MatchesFiniteDifferencesAndIsSymmetric) {
  std::mt19937_64 rng(21);
  const BratuNonlinearity bratu;
  const Grid g(4, 4);
  const SparseMatrix l = build_laplacian(g);
  for (int trial = 0; trial < 5; ++trial) {
    const Vector u = random_vector(g.size(), rng);
    const Params lam = random_bratu_params(rng);
    const Matrix j(jacobian(u, lam, bratu, l));
    EXPECT_EQ((j - j.transpose()).cwiseAbs().maxCoeff(), 0.0);
    const Matrix fd = aseries::testing::fd_jacobian([&](const Vector& x) { return residual(x, lam, bratu, l); }, u);
    EXPECT_LT((fd - j).cwiseAbs().maxCoeff(), 1e-6);
  }
}

TEST(DiscreteFunctional, Examples) {
  const BratuNonlinearity bratu;
  const PolynomialNonlinearity poly;
  const Grid g1(1, 1);
  EXPECT_EQ(discrete_functional(Vector::Zero(1), Params(2, 0.1, 0.3), bratu, g1), 0.0);
  // fbar(1) = l1/2 + l2/6 + l3/24 for the polynomial family.
  const Params lam(2.0, 3.0, 12.0);
  const double c = poly.antiderivative(1.0, lam);
  EXPECT_DOUBLE_EQ(c, 1.0 + 0.5 + 0.5);
  EXPECT_DOUBLE_EQ(discrete_functional(Vector::Ones(1), lam, poly, g1), -8.0 + c);
}

TEST(DiscreteFunctional, GradientIsResidual) {
  std::mt19937_64 rng(22);
  const BratuNonlinearity bratu;
  const PolynomialNonlinearity poly({0.7, -0.2});
  const Grid g(4, 4);
  const SparseMatrix l = build_laplacian(g);
  for (const Nonlinearity* nl : {static_cast<const Nonlinearity*>(&bratu), static_cast<const Nonlinearity*>(&poly)}) {
    const Vector u = random_vector(g.size(), rng);
    const Params lam = random_bratu_params(rng);
    const Vector r = residual(u, lam, *nl, l);
    const double h = 1e-5;
    Vector fd(g.size());
    for (int k = 0; k < g.size(); ++k) {
      Vector up = u, um = u;
      up[k] += h;
      um[k] -= h;
      fd[k] = (discrete_functional(up, lam, *nl, g) - discrete_functional(um, lam, *nl, g)) / (2 * h);
    }
    EXPECT_LT((fd - r).cwiseAbs().maxCoeff() / r.cwiseAbs().maxCoeff(), 1e-6) << nl->name();
  }
}

TEST(Nonlinearity, BratuDerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> ut(-0.6, 0.6);
  const BratuNonlinearity bratu;
  const double h = 1e-5;
  for (int trial = 0; trial < 20; ++trial) {
    const double t = ut(rng);
    const Params lam = random_bratu_params(rng);
    for (int order = 1; order <= 6; ++order) {
      const double fd = (bratu.derivative(order - 1, t + h, lam) - bratu.derivative(order - 1, t - h, lam)) / (2 * h);
      const double an = bratu.derivative(order, t, lam);
      EXPECT_NEAR(an, fd, 1e-6 * std::max(1.0, std::abs(an))) << "order " << order;
    }
  }
}

TEST(Nonlinearity, BratuClosedFormLowOrders) {
  // f = l1 e^{t/(l2 t+1)} + l3 sin(l1 t) at t = 0:
  // f = l1, f' = l1 + l3 l1, f'' = l1 (1 - 2 l2) + 0, f''' = l1 (1 - 6 l2 + 6 l2^2) - l3 l1^3.
  const BratuNonlinearity bratu;
  const Params lam(1.3, 0.2, 0.7);
  const double l1 = lam[0], l2 = lam[1], l3 = lam[2];
  EXPECT_NEAR(bratu.derivative(0, 0.0, lam), l1, 1e-15);
  EXPECT_NEAR(bratu.derivative(1, 0.0, lam), l1 + l3 * l1, 1e-14);
  EXPECT_NEAR(bratu.derivative(2, 0.0, lam), l1 * (1 - 2 * l2), 1e-14);
  EXPECT_NEAR(bratu.derivative(3, 0.0, lam), l1 * (1 - 6 * l2 + 6 * l2 * l2) - l3 * l1 * l1 * l1, 1e-13);
  EXPECT_DOUBLE_EQ(bratu.derivative(3, 0.0, Params(1, 0, 0)), 1.0);
}

TEST(Nonlinearity, ParameterGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> ut(-0.6, 0.6);
  const BratuNonlinearity bratu;
  const PolynomialNonlinearity poly({0.4});
  const double h = 1e-6;
  for (const Nonlinearity* nl : {static_cast<const Nonlinearity*>(&bratu), static_cast<const Nonlinearity*>(&poly)})
    for (int trial = 0; trial < 10; ++trial) {
      const double t = ut(rng);
      const Params lam = random_bratu_params(rng);
      for (int order = 0; order <= 4; ++order) {
        const Params an = nl->parameter_gradient(order, t, lam);
        for (int i = 0; i < 3; ++i) {
          Params p = lam, m = lam;
          p[i] += h;
          m[i] -= h;
          const double fd = (nl->derivative(order, t, p) - nl->derivative(order, t, m)) / (2 * h);
          EXPECT_NEAR(an[i], fd, 1e-6 * std::max(1.0, std::abs(fd))) << nl->name() << " order " << order << " l" << i + 1;
        }
      }
    }
}

TEST(Nonlinearity, AntiderivativeDifferentiatesToF) {
  std::mt19937_64 rng(25);
  std::uniform_real_distribution<double> ut(-0.6, 0.6);
  const BratuNonlinearity bratu;
  const PolynomialNonlinearity poly({0.4, -1.0});
  const double h = 1e-4;
  for (const Nonlinearity* nl : {static_cast<const Nonlinearity*>(&bratu), static_cast<const Nonlinearity*>(&poly)})
    for (int trial = 0; trial < 10; ++trial) {
      const double t = ut(rng);
      const Params lam = random_bratu_params(rng);
      EXPECT_EQ(nl->antiderivative(0.0, lam), 0.0);
      const double fd = (nl->antiderivative(t + h, lam) - nl->antiderivative(t - h, lam)) / (2 * h);
      EXPECT_NEAR(fd, nl->derivative(0, t, lam), 1e-7 * std::max(1.0, std::abs(fd))) << nl->name();
    }
}

TEST(Nonlinearity, PolynomialFamilyCoefficients) {
  const PolynomialNonlinearity poly({5.0});
  const Params lam(2.0, 3.0, 4.0);
  EXPECT_EQ(poly.derivative(0, 0.0, lam), 0.0);
  EXPECT_EQ(poly.derivative(1, 0.0, lam), 2.0);
  EXPECT_EQ(poly.derivative(2, 0.0, lam), 3.0);
  EXPECT_EQ(poly.derivative(3, 0.0, lam), 4.0);
  EXPECT_EQ(poly.derivative(4, 0.0, lam), 5.0);
  EXPECT_EQ(poly.derivative(5, 0.0, lam), 0.0);
  // 2 t + 3 t^2/2 + 4 t^3/6 + 5 t^4/24 at t = 2
  EXPECT_DOUBLE_EQ(poly.derivative(0, 2.0, lam), 4.0 + 6.0 + 16.0 / 3.0 + 10.0 / 3.0);
  EXPECT_THROW(PolynomialNonlinearity(std::vector<double>(10, 1.0)), std::invalid_argument);
}

TEST(Nonlinearity, PoleRaisesDomainError) {
  const BratuNonlinearity bratu;
  EXPECT_THROW(bratu.derivative(0, -2.0, Params(1.0, 0.5, 0.0)), DomainError);
  EXPECT_THROW(bratu.parameter_gradient(1, -2.0, Params(1.0, 0.5, 0.0)), DomainError);
  EXPECT_THROW(bratu.antiderivative(-3.0, Params(1.0, 0.5, 0.0)), DomainError);
  EXPECT_NO_THROW(bratu.derivative(0, -1.0, Params(1.0, 0.5, 0.0)));
}

TEST(GridFunctionIo, RoundTripIsBitwise) {
  std::mt19937_64 rng(26);
  const Grid g(5, 3);
  const GridFunction f(g, random_vector(g.size(), rng, -10.0, 10.0));
  std::stringstream ss;
  write_grid_function(ss, f);
  const GridFunction back = read_grid_function(ss);
  EXPECT_EQ(back.grid, g);
  EXPECT_EQ(back.values, f.values);

  const BratuNonlinearity bratu;
  const SparseMatrix l = build_laplacian(g);
  const Params lam(1.7, 0.1, -0.4);
  EXPECT_EQ(residual(back.values, lam, bratu, l), residual(f.values, lam, bratu, l));
}

TEST(GridFunctionIo, MalformedInput) {
  std::stringstream header("0 2\n");
  EXPECT_THROW(read_grid_function(header), std::runtime_error);
  std::stringstream short_body("2 2\n1\n2\n3\n");
  EXPECT_THROW(read_grid_function(short_body), std::runtime_error);
  EXPECT_THROW(GridFunction(Grid(2, 2), Vector::Zero(3)), std::invalid_argument);
}

TEST(GridFunction, BoundaryReadsAsZero) {
  const GridFunction f(Grid(2, 2), Vector::LinSpaced(4, 1.0, 4.0));
  EXPECT_EQ(f(1, 1), 1.0);
  EXPECT_EQ(f(2, 1), 2.0);
  EXPECT_EQ(f(1, 2), 3.0);
  EXPECT_EQ(f(0, 1), 0.0);
  EXPECT_EQ(f(3, 2), 0.0);
  EXPECT_EQ(f(1, 3), 0.0);
}

TEST(Interpolate, ConstantTapersAtBoundaryAdjacentNodes) {
  // Source N = 3 (spacing 1/4), target N = 7 (spacing 1/8): odd target
  // nodes next to the boundary sit halfway between the wall and a source node.
  const GridFunction c(Grid(3, 3), Vector::Constant(9, 2.0));
  const GridFunction f = interpolate(c, Grid(7, 7));
  for (int j = 1; j <= 7; ++j)
    for (int i = 1; i <= 7; ++i) {
      const double wx = (i == 1 || i == 7) ? 0.5 : 1.0;
      const double wy = (j == 1 || j == 7) ? 0.5 : 1.0;
      EXPECT_DOUBLE_EQ(f(i, j), 2.0 * wx * wy) << i << "," << j;
    }
}

TEST(Interpolate, IdentityAndLinearFunctions) {
  std::mt19937_64 rng(27);
  const Grid g(4, 6);
  const GridFunction f(g, random_vector(g.size(), rng));
  EXPECT_EQ(interpolate(f, g).values, f.values);

  // x y vanishes on two walls only; bilinear interpolation is exact for it
  // away from the x = 1 and y = 1 walls, where the zero boundary takes over.
  const Grid src(3, 3), dst(7, 7);
  GridFunction xy = GridFunction::zeros(src);
  for (int j = 1; j <= 3; ++j)
    for (int i = 1; i <= 3; ++i) xy.values[src.index(i, j)] = (i * src.dx()) * (j * src.dy());
  const GridFunction fine = interpolate(xy, dst);
  for (int j = 1; j <= 6; ++j)
    for (int i = 1; i <= 6; ++i) EXPECT_NEAR(fine(i, j), (i * dst.dx()) * (j * dst.dy()), 1e-15);
}

TEST(PoissonOracle, ContractExamples) {
  const PolynomialNonlinearity poly;
  const Grid g(3, 3);
  const SparseMatrix l = build_laplacian(g);
  std::mt19937_64 rng(28);
  const Vector a = random_vector(g.size(), rng);
  const PoissonOracle o(Vector::Zero(g.size()), Params(1.0, 2.5, -1.0), poly, l);
  EXPECT_NEAR(call(o, {&a, &a, &a}), 2.5 * a.array().cube().sum(), 1e-14);
  EXPECT_NEAR(call(o, {&a, &a, &a, &a}), -1.0 * a.array().pow(4).sum(), 1e-14);

  const BratuNonlinearity bratu;
  const PoissonOracle b(Vector::Zero(1), Params(1, 0, 0), bratu, build_laplacian(Grid(1, 1)));
  const Vector e1 = Vector::Ones(1);
  EXPECT_DOUBLE_EQ(call(b, {&e1, &e1, &e1, &e1}), 1.0);
  EXPECT_DOUBLE_EQ(call(b, {&e1, &e1}), -15.0);
  EXPECT_DOUBLE_EQ(call(b, {&e1}), 1.0);
}

TEST(PoissonOracle, VanishingHessianFormAtEigenFold) {
  const PolynomialNonlinearity poly;
  const int n = 5;
  const Grid g(n, n);
  const SparseMatrix l = build_laplacian(g);
  const double s = std::sin(std::numbers::pi / (2.0 * (n + 1)));
  const double l1 = 8.0 * (n + 1) * (n + 1) * s * s;
  Vector alpha(g.size());
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= n; ++i)
      alpha[g.index(i, j)] = std::sin(std::numbers::pi * i * g.dx()) * std::sin(std::numbers::pi * j * g.dy());
  const PoissonOracle o(Vector::Zero(g.size()), Params(l1, 0, 0), poly, l);
  EXPECT_NEAR(call(o, {&alpha, &alpha}), 0.0, 1e-11);
}

TEST(PoissonOracle, HessianAndPartialsAgreeWithAssembly) {
  std::mt19937_64 rng(29);
  const BratuNonlinearity bratu;
  const Grid g(3, 4);
  const SparseMatrix l = build_laplacian(g);
  const Vector u = random_vector(g.size(), rng);
  const Params lam = random_bratu_params(rng);
  const PoissonOracle o(u, lam, bratu, l);
  const Matrix gu(jacobian(u, lam, bratu, l));
  EXPECT_EQ(o.hessian(), gu);
  const Vector a = random_vector(g.size(), rng), b = random_vector(g.size(), rng);
  EXPECT_NEAR(call(o, {&a, &b}), a.dot(gu * b), 1e-12);
  EXPECT_LT((o.partial(std::vector<const Vector*>{}) - residual(u, lam, bratu, l)).cwiseAbs().maxCoeff(), 1e-14);

  // Symmetry and the diagonal structure of the higher forms.
  const Vector c = random_vector(g.size(), rng);
  const double abc = call(o, {&a, &b, &c});
  EXPECT_NEAR(call(o, {&c, &a, &b}), abc, 1e-14);
  const Vector f2 = eval_derivative(bratu, 2, u, lam);
  EXPECT_NEAR(abc, (f2.array() * a.array() * b.array() * c.array()).sum(), 1e-13);

  std::vector<const Vector*> too_many(static_cast<std::size_t>(o.max_order() + 1), &a);
  EXPECT_THROW(o.contract(too_many), std::invalid_argument);
}

TEST(PoissonOracle, ClassifiesTheTrivialPolynomialEigenFold) {
  // u = 0 with l1 at the first eigenvalue: an A2 point when l2 != 0.
  const PolynomialNonlinearity poly;
  const int n = 3;
  const Grid g(n, n);
  const double s = std::sin(std::numbers::pi / (2.0 * (n + 1)));
  const PoissonOracle o(Vector::Zero(g.size()), Params(8.0 * (n + 1) * (n + 1) * s * s, 1.0, 0.0), poly,
                        build_laplacian(g));
  const SingularityReport r = detect(o, Tolerances{}, 6);
  EXPECT_EQ(r.kind, SingularityKind::a_series);
  EXPECT_EQ(r.order, 2);
}

#include "aseries/classifier.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace aseries;
using aseries::testing::Monomial;
using aseries::testing::PolynomialFunctional;

namespace {

PolynomialFunctional poly2(std::vector<Monomial> terms) { return PolynomialFunctional(2, std::move(terms)); }

// x^4 + x^2 y + y^2
PolynomialFunctional quartic_coupled() { return poly2({{1.0, {4, 0}}, {1.0, {2, 1}}, {1.0, {0, 2}}}); }
// x^4/4 + y^2/2
PolynomialFunctional quartic_decoupled() { return poly2({{0.25, {4, 0}}, {0.5, {0, 2}}}); }

Vector e(int m, int i) { return Vector::Unit(m, i); }

double call(const DerivativeOracle& o, std::initializer_list<const Vector*> args) {
  const std::vector<const Vector*> v(args);
  return o.contract(v);
}

/// x^{n+1}/(n+1) + sum_{i>=1} s_i x_i^2 / 2 on R^m.
PolynomialFunctional canonical(int n, int m, double sign, const std::vector<double>& quad) {
  std::vector<Monomial> terms;
  std::vector<int> ex(static_cast<std::size_t>(m), 0);
  ex[0] = n + 1;
  terms.push_back({sign / (n + 1), ex});
  for (int i = 1; i < m; ++i) {
    std::vector<int> q(static_cast<std::size_t>(m), 0);
    q[static_cast<std::size_t>(i)] = 2;
    terms.push_back({0.5 * quad[static_cast<std::size_t>(i - 1)], q});
  }
  return PolynomialFunctional(m, terms);
}

}  // namespace

TEST(DenseTensorOracle, RejectsBadTensors) {
  EXPECT_THROW(DenseTensorOracle(2, {{0.0, 0.0}, {1.0, 2.0, 3.0}}), std::invalid_argument);
  EXPECT_THROW(DenseTensorOracle(2, {{0.0, 0.0}, {1.0, 2.0, 3.0, 4.0}}), std::invalid_argument);
  EXPECT_NO_THROW(DenseTensorOracle(2, {{0.0, 0.0}, {1.0, 2.0, 2.0, 4.0}}));
}

TEST(DenseTensorOracle, ContractIsSymmetricAndMultilinear) {
  std::mt19937_64 rng(5);
  const auto poly = aseries::testing::engineered_polynomial(3, 5, rng);
  const auto oracle = poly.functional.oracle(5);
  std::vector<Vector> v;
  for (int i = 0; i < 5; ++i) v.push_back(Vector::Random(3));
  std::vector<const Vector*> args{&v[0], &v[1], &v[2], &v[3], &v[4]};
  const double base = oracle.contract(args);
  for (int trial = 0; trial < 10; ++trial) {
    std::shuffle(args.begin(), args.end(), rng);
    EXPECT_NEAR(oracle.contract(args), base, 1e-12 * std::max(1.0, std::abs(base)));
  }
  // Linear in the first slot.
  const Vector w = Vector::Random(3);
  const Vector combo = 2.0 * v[0] - 3.0 * w;
  std::vector<const Vector*> a{&v[0], &v[1], &v[2]}, b{&w, &v[1], &v[2]}, c{&combo, &v[1], &v[2]};
  EXPECT_NEAR(oracle.contract(c), 2.0 * oracle.contract(a) - 3.0 * oracle.contract(b), 1e-12);
}

TEST(DenseTensorOracle, PartialMatchesContractionWithUnitVectors) {
  std::mt19937_64 rng(6);
  const auto oracle = aseries::testing::engineered_polynomial(3, 4, rng).functional.oracle(4);
  const Vector x = Vector::Random(3), y = Vector::Random(3);
  const std::vector<const Vector*> args{&x, &y};
  const Vector p = oracle.partial(args);
  for (int i = 0; i < 3; ++i) {
    const Vector ei = e(3, i);
    EXPECT_NEAR(p[i], call(oracle, {&ei, &x, &y}), 1e-13);
  }
}

TEST(DenseTensorOracle, HessianOfPolynomialMatchesLongDoubleOracle) {
  std::mt19937_64 rng(8);
  const auto poly = aseries::testing::engineered_polynomial(4, 4, rng);
  const Matrix h = poly.functional.oracle(4).hessian();
  const Matrix ref = poly.functional.hessian(aseries::testing::LVector::Zero(4)).cast<double>();
  EXPECT_LT((h - ref).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((h * poly.alpha).norm(), 1e-12);
}

TEST(Kernel, DiagonalExamples) {
  auto oracle_of = [](std::vector<double> d) {
    Matrix h = Vector::Map(d.data(), static_cast<Eigen::Index>(d.size())).asDiagonal();
    const int m = static_cast<int>(d.size());
    std::vector<double> flat(h.data(), h.data() + h.size());
    return DenseTensorOracle(m, {std::vector<double>(static_cast<std::size_t>(m), 0.0), flat});
  };
  const KernelResult a = kernel_of_hessian(oracle_of({0.0, 2.0}));
  EXPECT_EQ(a.dimension, 1);
  ASSERT_TRUE(a.alpha);
  EXPECT_LT((*a.alpha - e(2, 0)).norm(), 1e-14);
  const KernelResult b = kernel_of_hessian(oracle_of({1.0, 2.0}));
  EXPECT_EQ(b.dimension, 0);
  EXPECT_FALSE(b.alpha);
  const KernelResult c = kernel_of_hessian(oracle_of({0.0, 0.0, 3.0}));
  EXPECT_EQ(c.dimension, 2);
  EXPECT_FALSE(c.alpha);
  EXPECT_EQ(c.singular_values.size(), 3);
  EXPECT_DOUBLE_EQ(c.singular_values[0], 3.0);
}

TEST(Kernel, EngineeredKernelIsFoundWithCanonicalSign) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    const auto poly = aseries::testing::engineered_polynomial(4, 3, rng);
    const KernelResult k = kernel_of_hessian(poly.functional.oracle(3));
    ASSERT_EQ(k.dimension, 1);
    EXPECT_NEAR(std::abs(k.alpha->dot(poly.alpha)), 1.0, 1e-12);
    Eigen::Index idx = 0;
    k.alpha->cwiseAbs().maxCoeff(&idx);
    EXPECT_GT((*k.alpha)[idx], 0.0);
  }
}

TEST(JetStep, Examples) {
  const Vector alpha = e(2, 0);
  {
    const auto o = quartic_coupled().oracle(4);
    const Vector f2 = solve_jet_step(o, alpha, {}, 4);
    EXPECT_NEAR(f2[0], 0.0, 1e-14);
    EXPECT_NEAR(f2[1], -1.0, 1e-14);
  }
  {
    const auto o = quartic_decoupled().oracle(5);
    const Vector f2 = solve_jet_step(o, alpha, {}, 4);
    EXPECT_LT(f2.norm(), 1e-15);
  }
  {
    // S^(3) = S^(4) = 0.
    const auto o = poly2({{1.0, {5, 0}}, {0.5, {0, 2}}}).oracle(5);
    JetOfF jet;
    jet.derivatives.push_back(solve_jet_step(o, alpha, jet, 4));
    const Vector f3 = solve_jet_step(o, alpha, jet, 5);
    EXPECT_LT(f3.norm(), 1e-15);
    EXPECT_THROW(solve_jet_step(o, alpha, {}, 5), InsufficientJetError);
  }
}

TEST(TestValue, Examples) {
  const Vector alpha = e(2, 0);
  EXPECT_NEAR(test_value(poly2({{1.0, {3, 0}}, {1.0, {0, 2}}}).oracle(3), alpha, {}, 3), 6.0, 1e-13);
  JetOfF jet;
  jet.derivatives.push_back(Vector(Eigen::Vector2d(0.0, -1.0)));
  EXPECT_NEAR(test_value(quartic_coupled().oracle(4), alpha, jet, 4), 18.0, 1e-13);
  JetOfF zero;
  zero.derivatives.push_back(Vector::Zero(2));
  EXPECT_NEAR(test_value(quartic_decoupled().oracle(4), alpha, zero, 4), 6.0, 1e-13);
}

TEST(ClosedForm, Examples) {
  const Vector alpha = e(2, 0);
  const ClosedFormTests a = closed_form_tests(quartic_decoupled().oracle(4), alpha);
  EXPECT_NEAR(a.cusp, 0.0, 1e-15);
  EXPECT_LT(a.v.norm(), 1e-15);
  EXPECT_NEAR(a.swallowtail, 6.0, 1e-13);
  EXPECT_EQ(a.first_nonzero, 4);

  const ClosedFormTests b = closed_form_tests(poly2({{1.0, {3, 0}}, {1.0, {0, 2}}}).oracle(4), alpha);
  EXPECT_NEAR(b.cusp, 6.0, 1e-13);
  EXPECT_EQ(b.first_nonzero, 3);

  const ClosedFormTests c = closed_form_tests(quartic_coupled().oracle(5), alpha);
  EXPECT_NEAR(c.cusp, 0.0, 1e-15);
  EXPECT_NEAR(c.v[0], 0.0, 1e-14);
  EXPECT_NEAR(c.v[1], -1.0, 1e-14);
  EXPECT_NEAR(c.swallowtail, 18.0, 1e-13);
}

TEST(ClosedForm, SolvabilityIsCheckedOnRequest) {
  // S^(3)(a, a, .) has an a-component: x^3 + y^2 at the origin.
  const auto o = poly2({{1.0, {3, 0}}, {1.0, {0, 2}}}).oracle(4);
  EXPECT_THROW(closed_form_tests(o, e(2, 0), 1e-8, true), SolvabilityError);
  EXPECT_NO_THROW(closed_form_tests(o, e(2, 0), 1e-8, false));
}

TEST(ClosedForm, AgreesWithBellLoopOnRandomOracles) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 15; ++trial) {
    const auto poly = aseries::testing::engineered_polynomial(3, 6, rng);
    const auto o = poly.functional.oracle(5);
    const ClosedFormTests c = closed_form_tests(o, poly.alpha);
    JetOfF jet;
    const double r3 = test_value(o, poly.alpha, jet, 3);
    jet.derivatives.push_back(solve_jet_step(o, poly.alpha, jet, 4));
    const double r4 = test_value(o, poly.alpha, jet, 4);
    jet.derivatives.push_back(solve_jet_step(o, poly.alpha, jet, 5));
    const double r5 = test_value(o, poly.alpha, jet, 5);
    EXPECT_NEAR(c.cusp, r3, 1e-10 * std::abs(r3));
    EXPECT_NEAR(c.swallowtail, r4, 1e-10 * std::abs(r4));
    EXPECT_NEAR(c.butterfly, r5, 1e-10 * std::abs(r5));
    EXPECT_LT((c.v - jet.derivatives[0]).norm(), 1e-10 * c.v.norm());
    EXPECT_LT((c.w - jet.derivatives[1]).norm(), 1e-10 * c.w.norm());
  }
}

TEST(ClosedForm, ShiftInvarianceAlongKernelAtCuspPoint) {
  std::mt19937_64 rng(13);
  const auto poly = aseries::testing::engineered_polynomial(3, 5, rng);
  const Vector* a = &poly.alpha;
  // Cancel S^(3)(a, a, a) with a multiple of (a.x)^3, whose value there is 6.
  auto terms = poly.functional.terms();
  const double r3 = call(poly.functional.oracle(3), {a, a, a});
  for (const auto& m : aseries::testing::power_of_linear_form(poly.alpha, 3, -r3 / 6.0)) terms.push_back(m);
  const PolynomialFunctional cusp_fn(3, terms);
  const auto o = cusp_fn.oracle(5);
  ASSERT_NEAR(call(o, {a, a, a}), 0.0, 1e-12);

  const ClosedFormTests c = closed_form_tests(o, poly.alpha);
  const Matrix h = o.hessian();
  for (double t : {-0.7, 0.3, 2.5}) {
    // v -> v + t a forces w -> w + 3 t v in the w equation.
    const Vector v = c.v + t * poly.alpha;
    const Vector w = c.w + 3.0 * t * c.v;
    const double sw = call(o, {a, a, a, a}) - 3.0 * v.dot(h * v);
    const double bf = call(o, {a, a, a, a, a}) - 15.0 * call(o, {a, &v, &v}) + 10.0 * call(o, {a, a, &w});
    EXPECT_NEAR(sw, c.swallowtail, 1e-12 * std::max(1.0, std::abs(c.swallowtail)));
    EXPECT_NEAR(bf, c.butterfly, 1e-11 * std::max(1.0, std::abs(c.butterfly)));
  }
}

TEST(Detect, Examples) {
  const SingularityReport a4 = detect(poly2({{0.2, {5, 0}}, {0.5, {0, 2}}}).oracle(6));
  EXPECT_EQ(a4.kind, SingularityKind::a_series);
  EXPECT_EQ(a4.order, 4);
  ASSERT_EQ(a4.test_values.size(), 3u);
  EXPECT_NEAR(a4.test_values[0], 0.0, 1e-14);
  EXPECT_NEAR(a4.test_values[1], 0.0, 1e-14);
  EXPECT_NEAR(a4.test_values[2], 24.0, 1e-12);
  EXPECT_EQ(a4.describe(), "A4");

  const SingularityReport reg = detect(poly2({{1.0, {2, 0}}, {1.0, {0, 2}}}).oracle(3));
  EXPECT_EQ(reg.kind, SingularityKind::not_a_series);
  EXPECT_EQ(reg.kernel_dimension, 0);

  const SingularityReport lin = detect(poly2({{1.0, {1, 0}}, {1.0, {0, 2}}}).oracle(3));
  EXPECT_EQ(lin.kind, SingularityKind::not_critical);
  EXPECT_EQ(lin.describe(), "not critical");

  const SingularityReport d4 = detect(poly2({{1.0, {3, 0}}, {1.0, {1, 2}}}).oracle(3));
  EXPECT_EQ(d4.kind, SingularityKind::not_a_series);
  EXPECT_EQ(d4.kernel_dimension, 2);

  const SingularityReport flat = detect(poly2({{1.0, {0, 2}}}).oracle(4), {}, 4);
  EXPECT_EQ(flat.kind, SingularityKind::undetermined);
}

TEST(Detect, RotatedCuspIsPositiveA3) {
  std::mt19937_64 rng(14);
  const auto base = quartic_decoupled().oracle(4);
  const SingularityReport plain = detect(base, {}, 4);
  ASSERT_EQ(plain.describe(), "A3, positive");
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix q = aseries::testing::random_orthogonal(2, rng);
    const LinearlyTransformedOracle rotated(base, q);
    const SingularityReport r = detect(rotated, {}, 4);
    EXPECT_EQ(r.describe(), "A3, positive");
    EXPECT_NEAR(r.test_values.back(), plain.test_values.back(), 1e-12);
  }
}

TEST(Detect, CanonicalFormsUnderMixing) {
  std::mt19937_64 rng(15);
  for (int n = 2; n <= 5; ++n)
    for (double sign : {1.0, -1.0}) {
      const auto base = canonical(n, 3, sign, {1.0, -2.0}).oracle(n + 1);
      const LinearlyTransformedOracle mixed(base, aseries::testing::random_orthogonal(3, rng));
      const SingularityReport r = detect(mixed, {}, n + 1);
      ASSERT_EQ(r.kind, SingularityKind::a_series) << "n=" << n;
      EXPECT_EQ(r.order, n);
      // Every test below order n + 1 vanishes.
      for (int k = 3; k <= n; ++k) EXPECT_NEAR(r.test_values[static_cast<std::size_t>(k - 3)], 0.0, 1e-9);
      // r^(n+1) = sign n! (alpha^(n+1) of x^(n+1)/(n+1)), up to alpha's sign for even n.
      double nf = 1;
      for (int i = 2; i <= n; ++i) nf *= i;
      EXPECT_NEAR(std::abs(r.test_values.back()), nf, 1e-9 * nf);
      if (n % 2 == 1) {
        ASSERT_TRUE(r.signature);
        EXPECT_EQ(*r.signature, sign > 0 ? Sign::positive : Sign::negative);
      } else {
        EXPECT_FALSE(r.signature);
      }
    }
}

TEST(Detect, SignParityUnderAlphaFlip) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 8; ++trial) {
    const auto poly = aseries::testing::engineered_polynomial(3, 6, rng);
    const auto o = poly.functional.oracle(6);
    const Vector minus = -poly.alpha;
    JetOfF jp, jm;
    for (int n = 3; n <= 6; ++n) {
      if (n >= 4) {
        jp.derivatives.push_back(solve_jet_step(o, poly.alpha, jp, n));
        jm.derivatives.push_back(solve_jet_step(o, minus, jm, n));
        const int order = n - 2;  // F^(order)
        const double s = order % 2 == 0 ? 1.0 : -1.0;
        EXPECT_LT((jm.derivatives.back() - s * jp.derivatives.back()).norm(),
                  1e-9 * std::max(1.0, jp.derivatives.back().norm()));
      }
      const double rp = test_value(o, poly.alpha, jp, n);
      const double rm = test_value(o, minus, jm, n);
      const double s = n % 2 == 0 ? 1.0 : -1.0;
      EXPECT_NEAR(rm, s * rp, 1e-9 * std::max(1.0, std::abs(rp))) << "n=" << n;
    }
  }
}

TEST(Detect, JetVectorsAreOrthogonalToAlpha) {
  std::mt19937_64 rng(17);
  const auto poly = aseries::testing::engineered_polynomial(4, 6, rng);
  const SingularityReport r = detect_with_alpha(poly.functional.oracle(6), poly.alpha, {.zero_test = 1e30}, 6);
  ASSERT_EQ(r.jet.size(), 3u);
  for (const auto& f : r.jet.derivatives) EXPECT_LT(std::abs(f.dot(poly.alpha)), 1e-10 * std::max(1.0, f.norm()));
}

TEST(Detect, PlaceholdersDoNotMatter) {
  std::mt19937_64 rng(18);
  const auto poly = aseries::testing::engineered_polynomial(3, 6, rng);
  const auto o = poly.functional.oracle(6);
  JetOfF jet;
  for (int n = 3; n <= 6; ++n) {
    if (n >= 4) jet.derivatives.push_back(solve_jet_step(o, poly.alpha, jet, n));
    const double plain = test_value(o, poly.alpha, jet, n);
    const Vector c2 = Vector::Random(3), c1 = Vector::Random(3);
    EXPECT_NEAR(test_value(o, poly.alpha, jet, n, &c2, &c1), plain, 1e-11 * std::max(1.0, std::abs(plain)));
  }
}

TEST(Detect, FaaDiBrunoAgainstFiniteDifferences) {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 3; ++trial) {
    const auto poly = aseries::testing::engineered_polynomial(3, 6, rng);
    const auto o = poly.functional.oracle(6);
    JetOfF jet;
    aseries::testing::LVector guess = aseries::testing::LVector::Zero(2);
    auto r = [&](long double s) {
      aseries::testing::LVector g = guess;
      return aseries::testing::reduced_function(poly.functional, poly.alpha, poly.complement, s, g);
    };
    for (int n = 3; n <= 5; ++n) {
      if (n >= 4) jet.derivatives.push_back(solve_jet_step(o, poly.alpha, jet, n));
      const double exact = test_value(o, poly.alpha, jet, n);
      const double fd = static_cast<double>(aseries::testing::fd_derivative(r, n, 0.01L, 7));
      EXPECT_NEAR(exact, fd, 1e-5 * std::abs(fd)) << "n=" << n;
    }
  }
}

TEST(Signature, HessianSign) {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 2;
  h(1, 1) = 3;
  EXPECT_EQ(signature_of_hessian(h), Sign::positive);
  h(0, 0) = -1;
  EXPECT_EQ(signature_of_hessian(h), Sign::negative);
  h(0, 0) = 0;
  EXPECT_EQ(signature_of_hessian(h), Sign::degenerate);
  EXPECT_EQ(signature_of_hessian(SparseMatrix(h.sparseView())), Sign::degenerate);
}

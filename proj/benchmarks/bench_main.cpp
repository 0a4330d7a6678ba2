#include "aseries/augmented.hpp"
#include "aseries/bell.hpp"
#include "aseries/classifier.hpp"
#include "aseries/continuation.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace aseries;

namespace {

AugmentedState bratu_state(const Grid& g) {
  AugmentedState s;
  s.u = Vector::Constant(g.size(), 0.3);
  s.alpha = Vector(g.size());
  for (int j = 1; j <= g.M; ++j)
    for (int i = 1; i <= g.N; ++i)
      s.alpha[g.index(i, j)] = std::sin(std::numbers::pi * i * g.dx()) * std::sin(std::numbers::pi * j * g.dy());
  s.vbar = 0.01 * s.alpha;
  s.lambda = Params(6.0, 0.1, 0.05);
  return s;
}

void BM_BellMonomials(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(bell_monomials(n));
}
BENCHMARK(BM_BellMonomials)->DenseRange(4, 12, 4);

void BM_BellValue(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const std::vector<double> xs(static_cast<std::size_t>(n), 0.7);
  for (auto _ : state) benchmark::DoNotOptimize(bell_value(n, xs));
}
BENCHMARK(BM_BellValue)->DenseRange(4, 12, 4);

// Test loop up to r^(6) for a 12-dimensional dense oracle.
void BM_DetectDense(benchmark::State& state) {
  const int m = 12;
  std::vector<std::vector<double>> t;
  std::size_t size = 1;
  for (int k = 1; k <= 4; ++k) t.emplace_back(size *= m, 0.0);
  // x_0^4/4 plus a nondegenerate quadratic in the other coordinates.
  for (int i = 1; i < m; ++i) t[1][static_cast<std::size_t>(i * m + i)] = 1.0 + i;
  t[3][0] = 6.0;
  const DenseTensorOracle o(m, t);
  for (auto _ : state) benchmark::DoNotOptimize(detect(o, {}, 4));
}
BENCHMARK(BM_DetectDense);

void BM_AssembleF3(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BratuNonlinearity nl;
  const AugmentedSystem sys(Grid(n, n), nl);
  const AugmentedState s = bratu_state(sys.grid());
  for (auto _ : state) benchmark::DoNotOptimize(sys.f3(s));
}
BENCHMARK(BM_AssembleF3)->Arg(15)->Arg(31)->Arg(63);

void BM_SolveF3(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BratuNonlinearity nl;
  const AugmentedSystem sys(Grid(n, n), nl);
  const AugmentedState s = bratu_state(sys.grid());
  const Evaluation e = sys.evaluate(s, {Level::swallowtail, {0, 1, 2}, false});
  for (auto _ : state) benchmark::DoNotOptimize(solve(e.jacobian, e.residual));
}
BENCHMARK(BM_SolveF3)->Arg(15)->Arg(31);

void BM_SolutionBranchStep(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const BratuNonlinearity nl;
  const AugmentedSystem sys(Grid(n, n), nl);
  AugmentedState base;
  base.u = Vector::Zero(sys.n());
  const SystemLayout layout{Level::solution, {0}, false};
  ContinuationProblem p;
  p.evaluate = [&](const Vector& z) { return sys.evaluate(sys.unpack(z, base, layout), layout); };
  p.parameter_index = sys.n();
  const Vector z = sys.pack(base, layout);
  const Vector t = tangent(p.evaluate(z).jacobian, Vector::Unit(z.size(), sys.n()));
  const BranchPoint start = make_point(p, z, t, 0.0, 0);
  for (auto _ : state) benchmark::DoNotOptimize(step(p, start, 0.05));
}
BENCHMARK(BM_SolutionBranchStep)->Arg(15)->Arg(31);

}  // namespace

BENCHMARK_MAIN();

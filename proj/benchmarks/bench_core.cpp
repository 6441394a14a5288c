#include <benchmark/benchmark.h>

#include <random>

#include "fairbid/coverage.hpp"
#include "fairbid/market.hpp"
#include "fairbid/outer_solver.hpp"

namespace {

fairbid::MarketInstance make_market(int n, int m) {
  fairbid::MarketInstance market;
  market.n = n;
  market.m = m;
  market.type_prob = Eigen::VectorXd::Constant(m, 1.0 / m);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> rate(0.5, 2.0);
  for (int i = 0; i < n; ++i) {
    std::vector<fairbid::VirtualDistribution> row;
    for (int j = 0; j < m; ++j)
      row.push_back(fairbid::VirtualDistribution::virtual_given(
          fairbid::ValuationDistribution::exponential(rate(rng))));
    market.dist.push_back(std::move(row));
  }
  return market;
}

void BM_Coverage(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto market = make_market(n, 2);
  const auto alpha = fairbid::ShiftMatrix::zero(n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(fairbid::coverage_of_shift(market, alpha));
}
BENCHMARK(BM_Coverage)->Arg(2)->Arg(4)->Arg(6);

void BM_Jacobian(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto market = make_market(n, 2);
  const auto alpha = fairbid::ShiftMatrix::zero(n, 2);
  for (auto _ : state)
    benchmark::DoNotOptimize(fairbid::jacobian(market, alpha));
}
BENCHMARK(BM_Jacobian)->Arg(2)->Arg(4)->Arg(6);

void BM_Projection(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto market = make_market(n, 2);
  fairbid::FairnessSpec spec = fairbid::FairnessSpec::unconstrained(n, 2);
  spec.lower.setConstant(0.3);
  spec.constrained.setConstant(true);
  const fairbid::PolytopeQ poly(market, spec);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-0.5, 1.0);
  Eigen::VectorXd p(poly.dim());
  for (auto _ : state) {
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] = unit(rng);
    benchmark::DoNotOptimize(poly.project(p));
  }
}
BENCHMARK(BM_Projection)->Arg(2)->Arg(4)->Arg(6);

}  // namespace

BENCHMARK_MAIN();

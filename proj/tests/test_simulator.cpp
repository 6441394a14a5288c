#include <random>

#include "doctest.h"
#include "fairbid/coverage.hpp"
#include "fairbid/errors.hpp"
#include "fairbid/simulator.hpp"
#include "test_support.hpp"

using namespace fairbid;

TEST_CASE("symmetric market wins evenly") {
  MarketInstance mk;
  mk.n = 2;
  mk.m = 2;
  mk.type_prob = Eigen::VectorXd::Constant(2, 0.5);
  for (int i = 0; i < 2; ++i) {
    std::vector<VirtualDistribution> row;
    for (int j = 0; j < 2; ++j)
      row.push_back(
          VirtualDistribution::virtual_given(ValuationDistribution::exponential(1.0)));
    mk.dist.push_back(std::move(row));
  }
  const auto rep = simulate(mk, ShiftMatrix::zero(2, 2), 1000000, 123);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      CHECK(std::abs(rep.empirical_q(i, j) - 0.25) <= 3.0 * rep.empirical_q_stderr(i, j));
  CHECK(rep.empirical_q.sum() == doctest::Approx(1.0));
}

TEST_CASE("closed-form pair revenue") {
  const auto mk = testsup::exp_pair();
  const auto rep = simulate(mk, ShiftMatrix::zero(2, 1), 1000000, 321);
  CHECK(std::abs(rep.revenue_mean - 1.5) <= 3.0 * rep.revenue_stderr);
}

TEST_CASE("same seed is bit-identical") {
  std::mt19937_64 rng(97);
  const auto mk = testsup::random_instance(rng, 3, 2);
  const auto alpha = testsup::random_shift(rng, mk, 0.3);
  const auto a = simulate(mk, alpha, 50000, 999);
  const auto b = simulate(mk, alpha, 50000, 999);
  CHECK((a.empirical_q - b.empirical_q).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.revenue_mean == b.revenue_mean);
  const auto c = simulate(mk, alpha, 50000, 1000);
  CHECK((a.win_counts - c.win_counts).cwiseAbs().sum() != 0);
}

TEST_CASE("empirical coverage tracks quadrature") {
  std::mt19937_64 rng(101);
  const auto mk = testsup::random_instance(rng, 3, 2);
  const auto alpha = testsup::random_shift(rng, mk, 0.3);
  const auto rep = simulate(mk, alpha, 400000, 2024);
  const auto q = coverage_by_quadrature(mk, alpha);
  for (int i = 0; i < mk.n; ++i)
    for (int j = 0; j < mk.m; ++j)
      CHECK(std::abs(rep.empirical_q(i, j) - q(i, j)) <=
            4.0 * std::max(rep.empirical_q_stderr(i, j), 1e-6));
}

TEST_CASE("payment revenue equals virtual-surplus revenue in expectation") {
  // regular valuation-based cells: threshold payments average to the same
  // revenue as the virtual surplus
  MarketInstance mk;
  mk.n = 2;
  mk.m = 1;
  mk.type_prob = Eigen::VectorXd::Ones(1);
  for (int i = 0; i < 2; ++i)
    mk.dist.push_back(
        {VirtualDistribution::from_valuation(ValuationDistribution::uniform(0.0, 1.0))});
  const auto rep = simulate(mk, ShiftMatrix::zero(2, 1), 500000, 77);
  REQUIRE(rep.has_payment_revenue);
  CHECK(std::abs(rep.payment_revenue_mean - rep.revenue_mean) <=
        3.0 * (rep.payment_revenue_stderr + rep.revenue_stderr));
}

TEST_CASE("metric identities") {
  Eigen::MatrixXd q(2, 2);
  q << 0.3, 0.2, 0.25, 0.25;
  const auto m = metrics(q, 2.0, q, 2.0);
  CHECK(m.kappa == doctest::Approx(1.0));
  CHECK(m.d_tv == doctest::Approx(0.0));
  CHECK(m.slift == doctest::Approx(selection_lift(q)));
}

TEST_CASE("balanced proportional coverage has slift one") {
  Eigen::MatrixXd q(2, 2);
  q << 0.3, 0.3, 0.2, 0.2;
  CHECK(selection_lift(q) == doctest::Approx(1.0));
}

TEST_CASE("tv distance arithmetic") {
  Eigen::MatrixXd qm(2, 2), qf(2, 2);
  qm << 0.35, 0.25, 0.22, 0.18;  // winner shares 0.6 / 0.4
  qf << 0.3, 0.25, 0.25, 0.2;    // winner shares 0.55 / 0.45
  const auto m = metrics(qm, 1.0, qf, 1.0);
  CHECK(m.d_tv == doctest::Approx(0.05).epsilon(1e-12));
}

TEST_CASE("tv distance properties") {
  std::mt19937_64 rng(103);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Eigen::MatrixXd a(3, 2), b(3, 2), c(3, 2);
    for (auto* mat : {&a, &b, &c}) {
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) (*mat)(i, j) = u(rng);
      *mat /= mat->sum();
    }
    const double ab = metrics(a, 1.0, b, 1.0).d_tv;
    const double ba = metrics(b, 1.0, a, 1.0).d_tv;
    const double ac = metrics(a, 1.0, c, 1.0).d_tv;
    const double cb = metrics(c, 1.0, b, 1.0).d_tv;
    CHECK(metrics(a, 1.0, a, 1.0).d_tv == doctest::Approx(0.0));
    CHECK(ab == doctest::Approx(ba));
    CHECK(ab <= ac + cb + 1e-12);
  }
}

TEST_CASE("zero unconstrained revenue is rejected") {
  Eigen::MatrixXd q(2, 1);
  q << 0.5, 0.5;
  CHECK_THROWS_AS(metrics(q, 0.0, q, 1.0), DomainError);
}

#include <random>

#include "doctest.h"
#include "fairbid/errors.hpp"
#include "fairbid/mechanism.hpp"
#include "test_support.hpp"

using namespace fairbid;

TEST_CASE("highest shifted virtual value wins") {
  const auto mk = testsup::exp_pair();
  ShiftMatrix alpha = ShiftMatrix::zero(2, 1);
  std::mt19937_64 rng(1);

  std::vector<double> bids = {2.0, 1.0};
  auto out = allocate(mk, alpha, 0, bids, rng);
  CHECK(out.winner == 0);
  // second-highest score is the payment threshold
  CHECK(out.payment == doctest::Approx(1.0).epsilon(1e-12));

  alpha.alpha(0, 0) = -1.5;  // handicap flips the outcome
  out = allocate(mk, alpha, 0, bids, rng);
  CHECK(out.winner == 1);
  CHECK(out.payment == doctest::Approx(2.0 - 1.5).epsilon(1e-12));
}

TEST_CASE("payment is clipped at the support infimum") {
  const auto mk = testsup::exp_pair();
  const ShiftMatrix alpha = ShiftMatrix::zero(2, 1);
  std::mt19937_64 rng(1);
  // both bids tiny: threshold would be below the support floor of 0
  ShiftMatrix handicap = alpha;
  handicap.alpha(0, 0) = 5.0;
  std::vector<double> bids = {0.01, 0.02};
  const auto out = allocate(mk, handicap, 0, bids, rng);
  CHECK(out.winner == 0);
  CHECK(out.payment == 0.0);
}

TEST_CASE("valuation-based cells invert the threshold back to a valuation") {
  MarketInstance mk;
  mk.n = 2;
  mk.m = 1;
  mk.type_prob = Eigen::VectorXd::Ones(1);
  // uniform [0,1]: phi(v) = 2v - 1, phi^{-1}(y) = (y+1)/2
  for (int i = 0; i < 2; ++i)
    mk.dist.push_back(
        {VirtualDistribution::from_valuation(ValuationDistribution::uniform(0.0, 1.0))});
  const ShiftMatrix alpha = ShiftMatrix::zero(2, 1);
  std::mt19937_64 rng(1);
  std::vector<double> bids = {0.9, 0.6};
  const auto out = allocate(mk, alpha, 0, bids, rng);
  CHECK(out.winner == 0);
  CHECK_FALSE(out.payment_in_virtual_space);
  // loser's virtual value 0.2 inverts to valuation 0.6
  CHECK(out.payment == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("the item always sells") {
  std::mt19937_64 rng(17);
  const auto mk = testsup::random_instance(rng, 4, 2);
  const auto alpha = testsup::random_shift(rng, mk);
  for (int round = 0; round < 200; ++round) {
    std::uniform_int_distribution<int> type(0, mk.m - 1);
    const int j = type(rng);
    std::vector<double> bids(mk.n);
    for (int i = 0; i < mk.n; ++i) {
      const auto& d = mk.cell(i, j);
      bids[i] = d.is_virtual_given() ? d.sample_virtual(rng) : d.sample_valuation(rng);
    }
    const auto out = allocate(mk, alpha, j, bids, rng);
    CHECK(out.winner >= 0);
    CHECK(out.winner < mk.n);
  }
}

TEST_CASE("shape errors") {
  const auto mk = testsup::exp_pair();
  const ShiftMatrix alpha = ShiftMatrix::zero(2, 1);
  std::mt19937_64 rng(1);
  std::vector<double> bids = {1.0};
  CHECK_THROWS_AS(allocate(mk, alpha, 0, bids, rng), StructuralError);
  std::vector<double> ok = {1.0, 2.0};
  CHECK_THROWS_AS(allocate(mk, alpha, 5, ok, rng), StructuralError);
}

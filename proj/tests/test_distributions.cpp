#include <cmath>
#include <random>

#include "doctest.h"
#include "fairbid/distributions.hpp"
#include "fairbid/errors.hpp"
#include "fairbid/quadrature.hpp"

using namespace fairbid;

TEST_CASE("cdf and quantile are inverse") {
  std::vector<ValuationDistribution> ds = {
      ValuationDistribution::exponential(1.3),
      ValuationDistribution::uniform(0.5, 2.5),
      ValuationDistribution::log_normal(0.2, 0.6),
      ValuationDistribution::truncated_normal(1.0, 0.7, 0.0, 3.0),
      ValuationDistribution::empirical({0.3, 0.9, 1.1, 1.4, 2.0, 2.2, 0.7, 1.8})};
  for (const auto& d : ds) {
    for (double p : {0.05, 0.3, 0.5, 0.8, 0.99}) {
      CHECK(d.cdf(d.quantile(p)) == doctest::Approx(p).epsilon(1e-8));
    }
  }
}

TEST_CASE("pdf integrates to one") {
  std::vector<ValuationDistribution> ds = {
      ValuationDistribution::exponential(0.8),
      ValuationDistribution::log_normal(0.0, 0.5),
      ValuationDistribution::truncated_normal(0.5, 1.0, -1.0, 2.0),
      ValuationDistribution::empirical({1.0, 1.5, 2.0, 2.5, 0.5, 3.0})};
  for (const auto& d : ds) {
    const Interval t = d.truncated_support();
    const double mass = quad::integrate([&](double v) { return d.pdf(v); }, t.lo, t.hi);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-7));
  }
}

TEST_CASE("pdf matches cdf derivative") {
  const auto d = ValuationDistribution::truncated_normal(1.0, 0.5, 0.0, 2.5);
  for (double v : {0.3, 0.9, 1.4, 2.1}) {
    const double h = 1e-6;
    const double fd = (d.cdf(v + h) - d.cdf(v - h)) / (2.0 * h);
    CHECK(d.pdf(v) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("parameter validation") {
  CHECK_THROWS_AS(ValuationDistribution::exponential(0.0), DomainError);
  CHECK_THROWS_AS(ValuationDistribution::uniform(2.0, 1.0), DomainError);
  CHECK_THROWS_AS(ValuationDistribution::log_normal(0.0, -1.0), DomainError);
  CHECK_THROWS_AS(ValuationDistribution::empirical({1.0}), DomainError);
}

TEST_CASE("virtual valuation closed forms") {
  // exponential: phi(v) = v - 1/rate
  const auto e = ValuationDistribution::exponential(2.0);
  CHECK(virtual_valuation(e, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  // uniform on [0,1]: phi(v) = 2v - 1
  const auto u = ValuationDistribution::uniform(0.0, 1.0);
  CHECK(virtual_valuation(u, 0.25) == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(virtual_valuation(u, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(virtual_valuation(u, 2.0), DomainError);
}

TEST_CASE("regularity check accepts and rejects correctly") {
  CHECK(check_strict_regularity(ValuationDistribution::exponential(1.0)).strictly_regular);
  CHECK(check_strict_regularity(ValuationDistribution::uniform(0.0, 1.0)).strictly_regular);
  CHECK(check_strict_regularity(ValuationDistribution::log_normal(0.0, 0.5)).strictly_regular);
  // far-separated bimodal KDE has a decreasing stretch of phi
  std::vector<double> bimodal;
  for (int k = 0; k < 50; ++k) {
    bimodal.push_back(1.0 + 0.001 * k);
    bimodal.push_back(10.0 + 0.001 * k);
  }
  const auto rep = check_strict_regularity(ValuationDistribution::empirical(bimodal));
  CHECK_FALSE(rep.strictly_regular);
}

TEST_CASE("virtual distribution from a valuation distribution") {
  const auto vd =
      VirtualDistribution::from_valuation(ValuationDistribution::uniform(0.0, 1.0));
  // phi(V) = 2V - 1 is uniform on [-1, 1]
  CHECK(vd.F(0.0) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(vd.f(0.2) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK(vd.phi_inverse(0.5) == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(vd.support().lo == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(vd.support().hi == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(vd.mean_virtual() == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("irregular valuation distribution is rejected") {
  std::vector<double> bimodal;
  for (int k = 0; k < 50; ++k) {
    bimodal.push_back(1.0 + 0.001 * k);
    bimodal.push_back(10.0 + 0.001 * k);
  }
  CHECK_THROWS_AS(
      VirtualDistribution::from_valuation(ValuationDistribution::empirical(bimodal)),
      RegularityError);
}

TEST_CASE("virtual-given wraps the density unchanged") {
  const auto vd = VirtualDistribution::virtual_given(ValuationDistribution::exponential(1.0));
  CHECK(vd.f(0.5) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(vd.phi(0.7) == 0.7);
  CHECK(vd.mean_virtual() == doctest::Approx(1.0).epsilon(1e-8));
  std::mt19937_64 rng(1);
  CHECK_THROWS_AS(vd.sample_valuation(rng), DomainError);
}

TEST_CASE("sampling follows the distribution") {
  const auto d = ValuationDistribution::exponential(1.0);
  std::mt19937_64 rng(42);
  double acc = 0.0;
  const int N = 200000;
  for (int k = 0; k < N; ++k) acc += d.sample(rng);
  CHECK(acc / N == doctest::Approx(1.0).epsilon(0.01));
}

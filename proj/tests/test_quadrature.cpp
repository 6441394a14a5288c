#include <cmath>

#include "doctest.h"
#include "fairbid/errors.hpp"
#include "fairbid/quadrature.hpp"

using fairbid::quad::integrate;
using fairbid::quad::integrate_with_breakpoints;

TEST_CASE("polynomials are integrated exactly") {
  CHECK(integrate([](double x) { return x * x * x - 2.0 * x + 1.0; }, -1.0, 3.0) ==
        doctest::Approx(16.0).epsilon(1e-12));
}

TEST_CASE("smooth transcendental integrand") {
  const double got = integrate([](double x) { return std::exp(-x) * std::sin(3.0 * x); },
                               0.0, 10.0);
  // antiderivative -(exp(-x)(sin 3x + 3 cos 3x))/10
  const double want =
      (-(std::exp(-10.0) * (std::sin(30.0) + 3.0 * std::cos(30.0))) + 3.0) / 10.0;
  CHECK(got == doctest::Approx(want).epsilon(1e-9));
}

TEST_CASE("empty interval integrates to zero") {
  CHECK(integrate([](double) { return 1.0; }, 2.0, 2.0) == 0.0);
  CHECK(integrate([](double) { return 1.0; }, 3.0, 2.0) == 0.0);
}

TEST_CASE("kinked integrand converges fast with a breakpoint") {
  auto f = [](double x) { return std::abs(x - 0.3123); };
  const double want = (0.3123 * 0.3123 + (1.0 - 0.3123) * (1.0 - 0.3123)) / 2.0;
  CHECK(integrate_with_breakpoints(f, 0.0, 1.0, {0.3123}) ==
        doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("breakpoints outside the interval are ignored") {
  CHECK(integrate_with_breakpoints([](double x) { return x; }, 0.0, 1.0,
                                   {-5.0, 7.0, 0.5}) ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("non-converging integrand reports an error") {
  // white-noise-like integrand never stabilizes
  unsigned state = 12345;
  auto f = [&state](double) {
    state = state * 1664525u + 1013904223u;
    return static_cast<double>(state) / 4294967296.0;
  };
  CHECK_THROWS_AS(integrate(f, 0.0, 1.0, 1e-12, 8), fairbid::NumericError);
}

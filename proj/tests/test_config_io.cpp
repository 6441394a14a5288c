#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "fairbid/config_io.hpp"
#include "fairbid/coverage.hpp"
#include "fairbid/errors.hpp"
#include "test_support.hpp"

using namespace fairbid;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("config_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("run config round trip") {
  TempFile f("run.json");
  {
    std::ofstream out(f.path);
    out << R"({
      "market": {
        "type_prob": [0.5, 0.5],
        "distributions": [
          [{"family": "virtual_given", "density": {"family": "exponential", "rate": 1.0}},
           {"family": "uniform", "lo": 0.2, "hi": 1.2}],
          [{"family": "lognormal", "mu": 0.0, "sigma": 0.5},
           {"family": "truncated_normal", "mu": 1.0, "sigma": 0.5, "lo": 0.0, "hi": 3.0}]
        ]
      },
      "fairness": {"ell": 0.3},
      "solver": {"epsilon": 1e-3, "gamma": 0.05, "max_iters": 100},
      "samples": 1000,
      "seed": 7
    })";
  }
  const RunConfig cfg = load_run_config(f.path);
  REQUIRE(cfg.market.has_value());
  CHECK(cfg.market->n == 2);
  CHECK(cfg.market->m == 2);
  CHECK(cfg.market->cell(0, 0).is_virtual_given());
  CHECK_FALSE(cfg.market->cell(0, 1).is_virtual_given());
  REQUIRE(cfg.fairness.has_value());
  CHECK(cfg.fairness->ell(1, 1) == doctest::Approx(0.3));
  CHECK(cfg.solver.gamma.has_value());
  CHECK(*cfg.solver.max_iters == 100);
  CHECK(cfg.samples == 1000);
  CHECK(cfg.seed == 7);
}

TEST_CASE("market save and load round trip") {
  std::mt19937_64 rng(107);
  const auto mk = testsup::random_instance(rng, 3, 2);
  TempFile f("market.json");
  save_market(mk, f.path);
  const MarketInstance back = load_market(f.path);
  CHECK(back.n == mk.n);
  CHECK(back.m == mk.m);
  CHECK((back.type_prob - mk.type_prob).cwiseAbs().maxCoeff() < 1e-15);
  // identical parameters reproduce identical coverage
  const ShiftMatrix alpha = testsup::random_shift(rng, mk, 0.3);
  CHECK((coverage_of_shift(back, alpha) - coverage_of_shift(mk, alpha))
            .cwiseAbs()
            .maxCoeff() < 1e-12);
}

TEST_CASE("alpha save and load round trip") {
  ShiftMatrix s = ShiftMatrix::zero(3, 2);
  s.alpha(0, 0) = 0.25;
  s.alpha(1, 1) = -0.75;
  TempFile f("alpha.json");
  save_alpha(s, f.path);
  const ShiftMatrix back = load_alpha(f.path);
  CHECK((back.alpha - s.alpha).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("bad inputs raise config errors") {
  CHECK_THROWS_AS(load_market("does_not_exist.json"), ConfigError);
  TempFile f("broken.json");
  {
    std::ofstream out(f.path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(load_run_config(f.path), ConfigError);
  TempFile g("badmarket.json");
  {
    std::ofstream out(g.path);
    out << R"({"type_prob": [0.9], "distributions": [[{"family": "nope"}]]})";
  }
  CHECK_THROWS_AS(load_market(g.path), ConfigError);
}

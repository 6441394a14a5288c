#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fairbid/errors.hpp"
#include "fairbid/ingest.hpp"

using namespace fairbid;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("ingest_test_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

void append_bids(std::ofstream& out, const std::string& kw, const std::string& adv,
                 const std::vector<double>& bids) {
  for (double b : bids) out << kw << ',' << adv << ',' << b << '\n';
}

std::vector<double> lognormal_bids(std::mt19937_64& rng, int count, double mu,
                                   double sigma) {
  std::normal_distribution<double> z(mu, sigma);
  std::vector<double> out(count);
  for (auto& b : out) b = std::exp(z(rng));
  return out;
}

}  // namespace

TEST_CASE("well-formed csv parses") {
  TempFile f("ok.csv");
  {
    std::ofstream out(f.path);
    out << "keyword,advertiser,bid\n";
    out << "shoes,acme,1.25\nshoes,blue,0.75\nhats,acme,2.0\n";
  }
  const BidLog log = parse_log(f.path, LogFormat{});
  CHECK(log.records.size() == 3);
  CHECK(log.records[0].keyword == "shoes");
  CHECK(log.records[2].bid == doctest::Approx(2.0));
  CHECK(log.keywords() == std::vector<std::string>{"hats", "shoes"});
}

TEST_CASE("too many malformed lines fail with a line number") {
  TempFile f("bad.csv");
  {
    std::ofstream out(f.path);
    out << "keyword,advertiser,bid\n";
    for (int k = 0; k < 9; ++k) out << "kw,adv," << (1.0 + k * 0.1) << '\n';
    out << "kw,adv,not_a_number\n";
  }
  try {
    parse_log(f.path, LogFormat{});
    FAIL("expected a parse failure");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 11") != std::string::npos);
  }
}

TEST_CASE("empty file warns") {
  TempFile f("empty.csv");
  {
    std::ofstream out(f.path);
    out << "keyword,advertiser,bid\n";
  }
  const BidLog log = parse_log(f.path, LogFormat{});
  CHECK(log.records.empty());
  CHECK_FALSE(log.warnings.empty());
}

TEST_CASE("filter rules remove in order") {
  std::mt19937_64 rng(11);
  TempFile f("filters.csv");
  {
    std::ofstream out(f.path);
    out << "keyword,advertiser,bid\n";
    append_bids(out, "kw", "healthy_a", lognormal_bids(rng, 1500, 0.0, 0.5));
    append_bids(out, "kw", "healthy_b", lognormal_bids(rng, 1500, 0.0, 0.5));
    append_bids(out, "kw", "sparse", lognormal_bids(rng, 999, 0.0, 0.5));
    append_bids(out, "kw", "flat", std::vector<double>(2000, 1.0));
    // in [0.1, 0.4]: variance 0.0075 passes rule 2 but never outbids the others
    std::uniform_real_distribution<double> low(0.1, 0.4);
    std::vector<double> weak(1500);
    for (auto& b : weak) b = low(rng);
    append_bids(out, "kw", "weak", weak);
  }
  const BidLog log = parse_log(f.path, LogFormat{});
  const auto kept = filter_advertisers(log, "kw");
  CHECK(kept == std::vector<std::string>{"healthy_a", "healthy_b"});
  CHECK_THROWS_AS(filter_advertisers(log, "nope"), DomainError);
}

TEST_CASE("keyword pairing needs two shared advertisers") {
  std::mt19937_64 rng(13);
  TempFile f("pairs.csv");
  {
    std::ofstream out(f.path);
    out << "keyword,advertiser,bid\n";
    for (const char* kw : {"k1", "k2"}) {
      append_bids(out, kw, "a", lognormal_bids(rng, 1200, 0.0, 0.5));
      append_bids(out, kw, "b", lognormal_bids(rng, 1200, 0.1, 0.5));
    }
    append_bids(out, "k3", "a", lognormal_bids(rng, 1200, 0.0, 0.5));
    append_bids(out, "k3", "c", lognormal_bids(rng, 1200, 0.0, 0.5));
  }
  const BidLog log = parse_log(f.path, LogFormat{});
  const auto pairs = pair_keywords(log);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].keyword_a == "k1");
  CHECK(pairs[0].keyword_b == "k2");
  CHECK(pairs[0].shared_advertisers == std::vector<std::string>{"a", "b"});
}

TEST_CASE("lognormal fit recovers generating parameters") {
  std::mt19937_64 rng(17);
  TempFile f("fit.csv");
  {
    std::ofstream out(f.path);
    out << "keyword,advertiser,bid\n";
    for (const char* kw : {"k1", "k2"}) {
      append_bids(out, kw, "a", lognormal_bids(rng, 10000, 0.0, 0.5));
      append_bids(out, kw, "b", lognormal_bids(rng, 10000, 0.2, 0.4));
    }
  }
  const BidLog log = parse_log(f.path, LogFormat{});
  const auto pairs = pair_keywords(log);
  REQUIRE(pairs.size() == 1);
  const MarketInstance mk = fit_market(log, pairs[0]);
  CHECK(validate(mk).ok);
  CHECK(mk.n == 2);
  CHECK(mk.m == 2);
  CHECK(mk.type_prob[0] == doctest::Approx(0.5).epsilon(1e-9));
  // MLE standard error of mu is sigma/sqrt(N) ~ 0.005; allow 3x
  const auto& cell = mk.cell(0, 0).source();
  CHECK(cell.family() == ValuationDistribution::Family::LogNormal);
  CHECK(std::abs(cell.param(0) - 0.0) < 0.015);
  CHECK(std::abs(cell.param(1) - 0.5) < 0.015);
}

TEST_CASE("constant bids make the fit fail") {
  TempFile f("const.csv");
  {
    std::ofstream out(f.path);
    out << "keyword,advertiser,bid\n";
    for (const char* kw : {"k1", "k2"}) {
      append_bids(out, kw, "a", std::vector<double>(100, 1.0));
      append_bids(out, kw, "b", std::vector<double>(100, 2.0));
    }
  }
  const BidLog log = parse_log(f.path, LogFormat{});
  const KeywordPair pair{"k1", "k2", {"a", "b"}};
  CHECK_THROWS_AS(fit_market(log, pair), NumericError);
}

TEST_CASE("too few bids per cell is an error") {
  std::mt19937_64 rng(19);
  TempFile f("few.csv");
  {
    std::ofstream out(f.path);
    out << "keyword,advertiser,bid\n";
    for (const char* kw : {"k1", "k2"}) {
      append_bids(out, kw, "a", lognormal_bids(rng, 40, 0.0, 0.5));
      append_bids(out, kw, "b", lognormal_bids(rng, 10, 0.0, 0.5));
    }
  }
  const BidLog log = parse_log(f.path, LogFormat{});
  const KeywordPair pair{"k1", "k2", {"a", "b"}};
  CHECK_THROWS_AS(fit_market(log, pair), DomainError);
}

#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "fairbid/market.hpp"

namespace fairbid {

struct BidRecord {
  std::string keyword;
  std::string advertiser;
  double bid = 0.0;
};

struct BidLog {
  std::vector<BidRecord> records;
  std::vector<std::string> warnings;

  /// advertiser -> bids, in arrival order, for one keyword
  std::map<std::string, std::vector<double>> bids_for(const std::string& keyword) const;
  std::vector<std::string> keywords() const;
};

struct LogFormat {
  char delimiter = ',';
  int keyword_col = 0;
  int advertiser_col = 1;
  int bid_col = 2;
  bool has_header = true;
  double max_malformed_frac = 0.001;
};

BidLog parse_log(const std::string& path, const LogFormat& format);

struct FilterThresholds {
  std::size_t min_bids = 1000;
  double min_variance = 3e-3;
  double min_win_rate = 0.05;
};

/// The three removal rules, in order: too few bids, too little bid variance,
/// then too few wins in a round-robin replay of the surviving bids.
std::vector<std::string> filter_advertisers(const BidLog& log, const std::string& keyword,
                                            const FilterThresholds& thresholds = {});

struct KeywordPair {
  std::string keyword_a;
  std::string keyword_b;
  std::vector<std::string> shared_advertisers;  // post-filter, >= 2
};

std::vector<KeywordPair> pair_keywords(const BidLog& log,
                                       const FilterThresholds& thresholds = {});

struct FitSpec {
  enum class Method { LognormalMle, Kde };
  Method method = Method::LognormalMle;
  bool equal_type_prob = false;  // default: type weight = relative bid volume
  std::size_t min_bids_per_cell = 30;
  FilterThresholds thresholds;
};

/// Builds a 2-type market over the pair's shared advertisers, one fitted
/// distribution per (advertiser, keyword) cell. Lognormal fits that fail the
/// regularity check fall back to a KDE fit; if that also fails, errors.
MarketInstance fit_market(const BidLog& log, const KeywordPair& pair,
                          const FitSpec& spec = {});

}  // namespace fairbid

#include "fairbid/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fairbid/errors.hpp"

namespace fairbid {

namespace {

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, delim)) out.push_back(field);
  if (!line.empty() && line.back() == delim) out.push_back("");
  return out;
}

double sample_variance(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  if (v.size() < 2) return 0.0;
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / (n - 1.0);
}

}  // namespace

std::map<std::string, std::vector<double>> BidLog::bids_for(
    const std::string& keyword) const {
  std::map<std::string, std::vector<double>> out;
  for (const auto& r : records)
    if (r.keyword == keyword) out[r.advertiser].push_back(r.bid);
  return out;
}

std::vector<std::string> BidLog::keywords() const {
  std::set<std::string> seen;
  for (const auto& r : records) seen.insert(r.keyword);
  return {seen.begin(), seen.end()};
}

BidLog parse_log(const std::string& path, const LogFormat& format) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open bid log " + path);
  const int need = std::max({format.keyword_col, format.advertiser_col, format.bid_col}) + 1;

  BidLog log;
  std::string line;
  long line_no = 0, data_lines = 0, malformed = 0, first_bad = -1;
  bool header_pending = format.has_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (header_pending) {
      header_pending = false;
      continue;
    }
    if (line.empty()) continue;
    ++data_lines;
    const auto fields = split(line, format.delimiter);
    bool ok = static_cast<int>(fields.size()) >= need;
    double bid = 0.0;
    if (ok) {
      const std::string& ks = fields[format.keyword_col];
      const std::string& as = fields[format.advertiser_col];
      char* end = nullptr;
      bid = std::strtod(fields[format.bid_col].c_str(), &end);
      ok = !ks.empty() && !as.empty() && end && *end == '\0' && bid > 0.0 &&
           std::isfinite(bid);
      if (ok) log.records.push_back({ks, as, bid});
    }
    if (!ok) {
      ++malformed;
      if (first_bad < 0) first_bad = line_no;
    }
  }
  if (data_lines > 0 &&
      static_cast<double>(malformed) / data_lines > format.max_malformed_frac) {
    std::ostringstream os;
    os << "bid log " << path << ": " << malformed << " of " << data_lines
       << " lines malformed (first at line " << first_bad << "), above the "
       << format.max_malformed_frac << " threshold";
    throw ConfigError(os.str());
  }
  if (data_lines == 0) log.warnings.push_back("bid log " + path + " contains no records");
  return log;
}

std::vector<std::string> filter_advertisers(const BidLog& log, const std::string& keyword,
                                            const FilterThresholds& thresholds) {
  const auto bids = log.bids_for(keyword);
  if (bids.empty()) throw DomainError("keyword " + keyword + " not present in the log");

  std::vector<std::string> survivors;
  for (const auto& [adv, v] : bids) {
    if (v.size() < thresholds.min_bids) continue;               // rule 1
    if (sample_variance(v) < thresholds.min_variance) continue; // rule 2
    survivors.push_back(adv);
  }
  if (survivors.size() <= 1) return survivors;

  // rule 3: replay rounds round-robin over arrival order, max bid wins
  std::size_t rounds = std::numeric_limits<std::size_t>::max();
  for (const auto& adv : survivors) rounds = std::min(rounds, bids.at(adv).size());
  std::map<std::string, std::size_t> wins;
  for (std::size_t r = 0; r < rounds; ++r) {
    const std::string* best = nullptr;
    double best_bid = -1.0;
    for (const auto& adv : survivors) {
      const double b = bids.at(adv)[r];
      if (b > best_bid) {
        best_bid = b;
        best = &adv;
      }
    }
    wins[*best] += 1;
  }
  std::vector<std::string> out;
  for (const auto& adv : survivors)
    if (static_cast<double>(wins[adv]) / rounds >= thresholds.min_win_rate)
      out.push_back(adv);
  return out;
}

std::vector<KeywordPair> pair_keywords(const BidLog& log,
                                       const FilterThresholds& thresholds) {
  const auto kws = log.keywords();
  std::vector<std::vector<std::string>> kept;
  kept.reserve(kws.size());
  for (const auto& k : kws) kept.push_back(filter_advertisers(log, k, thresholds));

  std::vector<KeywordPair> pairs;
  for (std::size_t a = 0; a < kws.size(); ++a) {
    for (std::size_t b = a + 1; b < kws.size(); ++b) {
      std::vector<std::string> shared;
      std::set_intersection(kept[a].begin(), kept[a].end(), kept[b].begin(),
                            kept[b].end(), std::back_inserter(shared));
      if (shared.size() >= 2) pairs.push_back({kws[a], kws[b], std::move(shared)});
    }
  }
  return pairs;
}

namespace {

VirtualDistribution fit_cell(const std::vector<double>& bids, const FitSpec& spec,
                             const std::string& adv, const std::string& kw) {
  std::ostringstream where;
  where << "advertiser " << adv << " on keyword " << kw;

  if (spec.method == FitSpec::Method::LognormalMle) {
    std::vector<double> logs;
    logs.reserve(bids.size());
    for (double b : bids) logs.push_back(std::log(b));
    const double n = static_cast<double>(logs.size());
    const double mu = std::accumulate(logs.begin(), logs.end(), 0.0) / n;
    double ss = 0.0;
    for (double l : logs) ss += (l - mu) * (l - mu);
    const double sigma = std::sqrt(ss / n);
    if (!(sigma > 1e-9))
      throw NumericError("degenerate (near-constant) bids for " + where.str());
    try {
      return VirtualDistribution::from_valuation(
          ValuationDistribution::log_normal(mu, sigma));
    } catch (const RegularityError&) {
      // fall through to the KDE fit
    }
  }
  try {
    return VirtualDistribution::from_valuation(ValuationDistribution::empirical(bids));
  } catch (const RegularityError& e) {
    throw RegularityError("no regular fit for " + where.str() + ": " + e.what());
  }
}

}  // namespace

MarketInstance fit_market(const BidLog& log, const KeywordPair& pair,
                          const FitSpec& spec) {
  if (pair.shared_advertisers.size() < 2)
    throw StructuralError("keyword pair must share at least 2 advertisers");
  const auto bids_a = log.bids_for(pair.keyword_a);
  const auto bids_b = log.bids_for(pair.keyword_b);

  MarketInstance market;
  market.n = static_cast<int>(pair.shared_advertisers.size());
  market.m = 2;

  double vol_a = 0.0, vol_b = 0.0;
  for (const auto& adv : pair.shared_advertisers) {
    for (const auto* bids : {&bids_a, &bids_b}) {
      auto it = bids->find(adv);
      const std::size_t count = it == bids->end() ? 0 : it->second.size();
      if (count < spec.min_bids_per_cell) {
        std::ostringstream os;
        os << "advertiser " << adv << " has only " << count << " bids on keyword "
           << (bids == &bids_a ? pair.keyword_a : pair.keyword_b) << ", need "
           << spec.min_bids_per_cell;
        throw DomainError(os.str());
      }
      (bids == &bids_a ? vol_a : vol_b) += static_cast<double>(count);
    }
  }

  market.type_prob.resize(2);
  if (spec.equal_type_prob) {
    market.type_prob << 0.5, 0.5;
  } else {
    market.type_prob << vol_a / (vol_a + vol_b), vol_b / (vol_a + vol_b);
  }

  for (const auto& adv : pair.shared_advertisers) {
    std::vector<VirtualDistribution> row;
    row.push_back(fit_cell(bids_a.at(adv), spec, adv, pair.keyword_a));
    row.push_back(fit_cell(bids_b.at(adv), spec, adv, pair.keyword_b));
    market.dist.push_back(std::move(row));
  }

  const ValidationReport rep = validate(market);
  if (!rep.ok) {
    std::string joined;
    for (const auto& e : rep.errors) joined += e + "; ";
    throw StructuralError("fitted market failed validation: " + joined);
  }
  return market;
}

}  // namespace fairbid

#include "fairbid/config_io.hpp"

#include <filesystem>
#include <fstream>

#include "fairbid/errors.hpp"
#include "json.hpp"

namespace fairbid {

namespace {

using nlohmann::json;

// relative paths inside a config are taken relative to the config file
std::string resolve_path(const std::string& base_config, const std::string& p) {
  const std::filesystem::path rel(p);
  if (rel.is_absolute()) return p;
  return (std::filesystem::path(base_config).parent_path() / rel).string();
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("bad JSON in " + path + ": " + e.what());
  }
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << j.dump(2) << '\n';
}

ValuationDistribution density_from_json(const json& j) {
  const std::string family = j.at("family").get<std::string>();
  if (family == "exponential")
    return ValuationDistribution::exponential(j.at("rate").get<double>());
  if (family == "uniform")
    return ValuationDistribution::uniform(j.at("lo").get<double>(),
                                          j.at("hi").get<double>());
  if (family == "lognormal")
    return ValuationDistribution::log_normal(j.at("mu").get<double>(),
                                             j.at("sigma").get<double>());
  if (family == "truncated_normal")
    return ValuationDistribution::truncated_normal(
        j.at("mu").get<double>(), j.at("sigma").get<double>(), j.at("lo").get<double>(),
        j.at("hi").get<double>());
  if (family == "empirical")
    return ValuationDistribution::empirical(
        j.at("samples").get<std::vector<double>>(), j.value("bandwidth", 0.0));
  throw ConfigError("unknown distribution family '" + family + "'");
}

VirtualDistribution cell_from_json(const json& j) {
  if (j.at("family").get<std::string>() == "virtual_given") {
    // the nested record describes the density of the virtual value itself
    if (j.contains("density")) return VirtualDistribution::virtual_given(
        density_from_json(j.at("density")));
    json inner = j;
    inner["family"] = j.at("density_family");
    return VirtualDistribution::virtual_given(density_from_json(inner));
  }
  return VirtualDistribution::from_valuation(density_from_json(j));
}

json density_to_json(const ValuationDistribution& d) {
  json j;
  using F = ValuationDistribution::Family;
  switch (d.family()) {
    case F::Exponential:
      j["family"] = "exponential";
      j["rate"] = d.param(0);
      break;
    case F::Uniform:
      j["family"] = "uniform";
      j["lo"] = d.param(0);
      j["hi"] = d.param(1);
      break;
    case F::LogNormal:
      j["family"] = "lognormal";
      j["mu"] = d.param(0);
      j["sigma"] = d.param(1);
      break;
    case F::TruncatedNormal:
      j["family"] = "truncated_normal";
      j["mu"] = d.param(0);
      j["sigma"] = d.param(1);
      j["lo"] = d.param(2);
      j["hi"] = d.param(3);
      break;
    case F::Empirical:
      j["family"] = "empirical";
      j["samples"] = d.samples();
      j["bandwidth"] = d.bandwidth();
      break;
  }
  return j;
}

json cell_to_json(const VirtualDistribution& d) {
  if (d.is_virtual_given()) {
    json j;
    j["family"] = "virtual_given";
    j["density"] = density_to_json(d.source());
    return j;
  }
  return density_to_json(d.source());
}

MarketInstance market_from_json(const json& j) {
  MarketInstance market;
  const auto probs = j.at("type_prob").get<std::vector<double>>();
  market.m = static_cast<int>(probs.size());
  market.type_prob = Eigen::Map<const Eigen::VectorXd>(probs.data(), market.m);
  const json& grid = j.at("distributions");
  market.n = static_cast<int>(grid.size());
  for (const json& row : grid) {
    std::vector<VirtualDistribution> cells;
    for (const json& cell : row) cells.push_back(cell_from_json(cell));
    market.dist.push_back(std::move(cells));
  }
  const ValidationReport rep = validate(market);
  if (!rep.ok) {
    std::string joined;
    for (const auto& e : rep.errors) joined += e + "; ";
    throw ConfigError("invalid market config: " + joined);
  }
  return market;
}

Eigen::MatrixXd matrix_from_json(const json& j, int n, int m, const std::string& name) {
  if (static_cast<int>(j.size()) != n)
    throw ConfigError(name + " must have " + std::to_string(n) + " rows");
  Eigen::MatrixXd out(n, m);
  for (int i = 0; i < n; ++i) {
    const auto row = j.at(i).get<std::vector<double>>();
    if (static_cast<int>(row.size()) != m)
      throw ConfigError(name + " row " + std::to_string(i) + " has wrong length");
    for (int c = 0; c < m; ++c) out(i, c) = row[c];
  }
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& mat) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < mat.cols(); ++c) row.push_back(mat(i, c));
    rows.push_back(row);
  }
  return rows;
}

FairnessSpec fairness_from_json(const json& j, int n, int m) {
  FairnessSpec fs = FairnessSpec::unconstrained(n, m);
  if (j.contains("ell")) {
    // shorthand: symmetric bounds, one scalar
    const double l = j.at("ell").get<double>();
    fs.lower.setConstant(l);
    fs.upper.setConstant(j.value("u", 1.0));
    fs.constrained.setConstant(true);
    return fs;
  }
  fs.lower = matrix_from_json(j.at("lower"), n, m, "fairness.lower");
  fs.upper = matrix_from_json(j.at("upper"), n, m, "fairness.upper");
  if (j.contains("constrained")) {
    const json& c = j.at("constrained");
    for (int i = 0; i < n; ++i)
      for (int t = 0; t < m; ++t) fs.constrained(i, t) = c.at(i).at(t).get<bool>();
  } else {
    fs.constrained.setConstant(true);
  }
  return fs;
}

}  // namespace

RunConfig load_run_config(const std::string& path) {
  const json j = read_json(path);
  RunConfig cfg;
  try {
    if (j.contains("market_path"))
      cfg.market = load_market(resolve_path(path, j.at("market_path").get<std::string>()));
    else if (j.contains("market"))
      cfg.market = market_from_json(j.at("market"));
    if (cfg.market && j.contains("fairness"))
      cfg.fairness = fairness_from_json(j.at("fairness"), cfg.market->n, cfg.market->m);
    if (j.contains("solver")) {
      const json& s = j.at("solver");
      cfg.solver.epsilon = s.value("epsilon", cfg.solver.epsilon);
      if (s.contains("gamma")) cfg.solver.gamma = s.at("gamma").get<double>();
      if (s.contains("xi")) cfg.solver.xi = s.at("xi").get<double>();
      if (s.contains("max_iters")) cfg.solver.max_iters = s.at("max_iters").get<int>();
    }
    cfg.samples = j.value("samples", cfg.samples);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("ingest")) {
      const json& g = j.at("ingest");
      cfg.log_path = g.value("log_path", std::string());
      if (!cfg.log_path.empty()) cfg.log_path = resolve_path(path, cfg.log_path);
      const std::string delim = g.value("delimiter", std::string(","));
      if (delim.size() != 1) throw ConfigError("delimiter must be a single character");
      cfg.log_format.delimiter = delim[0];
      cfg.log_format.keyword_col = g.value("keyword_col", cfg.log_format.keyword_col);
      cfg.log_format.advertiser_col =
          g.value("advertiser_col", cfg.log_format.advertiser_col);
      cfg.log_format.bid_col = g.value("bid_col", cfg.log_format.bid_col);
      cfg.log_format.has_header = g.value("has_header", cfg.log_format.has_header);
      cfg.log_format.max_malformed_frac =
          g.value("max_malformed_frac", cfg.log_format.max_malformed_frac);
      const std::string method = g.value("fit", std::string("lognormal"));
      if (method == "lognormal")
        cfg.fit_spec.method = FitSpec::Method::LognormalMle;
      else if (method == "kde")
        cfg.fit_spec.method = FitSpec::Method::Kde;
      else
        throw ConfigError("unknown fit method '" + method + "'");
      cfg.fit_spec.equal_type_prob = g.value("equal_type_prob", false);
      cfg.fit_spec.min_bids_per_cell =
          g.value("min_bids_per_cell", cfg.fit_spec.min_bids_per_cell);
      cfg.fit_spec.thresholds.min_bids =
          g.value("min_bids", cfg.fit_spec.thresholds.min_bids);
      cfg.fit_spec.thresholds.min_variance =
          g.value("min_variance", cfg.fit_spec.thresholds.min_variance);
      cfg.fit_spec.thresholds.min_win_rate =
          g.value("min_win_rate", cfg.fit_spec.thresholds.min_win_rate);
    }
  } catch (const json::exception& e) {
    throw ConfigError("bad config " + path + ": " + e.what());
  }
  return cfg;
}

MarketInstance load_market(const std::string& path) {
  try {
    return market_from_json(read_json(path));
  } catch (const json::exception& e) {
    throw ConfigError("bad market file " + path + ": " + e.what());
  }
}

void save_market(const MarketInstance& market, const std::string& path) {
  json j;
  j["schema_version"] = kSchemaVersion;
  std::vector<double> probs(market.type_prob.data(),
                            market.type_prob.data() + market.m);
  j["type_prob"] = probs;
  json grid = json::array();
  for (const auto& row : market.dist) {
    json cells = json::array();
    for (const auto& d : row) cells.push_back(cell_to_json(d));
    grid.push_back(cells);
  }
  j["distributions"] = grid;
  write_json(j, path);
}

void save_alpha(const ShiftMatrix& alpha, const std::string& path) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["alpha"] = matrix_to_json(alpha.alpha);
  write_json(j, path);
}

ShiftMatrix load_alpha(const std::string& path) {
  const json j = read_json(path);
  try {
    const json& rows = j.at("alpha");
    const int n = static_cast<int>(rows.size());
    const int m = static_cast<int>(rows.at(0).size());
    ShiftMatrix s;
    s.alpha = matrix_from_json(rows, n, m, "alpha");
    return s;
  } catch (const json::exception& e) {
    throw ConfigError("bad shift file " + path + ": " + e.what());
  }
}

void save_coverage(const CoverageMatrix& q, const std::string& path) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["coverage"] = matrix_to_json(q);
  write_json(j, path);
}

void save_summary(const OuterResult& result, const std::string& path) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["revenue"] = result.revenue;
  j["iterations"] = result.iters;
  j["converged"] = result.converged;
  json est;
  est["eta"] = result.estimates.eta;
  est["mu_min"] = result.estimates.mu_min;
  est["mu_max"] = result.estimates.mu_max;
  est["lipschitz_L"] = result.estimates.lipschitz_L;
  est["rho"] = result.estimates.rho;
  est["G"] = result.estimates.G;
  est["warnings"] = result.estimates.warnings;
  j["estimates"] = est;
  write_json(j, path);
}

}  // namespace fairbid

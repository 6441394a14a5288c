#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "fairbid/ingest.hpp"
#include "fairbid/market.hpp"
#include "fairbid/outer_solver.hpp"

namespace fairbid {

inline constexpr int kSchemaVersion = 1;

struct SolverOverrides {
  double epsilon = 1e-3;
  std::optional<double> gamma;
  std::optional<double> xi;
  std::optional<int> max_iters;
};

/// One batch run, loaded from a JSON config file. Sections are optional and
/// commands check for the ones they need.
struct RunConfig {
  std::optional<MarketInstance> market;
  std::optional<FairnessSpec> fairness;
  SolverOverrides solver;
  std::int64_t samples = 1000000;
  std::uint64_t seed = 12345;

  // ingest section
  std::string log_path;
  LogFormat log_format;
  FitSpec fit_spec;
};

RunConfig load_run_config(const std::string& path);

/// Market round-trip, used by ingest output and by tests.
MarketInstance load_market(const std::string& path);
void save_market(const MarketInstance& market, const std::string& path);

void save_alpha(const ShiftMatrix& alpha, const std::string& path);
ShiftMatrix load_alpha(const std::string& path);
void save_coverage(const CoverageMatrix& q, const std::string& path);

void save_summary(const OuterResult& result, const std::string& path);

}  // namespace fairbid

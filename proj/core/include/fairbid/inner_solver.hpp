#pragma once

#include <optional>
#include <string>

#include "fairbid/constants.hpp"
#include "fairbid/market.hpp"

namespace fairbid {

struct InnerSolverConfig {
  /// Defaults derived from AssumptionEstimates when unset.
  std::optional<double> step_size;
  std::optional<int> max_iters;
  double target_loss = 1e-10;
  std::string trace_path;  // CSV per iteration when non-empty

  static InnerSolverConfig with_defaults(const AssumptionEstimates& est, int n,
                                         double target_loss);
};

struct InnerResult {
  ShiftMatrix alpha;
  double loss = 0.0;
  double grad_norm = 0.0;
  int iters = 0;
  bool converged = false;
};

/// Gradient descent on the squared coverage mismatch sum_{i<n,j}
/// (delta_ij - q_ij(alpha))^2, one independent subproblem per user type.
/// delta uses only its first n-1 rows; the gauge advertiser's coverage is
/// implied by the per-type totals.
InnerResult solve_shift(const MarketInstance& market, const CoverageMatrix& delta,
                        const ShiftMatrix& alpha_init, const InnerSolverConfig& cfg);

}  // namespace fairbid

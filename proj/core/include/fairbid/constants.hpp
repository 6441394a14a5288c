#pragma once

#include <string>
#include <vector>

#include "fairbid/market.hpp"

namespace fairbid {

/// Numerical stand-ins for the regularity constants the solvers' default
/// step sizes are built from. All grid-estimated, so order-of-magnitude only.
struct AssumptionEstimates {
  double eta = 0.0;          // smallest coverage entry at the reference shift
  double mu_min = 0.0;       // density bounds over the truncated supports
  double mu_max = 0.0;
  double lipschitz_L = 0.0;  // max finite-difference density slope
  double rho = 0.0;          // max |mean virtual value|
  double G = 0.0;            // revenue Lipschitz constant in coverage space
  std::vector<std::string> warnings;
};

AssumptionEstimates estimate(const MarketInstance& market, const ShiftMatrix& alpha0);

}  // namespace fairbid

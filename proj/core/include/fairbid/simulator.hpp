#pragma once

#include <cstdint>

#include "fairbid/market.hpp"

namespace fairbid {

struct SimulationReport {
  std::int64_t samples = 0;
  std::uint64_t seed = 0;
  Eigen::MatrixXd empirical_q;         // n x m win frequencies
  Eigen::MatrixXd empirical_q_stderr;  // binomial standard errors
  Eigen::MatrixXi win_counts;
  double revenue_mean = 0.0;    // virtual-surplus accounting
  double revenue_stderr = 0.0;
  bool has_payment_revenue = false;  // only when every cell is valuation-based
  double payment_revenue_mean = 0.0;
  double payment_revenue_stderr = 0.0;
};

/// Runs n_samples shifted auctions with truthful bids drawn from the market.
/// Bit-identical results for identical (market, alpha, n_samples, seed).
SimulationReport simulate(const MarketInstance& market, const ShiftMatrix& alpha,
                          std::int64_t n_samples, std::uint64_t seed);

struct FairnessMetrics {
  double kappa = 0.0;  // constrained revenue / unconstrained revenue
  double d_tv = 0.0;   // half L1 distance between winner distributions
  double slift = 0.0;  // min odds ratio of proportional coverage
};

/// slift of a single coverage matrix.
double selection_lift(const Eigen::MatrixXd& q);

/// Compares an unconstrained run M against a constrained run F given their
/// coverage matrices and revenues.
FairnessMetrics metrics(const Eigen::MatrixXd& q_m, double rev_m,
                        const Eigen::MatrixXd& q_f, double rev_f);
FairnessMetrics metrics(const SimulationReport& report_m, const SimulationReport& report_f);

}  // namespace fairbid

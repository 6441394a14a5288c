#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fairbid/market.hpp"

namespace fairbid {

/// One (n-1) x (n-1) block per user type; the full Jacobian of the reduced
/// coverage vector with respect to the reduced shifts is block diagonal
/// because shifts of one type never move another type's coverage.
struct JacobianBlocks {
  std::vector<Eigen::MatrixXd> block;

  /// Assembled block-diagonal matrix, mostly for tests and debugging.
  Eigen::MatrixXd dense() const;
};

/// Per-type pieces; the solvers work type by type.
/// coverage_column returns the n-1 quadrature rows of type j.
Eigen::VectorXd coverage_column(const MarketInstance& market, const ShiftMatrix& alpha,
                                int j);
Eigen::MatrixXd jacobian_block(const MarketInstance& market, const ShiftMatrix& alpha,
                               int j);

/// Coverage q_ij: probability that advertiser i gets type-j users, including
/// the type weight. Rows i < n-1 are computed by quadrature; the last row is
/// recovered from the always-sells identity sum_i q_ij = Pr[type j].
CoverageMatrix coverage_of_shift(const MarketInstance& market, const ShiftMatrix& alpha);

/// Same quantity with every row computed by quadrature, no identity shortcut.
CoverageMatrix coverage_by_quadrature(const MarketInstance& market,
                                      const ShiftMatrix& alpha);

/// Expected winning virtual value under the shifted allocation.
double revenue_of_shift(const MarketInstance& market, const ShiftMatrix& alpha);

/// d revenue / d alpha_ij, n x m with the pinned last row left at zero.
Eigen::MatrixXd revenue_gradient_of_shift(const MarketInstance& market,
                                          const ShiftMatrix& alpha);

/// d q_ij / d alpha_sj for i, s < n-1, one block per type. Throws
/// NumericError when a block loses strict diagonal dominance.
JacobianBlocks jacobian(const MarketInstance& market, const ShiftMatrix& alpha);

}  // namespace fairbid

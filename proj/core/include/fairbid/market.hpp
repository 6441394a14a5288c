#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fairbid/distributions.hpp"

namespace fairbid {

/// n advertisers bidding on m user types. dist is indexed [advertiser][type].
struct MarketInstance {
  int n = 0;
  int m = 0;
  Eigen::VectorXd type_prob;
  std::vector<std::vector<VirtualDistribution>> dist;

  const VirtualDistribution& cell(int i, int j) const { return dist[i][j]; }
  bool all_virtual_given() const;
  bool all_valuation_based() const;
};

/// Per-cell share bounds; a cell participates only when constrained(i,j).
struct FairnessSpec {
  Eigen::MatrixXd lower;  // n x m
  Eigen::MatrixXd upper;  // n x m
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> constrained;

  static FairnessSpec unconstrained(int n, int m);
  static FairnessSpec bounds(const Eigen::MatrixXd& lower, const Eigen::MatrixXd& upper);

  double ell(int i, int j) const { return constrained(i, j) ? lower(i, j) : 0.0; }
  double uu(int i, int j) const { return constrained(i, j) ? upper(i, j) : 1.0; }
};

/// Shift matrix alpha, n x m, with the last advertiser's row pinned to zero.
struct ShiftMatrix {
  Eigen::MatrixXd alpha;

  static ShiftMatrix zero(int n, int m);
  /// Expands the reduced vector x (index j*(n-1)+i over i<n-1... see reduced())
  static ShiftMatrix from_reduced(const Eigen::VectorXd& x, int n, int m);
  /// Stacks rows i < n-1 type-major: entry j*(n-1)+i = alpha(i,j).
  Eigen::VectorXd reduced() const;

  int n() const { return static_cast<int>(alpha.rows()); }
  int m() const { return static_cast<int>(alpha.cols()); }
};

using CoverageMatrix = Eigen::MatrixXd;  // n x m, q_ij

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
};

/// Structural checks on the instance and, optionally, the fairness bounds.
ValidationReport validate(const MarketInstance& market);
ValidationReport validate(const MarketInstance& market, const FairnessSpec& fairness);

}  // namespace fairbid

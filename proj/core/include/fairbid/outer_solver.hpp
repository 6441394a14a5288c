#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "fairbid/constants.hpp"
#include "fairbid/inner_solver.hpp"
#include "fairbid/market.hpp"

namespace fairbid {

/// Fairness polytope over the reduced coverage vector x, index j*(n-1)+i.
/// The pinned advertiser's coverage Pr[j] - sum_{i<n-1} x_ij is substituted
/// wherever it appears, so every constraint is a row of A x <= b.
class PolytopeQ {
 public:
  PolytopeQ(const MarketInstance& market, const FairnessSpec& spec);
  /// Explicit rows A x <= b over the reduced coverage vector, for constraint
  /// shapes the share bounds cannot express (e.g. pinning one coverage).
  PolytopeQ(Eigen::MatrixXd A, Eigen::VectorXd b, const Eigen::VectorXd& probe);

  /// Euclidean projection by an active-set method. Throws NumericError when
  /// the active set cycles past its iteration budget.
  Eigen::VectorXd project(const Eigen::VectorXd& point) const;

  bool feasible(const Eigen::VectorXd& x, double tol = 1e-9) const;
  int dim() const { return static_cast<int>(A_.cols()); }
  int rows() const { return static_cast<int>(A_.rows()); }
  const Eigen::MatrixXd& A() const { return A_; }
  const Eigen::VectorXd& b() const { return b_; }
  /// A feasible interior-ish point found at construction.
  const Eigen::VectorXd& witness() const { return witness_; }

 private:
  void find_witness(const Eigen::VectorXd& probe);

  Eigen::MatrixXd A_;
  Eigen::VectorXd b_;
  Eigen::VectorXd witness_;
};

/// Pulls the revenue gradient back to coverage space by solving the per-type
/// transposed Jacobian systems. Returned vector uses the reduced index.
Eigen::VectorXd revenue_gradient_in_coverage(const MarketInstance& market,
                                             const ShiftMatrix& alpha);

struct OuterSolverConfig {
  double epsilon = 1e-3;
  std::optional<double> gamma;      // default epsilon / (2 G^2)
  std::optional<double> xi;         // default (G * gamma)^2
  std::optional<int> max_iters;     // default 2 (G/epsilon)^2, clamped
  std::string trace_path;
};

struct OuterResult {
  ShiftMatrix alpha;
  CoverageMatrix q;
  double revenue = 0.0;
  int iters = 0;
  bool converged = false;
  AssumptionEstimates estimates;
};

/// Projected gradient ascent on revenue over the fairness polytope, with the
/// shift recovered after every step by the inner solver (warm-started).
/// Returns the best iterate seen, not the last.
OuterResult solve(const MarketInstance& market, const FairnessSpec& spec,
                  const OuterSolverConfig& cfg);
OuterResult solve(const MarketInstance& market, const PolytopeQ& poly,
                  const OuterSolverConfig& cfg);

}  // namespace fairbid

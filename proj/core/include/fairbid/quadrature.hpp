#pragma once

#include <functional>
#include <vector>

namespace fairbid::quad {

/// Nodes and weights of an N-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  /// Cached rule, computed once by Newton iteration on the Legendre polynomial.
  static const GaussLegendreRule& get(int n);
};

inline constexpr int kNodesPerPanel = 32;
inline constexpr int kMaxPanels = 1 << 14;
inline constexpr double kRelTol = 1e-9;

/// Composite Gauss-Legendre on [lo, hi]. Panels are doubled until successive
/// estimates agree to rel_tol; throws NumericError (carrying the last
/// estimate in the message) if the panel cap is reached first.
double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol = kRelTol, int max_panels = kMaxPanels);

/// Integrates over [lo, hi] split at the given interior breakpoints
/// (unsorted, possibly outside the interval; filtered and sorted here).
/// Splitting at kinks keeps the per-segment integrand smooth.
double integrate_with_breakpoints(const std::function<double(double)>& f,
                                  double lo, double hi,
                                  std::vector<double> breakpoints,
                                  double rel_tol = kRelTol,
                                  int max_panels = kMaxPanels);

}  // namespace fairbid::quad

#include "fairbid/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include "fairbid/errors.hpp"

namespace fairbid::quad {

namespace {

GaussLegendreRule compute_rule(int n) {
  // Newton iteration on P_n; nodes symmetric about 0.
  GaussLegendreRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int mid = (n + 1) / 2;
  for (int i = 0; i < mid; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 0; k < n; ++k) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k + 1.0) * x * p1 - k * p2) / (k + 1.0);
      }
      pp = n * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

double panel_sum(const std::function<double(double)>& f, double lo, double hi,
                 int panels, const GaussLegendreRule& rule) {
  const double h = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = lo + p * h;
    const double c = a + 0.5 * h;
    double acc = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
      acc += rule.weights[k] * f(c + 0.5 * h * rule.nodes[k]);
    }
    total += 0.5 * h * acc;
  }
  return total;
}

}  // namespace

const GaussLegendreRule& GaussLegendreRule::get(int n) {
  static std::mutex mu;
  static std::map<int, GaussLegendreRule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
  return it->second;
}

double integrate(const std::function<double(double)>& f, double lo, double hi,
                 double rel_tol, int max_panels) {
  if (!(hi > lo)) return 0.0;
  const auto& rule = GaussLegendreRule::get(kNodesPerPanel);
  double prev = panel_sum(f, lo, hi, 1, rule);
  for (int panels = 2; panels <= max_panels; panels *= 2) {
    const double cur = panel_sum(f, lo, hi, panels, rule);
    // absolute floor so near-zero tail integrals are not held to an
    // impossible relative target
    if (std::abs(cur - prev) <= rel_tol * std::abs(cur) + 1e-12) {
      return cur;
    }
    prev = cur;
  }
  std::ostringstream msg;
  msg << "quadrature did not converge on [" << lo << ", " << hi
      << "]; last estimate " << prev;
  throw NumericError(msg.str());
}

double integrate_with_breakpoints(const std::function<double(double)>& f,
                                  double lo, double hi,
                                  std::vector<double> breakpoints,
                                  double rel_tol, int max_panels) {
  if (!(hi > lo)) return 0.0;
  std::vector<double> pts;
  pts.push_back(lo);
  for (double b : breakpoints) {
    if (b > lo && b < hi) pts.push_back(b);
  }
  pts.push_back(hi);
  std::sort(pts.begin(), pts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (pts[i + 1] - pts[i] < 1e-300) continue;
    total += integrate(f, pts[i], pts[i + 1], rel_tol, max_panels);
  }
  return total;
}

}  // namespace fairbid::quad

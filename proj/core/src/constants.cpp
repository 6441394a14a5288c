#include "fairbid/constants.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fairbid/coverage.hpp"

namespace fairbid {

namespace {
constexpr int kGridPoints = 512;
}

AssumptionEstimates estimate(const MarketInstance& market, const ShiftMatrix& alpha0) {
  AssumptionEstimates est;
  est.mu_min = std::numeric_limits<double>::infinity();
  est.mu_max = 0.0;
  est.lipschitz_L = 0.0;
  est.rho = 0.0;

  for (int i = 0; i < market.n; ++i) {
    for (int j = 0; j < market.m; ++j) {
      const auto& d = market.cell(i, j);
      const Interval s = d.support();
      // endpoint-inclusive quantile grid over the truncated support
      const double p_lo = d.F(s.lo), p_hi = d.F(s.hi);
      double prev_y = 0.0, prev_f = 0.0;
      for (int k = 0; k < kGridPoints; ++k) {
        const double p = p_lo + (p_hi - p_lo) * k / (kGridPoints - 1.0);
        const double y = std::clamp(d.quantile(p), s.lo, s.hi);
        const double fv = d.f(y);
        est.mu_min = std::min(est.mu_min, fv);
        est.mu_max = std::max(est.mu_max, fv);
        if (k > 0 && y - prev_y > 1e-12)
          est.lipschitz_L = std::max(est.lipschitz_L, std::abs(fv - prev_f) / (y - prev_y));
        prev_y = y;
        prev_f = fv;
      }
      est.rho = std::max(est.rho, std::abs(d.mean_virtual()));
    }
  }

  const CoverageMatrix q = coverage_of_shift(market, alpha0);
  est.eta = std::max(q.minCoeff(), 1e-6);

  if (est.mu_min < 1e-9) {
    std::ostringstream os;
    os << "density lower bound " << est.mu_min
       << " is effectively zero; step-size formulas built on it are unreliable";
    est.warnings.push_back(os.str());
  }

  const double n2 = static_cast<double>(market.n) * market.n;
  est.G = (est.mu_min > 0.0) ? (est.mu_max * est.rho / (est.mu_min * est.eta)) * n2
                             : std::numeric_limits<double>::infinity();
  return est;
}

}  // namespace fairbid

#include "fairbid/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fairbid/errors.hpp"
#include "fairbid/quadrature.hpp"

namespace fairbid {

namespace {

// Everything needed about one user type: densities, shifts, supports.
struct TypeView {
  int n = 0;
  std::vector<const VirtualDistribution*> d;
  std::vector<double> a, lo, hi;

  TypeView(const MarketInstance& market, const ShiftMatrix& alpha, int j) {
    n = market.n;
    d.reserve(n);
    a.resize(n);
    lo.resize(n);
    hi.resize(n);
    for (int i = 0; i < n; ++i) {
      d.push_back(&market.cell(i, j));
      a[i] = alpha.alpha(i, j);
      lo[i] = d[i]->support().lo;
      hi[i] = d[i]->support().hi;
    }
  }
};

// Probability-style win integral for advertiser i:
//   I = int w(y) f_i(y) [f_e(y + a_i - a_e)] prod_{l != i,e} F_l(y + a_i - a_l) dy
// with w(y) = y when weight_y, an optional extra density factor e, and the
// product over the remaining opponents. Any F factor at zero kills the
// integrand, so the effective lower limit is the max of the shifted support
// infima; the upper limits of the F factors are kinks and become breakpoints.
double win_integral(const TypeView& t, int i, int extra, bool weight_y) {
  double lo = t.lo[i];
  double hi = t.hi[i];
  if (extra >= 0) {
    lo = std::max(lo, t.lo[extra] + t.a[extra] - t.a[i]);
    hi = std::min(hi, t.hi[extra] + t.a[extra] - t.a[i]);
  }
  std::vector<double> breaks;
  for (int l = 0; l < t.n; ++l) {
    if (l == i || l == extra) continue;
    lo = std::max(lo, t.lo[l] + t.a[l] - t.a[i]);
    breaks.push_back(t.hi[l] + t.a[l] - t.a[i]);
  }
  if (!(hi > lo)) return 0.0;

  auto integrand = [&](double y) {
    double v = t.d[i]->f(y);
    if (v == 0.0) return 0.0;
    if (extra >= 0) {
      v *= t.d[extra]->f(y + t.a[i] - t.a[extra]);
      if (v == 0.0) return 0.0;
    }
    for (int l = 0; l < t.n; ++l) {
      if (l == i || l == extra) continue;
      v *= t.d[l]->F(y + t.a[i] - t.a[l]);
      if (v == 0.0) return 0.0;
    }
    return weight_y ? y * v : v;
  };
  return quad::integrate_with_breakpoints(integrand, lo, hi, std::move(breaks));
}

}  // namespace

Eigen::MatrixXd JacobianBlocks::dense() const {
  Eigen::Index dim = 0;
  for (const auto& b : block) dim += b.rows();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::Index at = 0;
  for (const auto& b : block) {
    out.block(at, at, b.rows(), b.cols()) = b;
    at += b.rows();
  }
  return out;
}

Eigen::VectorXd coverage_column(const MarketInstance& market, const ShiftMatrix& alpha,
                                int j) {
  const int n = market.n;
  TypeView t(market, alpha, j);
  Eigen::VectorXd q(n - 1);
  for (int i = 0; i < n - 1; ++i)
    q[i] = market.type_prob[j] * win_integral(t, i, -1, false);
  return q;
}

CoverageMatrix coverage_of_shift(const MarketInstance& market, const ShiftMatrix& alpha) {
  const int n = market.n, m = market.m;
  CoverageMatrix q(n, m);
  for (int j = 0; j < m; ++j) {
    q.col(j).head(n - 1) = coverage_column(market, alpha, j);
    q(n - 1, j) = market.type_prob[j] - q.col(j).head(n - 1).sum();
  }
  return q;
}

CoverageMatrix coverage_by_quadrature(const MarketInstance& market,
                                      const ShiftMatrix& alpha) {
  const int n = market.n, m = market.m;
  CoverageMatrix q(n, m);
  for (int j = 0; j < m; ++j) {
    TypeView t(market, alpha, j);
    for (int i = 0; i < n; ++i)
      q(i, j) = market.type_prob[j] * win_integral(t, i, -1, false);
  }
  return q;
}

double revenue_of_shift(const MarketInstance& market, const ShiftMatrix& alpha) {
  double rev = 0.0;
  for (int j = 0; j < market.m; ++j) {
    TypeView t(market, alpha, j);
    for (int i = 0; i < market.n; ++i)
      rev += market.type_prob[j] * win_integral(t, i, -1, true);
  }
  return rev;
}

Eigen::MatrixXd revenue_gradient_of_shift(const MarketInstance& market,
                                          const ShiftMatrix& alpha) {
  const int n = market.n, m = market.m;
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, m);
  for (int j = 0; j < m; ++j) {
    TypeView t(market, alpha, j);
    for (int i = 0; i < n - 1; ++i) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        // gain: mass i now wins at the boundary against k;
        // loss: mass k used to win at the same boundary
        acc += win_integral(t, i, k, true);
        acc -= win_integral(t, k, i, true);
      }
      g(i, j) = market.type_prob[j] * acc;
    }
  }
  return g;
}

Eigen::MatrixXd jacobian_block(const MarketInstance& market, const ShiftMatrix& alpha,
                               int j) {
  const int n = market.n;
  TypeView t(market, alpha, j);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n - 1, n - 1);
  for (int i = 0; i < n - 1; ++i) {
    double diag = 0.0, offsum = 0.0;
    for (int l = 0; l < n; ++l) {
      if (l == i) continue;
      const double w = market.type_prob[j] * win_integral(t, i, l, false);
      diag += w;
      if (l < n - 1) {
        B(i, l) = -w;
        offsum += w;
      }
    }
    B(i, i) = diag;
    if (!(diag > 1e-14) || diag - offsum < -1e-10 * diag) {
      std::ostringstream os;
      os << "coverage jacobian for type " << j << " is degenerate at advertiser "
         << i << " (diagonal " << diag << ")";
      throw NumericError(os.str());
    }
  }
  return B;
}

JacobianBlocks jacobian(const MarketInstance& market, const ShiftMatrix& alpha) {
  JacobianBlocks J;
  J.block.reserve(market.m);
  for (int j = 0; j < market.m; ++j) J.block.push_back(jacobian_block(market, alpha, j));
  return J;
}

}  // namespace fairbid

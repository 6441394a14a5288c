#include "fairbid/inner_solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fairbid/coverage.hpp"
#include "fairbid/errors.hpp"

namespace fairbid {

namespace {

constexpr double kArmijo = 1e-4;
constexpr int kMinIters = 100;
constexpr int kMaxIters = 100000;

int default_iter_cap(const AssumptionEstimates& est, int n, int m, double target_loss) {
  const double denom = est.eta * est.mu_min;
  if (!(denom > 0.0)) return kMaxIters;
  const double t = std::log(std::max(m * std::pow(n, 3) / target_loss, 2.0)) *
                   (est.lipschitz_L + n * n * est.mu_max * est.mu_max) /
                   (denom * denom);
  if (!std::isfinite(t)) return kMaxIters;
  return static_cast<int>(std::clamp(t, double(kMinIters), double(kMaxIters)));
}

double default_step(const AssumptionEstimates& est, int n) {
  const double denom =
      4.0 * n * est.lipschitz_L + 2.0 * std::pow(n, 3) * est.mu_max * est.mu_max;
  return denom > 0.0 ? 1.0 / denom : 1e-2;
}

}  // namespace

InnerSolverConfig InnerSolverConfig::with_defaults(const AssumptionEstimates& est, int n,
                                                   double target_loss) {
  InnerSolverConfig cfg;
  cfg.step_size = default_step(est, n);
  cfg.target_loss = target_loss;
  return cfg;
}

InnerResult solve_shift(const MarketInstance& market, const CoverageMatrix& delta,
                        const ShiftMatrix& alpha_init, const InnerSolverConfig& cfg) {
  const int n = market.n, m = market.m;
  if (delta.rows() < n - 1 || delta.cols() != m)
    throw StructuralError("coverage target has wrong shape");
  if (alpha_init.alpha.rows() != n || alpha_init.alpha.cols() != m)
    throw StructuralError("initial shift matrix has wrong shape");
  if (alpha_init.alpha.row(n - 1).cwiseAbs().maxCoeff() != 0.0)
    throw StructuralError("initial shift matrix must have a zero last row");
  for (int j = 0; j < m; ++j) {
    double s = 0.0;
    for (int i = 0; i < n - 1; ++i) {
      if (!(delta(i, j) > 0.0 && delta(i, j) < 1.0)) {
        std::ostringstream os;
        os << "coverage target (" << i << "," << j << ") = " << delta(i, j)
           << " must lie strictly in (0,1)";
        throw DomainError(os.str());
      }
      s += delta(i, j);
    }
    if (!(s < market.type_prob[j])) {
      std::ostringstream os;
      os << "coverage targets for type " << j
         << " leave no room for the pinned advertiser";
      throw DomainError(os.str());
    }
  }

  double gamma0;
  int iter_cap;
  if (cfg.step_size && cfg.max_iters) {
    gamma0 = *cfg.step_size;
    iter_cap = *cfg.max_iters;
  } else {
    const AssumptionEstimates est = estimate(market, alpha_init);
    gamma0 = cfg.step_size ? *cfg.step_size : default_step(est, n);
    iter_cap = cfg.max_iters ? *cfg.max_iters
                             : default_iter_cap(est, n, m, cfg.target_loss);
  }
  if (!(gamma0 > 0.0)) throw DomainError("step size must be positive");
  if (!(cfg.target_loss > 0.0)) throw DomainError("target loss must be positive");

  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path);
    if (!trace) throw ConfigError("cannot open trace file " + cfg.trace_path);
    trace << "iter,loss,grad_norm,step\n";
  }

  InnerResult result;
  result.alpha = alpha_init;
  result.converged = true;
  // target per type, chosen so the summed loss meets cfg.target_loss
  const double xi_j = cfg.target_loss / m;

  for (int j = 0; j < m; ++j) {
    ShiftMatrix work = result.alpha;
    const Eigen::VectorXd target = delta.col(j).head(n - 1);

    auto loss_at = [&](const ShiftMatrix& a) {
      return (target - coverage_column(market, a, j)).squaredNorm();
    };

    Eigen::VectorXd q = coverage_column(market, work, j);
    double loss = (target - q).squaredNorm();
    double step = gamma0;
    double gnorm = 0.0;
    int it = 0;
    bool type_done = loss < xi_j;

    while (!type_done && it < iter_cap) {
      ++it;
      const Eigen::MatrixXd J = jacobian_block(market, work, j);
      const Eigen::VectorXd grad = -2.0 * J.transpose() * (target - q);
      if (!grad.allFinite()) throw NumericError("NaN in inner-solver gradient");
      gnorm = grad.norm();
      if (gnorm == 0.0) break;  // stationary; with nonzero loss this flags non-convergence

      step = std::min(step * 2.0, 1e6 * gamma0);
      double trial_loss = loss;
      ShiftMatrix trial = work;
      bool accepted = false;
      while (step > 1e-14 * gamma0) {
        for (int i = 0; i < n - 1; ++i)
          trial.alpha(i, j) = work.alpha(i, j) - step * grad[i];
        trial_loss = loss_at(trial);
        if (trial_loss <= loss - kArmijo * step * gnorm * gnorm) {
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted) break;
      work = trial;
      q = coverage_column(market, work, j);
      loss = trial_loss;
      if (trace.is_open())
        trace << it << ',' << loss << ',' << gnorm << ',' << step << '\n';
      if (loss < xi_j) type_done = true;
    }

    result.alpha.alpha.col(j) = work.alpha.col(j);
    result.loss += loss;
    result.grad_norm = std::max(result.grad_norm, gnorm);
    result.iters = std::max(result.iters, it);
    if (!type_done) result.converged = false;
  }
  return result;
}

}  // namespace fairbid

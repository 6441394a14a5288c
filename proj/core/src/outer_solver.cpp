#include "fairbid/outer_solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fairbid/coverage.hpp"
#include "fairbid/errors.hpp"

namespace fairbid {

namespace {

constexpr double kFeasTol = 1e-9;

int reduced_index(int i, int j, int n) { return j * (n - 1) + i; }

Eigen::VectorXd reduced_coverage(const MarketInstance& market, const ShiftMatrix& alpha) {
  const int n = market.n, m = market.m;
  Eigen::VectorXd x(static_cast<Eigen::Index>(n - 1) * m);
  for (int j = 0; j < m; ++j)
    x.segment(static_cast<Eigen::Index>(j) * (n - 1), n - 1) =
        coverage_column(market, alpha, j);
  return x;
}

CoverageMatrix delta_from_reduced(const Eigen::VectorXd& x, const MarketInstance& market) {
  const int n = market.n, m = market.m;
  CoverageMatrix d(n, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n - 1; ++i) d(i, j) = x[reduced_index(i, j, n)];
    d(n - 1, j) = market.type_prob[j] - d.col(j).head(n - 1).sum();
  }
  return d;
}

// Nudges a projected point off the polytope faces where the inner problem is
// ill-posed (zero or total coverage is only reachable in the limit).
void clamp_to_interior(CoverageMatrix& d, const MarketInstance& market) {
  const int n = market.n;
  for (int j = 0; j < market.m; ++j) {
    const double pr = market.type_prob[j];
    const double margin = 1e-7 * pr;
    for (int i = 0; i < n - 1; ++i) d(i, j) = std::max(d(i, j), margin);
    const double s = d.col(j).head(n - 1).sum();
    if (s > pr - margin) d.col(j).head(n - 1) *= (pr - margin) / s;
    d(n - 1, j) = pr - d.col(j).head(n - 1).sum();
  }
}

}  // namespace

PolytopeQ::PolytopeQ(const MarketInstance& market, const FairnessSpec& spec) {
  const int n = market.n, m = market.m;
  if (spec.lower.rows() != n || spec.lower.cols() != m)
    throw StructuralError("fairness bounds do not match the market shape");
  const int dim = (n - 1) * m;
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  auto push = [&](const Eigen::VectorXd& a, double bb) {
    rows.push_back(a);
    rhs.push_back(bb);
  };

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) {
      if (!spec.constrained(i, j)) continue;
      const double l = spec.ell(i, j), u = spec.uu(i, j);
      if (i < n - 1) {
        // share of advertiser i's own total: l * sum_t q_it - q_ij <= 0
        if (l > 0.0) {
          Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
          for (int t = 0; t < m; ++t) a[reduced_index(i, t, n)] = l;
          a[reduced_index(i, j, n)] -= 1.0;
          push(a, 0.0);
        }
        if (u < 1.0) {
          Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
          for (int t = 0; t < m; ++t) a[reduced_index(i, t, n)] = -u;
          a[reduced_index(i, j, n)] += 1.0;
          push(a, 0.0);
        }
      } else {
        // pinned advertiser, coverage substituted: its total is 1 - sum(x)
        if (l > 0.0) {
          Eigen::VectorXd a = Eigen::VectorXd::Constant(dim, -l);
          for (int i2 = 0; i2 < n - 1; ++i2) a[reduced_index(i2, j, n)] += 1.0;
          push(a, market.type_prob[j] - l);
        }
        if (u < 1.0) {
          Eigen::VectorXd a = Eigen::VectorXd::Constant(dim, u);
          for (int i2 = 0; i2 < n - 1; ++i2) a[reduced_index(i2, j, n)] -= 1.0;
          push(a, u - market.type_prob[j]);
        }
      }
    }
  }
  for (int j = 0; j < m; ++j) {  // pinned advertiser's coverage stays nonnegative
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    for (int i = 0; i < n - 1; ++i) a[reduced_index(i, j, n)] = 1.0;
    push(a, market.type_prob[j]);
  }
  for (int k = 0; k < dim; ++k) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    a[k] = -1.0;
    push(a, 0.0);
  }

  A_.resize(static_cast<Eigen::Index>(rows.size()), dim);
  b_.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    A_.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    b_[static_cast<Eigen::Index>(r)] = rhs[r];
  }

  Eigen::VectorXd balanced(dim);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n - 1; ++i)
      balanced[reduced_index(i, j, n)] = market.type_prob[j] / n;
  find_witness(balanced);
}

PolytopeQ::PolytopeQ(Eigen::MatrixXd A, Eigen::VectorXd b, const Eigen::VectorXd& probe) {
  if (A.rows() != b.size() || A.cols() != probe.size())
    throw StructuralError("constraint rows, bounds, and probe point disagree on shape");
  if (!A.allFinite() || !b.allFinite())
    throw StructuralError("constraint rows must be finite");
  A_ = std::move(A);
  b_ = std::move(b);
  find_witness(probe);
}

void PolytopeQ::find_witness(const Eigen::VectorXd& probe) {
  try {
    witness_ = project(probe);
  } catch (const NumericError& e) {
    throw InfeasibleError(std::string("fairness polytope appears empty: ") + e.what());
  }
  if (!feasible(witness_))
    throw InfeasibleError("fairness polytope appears empty (no feasible point found)");
}

bool PolytopeQ::feasible(const Eigen::VectorXd& x, double tol) const {
  return ((A_ * x - b_).array() <= tol).all();
}

namespace {

// Dual coordinate descent (Hildreth). Slower than the active-set method but
// immune to degenerate working sets; used as a fallback.
Eigen::VectorXd project_by_dual_descent(const Eigen::MatrixXd& A,
                                        const Eigen::VectorXd& b,
                                        const Eigen::VectorXd& p) {
  const Eigen::Index rows = A.rows();
  Eigen::VectorXd norms(rows);
  for (Eigen::Index r = 0; r < rows; ++r) norms[r] = A.row(r).squaredNorm();
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(rows);
  Eigen::VectorXd x = p;
  const int kMaxSweeps = 200000;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double moved = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r) {
      if (norms[r] <= 0.0) continue;
      const double delta = std::max(-lambda[r], (A.row(r).dot(x) - b[r]) / norms[r]);
      if (delta == 0.0) continue;
      lambda[r] += delta;
      x -= delta * A.row(r).transpose();
      moved = std::max(moved, std::abs(delta) * std::sqrt(norms[r]));
    }
    if (moved <= 1e-13 && ((A * x - b).array() <= 1e-10).all()) return x;
  }
  throw NumericError("dual projection did not converge; polytope may be empty");
}

}  // namespace

Eigen::VectorXd PolytopeQ::project(const Eigen::VectorXd& p) const {
  if (p.size() != A_.cols()) throw StructuralError("projection point has wrong length");
  std::vector<int> active;
  Eigen::VectorXd resid = A_ * p - b_;
  for (Eigen::Index r = 0; r < resid.size(); ++r)
    if (resid[r] > kFeasTol) active.push_back(static_cast<int>(r));

  Eigen::VectorXd x = p;
  const int budget = 10 * rows();
  for (int it = 0; it < budget; ++it) {
    Eigen::VectorXd lambda;
    if (active.empty()) {
      x = p;
    } else {
      Eigen::MatrixXd Aw(active.size(), A_.cols());
      Eigen::VectorXd bw(active.size());
      for (std::size_t k = 0; k < active.size(); ++k) {
        Aw.row(static_cast<Eigen::Index>(k)) = A_.row(active[k]);
        bw[static_cast<Eigen::Index>(k)] = b_[active[k]];
      }
      // least-distance with the working set as equalities; min-norm lambda
      // keeps redundant rows harmless
      Eigen::MatrixXd gram = Aw * Aw.transpose();
      Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(gram);
      lambda = cod.solve(Aw * p - bw);
      x = p - Aw.transpose() * lambda;
    }

    resid = A_ * x - b_;
    Eigen::Index worst;
    const double viol = resid.maxCoeff(&worst);
    if (viol > kFeasTol) {
      if (std::find(active.begin(), active.end(), static_cast<int>(worst)) !=
          active.end()) {
        // the working set is inconsistent as equalities; hand over to the
        // robust dual method
        return project_by_dual_descent(A_, b_, p);
      }
      active.push_back(static_cast<int>(worst));
      continue;
    }
    if (!active.empty()) {
      Eigen::Index neg;
      const double lmin = lambda.minCoeff(&neg);
      if (lmin < -kFeasTol) {
        active.erase(active.begin() + neg);
        continue;
      }
    }
    return x;
  }
  return project_by_dual_descent(A_, b_, p);
}

Eigen::VectorXd revenue_gradient_in_coverage(const MarketInstance& market,
                                             const ShiftMatrix& alpha) {
  const int n = market.n, m = market.m;
  const Eigen::MatrixXd gs = revenue_gradient_of_shift(market, alpha);
  Eigen::VectorXd g(static_cast<Eigen::Index>(n - 1) * m);
  for (int j = 0; j < m; ++j) {
    const Eigen::MatrixXd J = jacobian_block(market, alpha, j);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(J.transpose());
    const Eigen::VectorXd gj = lu.solve(gs.col(j).head(n - 1));
    if (!gj.allFinite()) throw NumericError("singular jacobian block in gradient oracle");
    g.segment(static_cast<Eigen::Index>(j) * (n - 1), n - 1) = gj;
  }
  return g;
}

OuterResult solve(const MarketInstance& market, const FairnessSpec& spec,
                  const OuterSolverConfig& cfg) {
  {
    ValidationReport mrep = validate(market);
    if (!mrep.ok) {
      std::string joined;
      for (const auto& e : mrep.errors) joined += e + "; ";
      throw StructuralError("invalid market: " + joined);
    }
    ValidationReport frep = validate(market, spec);
    if (!frep.ok) {
      std::string joined;
      for (const auto& e : frep.errors) joined += e + "; ";
      throw InfeasibleError("infeasible fairness spec: " + joined);
    }
  }
  return solve(market, PolytopeQ(market, spec), cfg);
}

OuterResult solve(const MarketInstance& market, const PolytopeQ& poly,
                  const OuterSolverConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw DomainError("epsilon must be positive");
  const int n = market.n, m = market.m;
  if (poly.dim() != (n - 1) * m)
    throw StructuralError("polytope dimension does not match the market");

  ShiftMatrix alpha = ShiftMatrix::zero(n, m);
  OuterResult result;
  result.estimates = estimate(market, alpha);
  const double G = result.estimates.G;

  double gamma = cfg.gamma ? *cfg.gamma : cfg.epsilon / (2.0 * G * G);
  if (!cfg.gamma && (!std::isfinite(gamma) || gamma < 1e-10)) {
    // estimated G is too loose to give a workable step; fall back
    result.estimates.warnings.push_back(
        "step size from estimated constants is degenerate; using epsilon instead");
    gamma = cfg.epsilon;
  }
  double xi = cfg.xi ? *cfg.xi : (G * gamma) * (G * gamma);
  if (!std::isfinite(xi) || xi <= 0.0) xi = 1e-10;
  xi = std::clamp(xi, 1e-14, 1e-10);
  int T;
  if (cfg.max_iters) {
    T = *cfg.max_iters;
  } else {
    const double theoretical = 2.0 * (G / cfg.epsilon) * (G / cfg.epsilon);
    T = std::isfinite(theoretical)
            ? static_cast<int>(std::clamp(theoretical, 50.0, 2000.0))
            : 2000;
  }

  InnerSolverConfig inner_cfg = InnerSolverConfig::with_defaults(result.estimates, n, xi);

  std::ofstream trace;
  if (!cfg.trace_path.empty()) {
    trace.open(cfg.trace_path);
    if (!trace) throw ConfigError("cannot open trace file " + cfg.trace_path);
    trace << "iter,revenue,loss_inner,grad_norm,n_active_constraints,wall_time_ms\n";
  }
  const auto t0 = std::chrono::steady_clock::now();

  Eigen::VectorXd x = poly.project(reduced_coverage(market, alpha));
  int inner_failures = 0;
  auto run_inner = [&](const Eigen::VectorXd& target) {
    CoverageMatrix delta = delta_from_reduced(target, market);
    clamp_to_interior(delta, market);
    InnerResult ir = solve_shift(market, delta, alpha, inner_cfg);
    if (!ir.converged && ir.loss > 1e-6) {
      if (++inner_failures >= 3)
        throw NumericError("inner solver failed on 3 consecutive outer iterations");
    } else {
      inner_failures = 0;
    }
    return ir;
  };

  InnerResult ir = run_inner(x);
  alpha = ir.alpha;
  double best_rev = revenue_of_shift(market, alpha);
  ShiftMatrix best_alpha = alpha;

  int calm_streak = 0;
  for (int t = 1; t <= T; ++t) {
    result.iters = t;
    const Eigen::VectorXd g = revenue_gradient_in_coverage(market, alpha);
    const Eigen::VectorXd x_new = poly.project(x + gamma * g);
    const double step_norm = (x_new - x).norm();

    ir = run_inner(x_new);
    alpha = ir.alpha;
    x = x_new;

    const double rev = revenue_of_shift(market, alpha);
    if (rev > best_rev) {
      best_rev = rev;
      best_alpha = alpha;
    }

    if (trace.is_open()) {
      const int n_active =
          static_cast<int>(((poly.A() * x - poly.b()).array() > -kFeasTol).count());
      const double ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
      trace << t << ',' << rev << ',' << ir.loss << ',' << g.norm() << ','
            << n_active << ',' << ms << '\n';
    }

    calm_streak = (step_norm < 1e-2 * cfg.epsilon) ? calm_streak + 1 : 0;
    if (calm_streak >= 10) {
      result.converged = true;
      break;
    }
  }

  result.alpha = best_alpha;
  result.q = coverage_of_shift(market, best_alpha);
  result.revenue = best_rev;
  return result;
}

}  // namespace fairbid

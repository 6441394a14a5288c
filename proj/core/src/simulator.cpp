#include "fairbid/simulator.hpp"

#include <cmath>
#include <vector>

#include "fairbid/errors.hpp"
#include "fairbid/mechanism.hpp"

namespace fairbid {

namespace {

constexpr std::int64_t kChunk = 1 << 16;

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

SimulationReport simulate(const MarketInstance& market, const ShiftMatrix& alpha,
                          std::int64_t n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw DomainError("need at least one sample");
  const int n = market.n, m = market.m;

  SimulationReport rep;
  rep.samples = n_samples;
  rep.seed = seed;
  rep.win_counts = Eigen::MatrixXi::Zero(n, m);
  rep.has_payment_revenue = market.all_valuation_based();

  Eigen::VectorXd cum(m);
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    acc += market.type_prob[j];
    cum[j] = acc;
  }

  double rev_sum = 0.0, rev_sq = 0.0;
  double pay_sum = 0.0, pay_sq = 0.0;
  std::vector<double> bids(n);

  // one RNG stream per fixed-size chunk, so the sample sequence depends only
  // on (seed, sample index) and stays stable under future parallel splits
  for (std::int64_t start = 0; start < n_samples; start += kChunk) {
    const std::int64_t stop = std::min(start + kChunk, n_samples);
    std::mt19937_64 rng(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(
                                              start / kChunk))));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (std::int64_t s = start; s < stop; ++s) {
      const double u = unit(rng);
      int j = 0;
      while (j < m - 1 && u > cum[j]) ++j;
      for (int i = 0; i < n; ++i) {
        const auto& d = market.cell(i, j);
        bids[i] = d.is_virtual_given() ? d.sample_virtual(rng) : d.sample_valuation(rng);
      }
      const AuctionOutcome out = allocate(market, alpha, j, bids, rng);
      rep.win_counts(out.winner, j) += 1;
      const auto& wd = market.cell(out.winner, j);
      const double y = wd.is_virtual_given() ? bids[out.winner] : wd.phi(bids[out.winner]);
      rev_sum += y;
      rev_sq += y * y;
      if (rep.has_payment_revenue) {
        pay_sum += out.payment;
        pay_sq += out.payment * out.payment;
      }
    }
  }

  const double N = static_cast<double>(n_samples);
  rep.empirical_q = rep.win_counts.cast<double>() / N;
  rep.empirical_q_stderr = (rep.empirical_q.array() * (1.0 - rep.empirical_q.array()) / N)
                               .sqrt()
                               .matrix();
  rep.revenue_mean = rev_sum / N;
  rep.revenue_stderr =
      std::sqrt(std::max(rev_sq / N - rep.revenue_mean * rep.revenue_mean, 0.0) / N);
  if (rep.has_payment_revenue) {
    rep.payment_revenue_mean = pay_sum / N;
    rep.payment_revenue_stderr = std::sqrt(
        std::max(pay_sq / N - rep.payment_revenue_mean * rep.payment_revenue_mean, 0.0) /
        N);
  }
  return rep;
}

double selection_lift(const Eigen::MatrixXd& q) {
  double lift = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const double total = q.row(i).sum();
    if (!(total > 0.0)) continue;
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
      const double p = q(i, j) / total;
      const double odds = p >= 1.0 ? std::numeric_limits<double>::infinity()
                                   : p / (1.0 - p);
      lift = std::min(lift, odds);
    }
  }
  if (!std::isfinite(lift)) throw DomainError("selection lift undefined for this coverage");
  return lift;
}

FairnessMetrics metrics(const Eigen::MatrixXd& q_m, double rev_m,
                        const Eigen::MatrixXd& q_f, double rev_f) {
  if (q_m.rows() != q_f.rows() || q_m.cols() != q_f.cols())
    throw StructuralError("coverage matrices have mismatched shapes");
  if (!(rev_m > 0.0))
    throw DomainError("revenue ratio undefined: unconstrained revenue is not positive");
  FairnessMetrics out;
  out.kappa = rev_f / rev_m;
  const double tm = q_m.sum(), tf = q_f.sum();
  double l1 = 0.0;
  for (Eigen::Index i = 0; i < q_m.rows(); ++i)
    l1 += std::abs(q_m.row(i).sum() / tm - q_f.row(i).sum() / tf);
  out.d_tv = 0.5 * l1;
  out.slift = selection_lift(q_f);
  return out;
}

FairnessMetrics metrics(const SimulationReport& report_m, const SimulationReport& report_f) {
  return metrics(report_m.empirical_q, report_m.revenue_mean, report_f.empirical_q,
                 report_f.revenue_mean);
}

}  // namespace fairbid

#include "fairbid/mechanism.hpp"

#include <algorithm>
#include <vector>

#include "fairbid/errors.hpp"

namespace fairbid {

AuctionOutcome allocate(const MarketInstance& market, const ShiftMatrix& alpha,
                        int type_j, std::span<const double> bids,
                        std::mt19937_64& rng) {
  const int n = market.n;
  if (static_cast<int>(bids.size()) != n)
    throw StructuralError("one bid per advertiser is required");
  if (type_j < 0 || type_j >= market.m) throw StructuralError("user type out of range");
  if (alpha.alpha.rows() != n || alpha.alpha.cols() != market.m)
    throw StructuralError("shift matrix does not match the market shape");

  std::vector<double> score(n);
  for (int i = 0; i < n; ++i) {
    const auto& d = market.cell(i, type_j);
    const double y = d.is_virtual_given() ? bids[i] : d.phi(bids[i]);
    score[i] = y + alpha.alpha(i, type_j);
  }

  double best = *std::max_element(score.begin(), score.end());
  std::vector<int> top;
  for (int i = 0; i < n; ++i)
    if (score[i] == best) top.push_back(i);
  int winner = top.front();
  if (top.size() > 1) {
    std::uniform_int_distribution<std::size_t> pick(0, top.size() - 1);
    winner = top[pick(rng)];
  }

  double runner_up = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (i != winner) runner_up = std::max(runner_up, score[i]);

  AuctionOutcome out;
  out.winner = winner;
  out.threshold_virtual = runner_up - alpha.alpha(winner, type_j);
  const auto& wd = market.cell(winner, type_j);
  if (wd.is_virtual_given()) {
    out.payment_in_virtual_space = true;
    out.payment = std::max(out.threshold_virtual, wd.support().lo);
  } else {
    // the item always sells, so the payment floor is the lowest valuation
    out.payment = std::max(wd.phi_inverse(out.threshold_virtual),
                           wd.source().support().lo);
  }
  return out;
}

}  // namespace fairbid

#pragma once

#include <random>
#include <span>

#include "fairbid/market.hpp"

namespace fairbid {

/// Outcome of one shifted auction round.
struct AuctionOutcome {
  int winner = -1;
  double threshold_virtual = 0.0;  // T - alpha_w, before inversion
  double payment = 0.0;
  /// True when the winning cell has no valuation-space model and the
  /// payment is reported directly in virtual space.
  bool payment_in_virtual_space = false;
};

/// Runs the shift auction for user type j on truthful bids (valuations for
/// valuation-based cells, virtual values for virtual-given cells). The item
/// always sells; ties break uniformly via rng.
AuctionOutcome allocate(const MarketInstance& market, const ShiftMatrix& alpha,
                        int type_j, std::span<const double> bids,
                        std::mt19937_64& rng);

}  // namespace fairbid

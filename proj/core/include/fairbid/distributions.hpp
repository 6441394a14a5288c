#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace fairbid {

/// Closed interval, possibly half-infinite.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double v) const { return v >= lo && v <= hi; }
  bool is_finite() const;
};

/// Quantile level used to truncate infinite supports for quadrature.
inline constexpr double kSupportTailMass = 1e-10;

/// A bidder's valuation distribution (also reused as the density of a
/// directly specified virtual valuation, see VirtualDistribution).
class ValuationDistribution {
 public:
  enum class Family { Exponential, Uniform, LogNormal, TruncatedNormal, Empirical };

  static ValuationDistribution exponential(double rate);
  static ValuationDistribution uniform(double lo, double hi);
  static ValuationDistribution log_normal(double mu, double sigma);
  static ValuationDistribution truncated_normal(double mu, double sigma, double lo, double hi);
  /// Gaussian KDE; bandwidth <= 0 selects the Silverman rule.
  static ValuationDistribution empirical(std::vector<double> samples, double bandwidth = 0.0);

  double pdf(double v) const;
  double cdf(double v) const;
  double quantile(double p) const;
  double sample(std::mt19937_64& rng) const;

  Interval support() const { return support_; }
  /// Support clipped to the [tail, 1-tail] quantiles when infinite.
  Interval truncated_support() const { return truncated_; }

  Family family() const { return family_; }
  double param(int k) const { return params_[k]; }
  const std::vector<double>& samples() const { return samples_; }
  double bandwidth() const;
  std::string describe() const;

 private:
  ValuationDistribution() = default;
  void finalize();

  Family family_ = Family::Uniform;
  double params_[4] = {0, 0, 0, 0};
  std::vector<double> samples_;
  Interval support_;
  Interval truncated_;
};

/// phi(v) = v - (1 - cdf(v)) / pdf(v).
double virtual_valuation(const ValuationDistribution& d, double v);

struct RegularityReport {
  bool strictly_regular = true;
  double violation_point = 0.0;  // valid when !strictly_regular
};

/// Evaluates phi on a quantile-spaced grid and reports the first decrease.
RegularityReport check_strict_regularity(const ValuationDistribution& d, int grid_size = 256);

/// Distribution of the virtual-valuation random variable phi(V). Two
/// construction routes: derived from a valuation distribution by change of
/// variables, or given directly as a density in virtual space.
class VirtualDistribution {
 public:
  static VirtualDistribution from_valuation(const ValuationDistribution& d);
  static VirtualDistribution virtual_given(const ValuationDistribution& density);

  double f(double y) const;  // density of phi(V)
  double F(double y) const;  // cdf of phi(V)
  /// Virtual-space support (finite; truncated for infinite tails).
  Interval support() const { return virtual_support_; }
  double quantile(double p) const;

  double phi(double v) const;          // valuation -> virtual value
  double phi_inverse(double y) const;  // virtual value -> valuation (bisection)
  bool is_virtual_given() const { return virtual_given_; }
  const ValuationDistribution& source() const { return *source_; }

  double sample_virtual(std::mt19937_64& rng) const;
  double sample_valuation(std::mt19937_64& rng) const;

  /// E[phi] over the truncated support, by quadrature.
  double mean_virtual() const;

 private:
  std::shared_ptr<const ValuationDistribution> source_;
  bool virtual_given_ = false;
  Interval virtual_support_;
};

}  // namespace fairbid

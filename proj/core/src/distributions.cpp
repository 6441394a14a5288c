#include "fairbid/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fairbid/errors.hpp"
#include "fairbid/quadrature.hpp"

namespace fairbid {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * M_SQRT1_2); }

// Acklam's rational approximation, polished with one Newton step.
double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile needs p in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - plow) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double e = normal_cdf(x) - p;
  x -= e / normal_pdf(x);
  return x;
}

double bisect_cdf(const std::function<double(double)>& cdf, double p, double lo,
                  double hi) {
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (cdf(mid) < p)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-14 * (1.0 + std::abs(lo))) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

bool Interval::is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }

ValuationDistribution ValuationDistribution::exponential(double rate) {
  if (!(rate > 0.0)) throw DomainError("exponential rate must be positive");
  ValuationDistribution d;
  d.family_ = Family::Exponential;
  d.params_[0] = rate;
  d.finalize();
  return d;
}

ValuationDistribution ValuationDistribution::uniform(double lo, double hi) {
  if (!(hi > lo)) throw DomainError("uniform needs lo < hi");
  ValuationDistribution d;
  d.family_ = Family::Uniform;
  d.params_[0] = lo;
  d.params_[1] = hi;
  d.finalize();
  return d;
}

ValuationDistribution ValuationDistribution::log_normal(double mu, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("log-normal sigma must be positive");
  ValuationDistribution d;
  d.family_ = Family::LogNormal;
  d.params_[0] = mu;
  d.params_[1] = sigma;
  d.finalize();
  return d;
}

ValuationDistribution ValuationDistribution::truncated_normal(double mu, double sigma,
                                                              double lo, double hi) {
  if (!(sigma > 0.0)) throw DomainError("truncated normal sigma must be positive");
  if (!(hi > lo)) throw DomainError("truncated normal needs lo < hi");
  ValuationDistribution d;
  d.family_ = Family::TruncatedNormal;
  d.params_[0] = mu;
  d.params_[1] = sigma;
  d.params_[2] = lo;
  d.params_[3] = hi;
  d.finalize();
  return d;
}

ValuationDistribution ValuationDistribution::empirical(std::vector<double> samples,
                                                       double bandwidth) {
  if (samples.size() < 2) throw DomainError("empirical distribution needs >= 2 samples");
  ValuationDistribution d;
  d.family_ = Family::Empirical;
  std::sort(samples.begin(), samples.end());
  d.samples_ = std::move(samples);
  if (bandwidth <= 0.0) {
    const auto& s = d.samples_;
    const double n = static_cast<double>(s.size());
    double mean = std::accumulate(s.begin(), s.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : s) ss += (v - mean) * (v - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    double iqr = s[static_cast<std::size_t>(0.75 * (n - 1))] -
                 s[static_cast<std::size_t>(0.25 * (n - 1))];
    double scale = sd;
    if (iqr > 0.0) scale = std::min(scale, iqr / 1.34);
    if (!(scale > 0.0)) scale = std::max(std::abs(mean), 1.0) * 1e-3;
    bandwidth = 0.9 * scale * std::pow(n, -0.2);
  }
  d.params_[0] = bandwidth;
  d.finalize();
  return d;
}

void ValuationDistribution::finalize() {
  const double inf = std::numeric_limits<double>::infinity();
  switch (family_) {
    case Family::Exponential:
      support_ = {0.0, inf};
      break;
    case Family::Uniform:
      support_ = {params_[0], params_[1]};
      break;
    case Family::LogNormal:
      support_ = {0.0, inf};
      break;
    case Family::TruncatedNormal:
      support_ = {params_[2], params_[3]};
      break;
    case Family::Empirical:
      support_ = {-inf, inf};
      break;
  }
  truncated_ = support_;
  if (!std::isfinite(truncated_.lo)) truncated_.lo = quantile(kSupportTailMass);
  if (!std::isfinite(truncated_.hi)) truncated_.hi = quantile(1.0 - kSupportTailMass);
  if (family_ == Family::Exponential) {
    // density is positive at 0, keep the exact lower endpoint
    truncated_.lo = 0.0;
  } else if (family_ == Family::LogNormal) {
    // density vanishes at 0, trim the lower tail as well
    truncated_.lo = quantile(kSupportTailMass);
  }
}

double ValuationDistribution::pdf(double v) const {
  switch (family_) {
    case Family::Exponential: {
      if (v < 0.0) return 0.0;
      const double r = params_[0];
      return r * std::exp(-r * v);
    }
    case Family::Uniform:
      return (v >= params_[0] && v <= params_[1]) ? 1.0 / (params_[1] - params_[0]) : 0.0;
    case Family::LogNormal: {
      if (v <= 0.0) return 0.0;
      const double z = (std::log(v) - params_[0]) / params_[1];
      return normal_pdf(z) / (v * params_[1]);
    }
    case Family::TruncatedNormal: {
      if (v < params_[2] || v > params_[3]) return 0.0;
      const double s = params_[1];
      const double za = (params_[2] - params_[0]) / s;
      const double zb = (params_[3] - params_[0]) / s;
      const double mass = normal_cdf(zb) - normal_cdf(za);
      return normal_pdf((v - params_[0]) / s) / (s * mass);
    }
    case Family::Empirical: {
      const double h = params_[0];
      double acc = 0.0;
      for (double s : samples_) acc += normal_pdf((v - s) / h);
      return acc / (samples_.size() * h);
    }
  }
  return 0.0;
}

double ValuationDistribution::cdf(double v) const {
  switch (family_) {
    case Family::Exponential:
      return v <= 0.0 ? 0.0 : -std::expm1(-params_[0] * v);
    case Family::Uniform: {
      if (v <= params_[0]) return 0.0;
      if (v >= params_[1]) return 1.0;
      return (v - params_[0]) / (params_[1] - params_[0]);
    }
    case Family::LogNormal:
      if (v <= 0.0) return 0.0;
      return normal_cdf((std::log(v) - params_[0]) / params_[1]);
    case Family::TruncatedNormal: {
      if (v <= params_[2]) return 0.0;
      if (v >= params_[3]) return 1.0;
      const double s = params_[1];
      const double za = (params_[2] - params_[0]) / s;
      const double zb = (params_[3] - params_[0]) / s;
      return (normal_cdf((v - params_[0]) / s) - normal_cdf(za)) /
             (normal_cdf(zb) - normal_cdf(za));
    }
    case Family::Empirical: {
      const double h = params_[0];
      double acc = 0.0;
      for (double s : samples_) acc += normal_cdf((v - s) / h);
      return acc / samples_.size();
    }
  }
  return 0.0;
}

double ValuationDistribution::quantile(double p) const {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("quantile needs p in [0,1]");
  p = std::clamp(p, 1e-300, 1.0 - 1e-16);
  switch (family_) {
    case Family::Exponential:
      return -std::log1p(-p) / params_[0];
    case Family::Uniform:
      return params_[0] + p * (params_[1] - params_[0]);
    case Family::LogNormal:
      return std::exp(params_[0] + params_[1] * normal_quantile(p));
    case Family::TruncatedNormal: {
      const double s = params_[1];
      const double za = (params_[2] - params_[0]) / s;
      const double zb = (params_[3] - params_[0]) / s;
      const double pa = normal_cdf(za), pb = normal_cdf(zb);
      double q = pa + p * (pb - pa);
      q = std::clamp(q, 1e-300, 1.0 - 1e-16);
      double v = params_[0] + s * normal_quantile(q);
      return std::clamp(v, params_[2], params_[3]);
    }
    case Family::Empirical: {
      const double h = params_[0];
      double lo = samples_.front() - 40.0 * h;
      double hi = samples_.back() + 40.0 * h;
      return bisect_cdf([this](double v) { return cdf(v); }, p, lo, hi);
    }
  }
  return 0.0;
}

double ValuationDistribution::sample(std::mt19937_64& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double u = std::clamp(unit(rng), 1e-16, 1.0 - 1e-16);
  return quantile(u);
}

double ValuationDistribution::bandwidth() const {
  if (family_ != Family::Empirical) throw DomainError("bandwidth only defined for KDE");
  return params_[0];
}

std::string ValuationDistribution::describe() const {
  std::ostringstream os;
  switch (family_) {
    case Family::Exponential:
      os << "exponential(rate=" << params_[0] << ")";
      break;
    case Family::Uniform:
      os << "uniform(" << params_[0] << ", " << params_[1] << ")";
      break;
    case Family::LogNormal:
      os << "lognormal(mu=" << params_[0] << ", sigma=" << params_[1] << ")";
      break;
    case Family::TruncatedNormal:
      os << "truncated_normal(mu=" << params_[0] << ", sigma=" << params_[1]
         << ", lo=" << params_[2] << ", hi=" << params_[3] << ")";
      break;
    case Family::Empirical:
      os << "kde(n=" << samples_.size() << ", h=" << params_[0] << ")";
      break;
  }
  return os.str();
}

double virtual_valuation(const ValuationDistribution& d, double v) {
  const Interval s = d.support();
  if (v < s.lo || v > s.hi) throw DomainError("virtual valuation outside support");
  const double den = d.pdf(v);
  const double tail = 1.0 - d.cdf(v);
  if (den <= 0.0) {
    if (tail <= 0.0) return v;  // at the upper endpoint phi(v) = v
    throw NumericError("density vanishes inside the support");
  }
  return v - tail / den;
}

RegularityReport check_strict_regularity(const ValuationDistribution& d, int grid_size) {
  RegularityReport rep;
  double prev = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < grid_size; ++k) {
    const double p = (k + 1.0) / (grid_size + 1.0);
    const double v = d.quantile(p);
    double phi;
    try {
      phi = virtual_valuation(d, v);
    } catch (const NumericError&) {
      rep.strictly_regular = false;
      rep.violation_point = v;
      return rep;
    }
    if (!(phi > prev)) {
      rep.strictly_regular = false;
      rep.violation_point = v;
      return rep;
    }
    prev = phi;
  }
  return rep;
}

VirtualDistribution VirtualDistribution::from_valuation(const ValuationDistribution& d) {
  auto rep = check_strict_regularity(d);
  if (!rep.strictly_regular) {
    std::ostringstream os;
    os << "distribution " << d.describe()
       << " is not strictly regular (violation near v=" << rep.violation_point << ")";
    throw RegularityError(os.str());
  }
  VirtualDistribution vd;
  vd.source_ = std::make_shared<ValuationDistribution>(d);
  vd.virtual_given_ = false;
  const Interval t = d.truncated_support();
  vd.virtual_support_ = {virtual_valuation(d, t.lo), virtual_valuation(d, t.hi)};
  return vd;
}

VirtualDistribution VirtualDistribution::virtual_given(const ValuationDistribution& density) {
  VirtualDistribution vd;
  vd.source_ = std::make_shared<ValuationDistribution>(density);
  vd.virtual_given_ = true;
  vd.virtual_support_ = density.truncated_support();
  return vd;
}

double VirtualDistribution::phi(double v) const {
  if (virtual_given_) return v;
  return virtual_valuation(*source_, v);
}

double VirtualDistribution::phi_inverse(double y) const {
  if (virtual_given_) return y;
  const Interval t = source_->truncated_support();
  if (y <= virtual_support_.lo) return t.lo;
  if (y >= virtual_support_.hi) return t.hi;
  double lo = t.lo, hi = t.hi;
  while (hi - lo > 1e-12 * (1.0 + std::abs(lo))) {
    double mid = 0.5 * (lo + hi);
    if (virtual_valuation(*source_, mid) < y)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

double VirtualDistribution::F(double y) const {
  if (virtual_given_) return source_->cdf(y);
  if (y <= virtual_support_.lo) return 0.0;
  if (y >= virtual_support_.hi) return 1.0;
  return source_->cdf(phi_inverse(y));
}

double VirtualDistribution::f(double y) const {
  if (virtual_given_) return source_->pdf(y);
  if (y < virtual_support_.lo || y > virtual_support_.hi) return 0.0;
  const double x = phi_inverse(y);
  const double h = 1e-6 * (1.0 + std::abs(x));
  const Interval t = source_->truncated_support();
  const double xl = std::max(x - h, t.lo);
  const double xr = std::min(x + h, t.hi);
  const double dphi =
      (virtual_valuation(*source_, xr) - virtual_valuation(*source_, xl)) / (xr - xl);
  if (!(dphi > 0.0)) throw NumericError("non-positive slope of the virtual valuation");
  return source_->pdf(x) / dphi;
}

double VirtualDistribution::quantile(double p) const {
  if (virtual_given_) return source_->quantile(p);
  return phi(std::clamp(source_->quantile(p), source_->truncated_support().lo,
                        source_->truncated_support().hi));
}

double VirtualDistribution::sample_virtual(std::mt19937_64& rng) const {
  if (virtual_given_) return source_->sample(rng);
  double v = source_->sample(rng);
  const Interval t = source_->truncated_support();
  return phi(std::clamp(v, t.lo, t.hi));
}

double VirtualDistribution::sample_valuation(std::mt19937_64& rng) const {
  if (virtual_given_)
    throw DomainError("no valuation-space model for a directly specified virtual density");
  return source_->sample(rng);
}

double VirtualDistribution::mean_virtual() const {
  if (virtual_given_) {
    const Interval s = virtual_support_;
    return quad::integrate([this](double y) { return y * source_->pdf(y); }, s.lo, s.hi);
  }
  const Interval t = source_->truncated_support();
  return quad::integrate(
      [this](double x) { return virtual_valuation(*source_, x) * source_->pdf(x); },
      t.lo, t.hi);
}

}  // namespace fairbid

#include "fairbid/market.hpp"

#include <cmath>
#include <sstream>

#include "fairbid/errors.hpp"

namespace fairbid {

bool MarketInstance::all_virtual_given() const {
  for (const auto& row : dist)
    for (const auto& d : row)
      if (!d.is_virtual_given()) return false;
  return true;
}

bool MarketInstance::all_valuation_based() const {
  for (const auto& row : dist)
    for (const auto& d : row)
      if (d.is_virtual_given()) return false;
  return true;
}

FairnessSpec FairnessSpec::unconstrained(int n, int m) {
  FairnessSpec fs;
  fs.lower = Eigen::MatrixXd::Zero(n, m);
  fs.upper = Eigen::MatrixXd::Ones(n, m);
  fs.constrained.setConstant(n, m, false);
  return fs;
}

FairnessSpec FairnessSpec::bounds(const Eigen::MatrixXd& lower,
                                  const Eigen::MatrixXd& upper) {
  if (lower.rows() != upper.rows() || lower.cols() != upper.cols())
    throw StructuralError("fairness bound matrices have mismatched shapes");
  FairnessSpec fs;
  fs.lower = lower;
  fs.upper = upper;
  fs.constrained.setConstant(lower.rows(), lower.cols(), true);
  return fs;
}

ShiftMatrix ShiftMatrix::zero(int n, int m) {
  ShiftMatrix s;
  s.alpha = Eigen::MatrixXd::Zero(n, m);
  return s;
}

ShiftMatrix ShiftMatrix::from_reduced(const Eigen::VectorXd& x, int n, int m) {
  if (x.size() != static_cast<Eigen::Index>(n - 1) * m)
    throw StructuralError("reduced shift vector has wrong length");
  ShiftMatrix s = zero(n, m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < n - 1; ++i) s.alpha(i, j) = x[j * (n - 1) + i];
  return s;
}

Eigen::VectorXd ShiftMatrix::reduced() const {
  const int nn = n(), mm = m();
  Eigen::VectorXd x(static_cast<Eigen::Index>(nn - 1) * mm);
  for (int j = 0; j < mm; ++j)
    for (int i = 0; i < nn - 1; ++i) x[j * (nn - 1) + i] = alpha(i, j);
  return x;
}

namespace {

void check_market(const MarketInstance& market, ValidationReport& rep) {
  auto fail = [&](const std::string& msg) {
    rep.ok = false;
    rep.errors.push_back(msg);
  };
  if (market.n < 2) fail("need at least 2 advertisers");
  if (market.m < 1) fail("need at least 1 user type");
  if (market.type_prob.size() != market.m) {
    fail("type_prob length does not match the number of user types");
    return;
  }
  for (int j = 0; j < market.m; ++j) {
    if (!(market.type_prob[j] > 0.0)) {
      std::ostringstream os;
      os << "type_prob[" << j << "] must be positive";
      fail(os.str());
    }
  }
  if (std::abs(market.type_prob.sum() - 1.0) > 1e-12)
    fail("type probabilities must sum to 1");
  if (static_cast<int>(market.dist.size()) != market.n) {
    fail("distribution grid has wrong number of advertiser rows");
    return;
  }
  for (int i = 0; i < market.n; ++i) {
    if (static_cast<int>(market.dist[i].size()) != market.m) {
      std::ostringstream os;
      os << "advertiser " << i << " has wrong number of per-type distributions";
      fail(os.str());
    }
  }
}

void check_fairness(const MarketInstance& market, const FairnessSpec& fs,
                    ValidationReport& rep) {
  auto fail = [&](const std::string& msg) {
    rep.ok = false;
    rep.errors.push_back(msg);
  };
  if (fs.lower.rows() != market.n || fs.lower.cols() != market.m ||
      fs.upper.rows() != market.n || fs.upper.cols() != market.m) {
    fail("fairness bound matrices do not match the market shape");
    return;
  }
  for (int i = 0; i < market.n; ++i) {
    bool any = false;
    double lsum = 0.0, usum = 0.0;
    for (int j = 0; j < market.m; ++j) {
      if (!fs.constrained(i, j)) {
        lsum += 0.0;
        usum += 1.0;
        continue;
      }
      any = true;
      const double l = fs.lower(i, j), u = fs.upper(i, j);
      if (!(l >= 0.0 && l <= 1.0) || !(u >= 0.0 && u <= 1.0)) {
        std::ostringstream os;
        os << "advertiser " << i << ", type " << j << ": bounds must lie in [0,1]";
        fail(os.str());
      }
      if (l > u) {
        std::ostringstream os;
        os << "advertiser " << i << ", type " << j << ": lower bound exceeds upper";
        fail(os.str());
      }
      lsum += l;
      usum += u;
    }
    if (!any) continue;
    if (lsum > 1.0 + 1e-12) {
      std::ostringstream os;
      os << "advertiser " << i << ": lower bounds across types sum above 1";
      fail(os.str());
    }
    if (usum < 1.0 - 1e-12) {
      std::ostringstream os;
      os << "advertiser " << i << ": upper bounds across types sum below 1";
      fail(os.str());
    }
  }
}

}  // namespace

ValidationReport validate(const MarketInstance& market) {
  ValidationReport rep;
  check_market(market, rep);
  return rep;
}

ValidationReport validate(const MarketInstance& market, const FairnessSpec& fairness) {
  ValidationReport rep;
  check_market(market, rep);
  if (rep.ok) check_fairness(market, fairness, rep);
  return rep;
}

}  // namespace fairbid

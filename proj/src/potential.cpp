#include "synclab/potential.hpp"

#include <cmath>
#include <sstream>

#include "synclab/errors.hpp"

namespace synclab {

double Potential::inv(double u) const {
  double lo = phi_min();
  double hi = 1.0;
  if (!std::isfinite(lo)) {
    throw NumericalError("generic inverse needs a finite phase domain");
  }
  double flo = eval(lo);
  double fhi = eval(hi);
  if (u < flo || u > fhi) {
    std::ostringstream os;
    os << "potential value " << u << " outside invertible range [" << flo << ", " << fhi << "]";
    throw NumericalError(os.str());
  }
  // U is strictly increasing, so plain bisection converges unconditionally.
  while (hi - lo > 1e-12) {
    double mid = 0.5 * (lo + hi);
    if (eval(mid) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

IntegrateAndFire::IntegrateAndFire(double drive)
    : drive_(drive), period_(if_free_period(drive)) {}

double IntegrateAndFire::eval(double phi) const {
  return drive_ * (1.0 - std::exp(-phi * period_));
}

double IntegrateAndFire::deriv(double phi) const {
  return drive_ * period_ * std::exp(-phi * period_);
}

double IntegrateAndFire::inv(double u) const {
  if (u >= drive_) {
    std::ostringstream os;
    os << "value " << u << " at or above the drive asymptote " << drive_;
    throw NumericalError(os.str());
  }
  return -std::log(1.0 - u / drive_) / period_;
}

double if_free_period(double drive) {
  if (drive <= 1.0) {
    throw std::invalid_argument("integrate-and-fire drive must exceed 1");
  }
  return std::log(drive / (drive - 1.0));
}

TransferResult transfer(const Potential& U, double phi, double eps) {
  if (phi > 1.0 + 1e-12) {
    throw std::invalid_argument("transfer called with phase above threshold");
  }
  if (eps == 0.0) {
    return {phi, false};
  }
  double u = U.eval(phi) + eps;
  if (u >= 1.0) {
    return {0.0, true};
  }
  return {U.inv(u), false};
}

void validate_potential(const Potential& U, double lo, double hi, int samples) {
  if (!(lo < hi) || samples < 2) {
    throw std::invalid_argument("validate_potential: bad sampling range");
  }
  if (std::abs(U.eval(0.0)) > 1e-12 || std::abs(U.eval(1.0) - 1.0) > 1e-12) {
    throw std::invalid_argument("potential violates U(0) = 0, U(1) = 1 normalization");
  }
  double prev = U.deriv(lo);
  for (int k = 0; k < samples; ++k) {
    double phi = lo + (hi - lo) * (k + 1) / samples;
    double d = U.deriv(phi);
    if (!(d > 0.0)) {
      throw std::invalid_argument("potential derivative not positive on the sampled range");
    }
    if (!(d < prev)) {
      throw std::invalid_argument("potential derivative not strictly decreasing (concavity)");
    }
    prev = d;
  }
  for (int k = 0; k <= samples; ++k) {
    double phi = lo + (hi - lo) * k / samples;
    if (phi > 1.0) continue;
    if (std::abs(U.inv(U.eval(phi)) - phi) > 1e-10) {
      throw std::invalid_argument("potential inverse does not match eval");
    }
  }
}

}  // namespace synclab

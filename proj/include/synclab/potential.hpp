#pragma once

#include <limits>

namespace synclab {

// Rise function U of an oscillator: smooth, U' > 0, U'' < 0, normalized so U(0) = 0 and
// U(1) = 1 (threshold).  The phase domain is [phi_min(), 1]; inhibition can push phases
// below zero, so implementations choose how far the lower bound extends.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual double eval(double phi) const = 0;
  virtual double deriv(double phi) const = 0;

  // Inverse of eval.  Default is a bisection bracket on [phi_min(), 1] with absolute
  // tolerance 1e-12; concrete families override with closed forms when available.
  virtual double inv(double u) const;

  // Lower end of the valid phase domain.
  virtual double phi_min() const = 0;
};

// Integrate-and-fire family: U(phi) = I * (1 - exp(-phi * T)) with T = log(I / (I - 1)),
// drive I > 1.  Closed form is valid for every real phi and inverts analytically.
class IntegrateAndFire : public Potential {
 public:
  explicit IntegrateAndFire(double drive);

  double eval(double phi) const override;
  double deriv(double phi) const override;
  double inv(double u) const override;
  double phi_min() const override { return -std::numeric_limits<double>::infinity(); }

  double drive() const { return drive_; }
  double free_period() const { return period_; }

 private:
  double drive_;
  double period_;
};

// Free (uncoupled) period of the integrate-and-fire oscillator, log(I / (I - 1)).
double if_free_period(double drive);

struct TransferResult {
  double phase;
  bool fired;
};

// Response to a pulse of strength eps received at phase phi <= 1: the potential jumps by
// eps.  Sub-threshold lands at U^{-1}(U(phi) + eps); at or above threshold the oscillator
// resets to 0 and emits.  eps == 0 is the identity, returned bit-exactly.
TransferResult transfer(const Potential& U, double phi, double eps);

// Sampled audit of the qualitative requirements on [lo, hi]: positive and strictly
// decreasing derivative, normalization U(0) = 0 and U(1) = 1, invertibility.  Throws on
// the first violation.
void validate_potential(const Potential& U, double lo, double hi, int samples = 1000);

}  // namespace synclab

#pragma once

#include <cmath>
#include <string>

#include "heston/errors.hpp"

namespace heston {

// Constant coefficients of the elliptic Heston operator
//   A v = -(y/2)(v_xx + 2 rho sigma v_xy + sigma^2 v_yy)
//         - (c0 - q - y/2) v_x - kappa (theta - y) v_y + c0 v.
template <class Scalar>
struct CoefficientsT {
  Scalar sigma{1};   // volatility of volatility, != 0
  Scalar rho{0};     // correlation, strictly inside (-1, 1)
  Scalar kappa{1};   // mean-reversion rate, > 0
  Scalar theta{1};   // mean-reversion level, > 0
  Scalar c0{0};      // killing rate, >= 0
  Scalar q{0};       // drift offset, unrestricted
  Scalar gamma{0};   // weight decay in x, >= 0
};

using Coefficients = CoefficientsT<double>;

// Constants derived from a coefficient set: the ellipticity lower bound nu0
// (smaller eigenvalue of ((1, rho sigma), (rho sigma, sigma^2))), the
// coefficient magnitude sum Lambda, the weight exponents beta = 2 kappa theta
// / sigma^2 and mu = 2 kappa / sigma^2, and the first-order form coefficients
// a1, b1 of the associated bilinear form.
template <class Scalar>
struct DerivedConstantsT {
  Scalar nu0{};
  Scalar lambda{};
  Scalar beta{};
  Scalar mu{};
  Scalar a1{};
  Scalar b1{};

  bool b1_is_zero(Scalar rel = Scalar(1e-14)) const {
    const Scalar scale = std::max<Scalar>(Scalar(1), std::abs(lambda));
    return std::abs(b1) <= rel * scale;
  }
};

using DerivedConstants = DerivedConstantsT<double>;

// Coefficients of the shifted operator family A_m together with the shift
// order.  m = 0 reproduces the base operator exactly.
template <class Scalar>
struct ShiftedCoefficientsT {
  CoefficientsT<Scalar> base{};
  int m{0};
  Scalar theta_m{};
  Scalar q_m{};
  Scalar c0_m{};
  Scalar beta_m{};
};

using ShiftedCoefficients = ShiftedCoefficientsT<double>;

template <class Scalar>
CoefficientsT<Scalar> validate_coefficients(const CoefficientsT<Scalar>& raw) {
  if (raw.sigma == Scalar(0))
    throw Error("SigmaZero", "sigma must be nonzero");
  if (!(raw.rho > Scalar(-1) && raw.rho < Scalar(1)))
    throw Error("RhoOutOfRange", "rho must lie strictly inside (-1, 1)");
  if (!(raw.kappa > Scalar(0)) || !(raw.theta > Scalar(0)))
    throw Error("NonpositiveKappaTheta", "kappa and theta must be positive");
  if (raw.c0 < Scalar(0)) throw Error("NegativeC0", "c0 must be nonnegative");
  if (raw.gamma < Scalar(0))
    throw Error("NegativeGamma", "gamma must be nonnegative");
  return raw;
}

template <class Scalar>
DerivedConstantsT<Scalar> derived_constants(const CoefficientsT<Scalar>& c) {
  const Scalar s2 = c.sigma * c.sigma;
  const Scalar rs = c.rho * c.sigma;
  const Scalar disc = Scalar(1) - Scalar(2) * s2 + Scalar(4) * rs * rs + s2 * s2;
  DerivedConstantsT<Scalar> d;
  d.nu0 = (Scalar(1) + s2 - std::sqrt(std::max<Scalar>(disc, Scalar(0)))) / Scalar(2);
  // The coefficient sum reads the interest-rate symbol as c0 (the killing
  // rate of the operator).
  d.lambda = Scalar(1) + Scalar(2) * std::abs(rs) + s2 + c.kappa * c.theta +
             std::abs(c.c0 - c.q) + c.c0;
  d.beta = Scalar(2) * c.kappa * c.theta / s2;
  d.mu = Scalar(2) * c.kappa / s2;
  d.a1 = c.kappa * c.rho / c.sigma - Scalar(0.5);
  d.b1 = c.c0 - c.q - c.kappa * c.theta * c.rho / c.sigma;
  return d;
}

template <class Scalar>
ShiftedCoefficientsT<Scalar> shift_coefficients(const CoefficientsT<Scalar>& c,
                                                int m) {
  if (m < 0) throw Error("NegativeShift", "shift order must be nonnegative");
  ShiftedCoefficientsT<Scalar> s;
  s.base = c;
  s.m = m;
  const Scalar mm = Scalar(m);
  s.theta_m = c.theta + mm * c.sigma * c.sigma / (Scalar(2) * c.kappa);
  s.q_m = c.q - mm * c.rho * c.sigma;
  s.c0_m = c.c0 + mm * c.kappa;
  s.beta_m = derived_constants(c).beta + mm;
  return s;
}

// The shifted set viewed as a plain coefficient record (kappa, sigma, rho,
// gamma unchanged).
template <class Scalar>
CoefficientsT<Scalar> as_coefficients(const ShiftedCoefficientsT<Scalar>& s) {
  CoefficientsT<Scalar> c = s.base;
  c.theta = s.theta_m;
  c.q = s.q_m;
  c.c0 = s.c0_m;
  return c;
}

}  // namespace heston

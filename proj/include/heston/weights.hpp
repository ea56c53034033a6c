#pragma once

#include <cmath>

#include "heston/coefficients.hpp"
#include "heston/errors.hpp"

namespace heston {

// Weight family w_m(x, y) = y^{beta + m - 1} e^{-gamma sqrt(1 + x^2) - mu y};
// m = 0 is the base weight of the variational formulation, and w_m = y^m w
// exactly.
template <class Scalar>
struct WeightSpecT {
  Scalar beta{1};
  Scalar mu{0};
  Scalar gamma{0};
  int m{0};

  WeightSpecT<Scalar> shifted(int dm) const {
    WeightSpecT<Scalar> w = *this;
    w.m += dm;
    return w;
  }
};

using WeightSpec = WeightSpecT<double>;

template <class Scalar>
WeightSpecT<Scalar> weight_from_constants(const DerivedConstantsT<Scalar>& d,
                                          Scalar gamma, int m = 0) {
  return {d.beta, d.mu, gamma, m};
}

// Pure power weight y^{beta-1} (Lebesgue measure for beta = 1).
template <class Scalar>
WeightSpecT<Scalar> power_weight(Scalar beta) {
  return {beta, Scalar(0), Scalar(0), 0};
}

template <class Scalar>
Scalar weight_value(const WeightSpecT<Scalar>& w, Scalar x, Scalar y) {
  if (!(y > Scalar(0))) throw Error("NonpositiveY", "weight requires y > 0");
  return std::pow(y, w.beta + Scalar(w.m) - Scalar(1)) *
         std::exp(-w.gamma * std::sqrt(Scalar(1) + x * x) - w.mu * y);
}

}  // namespace heston

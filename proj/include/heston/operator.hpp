#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>

#include "heston/coefficients.hpp"
#include "heston/errors.hpp"
#include "heston/fields.hpp"

namespace heston {

// Point value of a scalar field and its partial derivatives through order 3.
// Entries are optional so consumers can state exactly which derivatives an
// operation needs; absent required entries raise MissingDerivative.
template <class Scalar>
struct JetPointT {
  Scalar x{};
  Scalar y{};
  std::array<std::array<std::optional<Scalar>, 4>, 4> d{};  // d[i][j] = D_x^i D_y^j v

  Scalar get(int ix, int iy) const {
    if (ix < 0 || iy < 0 || ix + iy > 3 || !d[ix][iy])
      throw Error("MissingDerivative",
                  "jet lacks derivative of order (" + std::to_string(ix) + "," +
                      std::to_string(iy) + ")");
    return *d[ix][iy];
  }

  void set(int ix, int iy, Scalar v) { d[ix][iy] = v; }
};

using JetPoint = JetPointT<double>;

inline JetPoint jet_from_field(const AnalyticField& f, double x, double y,
                               int order = 2) {
  if (y <= 0.0) throw Error("NonpositiveY", "jet point requires y > 0");
  JetPoint j;
  j.x = x;
  j.y = y;
  for (int ix = 0; ix <= order; ++ix)
    for (int iy = 0; ix + iy <= order; ++iy) j.set(ix, iy, f.d(x, y, ix, iy));
  return j;
}

// Pointwise application of the shifted operator family
//   A_m v = -(y/2)(v_xx + 2 rho sigma v_xy + sigma^2 v_yy)
//           - (c0 - q_m - y/2) v_x - kappa (theta_m - y) v_y + c0_m v,
// m = 0 giving the base operator.  The drift slot keeps the base killing
// rate (the interest-rate symbol of the drift is not shifted); only this
// reading satisfies D_y^m A = A_m D_y^m + m B D_y^{m-1}.
template <class Scalar>
Scalar apply_operator(const ShiftedCoefficientsT<Scalar>& s,
                      const JetPointT<Scalar>& j) {
  if (j.y <= Scalar(0)) throw Error("NonpositiveY", "operator requires y > 0");
  const auto& c = s.base;
  const Scalar rs = c.rho * c.sigma;
  const Scalar diff = j.get(2, 0) + Scalar(2) * rs * j.get(1, 1) +
                      c.sigma * c.sigma * j.get(0, 2);
  return -j.y / Scalar(2) * diff - (c.c0 - s.q_m - j.y / Scalar(2)) * j.get(1, 0) -
         c.kappa * (s.theta_m - j.y) * j.get(0, 1) + s.c0_m * j.get(0, 0);
}

// Commutator remainder operator B v = -(1/2) v_xx + (1/2) v_x.
template <class Scalar>
Scalar apply_B(const JetPointT<Scalar>& j) {
  return -j.get(2, 0) / Scalar(2) + j.get(1, 0) / Scalar(2);
}

// Full first commutator [D_y, A] w = -(1/2)(w_xx + 2 rho sigma w_xy
// + sigma^2 w_yy) + (1/2) w_x + kappa w_y.
template <class Scalar>
Scalar apply_dy_commutator(const CoefficientsT<Scalar>& c,
                           const JetPointT<Scalar>& j) {
  const Scalar rs = c.rho * c.sigma;
  return -(j.get(2, 0) + Scalar(2) * rs * j.get(1, 1) +
           c.sigma * c.sigma * j.get(0, 2)) /
             Scalar(2) +
         j.get(1, 0) / Scalar(2) + c.kappa * j.get(0, 1);
}

namespace detail {

// A as a sum of terms coeff(y) * D_x^i D_y^j with coefficients affine in y;
// lets D_x^a D_y^b (A v) be evaluated exactly from field closures.
struct OperatorTerm {
  double a0;  // constant part of the coefficient
  double a1;  // linear-in-y part
  int ix;
  int iy;
};

inline std::array<OperatorTerm, 6> operator_terms(const Coefficients& c) {
  const double rs = c.rho * c.sigma;
  return {{{0.0, -0.5, 2, 0},
           {0.0, -rs, 1, 1},
           {0.0, -0.5 * c.sigma * c.sigma, 0, 2},
           {-(c.c0 - c.q), 0.5, 1, 0},
           {-c.kappa * c.theta, c.kappa, 0, 1},
           {c.c0, 0.0, 0, 0}}};
}

}  // namespace detail

// D_x^a D_y^b (A v) at a point, composed from the field's derivative
// closures.  Because every coefficient of A is affine in y,
//   D_y^b (c(y) w) = c(y) D_y^b w + b c'(y) D_y^{b-1} w.
inline double derivative_of_applied(const Coefficients& c,
                                    const AnalyticField& v, double x, double y,
                                    int ax, int ay) {
  double s = 0.0;
  for (const auto& t : detail::operator_terms(c)) {
    const double coeff = t.a0 + t.a1 * y;
    // exactly vanishing coefficients (the diffusion slots at y = 0) are
    // skipped so fields whose high derivatives blow up where the operator
    // degenerates still compose to their continuous extension
    if (coeff != 0.0) s += coeff * v.d(x, y, t.ix + ax, t.iy + ay);
    if (ay > 0 && t.a1 != 0.0)
      s += static_cast<double>(ay) * t.a1 * v.d(x, y, t.ix + ax, t.iy + ay - 1);
  }
  return s;
}

// A v as an analytic field of its own: value and derivatives compose from
// the source field's closures.  Defined on the closed half-plane (the
// operator's coefficients extend continuously to y = 0).
inline AnalyticField applied_field(const Coefficients& c,
                                   const AnalyticField& v) {
  return {[c, v](double x, double y, int ix, int iy) {
    return derivative_of_applied(c, v, x, y, ix, iy);
  }};
}

struct CommutatorResidual {
  double residual;  // absolute defect of the identity
  double scale;     // max magnitude of the compared terms (>= 1)
};

// Defect of D_y^m (A v) = A_m (D_y^m v) + m B (D_y^{m-1} v) at one point.
// The field must supply exact derivatives through order m + 2.
inline CommutatorResidual commutator_residual_shifted(const Coefficients& c,
                                                      const AnalyticField& v,
                                                      int m, double x,
                                                      double y) {
  if (m < 1) throw Error("InsufficientJetOrder", "shift order m must be >= 1");
  if (y <= 0.0) throw Error("NonpositiveY", "commutator requires y > 0");
  const double lhs = derivative_of_applied(c, v, x, y, 0, m);

  const auto sm = shift_coefficients(c, m);
  JetPoint jm;
  jm.x = x;
  jm.y = y;
  for (int ix = 0; ix <= 2; ++ix)
    for (int iy = 0; ix + iy <= 2; ++iy) jm.set(ix, iy, v.d(x, y, ix, iy + m));
  const double amv = apply_operator(sm, jm);

  JetPoint jb;
  jb.x = x;
  jb.y = y;
  jb.set(1, 0, v.d(x, y, 1, m - 1));
  jb.set(2, 0, v.d(x, y, 2, m - 1));
  const double bv = static_cast<double>(m) * apply_B(jb);

  const double scale =
      std::max({1.0, std::abs(lhs), std::abs(amv), std::abs(bv)});
  return {std::abs(lhs - amv - bv), scale};
}

// Defect of the mixed form
//   D_x^{k-m} D_y^m (A v) = A (D_x^{k-m} D_y^m v)
//                           + m [D_y, A] (D_x^{k-m} D_y^{m-1} v),
// for 0 <= m <= k.  Derivatives through order k + 2 are required.
inline CommutatorResidual commutator_residual_mixed(const Coefficients& c,
                                                    const AnalyticField& v,
                                                    int k, int m, double x,
                                                    double y) {
  if (m < 0 || m > k)
    throw Error("InsufficientJetOrder", "mixed form requires 0 <= m <= k");
  if (y <= 0.0) throw Error("NonpositiveY", "commutator requires y > 0");
  const int kx = k - m;
  const double lhs = derivative_of_applied(c, v, x, y, kx, m);

  const auto s0 = shift_coefficients(c, 0);
  JetPoint jd;
  jd.x = x;
  jd.y = y;
  for (int ix = 0; ix <= 2; ++ix)
    for (int iy = 0; ix + iy <= 2; ++iy)
      jd.set(ix, iy, v.d(x, y, ix + kx, iy + m));
  const double adv = apply_operator(s0, jd);

  double commv = 0.0;
  if (m >= 1) {
    JetPoint jc;
    jc.x = x;
    jc.y = y;
    for (int ix = 0; ix <= 2; ++ix)
      for (int iy = 0; ix + iy <= 2; ++iy)
        jc.set(ix, iy, v.d(x, y, ix + kx, iy + m - 1));
    commv = static_cast<double>(m) * apply_dy_commutator(c, jc);
  }

  const double scale =
      std::max({1.0, std::abs(lhs), std::abs(adv), std::abs(commv)});
  return {std::abs(lhs - adv - commv), scale};
}

}  // namespace heston

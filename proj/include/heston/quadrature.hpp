#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "heston/errors.hpp"
#include "heston/weights.hpp"

namespace heston {

// Polynomial in a local cell coordinate (mapped so the cell starts at 0);
// degree <= 4 suffices for products of bilinear basis functions and the
// (1+y)^2 expansions.
struct LocalPoly {
  std::array<double, 5> c{};
  int deg = 0;

  static LocalPoly constant(double a) {
    LocalPoly p;
    p.c[0] = a;
    p.deg = 0;
    return p;
  }
  static LocalPoly linear(double a0, double a1) {
    LocalPoly p;
    p.c[0] = a0;
    p.c[1] = a1;
    p.deg = 1;
    return p;
  }

  double eval(double t) const {
    double s = 0.0;
    for (int k = deg; k >= 0; --k) s = s * t + c[k];
    return s;
  }

  LocalPoly operator*(const LocalPoly& o) const {
    LocalPoly r;
    r.deg = deg + o.deg;
    if (r.deg > 4) throw Error("PolyDegreeOverflow", "local polynomial degree > 4");
    for (int i = 0; i <= deg; ++i)
      for (int j = 0; j <= o.deg; ++j) r.c[i + j] += c[i] * o.c[j];
    return r;
  }
};

namespace quad {

// 10-point Gauss-Legendre nodes/weights on [0, 1].
inline constexpr std::array<double, 10> kNodes = {
    0.013046735741414128, 0.067468316655507744, 0.160295215850487796,
    0.283302302935376404, 0.425562830509184394, 0.574437169490815606,
    0.716697697064623596, 0.839704784149512204, 0.932531683344492256,
    0.986953264258585872};
inline constexpr std::array<double, 10> kWeights = {
    0.033335672154344069, 0.074725674575290297, 0.109543181257991022,
    0.134633359654998178, 0.147762112357376435, 0.147762112357376435,
    0.134633359654998178, 0.109543181257991022, 0.074725674575290297,
    0.033335672154344069};

// integral_0^h y^p e^(-mu y) dy for p > -1 via the absolutely convergent
// series h^{p+1} sum_k (-mu h)^k / (k! (p + 1 + k)).  Exact (to round-off)
// for the cell sizes this project meets; mu h is assumed moderate.
inline double power_exp_moment(double h, double p, double mu) {
  if (!(p > -1.0)) throw Error("NonpositiveBeta", "power moment requires exponent > -1");
  if (h == 0.0) return 0.0;
  const double z = mu * h;
  double term = 1.0;  // (-z)^k / k!
  double sum = 1.0 / (p + 1.0);
  for (int k = 1; k <= 256; ++k) {
    term *= -z / static_cast<double>(k);
    const double add = term / (p + 1.0 + static_cast<double>(k));
    sum += add;
    if (std::abs(add) <= 1e-18 * std::abs(sum) && k > 4) break;
  }
  return std::pow(h, p + 1.0) * sum;
}

}  // namespace quad

// integral over [y0, y0 + hy] of q(eta) (y0 + eta)^{pow} e^{-mu (y0 + eta)}
// d eta with q given in the local coordinate eta = y - y0.  Cells touching
// y = 0 use exact power moments (series in mu); others use Gauss-Legendre.
inline double y_weighted_integral(double y0, double hy, double pow, double mu,
                                  const LocalPoly& q) {
  if (hy <= 0.0) return 0.0;
  if (y0 == 0.0) {
    double s = 0.0;
    for (int k = 0; k <= q.deg; ++k)
      if (q.c[k] != 0.0)
        s += q.c[k] * quad::power_exp_moment(hy, pow + static_cast<double>(k), mu);
    return s;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < quad::kNodes.size(); ++i) {
    const double eta = quad::kNodes[i] * hy;
    const double y = y0 + eta;
    s += quad::kWeights[i] * q.eval(eta) * std::pow(y, pow) * std::exp(-mu * y);
  }
  return s * hy;
}

// integral over [x0, x0 + hx] of q(xi) e^{-gamma sqrt(1 + x^2)}
// [x / sqrt(1 + x^2)]^drift d xi with x = x0 + xi.  With gamma = 0 and no
// drift factor the exponential is exactly 1, so the result depends only on
// the local polynomial and hx.
inline double x_weighted_integral(double x0, double hx, double gamma,
                                  bool drift_factor, const LocalPoly& q) {
  if (hx <= 0.0) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < quad::kNodes.size(); ++i) {
    const double xi = quad::kNodes[i] * hx;
    double f = q.eval(xi);
    if (gamma != 0.0 || drift_factor) {
      const double x = x0 + xi;
      const double root = std::sqrt(1.0 + x * x);
      f *= std::exp(-gamma * root);
      if (drift_factor) f *= x / root;
    }
    s += quad::kWeights[i] * f;
  }
  return s * hx;
}

struct Cell {
  double x0, hx;
  double y0, hy;
};

// Moments of the weight against the local bilinear basis:
//   value(j, a) = integral_cell y^{beta + m - 1 + j} e^{-mu y}
//                 e^{-gamma sqrt(1+x^2)} phi_a dx dy,
// where phi_a, a = (bx + 2 by), is the tensor hat function anchored at cell
// corner (bx, by).  The four basis functions sum to 1, so the phi == 1
// moment is the row sum.
class CellMoments {
 public:
  CellMoments(const WeightSpec& w, const Cell& cell, int max_power)
      : max_power_(max_power) {
    if (!(w.beta + w.m > 0.0))
      throw Error("NonpositiveBeta", "weight exponent beta + m must be positive");
    if (max_power < 0) throw Error("InvalidPower", "max_power must be >= 0");
    table_.resize(static_cast<std::size_t>(max_power + 1) * 4, 0.0);

    const LocalPoly lx0 = LocalPoly::linear(1.0, -1.0 / cell.hx);
    const LocalPoly lx1 = LocalPoly::linear(0.0, 1.0 / cell.hx);
    const LocalPoly ly0 = LocalPoly::linear(1.0, -1.0 / cell.hy);
    const LocalPoly ly1 = LocalPoly::linear(0.0, 1.0 / cell.hy);
    const double xint[2] = {
        x_weighted_integral(cell.x0, cell.hx, w.gamma, false, lx0),
        x_weighted_integral(cell.x0, cell.hx, w.gamma, false, lx1)};
    const double base_pow = w.beta + static_cast<double>(w.m) - 1.0;
    for (int j = 0; j <= max_power; ++j) {
      const double yint[2] = {
          y_weighted_integral(cell.y0, cell.hy, base_pow + j, w.mu, ly0),
          y_weighted_integral(cell.y0, cell.hy, base_pow + j, w.mu, ly1)};
      for (int by = 0; by < 2; ++by)
        for (int bx = 0; bx < 2; ++bx)
          table_[static_cast<std::size_t>(j) * 4 + (bx + 2 * by)] =
              xint[bx] * yint[by];
    }
  }

  double value(int j, int a) const {
    return table_.at(static_cast<std::size_t>(j) * 4 + a);
  }

  // phi == 1 moment (partition of unity).
  double total(int j) const {
    double s = 0.0;
    for (int a = 0; a < 4; ++a) s += value(j, a);
    return s;
  }

 private:
  int max_power_;
  std::vector<double> table_;
};

inline CellMoments cell_weight_moments(const WeightSpec& w, const Cell& cell,
                                       int max_power) {
  return CellMoments(w, cell, max_power);
}

}  // namespace heston

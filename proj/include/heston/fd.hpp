#pragma once

#include <cmath>
#include <cstdlib>

#include "heston/grid.hpp"

namespace heston {

struct ShiftedFieldResult {
  GridFunction values;  // quotient values on the full grid (zero off-mask)
  NodeMask mask;        // nodes where the quotient is defined
};

// Finite-difference quotient in x: (u(x + h, y) - u(x, y)) / h on all nodes
// whose shifted partner stays on the grid.  h must be a (signed) multiple of
// the uniform x-spacing.
inline ShiftedFieldResult fd_quotient_x(const GridFunction& u, double h) {
  const Grid& g = u.grid();
  if (h == 0.0) throw Error("HNotOnGrid", "h must be nonzero");
  const double ratio = h / g.dx();
  const int steps = static_cast<int>(std::lround(ratio));
  if (steps == 0 || std::abs(ratio - steps) > 1e-9 * std::abs(ratio))
    throw Error("HNotOnGrid", "h must be a multiple of the x-spacing");

  Vec out = Vec::Zero(g.node_count());
  NodeMask mask(static_cast<std::size_t>(g.node_count()), 0);
  long defined = 0;
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      const int is = i + steps;
      if (is < 0 || is > g.nx()) continue;
      out[g.index(i, j)] =
          (u.values()[g.index(is, j)] - u.values()[g.index(i, j)]) / h;
      mask[g.index(i, j)] = 1;
      ++defined;
    }
  }
  if (defined == 0) throw Error("EmptyResult", "shift leaves no valid nodes");
  return {GridFunction(u.grid_ptr(), std::move(out)), std::move(mask)};
}

struct FdIbpResult {
  double residual;
  double scale;
};

// Residual of the finite-difference integration-by-parts identity
//   -(f, d_x^{-h} v)_w = ((w^h / w) d_x^h f, v)_w + ((d_x^h w / w) f, v)_w
// evaluated with one and the same discrete inner product on both sides
// (node sums with the pointwise weight and a tensor node measure).  Exact
// telescoping at the summation level; the residual is round-off only.
inline FdIbpResult fd_integration_by_parts_check(const GridFunction& f,
                                                 const GridFunction& v,
                                                 double h,
                                                 const WeightSpec& w) {
  const Grid& g = f.grid();
  if (&g != &v.grid()) throw Error("GridMismatch", "f and v must share a grid");
  const double ratio = h / g.dx();
  const int steps = static_cast<int>(std::lround(ratio));
  if (steps == 0 || std::abs(ratio - steps) > 1e-9 * std::abs(ratio))
    throw Error("HNotOnGrid", "h must be a multiple of the x-spacing");

  // Supports must be interior and further than 2|h| from the side edges.
  const int margin = 2 * std::abs(steps);
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) {
      const bool used = f.values()[g.index(i, j)] != 0.0 ||
                        v.values()[g.index(i, j)] != 0.0;
      if (!used) continue;
      if (j == 0 || j == g.ny() || i == 0 || i == g.nx())
        throw Error("SupportTooClose", "support touches the boundary");
      if (i < margin || i > g.nx() - margin)
        throw Error("SupportTooClose", "support within 2|h| of a side edge");
    }

  // Row measure: any fixed positive value per row works; use the trapezoid
  // widths.  The x measure must be constant, which the uniform spacing
  // provides.
  std::vector<double> rho(static_cast<std::size_t>(g.ny() + 1), 0.0);
  for (int j = 1; j < g.ny(); ++j) rho[j] = 0.5 * (g.y(j + 1) - g.y(j - 1));

  auto wval = [&](int i, int j) { return weight_value(w, g.x(i), g.y(j)); };

  double lhs = 0.0, rhs1 = 0.0, rhs2 = 0.0, scale = 0.0;
  const double dx = g.dx();
  for (int j = 1; j < g.ny(); ++j) {
    for (int i = margin; i <= g.nx() - margin; ++i) {
      const double meas = dx * rho[j];
      const double wij = wval(i, j);
      const double fij = f.values()[g.index(i, j)];
      const double vij = v.values()[g.index(i, j)];
      // d_x^{-h} v at (i, j)
      const double dmv =
          (v.values()[g.index(i - steps, j)] - vij) / (-h);
      lhs += -fij * dmv * wij * meas;
      const double wH = wval(i + steps, j);
      const double dpf = (f.values()[g.index(i + steps, j)] - fij) / h;
      rhs1 += (wH / wij) * dpf * vij * wij * meas;
      rhs2 += ((wH - wij) / h / wij) * fij * vij * wij * meas;
      scale = std::max({scale, std::abs(fij * dmv * wij * meas),
                        std::abs(dpf * vij * wH * meas)});
    }
  }
  return {std::abs(lhs - rhs1 - rhs2), std::max(scale, 1.0)};
}

}  // namespace heston

#pragma once

#include <Eigen/SparseCore>
#include <array>
#include <optional>
#include <span>
#include <vector>

#include "heston/coefficients.hpp"
#include "heston/grid.hpp"

namespace heston {

using SparseMat = Eigen::SparseMatrix<double>;

namespace detail {

// 4x4 element matrix of the variational form on one cell for bilinear
// trial/test functions; entry(row = test a_c b_d, col = trial a_a b_b).
// Blocks: (i) the y w-weighted gradient form with matrix
// ((1, rs), (rs, s^2))/2, (ii) the gamma drift block with the x/sqrt(1+x^2)
// factor, (iii) the -(a1 y + b1) u_x v block, (iv) the c0 u v block.
struct CellMatrices {
  std::array<std::array<double, 4>, 4> stiff{};  // blocks (i)-(iv)
  std::array<std::array<double, 4>, 4> mass{};   // phi_a phi_b under w
};

inline CellMatrices cell_matrices(const Coefficients& c,
                                  const DerivedConstants& d, const Cell& cell) {
  CellMatrices out;
  const double rs = c.rho * c.sigma;
  const double s2 = c.sigma * c.sigma;

  const LocalPoly lx[2] = {LocalPoly::linear(1.0, -1.0 / cell.hx),
                           LocalPoly::linear(0.0, 1.0 / cell.hx)};
  const LocalPoly dlx[2] = {LocalPoly::constant(-1.0 / cell.hx),
                            LocalPoly::constant(1.0 / cell.hx)};
  const LocalPoly ly[2] = {LocalPoly::linear(1.0, -1.0 / cell.hy),
                           LocalPoly::linear(0.0, 1.0 / cell.hy)};
  const LocalPoly dly[2] = {LocalPoly::constant(-1.0 / cell.hy),
                            LocalPoly::constant(1.0 / cell.hy)};

  double XA[2][2], XB[2][2], XC[2][2], XD[2][2], XG[2][2], XGA[2][2];
  for (int a = 0; a < 2; ++a)
    for (int cc = 0; cc < 2; ++cc) {
      XA[a][cc] = x_weighted_integral(cell.x0, cell.hx, c.gamma, false, lx[a] * lx[cc]);
      XB[a][cc] = x_weighted_integral(cell.x0, cell.hx, c.gamma, false, dlx[a] * lx[cc]);
      XC[a][cc] = x_weighted_integral(cell.x0, cell.hx, c.gamma, false, lx[a] * dlx[cc]);
      XD[a][cc] = x_weighted_integral(cell.x0, cell.hx, c.gamma, false, dlx[a] * dlx[cc]);
      if (c.gamma != 0.0) {
        XG[a][cc] = x_weighted_integral(cell.x0, cell.hx, c.gamma, true, dlx[a] * lx[cc]);
        XGA[a][cc] = x_weighted_integral(cell.x0, cell.hx, c.gamma, true, lx[a] * lx[cc]);
      } else {
        XG[a][cc] = XGA[a][cc] = 0.0;
      }
    }

  const double p0 = d.beta - 1.0;  // y-power of the base weight
  double yM0[2][2], yM1[2][2], yB1[2][2], yC1[2][2], yD1[2][2];
  for (int b = 0; b < 2; ++b)
    for (int dd = 0; dd < 2; ++dd) {
      yM0[b][dd] = y_weighted_integral(cell.y0, cell.hy, p0, d.mu, ly[b] * ly[dd]);
      yM1[b][dd] = y_weighted_integral(cell.y0, cell.hy, p0 + 1.0, d.mu, ly[b] * ly[dd]);
      yB1[b][dd] = y_weighted_integral(cell.y0, cell.hy, p0 + 1.0, d.mu, dly[b] * ly[dd]);
      yC1[b][dd] = y_weighted_integral(cell.y0, cell.hy, p0 + 1.0, d.mu, ly[b] * dly[dd]);
      yD1[b][dd] = y_weighted_integral(cell.y0, cell.hy, p0 + 1.0, d.mu, dly[b] * dly[dd]);
    }

  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int cc = 0; cc < 2; ++cc)
        for (int dd = 0; dd < 2; ++dd) {
          double v = 0.5 * (XD[a][cc] * yM1[b][dd] +
                            rs * (XC[a][cc] * yB1[b][dd] + XB[a][cc] * yC1[b][dd]) +
                            s2 * XA[a][cc] * yD1[b][dd]);
          if (c.gamma != 0.0)
            v += -0.5 * c.gamma *
                 (XG[a][cc] * yM1[b][dd] + rs * XGA[a][cc] * yB1[b][dd]);
          v += -d.a1 * XB[a][cc] * yM1[b][dd] - d.b1 * XB[a][cc] * yM0[b][dd];
          v += c.c0 * XA[a][cc] * yM0[b][dd];
          out.stiff[cc + 2 * dd][a + 2 * b] = v;
          out.mass[cc + 2 * dd][a + 2 * b] = XA[a][cc] * yM0[b][dd];
        }
  return out;
}

// Node-neighbor accumulator: on a tensor grid a node couples only to itself
// and its 8 neighbors.  Accumulation happens in a fixed cell traversal
// order, so assembled values do not depend on the node numbering.
class StencilAccumulator {
 public:
  explicit StencilAccumulator(const Grid& g)
      : grid_(g), data_(static_cast<std::size_t>(g.node_count()) * 9, 0.0) {}

  void add(int row_i, int row_j, int col_i, int col_j, double v) {
    const int di = col_i - row_i + 1;
    const int dj = col_j - row_j + 1;
    data_[static_cast<std::size_t>(grid_.index(row_i, row_j)) * 9 + di + 3 * dj] += v;
  }

  template <class F>
  void for_each(F&& f) const {
    for (int j = 0; j <= grid_.ny(); ++j)
      for (int i = 0; i <= grid_.nx(); ++i)
        for (int dj = -1; dj <= 1; ++dj)
          for (int di = -1; di <= 1; ++di) {
            const int ci = i + di, cj = j + dj;
            if (ci < 0 || ci > grid_.nx() || cj < 0 || cj > grid_.ny()) continue;
            const double v =
                data_[static_cast<std::size_t>(grid_.index(i, j)) * 9 + (di + 1) +
                      3 * (dj + 1)];
            if (v != 0.0) f(grid_.index(i, j), grid_.index(ci, cj), v);
          }
  }

 private:
  const Grid& grid_;
  std::vector<double> data_;
};

}  // namespace detail

// Bilinear form and weighted mass matrix over all grid nodes (no boundary
// elimination); rows are test functions, columns trial functions.
struct FormMatrices {
  SparseMat form;
  SparseMat mass;
};

inline FormMatrices assemble_form(const Coefficients& c, const Grid& grid) {
  validate_coefficients(c);
  const auto d = derived_constants(c);
  detail::StencilAccumulator acc_form(grid), acc_mass(grid);
  for (int cj = 0; cj < grid.ny(); ++cj)
    for (int ci = 0; ci < grid.nx(); ++ci) {
      const Cell cell = grid.cell(ci, cj);
      const auto m = detail::cell_matrices(c, d, cell);
      for (int row = 0; row < 4; ++row)
        for (int col = 0; col < 4; ++col) {
          const int ri = ci + row % 2, rj = cj + row / 2;
          const int qi = ci + col % 2, qj = cj + col / 2;
          acc_form.add(ri, rj, qi, qj, m.stiff[row][col]);
          acc_mass.add(ri, rj, qi, qj, m.mass[row][col]);
        }
    }
  FormMatrices out;
  std::vector<Eigen::Triplet<double>> tf, tm;
  acc_form.for_each([&](int r, int cidx, double v) { tf.emplace_back(r, cidx, v); });
  acc_mass.for_each([&](int r, int cidx, double v) { tm.emplace_back(r, cidx, v); });
  out.form.resize(grid.node_count(), grid.node_count());
  out.form.setFromTriplets(tf.begin(), tf.end());
  out.mass.resize(grid.node_count(), grid.node_count());
  out.mass.setFromTriplets(tm.begin(), tm.end());
  return out;
}

// a(u, v) for nodal fields through the assembled form.
inline double bilinear_value(const SparseMat& form, const GridFunction& u,
                             const GridFunction& v) {
  return v.values().dot(form * u.values());
}

// Linear system for the variational equation: Dirichlet rows eliminated,
// degenerate-boundary and interior nodes kept as genuine unknowns.
struct LinearSystem {
  SparseMat A;
  Vec b;
  GridPtr grid;
  std::vector<int> unknown_of_node;  // -1 on Dirichlet nodes
  std::vector<int> node_of_unknown;
  Vec dirichlet_values;  // full grid size; zero off the Dirichlet set
};

// dirichlet: nodal values whose trace on the Dirichlet boundary is imposed;
// f: nodal source, entering through the weighted mass matrix.  An optional
// unknown numbering (a permutation of 0..n_unknowns-1 in node order)
// reorders the system without changing any assembled value.
inline LinearSystem assemble_system(
    const Coefficients& c, GridPtr grid, const GridFunction& dirichlet,
    const GridFunction& f,
    std::span<const int> unknown_order = {}) {
  validate_coefficients(c);
  const Grid& g = *grid;
  const auto fm = assemble_form(c, g);

  LinearSystem sys;
  sys.grid = grid;
  sys.unknown_of_node.assign(static_cast<std::size_t>(g.node_count()), -1);
  int nu = 0;
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i)
      if (g.classify(i, j) != NodeClass::dirichlet)
        sys.unknown_of_node[static_cast<std::size_t>(g.index(i, j))] = nu++;
  if (!unknown_order.empty()) {
    if (static_cast<int>(unknown_order.size()) != nu)
      throw Error("SizeMismatch", "unknown_order must have one slot per unknown");
    for (auto& slot : sys.unknown_of_node)
      if (slot >= 0) slot = unknown_order[slot];
  }
  sys.node_of_unknown.assign(static_cast<std::size_t>(nu), -1);
  for (int n = 0; n < g.node_count(); ++n)
    if (sys.unknown_of_node[static_cast<std::size_t>(n)] >= 0)
      sys.node_of_unknown[static_cast<std::size_t>(
          sys.unknown_of_node[static_cast<std::size_t>(n)])] = n;

  sys.dirichlet_values = Vec::Zero(g.node_count());
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i)
      if (g.classify(i, j) == NodeClass::dirichlet)
        sys.dirichlet_values[g.index(i, j)] = dirichlet.values()[g.index(i, j)];

  const Vec rhs_full = fm.mass * f.values();
  sys.b = Vec::Zero(nu);
  for (int row = 0; row < g.node_count(); ++row) {
    const int ru = sys.unknown_of_node[static_cast<std::size_t>(row)];
    if (ru >= 0) sys.b[ru] = rhs_full[row];
  }
  std::vector<Eigen::Triplet<double>> trips;
  for (int col = 0; col < fm.form.outerSize(); ++col) {
    const int cu = sys.unknown_of_node[static_cast<std::size_t>(col)];
    for (SparseMat::InnerIterator it(fm.form, col); it; ++it) {
      const int row = static_cast<int>(it.row());
      const int ru = sys.unknown_of_node[static_cast<std::size_t>(row)];
      if (ru < 0) continue;
      if (cu >= 0)
        trips.emplace_back(ru, cu, it.value());
      else
        sys.b[ru] -= it.value() * sys.dirichlet_values[col];
    }
  }
  sys.A.resize(nu, nu);
  sys.A.setFromTriplets(trips.begin(), trips.end());
  sys.A.prune(0.0);  // no explicitly stored zeros
  return sys;
}

}  // namespace heston

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "heston/errors.hpp"
#include "heston/fields.hpp"
#include "heston/geometry.hpp"
#include "heston/quadrature.hpp"
#include "heston/types.hpp"
#include "heston/weights.hpp"

namespace heston {

enum class NodeClass : std::uint8_t { interior, degenerate, dirichlet };

// Tensor grid on a half-plane rectangle.  x-spacing is uniform; y-nodes are
// graded toward the degenerate boundary by y_j = y_max (j / ny)^g, g = 1
// giving uniform spacing.  The bottom row sits exactly at y = 0.
class Grid {
 public:
  Grid(HalfPlaneDomain dom, int nx, int ny, double grading = 1.0)
      : domain_(dom), nx_(nx), ny_(ny), grading_(grading) {
    if (nx < 2 || ny < 2)
      throw Error("GridTooCoarse", "need at least 3 nodes per direction");
    if (!(grading >= 1.0)) throw Error("InvalidGrading", "grading must be >= 1");
    xs_.resize(nx + 1);
    ys_.resize(ny + 1);
    for (int i = 0; i <= nx; ++i)
      xs_[i] = dom.x_min + (dom.x_max - dom.x_min) * static_cast<double>(i) /
                               static_cast<double>(nx);
    xs_[nx] = dom.x_max;
    for (int j = 0; j <= ny; ++j)
      ys_[j] = dom.y_max *
               std::pow(static_cast<double>(j) / static_cast<double>(ny), grading);
    ys_[0] = 0.0;
    ys_[ny] = dom.y_max;
  }

  const HalfPlaneDomain& domain() const { return domain_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double grading() const { return grading_; }
  int node_count() const { return (nx_ + 1) * (ny_ + 1); }
  int cell_count() const { return nx_ * ny_; }

  double x(int i) const { return xs_[i]; }
  double y(int j) const { return ys_[j]; }
  double dx() const { return xs_[1] - xs_[0]; }

  int index(int i, int j) const { return j * (nx_ + 1) + i; }
  std::pair<int, int> coords(int idx) const {
    return {idx % (nx_ + 1), idx / (nx_ + 1)};
  }
  Point point(int i, int j) const { return {xs_[i], ys_[j]}; }

  Cell cell(int ci, int cj) const {
    return {xs_[ci], xs_[ci + 1] - xs_[ci], ys_[cj], ys_[cj + 1] - ys_[cj]};
  }

  // Bottom-edge interior nodes form the degenerate boundary; the two bottom
  // corners are assigned to the Dirichlet boundary together with the side
  // and top edges.
  NodeClass classify(int i, int j) const {
    if (i == 0 || i == nx_ || j == ny_) return NodeClass::dirichlet;
    if (j == 0) return NodeClass::degenerate;
    return NodeClass::interior;
  }

 private:
  HalfPlaneDomain domain_;
  int nx_, ny_;
  double grading_;
  std::vector<double> xs_, ys_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(const HalfPlaneDomain& dom, int nx, int ny,
                         double grading = 1.0) {
  return std::make_shared<Grid>(dom, nx, ny, grading);
}

namespace detail {

// First-derivative weights of the quadratic through (t0, t1, t2) evaluated
// at tau.
inline std::array<double, 3> deriv3_weights(double t0, double t1, double t2,
                                            double tau) {
  return {(2.0 * tau - t1 - t2) / ((t0 - t1) * (t0 - t2)),
          (2.0 * tau - t0 - t2) / ((t1 - t0) * (t1 - t2)),
          (2.0 * tau - t0 - t1) / ((t2 - t0) * (t2 - t1))};
}

}  // namespace detail

// Nodal values on a grid with lazily cached discrete derivative fields.
// Derivatives use second-order three-point stencils: centered in the
// interior, one-sided at the first and last node of each line; higher and
// mixed orders are compositions of the one-dimensional passes (the x and y
// passes commute exactly).
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(GridPtr grid, Vec values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_->node_count())
      throw Error("SizeMismatch", "value count must equal node count");
  }

  static GridFunction zero(GridPtr grid) {
    Vec v = Vec::Zero(grid->node_count());
    return GridFunction(std::move(grid), std::move(v));
  }

  static GridFunction sample(GridPtr grid, const AnalyticField& f) {
    Vec v(grid->node_count());
    for (int j = 0; j <= grid->ny(); ++j)
      for (int i = 0; i <= grid->nx(); ++i)
        v[grid->index(i, j)] = f.d(grid->x(i), grid->y(j), 0, 0);
    return GridFunction(std::move(grid), std::move(v));
  }

  const Grid& grid() const { return *grid_; }
  GridPtr grid_ptr() const { return grid_; }
  const Vec& values() const { return values_; }
  double operator()(int i, int j) const { return values_[grid_->index(i, j)]; }

  // D_x^ax D_y^ay values; computed on demand and cached.
  const Vec& derivative(int ax, int ay) const {
    if (ax < 0 || ay < 0) throw Error("InvalidOrder", "derivative orders must be >= 0");
    if (ax + ay > 4) throw Error("OrderTooHigh", "derivative order limited to 4");
    if (ax == 0 && ay == 0) return values_;
    const auto key = std::make_pair(ax, ay);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    Vec src = (ax > 0) ? derivative(ax - 1, ay) : derivative(0, ay - 1);
    Vec out = (ax > 0) ? d_pass_x(src) : d_pass_y(src);
    return cache_.emplace(key, std::move(out)).first->second;
  }

  // Fills the cache for all derivatives with ax + ay <= order.
  void ensure_derivatives(int order) const {
    if (order > 4) throw Error("OrderTooHigh", "derivative order limited to 4");
    for (int ax = 0; ax <= order; ++ax)
      for (int ay = 0; ax + ay <= order; ++ay)
        if (ax + ay > 0) derivative(ax, ay);
  }

 private:
  Vec d_pass_x(const Vec& v) const {
    const Grid& g = *grid_;
    if (g.nx() < 2) throw Error("GridTooCoarse", "x stencil needs 3 nodes");
    Vec out(v.size());
    for (int j = 0; j <= g.ny(); ++j) {
      for (int i = 0; i <= g.nx(); ++i) {
        int base = std::min(std::max(i - 1, 0), g.nx() - 2);
        const auto w = detail::deriv3_weights(g.x(base), g.x(base + 1),
                                              g.x(base + 2), g.x(i));
        out[g.index(i, j)] = w[0] * v[g.index(base, j)] +
                             w[1] * v[g.index(base + 1, j)] +
                             w[2] * v[g.index(base + 2, j)];
      }
    }
    return out;
  }

  Vec d_pass_y(const Vec& v) const {
    const Grid& g = *grid_;
    if (g.ny() < 2) throw Error("GridTooCoarse", "y stencil needs 3 nodes");
    Vec out(v.size());
    for (int j = 0; j <= g.ny(); ++j) {
      int base = std::min(std::max(j - 1, 0), g.ny() - 2);
      const auto w = detail::deriv3_weights(g.y(base), g.y(base + 1),
                                            g.y(base + 2), g.y(j));
      for (int i = 0; i <= g.nx(); ++i)
        out[g.index(i, j)] = w[0] * v[g.index(i, base)] +
                             w[1] * v[g.index(i, base + 1)] +
                             w[2] * v[g.index(i, base + 2)];
    }
    return out;
  }

  GridPtr grid_;
  Vec values_;
  mutable std::map<std::pair<int, int>, Vec> cache_;
};

inline GridFunction discrete_derivatives(const GridFunction& u, int order) {
  if (order > 4) throw Error("OrderTooHigh", "derivative order limited to 4");
  u.ensure_derivatives(order);
  return u;
}

inline GridFunction gf_scale(double c, const GridFunction& u) {
  return GridFunction(u.grid_ptr(), c * u.values());
}

inline GridFunction gf_add(const GridFunction& u, const GridFunction& v) {
  return GridFunction(u.grid_ptr(), u.values() + v.values());
}

inline GridFunction gf_sub(const GridFunction& u, const GridFunction& v) {
  return GridFunction(u.grid_ptr(), u.values() - v.values());
}

// ---------------------------------------------------------------------------
// Node masks (measurement regions)

using NodeMask = std::vector<std::uint8_t>;

inline NodeMask mask_all(const Grid& g) {
  return NodeMask(static_cast<std::size_t>(g.node_count()), 1);
}

// Closed-region mask for norm evaluation: includes y = 0 nodes inside the
// Euclidean disc so integrals reach the degenerate boundary.
inline NodeMask mask_half_ball(const Grid& g, const Point& z0, double r) {
  NodeMask m(static_cast<std::size_t>(g.node_count()), 0);
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) {
      const double dx = g.x(i) - z0.x;
      const double dy = g.y(j) - z0.y;
      if (dx * dx + dy * dy < r * r) m[g.index(i, j)] = 1;
    }
  return m;
}

inline NodeMask mask_rect(const Grid& g, double x0, double x1, double y0,
                          double y1) {
  NodeMask m(static_cast<std::size_t>(g.node_count()), 0);
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i)
      if (g.x(i) >= x0 && g.x(i) <= x1 && g.y(j) >= y0 && g.y(j) <= y1)
        m[g.index(i, j)] = 1;
  return m;
}

inline long mask_count(const NodeMask& m) {
  long n = 0;
  for (auto b : m) n += (b != 0);
  return n;
}

// ---------------------------------------------------------------------------
// Lumped node quadrature

// Node weights W_a = sum over cells of integral phi_a y^{s} (1+y)^{t} w dxdy,
// so that sum_a F(node_a) W_a is the cell-moment quadrature of
// integral F y^s (1+y)^t w.  Exact power moments handle the bottom row.
inline Vec node_weights(const Grid& g, const WeightSpec& w, int s_pow = 0,
                        int t_pow = 0) {
  if (!(w.beta + w.m > 0.0))
    throw Error("NonpositiveBeta", "weight exponent beta + m must be positive");
  if (t_pow < 0 || t_pow > 2) throw Error("InvalidPower", "(1+y)^t supports t <= 2");
  Vec W = Vec::Zero(g.node_count());
  const double base_pow = w.beta + static_cast<double>(w.m) - 1.0 +
                          static_cast<double>(s_pow);
  for (int cj = 0; cj < g.ny(); ++cj) {
    for (int ci = 0; ci < g.nx(); ++ci) {
      const Cell cell = g.cell(ci, cj);
      const LocalPoly lx[2] = {LocalPoly::linear(1.0, -1.0 / cell.hx),
                               LocalPoly::linear(0.0, 1.0 / cell.hx)};
      const LocalPoly ly[2] = {LocalPoly::linear(1.0, -1.0 / cell.hy),
                               LocalPoly::linear(0.0, 1.0 / cell.hy)};
      // (1 + y0 + eta)^t expanded in the local coordinate.
      const double c1 = 1.0 + cell.y0;
      LocalPoly onep = LocalPoly::constant(1.0);
      if (t_pow == 1) onep = LocalPoly::linear(c1, 1.0);
      if (t_pow == 2) {
        onep = LocalPoly::linear(c1, 1.0) * LocalPoly::linear(c1, 1.0);
      }
      double xint[2], yint[2];
      for (int b = 0; b < 2; ++b) {
        xint[b] = x_weighted_integral(cell.x0, cell.hx, w.gamma, false, lx[b]);
        yint[b] = y_weighted_integral(cell.y0, cell.hy, base_pow, w.mu,
                                      ly[b] * onep);
      }
      for (int by = 0; by < 2; ++by)
        for (int bx = 0; bx < 2; ++bx)
          W[g.index(ci + bx, cj + by)] += xint[bx] * yint[by];
    }
  }
  return W;
}

// ---------------------------------------------------------------------------
// Plain-text serialization: header "nx ny x_min x_max y_max g", then ny+1
// rows (y = 0 first) of nx+1 values, each printed with 17 significant
// digits so doubles round-trip exactly.

inline void write_grid_function(std::ostream& os, const GridFunction& u) {
  const Grid& g = u.grid();
  char buf[128];
  os << g.nx() << ' ' << g.ny();
  std::snprintf(buf, sizeof buf, " %.17g %.17g %.17g %.17g",
                g.domain().x_min, g.domain().x_max, g.domain().y_max,
                g.grading());
  os << buf << '\n';
  for (int j = 0; j <= g.ny(); ++j) {
    for (int i = 0; i <= g.nx(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", u(i, j));
      if (i) os << ' ';
      os << buf;
    }
    os << '\n';
  }
}

inline void write_grid_function(const std::string& path,
                                const GridFunction& u) {
  std::ofstream os(path);
  if (!os) throw Error("IoError", "cannot open " + path + " for writing");
  write_grid_function(os, u);
}

inline GridFunction read_grid_function(std::istream& is) {
  int nx, ny;
  double x_min, x_max, y_max, grading;
  if (!(is >> nx >> ny >> x_min >> x_max >> y_max >> grading))
    throw Error("ParseError", "bad grid file header");
  auto grid = make_grid(HalfPlaneDomain(x_min, x_max, y_max), nx, ny, grading);
  Vec v(grid->node_count());
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      if (!(is >> v[grid->index(i, j)]))
        throw Error("ParseError", "bad grid file payload");
  return GridFunction(std::move(grid), std::move(v));
}

inline GridFunction read_grid_function(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("IoError", "cannot open " + path);
  return read_grid_function(is);
}

}  // namespace heston

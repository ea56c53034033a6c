#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "heston/geometry.hpp"
#include "heston/grid.hpp"

namespace heston {

enum class NormTag : std::uint8_t {
  Lp,
  H1,
  H2,
  Hk,        // H^{k+2}: every derivative under the base weight
  calHk,     // alternative family: mixed y-derivatives under shifted weights
  Wkp,       // single-weight W^{k,p}
  Calphas,
  Ckalphas,
  Ck2alphas,
  C11s
};

struct HolderOptions {
  long exact_pair_limit = 4225;  // up to a 64x64 grid: exact sup over pairs
  long sample_pairs = 1000000;
  std::uint64_t seed = 0x9e3779b97f4a7c15ull;
};

struct NormRequest {
  NormTag tag{NormTag::Lp};
  int k = 0;
  double p = 2.0;
  double alpha = 0.5;
  WeightSpec weight{};
  NodeMask mask{};  // empty means the whole grid
  HolderOptions holder{};
};

namespace detail {

inline NodeMask resolve_mask(const Grid& g, const NodeMask& m) {
  if (m.empty()) return mask_all(g);
  if (static_cast<int>(m.size()) != g.node_count())
    throw Error("SizeMismatch", "mask size must equal node count");
  return m;
}

inline void require_nonempty(const NodeMask& m) {
  if (mask_count(m) == 0) throw Error("EmptyMask", "mask selects no nodes");
}

// sum over masked nodes of field(a) * W(a), accumulated pairwise.
inline double masked_weighted_sum(const NodeMask& mask, const Vec& field,
                                  const Vec& W) {
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(field.size()));
  for (Eigen::Index a = 0; a < field.size(); ++a)
    if (mask[static_cast<std::size_t>(a)]) terms.push_back(field[a] * W[a]);
  return pairwise_sum(terms);
}

// |D^j u|^2 nodewise with distinct mixed derivatives counted once.
inline Vec deriv_sq_sum(const GridFunction& u, int j) {
  Vec s = Vec::Zero(u.grid().node_count());
  for (int m = 0; m <= j; ++m) s += u.derivative(j - m, m).cwiseAbs2();
  return s;
}

}  // namespace detail

inline double weighted_lp_norm(const GridFunction& u, double p,
                               const WeightSpec& w, const NodeMask& mask_in) {
  if (!(p >= 1.0)) throw Error("InvalidExponent", "p must be >= 1");
  const Grid& g = u.grid();
  const NodeMask mask = detail::resolve_mask(g, mask_in);
  detail::require_nonempty(mask);
  const Vec W = node_weights(g, w, 0, 0);
  const Vec f = u.values().array().abs().pow(p).matrix();
  return std::pow(detail::masked_weighted_sum(mask, f, W), 1.0 / p);
}

namespace detail {

inline double h1_sq(const GridFunction& u, const WeightSpec& w,
                    const NodeMask& mask) {
  const Grid& g = u.grid();
  const Vec Wy = node_weights(g, w, 1, 0);
  const Vec W01 = node_weights(g, w, 0, 1);
  return masked_weighted_sum(mask, deriv_sq_sum(u, 1), Wy) +
         masked_weighted_sum(mask, u.values().cwiseAbs2(), W01);
}

inline double h2_sq(const GridFunction& u, const WeightSpec& w,
                    const NodeMask& mask) {
  const Grid& g = u.grid();
  const Vec W2 = node_weights(g, w, 2, 0);
  const Vec W02 = node_weights(g, w, 0, 2);
  const Vec W01 = node_weights(g, w, 0, 1);
  return masked_weighted_sum(mask, deriv_sq_sum(u, 2), W2) +
         masked_weighted_sum(mask, deriv_sq_sum(u, 1), W02) +
         masked_weighted_sum(mask, u.values().cwiseAbs2(), W01);
}

inline double hk_sq(const GridFunction& u, int k, const WeightSpec& w,
                    const NodeMask& mask) {
  const Grid& g = u.grid();
  double s = detail::masked_weighted_sum(mask, deriv_sq_sum(u, k + 2),
                                         node_weights(g, w, 2, 0));
  const Vec W02 = node_weights(g, w, 0, 2);
  for (int j = 1; j <= k + 1; ++j)
    s += masked_weighted_sum(mask, deriv_sq_sum(u, j), W02);
  s += masked_weighted_sum(mask, u.values().cwiseAbs2(),
                           node_weights(g, w, 0, 1));
  return s;
}

inline double cal_hk_sq(const GridFunction& u, int k, const WeightSpec& w,
                        const NodeMask& mask) {
  if (k == 0) return h2_sq(u, w, mask);
  const Grid& g = u.grid();
  double s = 0.0;
  {  // top-order block under the base weight: the three least-mixed entries
    Vec f = u.derivative(k + 2, 0).cwiseAbs2() +
            u.derivative(k + 1, 1).cwiseAbs2() +
            u.derivative(k, 2).cwiseAbs2();
    s += masked_weighted_sum(mask, f, node_weights(g, w, 2, 0));
  }
  for (int m = 1; m <= k; ++m)
    s += masked_weighted_sum(mask, u.derivative(k - m, m + 2).cwiseAbs2(),
                             node_weights(g, w.shifted(m), 2, 0));
  {
    const Vec W02 = node_weights(g, w, 0, 2);
    for (int j = 0; j <= k; ++j) {
      Vec f = u.derivative(j + 1, 0).cwiseAbs2() +
              u.derivative(j, 1).cwiseAbs2();
      s += masked_weighted_sum(mask, f, W02);
    }
  }
  for (int j = 1; j <= k; ++j)
    for (int m = 1; m <= j; ++m)
      s += masked_weighted_sum(mask, u.derivative(j - m, m + 1).cwiseAbs2(),
                               node_weights(g, w.shifted(m), 0, 2));
  s += masked_weighted_sum(mask, u.values().cwiseAbs2(),
                           node_weights(g, w, 0, 1));
  return s;
}

inline double wkp_pow(const GridFunction& u, int k, double p,
                      const WeightSpec& w, const NodeMask& mask) {
  const Grid& g = u.grid();
  const Vec W = node_weights(g, w, 0, 0);
  double s = 0.0;
  for (int j = 0; j <= k; ++j) {
    const Vec f = deriv_sq_sum(u, j).array().pow(p / 2.0).matrix();
    s += masked_weighted_sum(mask, f, W);
  }
  return s;
}

inline double c11s_norm_impl(const GridFunction& u, const NodeMask& mask) {
  const Grid& g = u.grid();
  double sup_u = 0.0, sup_du = 0.0, sup_yd2 = 0.0;
  const Vec d1 = deriv_sq_sum(u, 1);
  const Vec d2 = deriv_sq_sum(u, 2);
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) {
      const int a = g.index(i, j);
      if (!mask[static_cast<std::size_t>(a)]) continue;
      sup_u = std::max(sup_u, std::abs(u.values()[a]));
      sup_du = std::max(sup_du, std::sqrt(d1[a]));
      sup_yd2 = std::max(sup_yd2, g.y(j) * std::sqrt(d2[a]));
    }
  return sup_yd2 + sup_du + sup_u;
}

// Vector-valued sup norm and cycloidal Hoelder seminorm over node pairs.
// Pairs are exact for small masks; larger masks use every in-mask nearest
// neighbor pair plus a seeded uniform sample.
struct PairEstimate {
  double sup = 0.0;
  double seminorm = 0.0;
};

inline PairEstimate holder_pair_estimate(const Grid& g, const NodeMask& mask,
                                         const std::vector<const Vec*>& comps,
                                         double alpha,
                                         const HolderOptions& opts) {
  std::vector<int> nodes;
  for (int a = 0; a < g.node_count(); ++a)
    if (mask[static_cast<std::size_t>(a)]) nodes.push_back(a);
  PairEstimate est;
  if (nodes.empty()) throw Error("EmptyMask", "mask selects no nodes");

  auto vec_at = [&](int a) {
    double s = 0.0;
    for (const Vec* c : comps) s += (*c)[a] * (*c)[a];
    return std::sqrt(s);
  };
  auto diff_at = [&](int a, int b) {
    double s = 0.0;
    for (const Vec* c : comps) {
      const double d = (*c)[a] - (*c)[b];
      s += d * d;
    }
    return std::sqrt(s);
  };
  auto consider = [&](int a, int b) {
    const auto [ia, ja] = g.coords(a);
    const auto [ib, jb] = g.coords(b);
    const double s =
        cycloidal_distance(Point{g.x(ia), g.y(ja)}, Point{g.x(ib), g.y(jb)});
    if (s <= 0.0) return;
    est.seminorm = std::max(est.seminorm, diff_at(a, b) / std::pow(s, alpha));
  };

  for (int a : nodes) est.sup = std::max(est.sup, vec_at(a));

  const long n = static_cast<long>(nodes.size());
  if (n <= opts.exact_pair_limit) {
    for (std::size_t p = 0; p < nodes.size(); ++p)
      for (std::size_t q = p + 1; q < nodes.size(); ++q)
        consider(nodes[p], nodes[q]);
    return est;
  }
  // all nearest-neighbor pairs inside the mask
  for (int j = 0; j <= g.ny(); ++j)
    for (int i = 0; i <= g.nx(); ++i) {
      const int a = g.index(i, j);
      if (!mask[static_cast<std::size_t>(a)]) continue;
      if (i < g.nx() && mask[static_cast<std::size_t>(g.index(i + 1, j))])
        consider(a, g.index(i + 1, j));
      if (j < g.ny() && mask[static_cast<std::size_t>(g.index(i, j + 1))])
        consider(a, g.index(i, j + 1));
    }
  std::mt19937_64 rng(opts.seed);
  std::uniform_int_distribution<std::size_t> pick(0, nodes.size() - 1);
  for (long t = 0; t < opts.sample_pairs; ++t) {
    const int a = nodes[pick(rng)];
    const int b = nodes[pick(rng)];
    if (a != b) consider(a, b);
  }
  return est;
}

// C^{k,alpha}_s norm of a list of component fields: sum over j <= k of the
// C^alpha_s norms of the (vector-valued) j-th derivative fields.
inline double ckalphas_of_components(const std::vector<GridFunction>& comps,
                                     int k, double alpha, const NodeMask& mask,
                                     const HolderOptions& opts) {
  if (comps.empty()) throw Error("EmptyMask", "no components");
  const Grid& g = comps.front().grid();
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    std::vector<const Vec*> fields;
    for (const auto& c : comps)
      for (int m = 0; m <= j; ++m) fields.push_back(&c.derivative(j - m, m));
    const PairEstimate est = holder_pair_estimate(g, mask, fields, alpha, opts);
    total += est.sup + est.seminorm;
  }
  return total;
}

}  // namespace detail

namespace detail {

inline void require_order(const NormRequest& req) {
  int order = 0;
  switch (req.tag) {
    case NormTag::H1: order = 1; break;
    case NormTag::H2:
    case NormTag::C11s: order = 2; break;
    case NormTag::Hk:
    case NormTag::calHk: order = req.k + 2; break;
    case NormTag::Wkp:
    case NormTag::Ckalphas: order = req.k; break;
    case NormTag::Ck2alphas: order = req.k + 2; break;
    default: break;
  }
  if (order > 4)
    throw Error("MissingDerivatives",
                "norm needs derivatives of order " + std::to_string(order) +
                    ", beyond the stencil contract");
}

}  // namespace detail

inline double sobolev_norm(const GridFunction& u, const NormRequest& req) {
  const Grid& g = u.grid();
  detail::require_order(req);
  const NodeMask mask = detail::resolve_mask(g, req.mask);
  detail::require_nonempty(mask);
  switch (req.tag) {
    case NormTag::Lp:
      return weighted_lp_norm(u, req.p, req.weight, mask);
    case NormTag::H1:
      return std::sqrt(detail::h1_sq(u, req.weight, mask));
    case NormTag::H2:
      return std::sqrt(detail::h2_sq(u, req.weight, mask));
    case NormTag::Hk:
      return std::sqrt(detail::hk_sq(u, req.k, req.weight, mask));
    case NormTag::calHk:
      return std::sqrt(detail::cal_hk_sq(u, req.k, req.weight, mask));
    case NormTag::Wkp:
      if (!(req.p >= 1.0)) throw Error("InvalidExponent", "p must be >= 1");
      return std::pow(detail::wkp_pow(u, req.k, req.p, req.weight, mask),
                      1.0 / req.p);
    case NormTag::C11s:
      return detail::c11s_norm_impl(u, mask);
    default:
      throw Error("UnsupportedTag", "tag is a Hoelder norm; use holder_norm");
  }
}

// Continuity-at-zero diagnostic for the y-damped second derivatives: the
// fields y D^2 u must extend continuously by zero to the bottom edge, so the
// first interior row should agree with the linear-through-origin
// extrapolation of the second.  Returns the worst defect relative to the
// field scale.
inline double ck2alphas_zero_limit_defect(const GridFunction& u,
                                          const NodeMask& mask_in = {}) {
  const Grid& g = u.grid();
  const NodeMask mask = detail::resolve_mask(g, mask_in);
  const double y1 = g.y(1), y2 = g.y(2);
  double defect = 0.0, scale = 0.0;
  for (int m = 0; m <= 2; ++m) {
    const Vec& d2 = u.derivative(2 - m, m);
    for (int i = 0; i <= g.nx(); ++i) {
      if (!mask[static_cast<std::size_t>(g.index(i, 1))] ||
          !mask[static_cast<std::size_t>(g.index(i, 2))])
        continue;
      const double w1 = y1 * d2[g.index(i, 1)];
      const double w2 = y2 * d2[g.index(i, 2)];
      defect = std::max(defect, std::abs(w1 - (y1 / y2) * w2));
      scale = std::max({scale, std::abs(w1), std::abs(w2)});
    }
  }
  return scale > 0.0 ? defect / scale : 0.0;
}

inline double holder_norm(const GridFunction& u, const NormRequest& req) {
  if (!(req.alpha > 0.0 && req.alpha < 1.0))
    throw Error("AlphaOutOfRange", "alpha must lie in (0, 1)");
  const Grid& g = u.grid();
  detail::require_order(req);
  const NodeMask mask = detail::resolve_mask(g, req.mask);
  detail::require_nonempty(mask);
  switch (req.tag) {
    case NormTag::Calphas: {
      std::vector<const Vec*> f{&u.values()};
      const auto est =
          detail::holder_pair_estimate(g, mask, f, req.alpha, req.holder);
      return est.sup + est.seminorm;
    }
    case NormTag::Ckalphas:
      return detail::ckalphas_of_components({u}, req.k, req.alpha, mask,
                                            req.holder);
    case NormTag::Ck2alphas: {
      const double first = detail::ckalphas_of_components(
          {u}, req.k + 1, req.alpha, mask, req.holder);
      // y D^2 u evaluated away from y = 0 only; the weight factor supplies
      // the continuous extension by zero.
      NodeMask pos = mask;
      for (int i = 0; i <= g.nx(); ++i) pos[static_cast<std::size_t>(g.index(i, 0))] = 0;
      std::vector<GridFunction> comps;
      Vec yv(g.node_count());
      for (int j = 0; j <= g.ny(); ++j)
        for (int i = 0; i <= g.nx(); ++i) yv[g.index(i, j)] = g.y(j);
      for (int m = 0; m <= 2; ++m) {
        Vec c = yv.cwiseProduct(u.derivative(2 - m, m));
        comps.emplace_back(u.grid_ptr(), std::move(c));
      }
      return first + detail::ckalphas_of_components(comps, req.k, req.alpha,
                                                    pos, req.holder);
    }
    default:
      throw Error("UnsupportedTag", "tag is a Sobolev norm; use sobolev_norm");
  }
}

}  // namespace heston

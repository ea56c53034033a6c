#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "heston/errors.hpp"
#include "heston/types.hpp"

namespace heston {

// Open axis-aligned rectangle (x_min, x_max) x (0, y_max) in the upper
// half-plane.  The degenerate boundary d0 is the open bottom edge at y = 0;
// the non-degenerate boundary d1 is the remaining three edges together with
// the two bottom corners.
template <class Scalar>
struct HalfPlaneDomainT {
  Scalar x_min{};
  Scalar x_max{};
  Scalar y_max{};

  HalfPlaneDomainT(Scalar xmin, Scalar xmax, Scalar ymax)
      : x_min(xmin), x_max(xmax), y_max(ymax) {
    if (!(x_min < x_max) || !(y_max > Scalar(0)))
      throw Error("InvalidDomain", "need x_min < x_max and y_max > 0");
  }

  bool contains(const PointT<Scalar>& z) const {
    return z.x > x_min && z.x < x_max && z.y > Scalar(0) && z.y < y_max;
  }
};

using HalfPlaneDomain = HalfPlaneDomainT<double>;

enum class BallKind : std::uint8_t { euclidean_half, cycloidal };

template <class Scalar>
struct BallSpecT {
  PointT<Scalar> center{};
  Scalar radius{};
  BallKind kind{BallKind::euclidean_half};

  BallSpecT(PointT<Scalar> c, Scalar r, BallKind k)
      : center(c), radius(r), kind(k) {
    if (!(radius > Scalar(0))) throw Error("InvalidRadius", "radius must be positive");
    if (center.y < Scalar(0)) throw Error("NegativeY", "center must satisfy y >= 0");
  }
};

using BallSpec = BallSpecT<double>;

// Cycloidal (Koch) distance s(z, z0) = |z - z0| / sqrt(y + y0 + |z - z0|) on
// the closed half-plane.
template <class Scalar>
Scalar cycloidal_distance(const PointT<Scalar>& z, const PointT<Scalar>& z0) {
  if (z.y < Scalar(0) || z0.y < Scalar(0))
    throw Error("NegativeY", "cycloidal distance requires y >= 0");
  const Scalar d = euclidean_distance(z, z0);
  if (d == Scalar(0)) return Scalar(0);
  return d / std::sqrt(z.y + z0.y + d);
}

template <class Scalar>
bool ball_membership(const BallSpecT<Scalar>& b, const PointT<Scalar>& z) {
  if (z.y <= Scalar(0)) return false;  // balls live in the open half-plane
  if (b.kind == BallKind::euclidean_half)
    return euclidean_distance(z, b.center) < b.radius;
  return cycloidal_distance(z, b.center) < b.radius;
}

struct InclusionViolation {
  Point witness;
  double value;   // offending distance
  double bound;   // bound it should satisfy
  int which;      // 1: euclidean-in-cycloidal, 2: cycloidal-in-euclidean
};

struct InclusionReport {
  long samples = 0;
  long tested_inner = 0;   // points that fell inside H cap B_{r^2}(z0)
  long tested_outer = 0;   // points that fell inside the cycloidal ball
  std::vector<InclusionViolation> violations;

  bool ok() const { return violations.empty(); }
};

// Monte-Carlo check of the two ball inclusions
//   H cap B_{r^2}(z0)  subset  cycloidal ball of radius r about z0,
//   cycloidal ball of radius r about z0  subset  H cap B_{2r^2 + r
//   sqrt(2 y0)}(z0).
inline InclusionReport ball_inclusion_check(const Point& z0, double r,
                                            long samples,
                                            std::uint64_t seed = 0x5eed) {
  if (!(r > 0.0)) throw Error("InvalidRadius", "radius must be positive");
  if (samples <= 0) throw Error("InvalidSamples", "need samples > 0");
  if (z0.y < 0.0) throw Error("NegativeY", "center must satisfy y >= 0");

  const double euclid_bound = 2.0 * r * r + r * std::sqrt(2.0 * z0.y);
  // Sample generously beyond the asserted outer radius so a violating point
  // of the second inclusion, if any existed, could be found.
  const double box = 2.0 * euclid_bound + r * r + 1.0;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(z0.x - box, z0.x + box);
  std::uniform_real_distribution<double> uy(0.0, z0.y + box);

  InclusionReport rep;
  rep.samples = samples;
  for (long i = 0; i < samples; ++i) {
    const Point z{ux(rng), uy(rng)};
    if (z.y <= 0.0) continue;
    const double de = euclidean_distance(z, z0);
    const double s = cycloidal_distance(z, z0);
    if (de < r * r) {
      ++rep.tested_inner;
      if (!(s < r)) rep.violations.push_back({z, s, r, 1});
    }
    if (s < r) {
      ++rep.tested_outer;
      if (!(de < euclid_bound))
        rep.violations.push_back({z, de, euclid_bound, 2});
    }
  }
  return rep;
}

}  // namespace heston

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace heston {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

template <class Scalar>
struct PointT {
  Scalar x{};
  Scalar y{};
};

using Point = PointT<double>;

template <class Scalar>
Scalar euclidean_distance(const PointT<Scalar>& a, const PointT<Scalar>& b) {
  const Scalar dx = a.x - b.x;
  const Scalar dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Pairwise (cascade) summation.  Used for every norm reduction so results do
// not depend on incidental traversal batching.
inline double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

inline double pairwise_sum(const std::vector<double>& v) {
  return pairwise_sum(std::span<const double>(v));
}

}  // namespace heston

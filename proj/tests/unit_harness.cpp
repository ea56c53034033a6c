#include <doctest.h>

#include <cmath>

#include "heston/harness.hpp"

using namespace heston;

namespace {

Coefficients base_set() { return {1.0, 0.0, 1.0, 0.5, 1.0, 0.0, 0.0}; }

struct SolvedPair {
  GridFunction u;
  GridFunction f;
};

SolvedPair solve_bump(const Coefficients& c, const HalfPlaneDomain& dom, int n,
                      double xc) {
  auto g = make_grid(dom, n, n, 2.0);
  const AnalyticField f_field =
      separable_field(gaussian_profile(xc, 0.5), exp_profile(-1.0));
  const auto f = GridFunction::sample(g, f_field);
  auto res = solve_variational(c, g, f, GridFunction::zero(g));
  REQUIRE(res.status == SolveStatus::converged);
  return {std::move(res.solution), std::move(f)};
}

}  // namespace

TEST_CASE("implied constants are scale invariant") {
  const auto c = base_set();
  auto [u, f] = solve_bump(c, HalfPlaneDomain(-1.0, 1.0, 1.0), 24, 0.25);

  EstimateSpec spec;
  spec.kind = EstimateKind::h2_interior;
  spec.z0 = {0.0, 0.0};
  spec.R = 0.25;
  spec.R0 = 0.5;
  const auto base = estimate_ratio(spec, u, f, c);
  CHECK(base.ratio > 0.0);

  // powers of two scale both sides exactly
  const auto x4 = estimate_ratio(spec, gf_scale(4.0, u), gf_scale(4.0, f), c);
  CHECK(x4.ratio == base.ratio);
  CHECK(x4.left == 4.0 * base.left);

  const auto x37 = estimate_ratio(spec, gf_scale(3.7, u), gf_scale(3.7, f), c);
  CHECK(x37.ratio == doctest::Approx(base.ratio).epsilon(1e-12));

  EstimateSpec sup = spec;
  sup.kind = EstimateKind::supremum;
  const auto s1 = estimate_ratio(sup, u, f, c);
  const auto s4 = estimate_ratio(sup, gf_scale(4.0, u), gf_scale(4.0, f), c);
  CHECK(s4.ratio == s1.ratio);
}

TEST_CASE("implied constants are exactly translation invariant at gamma = 0") {
  const auto c = base_set();
  const double shift = 0.5;  // dyadic, so every shifted coordinate is exact
  auto [u1, f1] = solve_bump(c, HalfPlaneDomain(-1.0, 1.0, 1.0), 16, 0.25);
  auto [u2, f2] =
      solve_bump(c, HalfPlaneDomain(-1.0 + shift, 1.0 + shift, 1.0), 16, 0.25 + shift);

  EstimateSpec a;
  a.kind = EstimateKind::h2_interior;
  a.z0 = {0.0, 0.0};
  a.R = 0.25;
  a.R0 = 0.5;
  EstimateSpec b = a;
  b.z0 = {shift, 0.0};

  const auto r1 = estimate_ratio(a, u1, f1, c);
  const auto r2 = estimate_ratio(b, u2, f2, c);
  CHECK(r1.left == r2.left);
  CHECK(r1.right == r2.right);
  CHECK(r1.ratio == r2.ratio);

  EstimateSpec ka = a;
  ka.kind = EstimateKind::koch_gradient;
  ka.rect_x0 = -0.5;
  ka.rect_x1 = 0.5;
  ka.rect_y1 = 0.75;
  EstimateSpec kb = ka;
  kb.rect_x0 += shift;
  kb.rect_x1 += shift;
  const auto k1 = estimate_ratio(ka, u1, f1, c);
  const auto k2 = estimate_ratio(kb, u2, f2, c);
  CHECK(k1.ratio == k2.ratio);
}

TEST_CASE("shrinking the inner region cannot increase the left side") {
  const auto c = base_set();
  auto [u, f] = solve_bump(c, HalfPlaneDomain(-1.0, 1.0, 1.0), 24, 0.0);
  EstimateSpec spec;
  spec.kind = EstimateKind::h2_interior;
  spec.z0 = {0.0, 0.0};
  spec.R0 = 0.8;
  double prev_left = -1.0;
  for (double R : {0.7, 0.5, 0.3, 0.15}) {
    spec.R = R;
    const auto rep = estimate_ratio(spec, u, f, c);
    if (prev_left >= 0.0) CHECK(rep.left <= prev_left * (1.0 + 1e-13));
    prev_left = rep.left;
  }
}

TEST_CASE("zero data is reported as the trivial case") {
  const auto c = base_set();
  auto g = make_grid(HalfPlaneDomain(-1.0, 1.0, 1.0), 12, 12, 1.0);
  auto res = solve_variational(c, g, GridFunction::zero(g), GridFunction::zero(g));
  EstimateSpec spec;
  spec.kind = EstimateKind::h2_interior;
  spec.z0 = {0.0, 0.0};
  spec.R = 0.25;
  spec.R0 = 0.5;
  const auto rep = estimate_ratio(spec, res.solution, GridFunction::zero(g), c);
  CHECK(rep.trivial);
  CHECK(rep.ratio == 0.0);
}

TEST_CASE("regions outside the solve domain are rejected") {
  const auto c = base_set();
  auto g = make_grid(HalfPlaneDomain(-1.0, 1.0, 1.0), 12, 12, 1.0);
  auto u = GridFunction::zero(g);
  EstimateSpec spec;
  spec.kind = EstimateKind::supremum;
  spec.z0 = {0.9, 0.0};
  spec.R = 0.25;
  spec.R0 = 0.5;  // pokes past x_max
  CHECK_THROWS_WITH_AS(estimate_ratio(spec, u, u, c),
                       doctest::Contains("RegionOutsideDomain"), Error);
}

TEST_CASE("ratio stabilization checker flags increases beyond the band") {
  std::vector<EstimateReport> ladder(4);
  ladder[0].ratio = 1.00;
  ladder[1].ratio = 1.02;  // within the 5% band
  ladder[2].ratio = 0.98;
  ladder[3].ratio = 0.97;
  CHECK(check_ratio_stabilization(ladder).ok);
  ladder[2].ratio = 1.15;
  const auto chk = check_ratio_stabilization(ladder);
  CHECK_FALSE(chk.ok);
  CHECK(chk.first_violation == 2);
}

TEST_CASE("convergence study reproduces constants exactly") {
  const auto c = base_set();
  const AnalyticField constant = poly_field({{2.5}});
  const auto table = convergence_study(constant, c, HalfPlaneDomain(0.0, 1.0, 1.0),
                                       {8, 16}, 1.0);
  for (const auto& row : table.rows) {
    CHECK(row.err_l2w <= 1e-8);
    CHECK(row.err_sup_inner <= 1e-8);
  }
}

TEST_CASE("convergence study records orders for the manufactured field") {
  const auto c = base_set();
  const AnalyticField ustar =
      separable_field(sin_profile(1.0), exp_profile(-1.0));
  const auto table = convergence_study(ustar, c, HalfPlaneDomain(0.0, M_PI, 1.0),
                                       {16, 32, 64}, 1.0);
  REQUIRE(table.orders_l2.size() == 2);
  CHECK(table.fitted_l2_order > 1.6);
  CHECK(table.fitted_l2_order < 2.4);
}

TEST_CASE("alpha sweep reports the largest stable exponent") {
  const auto c = base_set();
  const HalfPlaneDomain dom(-1.0, 1.0, 1.0);
  std::vector<SolvedPair> pairs;
  for (int n : {16, 24, 32}) pairs.push_back(solve_bump(c, dom, n, 0.0));

  EstimateSpec spec;
  spec.kind = EstimateKind::holder;
  spec.z0 = {0.0, 0.0};
  spec.R = 0.25;
  spec.R0 = 0.5;

  std::vector<const GridFunction*> us, fs;
  for (auto& p : pairs) {
    us.push_back(&p.u);
    fs.push_back(&p.f);
  }
  const auto sweep = alpha_sweep(spec, us, fs, c, 0.10);
  REQUIRE(sweep.alphas.size() == 9);
  CHECK(sweep.empirical_alpha > 0.0);
  // small exponents are the easiest to stabilize for a smooth solution
  CHECK(sweep.bounded.front());

  spec.kind = EstimateKind::h2_interior;
  CHECK_THROWS_WITH_AS(alpha_sweep(spec, us, fs, c),
                       doctest::Contains("UnsupportedTag"), Error);
}

TEST_CASE("convergence of a degenerate-flavored field: grading is recorded") {
  // x y^{3/2} has unbounded second y-derivatives toward the bottom edge;
  // the study must run on both gradings and report finite orders
  Coefficients c{1.0, 0.0, 0.25, 1.0, 1.0, 0.0, 0.0};  // beta = 1/2
  const AnalyticField ustar =
      separable_field(poly_profile({0.0, 1.0}), pow_profile(1.5));
  const HalfPlaneDomain dom(0.0, 1.0, 1.0);
  const auto uniform = convergence_study(ustar, c, dom, {16, 32, 64}, 1.0);
  const auto graded = convergence_study(ustar, c, dom, {16, 32, 64}, 2.0);
  for (const auto* t : {&uniform, &graded}) {
    REQUIRE(t->rows.size() == 3);
    for (const auto& row : t->rows) {
      CHECK(std::isfinite(row.err_l2w));
      CHECK(row.err_l2w > 0.0);
    }
    CHECK(std::isfinite(t->fitted_l2_order));
  }
  // the graded mesh resolves the boundary behavior at least as well
  CHECK(graded.rows.back().err_l2w <= 2.0 * uniform.rows.back().err_l2w);
}

TEST_CASE("smoothness probe passes for a smooth source on a short ladder") {
  const auto c = base_set();
  const auto rep = smoothness_probe(poly_field({{1.0}}), c,
                                    HalfPlaneDomain(-1.0, 1.0, 1.0),
                                    {64, 96, 128}, 2, 0.2);
  CHECK(rep.pass);
  for (const auto& pd : rep.derivatives) {
    REQUIRE(pd.max_by_grid.size() == 3);
    CHECK(pd.stable);
  }
}

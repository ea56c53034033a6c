#include <doctest.h>

#include <random>

#include "heston/operator.hpp"

using namespace heston;

namespace {

Coefficients base_set() { return {1.0, 0.0, 1.0, 0.5, 0.0, 0.0, 0.0}; }

Coefficients random_valid(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Coefficients c;
  c.sigma = 0.3 + 2.0 * u(rng);
  c.rho = -0.9 + 1.8 * u(rng);
  c.kappa = 0.2 + 2.0 * u(rng);
  c.theta = 0.2 + 2.0 * u(rng);
  c.c0 = 1.5 * u(rng);
  c.q = -1.0 + 2.0 * u(rng);
  return c;
}

// Battery of analytic fields with exact derivative closures: random degree-5
// polynomials plus exponential/trigonometric products.
std::vector<AnalyticField> field_battery(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<AnalyticField> fields;
  for (int t = 0; t < 3; ++t) {
    std::vector<std::vector<double>> c(6, std::vector<double>(6, 0.0));
    for (int i = 0; i <= 5; ++i)
      for (int j = 0; i + j <= 5; ++j) c[i][j] = u(rng);
    fields.push_back(poly_field(std::move(c)));
  }
  fields.push_back(separable_field(sin_profile(1.3), exp_profile(-0.7)));
  fields.push_back(separable_field(cos_profile(0.9), exp_profile(0.4)));
  fields.push_back(separable_field(exp_profile(0.5), sin_profile(1.1)));
  return fields;
}

}  // namespace

TEST_CASE("operator application on reference jets") {
  const auto s = shift_coefficients(base_set(), 0);

  // constant field: only the zeroth-order term survives
  Coefficients ck = base_set();
  ck.c0 = 0.7;
  const auto sk = shift_coefficients(ck, 0);
  auto jet_const = jet_from_field(poly_field({{2.0}}), 0.3, 0.8, 2);
  CHECK(apply_operator(sk, jet_const) == doctest::Approx(0.7 * 2.0));

  // v = x with c0 = 0: A v = -(c0 - q - y/2)
  Coefficients cx = base_set();
  cx.q = 0.1;
  auto jx = jet_from_field(poly_field({{0.0}, {1.0}}), 1.2, 0.5, 2);
  CHECK(apply_operator(shift_coefficients(cx, 0), jx) ==
        doctest::Approx(-(0.0 - 0.1 - 0.25)));

  // v = y^2 at (0, 1) with the base set: exact cancellation
  auto jy2 = jet_from_field(poly_field({{0.0, 0.0, 1.0}}), 0.0, 1.0, 2);
  CHECK(apply_operator(s, jy2) == doctest::Approx(0.0));
}

TEST_CASE("jet without the required entries raises MissingDerivative") {
  JetPoint j;
  j.x = 0.0;
  j.y = 1.0;
  j.set(0, 0, 1.0);
  const auto s = shift_coefficients(base_set(), 0);
  CHECK_THROWS_WITH_AS(apply_operator(s, j), doctest::Contains("MissingDerivative"),
                       Error);
  CHECK_THROWS_WITH_AS(apply_B(j), doctest::Contains("MissingDerivative"), Error);
}

TEST_CASE("B on reference fields") {
  // v = x^2: B v = -1 + x
  auto j = jet_from_field(poly_field({{0.0}, {0.0}, {1.0}}), 0.7, 1.0, 2);
  CHECK(apply_B(j) == doctest::Approx(-1.0 + 0.7));
  // v = e^x: exact cancellation
  auto je = jet_from_field(separable_field(exp_profile(1.0), const_profile(1.0)),
                           0.4, 1.0, 2);
  CHECK(apply_B(je) == doctest::Approx(0.0).epsilon(1e-14));
  // v = x: B v = 1/2
  auto jl = jet_from_field(poly_field({{0.0}, {1.0}}), 3.0, 1.0, 2);
  CHECK(apply_B(jl) == doctest::Approx(0.5));
}

TEST_CASE("first commutator identity on v = x") {
  // D_y(Av) - A D_y v = (1/2) v_x = 1/2, and the shifted-form residual is 0.
  const auto c = base_set();
  const AnalyticField vx = poly_field({{0.0}, {1.0}});
  const double dyAv = derivative_of_applied(c, vx, 0.3, 0.7, 0, 1);
  CHECK(dyAv == doctest::Approx(0.5));  // A D_y v = 0 here
  const auto r = commutator_residual_shifted(c, vx, 1, 0.3, 0.7);
  CHECK(r.residual <= 1e-14 * r.scale);
}

TEST_CASE("shifted and mixed commutator residuals vanish over the battery") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> upt(0.1, 2.0);
  for (int cs = 0; cs < 100; ++cs) {
    const auto c = validate_coefficients(random_valid(rng));
    auto fields = field_battery(rng);
    for (const auto& f : fields) {
      const double x = upt(rng) - 1.0;
      const double y = upt(rng);
      for (int m = 1; m <= 3; ++m) {
        const auto r = commutator_residual_shifted(c, f, m, x, y);
        CHECK(r.residual <= 1e-10 * r.scale);
      }
      for (int k = 0; k <= 3; ++k)
        for (int m = 0; m <= k && m <= 3; ++m) {
          const auto r = commutator_residual_mixed(c, f, k, m, x, y);
          CHECK(r.residual <= 1e-10 * r.scale);
        }
    }
  }
}

TEST_CASE("A commutes with D_x over the battery") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> upt(0.1, 1.5);
  const auto c = validate_coefficients(random_valid(rng));
  const auto s0 = shift_coefficients(c, 0);
  for (const auto& f : field_battery(rng)) {
    const double x = upt(rng) - 0.7;
    const double y = upt(rng);
    const double dxAv = derivative_of_applied(c, f, x, y, 1, 0);
    JetPoint j;
    j.x = x;
    j.y = y;
    for (int ix = 0; ix <= 2; ++ix)
      for (int iy = 0; ix + iy <= 2; ++iy) j.set(ix, iy, f.d(x, y, ix + 1, iy));
    const double Adxv = apply_operator(s0, j);
    CHECK(dxAv == doctest::Approx(Adxv).epsilon(1e-11));
  }
}

TEST_CASE("commutator residual of y^2 vanishes at m = 1") {
  const AnalyticField y2 = poly_field({{0.0, 0.0, 1.0}});
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.1, 2.0);
  for (int t = 0; t < 20; ++t) {
    const auto c = validate_coefficients(random_valid(rng));
    const auto r = commutator_residual_shifted(c, y2, 1, u(rng) - 1.0, u(rng));
    CHECK(r.residual <= 1e-13 * r.scale);
  }
}

TEST_CASE("commutator order preconditions") {
  const AnalyticField f = poly_field({{1.0}});
  const auto c = base_set();
  CHECK_THROWS_WITH_AS(commutator_residual_shifted(c, f, 0, 0.0, 1.0),
                       doctest::Contains("InsufficientJetOrder"), Error);
  CHECK_THROWS_WITH_AS(commutator_residual_mixed(c, f, 1, 2, 0.0, 1.0),
                       doctest::Contains("InsufficientJetOrder"), Error);
}

TEST_CASE("constant fields have vanishing commutator residual for every m") {
  const AnalyticField one = poly_field({{1.0}});
  const auto c = base_set();
  for (int m = 1; m <= 3; ++m) {
    const auto r = commutator_residual_shifted(c, one, m, 0.2, 0.9);
    CHECK(r.residual == 0.0);
  }
}

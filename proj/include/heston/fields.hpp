#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "heston/errors.hpp"

namespace heston {

// Scalar field on the half-plane supplied together with closed-form partial
// derivatives: d(x, y, i, j) returns d^i/dx^i d^j/dy^j f(x, y).  No symbolic
// engine; every factory below writes its derivatives in closed form.
struct AnalyticField {
  std::function<double(double, double, int, int)> d;

  double operator()(double x, double y) const { return d(x, y, 0, 0); }
  double deriv(double x, double y, int ix, int iy) const { return d(x, y, ix, iy); }
};

// One-dimensional profile with derivatives: g(t, n) = d^n/dt^n g(t).
using Profile1D = std::function<double(double, int)>;

inline AnalyticField separable_field(Profile1D fx, Profile1D fy) {
  return {[fx = std::move(fx), fy = std::move(fy)](double x, double y, int i, int j) {
    return fx(x, i) * fy(y, j);
  }};
}

inline AnalyticField sum_field(std::vector<AnalyticField> parts) {
  return {[parts = std::move(parts)](double x, double y, int i, int j) {
    double s = 0.0;
    for (const auto& p : parts) s += p.d(x, y, i, j);
    return s;
  }};
}

inline AnalyticField scale_field(double c, AnalyticField f) {
  return {[c, f = std::move(f)](double x, double y, int i, int j) {
    return c * f.d(x, y, i, j);
  }};
}

inline Profile1D const_profile(double c) {
  return [c](double, int n) { return n == 0 ? c : 0.0; };
}

inline Profile1D poly_profile(std::vector<double> coeff) {
  return [coeff = std::move(coeff)](double t, int n) {
    double s = 0.0;
    for (std::size_t k = coeff.size(); k-- > 0;) {
      const int p = static_cast<int>(k);
      if (p < n) continue;
      double fall = 1.0;
      for (int r = 0; r < n; ++r) fall *= static_cast<double>(p - r);
      s += coeff[k] * fall * std::pow(t, p - n);
    }
    return s;
  };
}

inline Profile1D sin_profile(double a, double phase = 0.0) {
  return [a, phase](double t, int n) {
    return std::pow(a, n) * std::sin(a * t + phase + 0.5 * M_PI * n);
  };
}

inline Profile1D cos_profile(double a) { return sin_profile(a, 0.5 * M_PI); }

inline Profile1D exp_profile(double a) {
  return [a](double t, int n) { return std::pow(a, n) * std::exp(a * t); };
}

// t^p for real p > 0 on t > 0 (derivatives by falling powers).
inline Profile1D pow_profile(double p) {
  return [p](double t, int n) {
    double fall = 1.0;
    for (int r = 0; r < n; ++r) fall *= (p - r);
    if (fall == 0.0) return 0.0;
    return fall * std::pow(t, p - n);
  };
}

// Gaussian exp(-((t-c)/w)^2); derivatives via the Hermite recurrence.
inline Profile1D gaussian_profile(double c, double w) {
  return [c, w](double t, int n) {
    const double u = (t - c) / w;
    // H_{k+1}(u) = 2u H_k(u) - 2k H_{k-1}(u)
    double hkm1 = 0.0, hk = 1.0;
    for (int k = 0; k < n; ++k) {
      const double hkp1 = 2.0 * u * hk - 2.0 * k * hkm1;
      hkm1 = hk;
      hk = hkp1;
    }
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    return sign * hk * std::exp(-u * u) / std::pow(w, n);
  };
}

// Compactly supported polynomial bump (1 - u^2)^pow on |t-c| < w, zero
// outside; C^{pow-1} across the support edge.
inline Profile1D bump_profile(double c, double w, int pow = 6) {
  std::vector<double> coeff(static_cast<std::size_t>(2 * pow + 1), 0.0);
  // (1 - u^2)^pow expanded in u.
  std::vector<double> base{1.0};
  for (int k = 0; k < pow; ++k) {
    std::vector<double> next(base.size() + 2, 0.0);
    for (std::size_t i = 0; i < base.size(); ++i) {
      next[i] += base[i];
      next[i + 2] -= base[i];
    }
    base = std::move(next);
  }
  coeff = std::move(base);
  return [c, w, coeff = std::move(coeff)](double t, int n) {
    const double u = (t - c) / w;
    if (std::abs(u) >= 1.0) return 0.0;
    double s = 0.0;
    for (std::size_t k = coeff.size(); k-- > 0;) {
      const int p = static_cast<int>(k);
      if (p < n) continue;
      double fall = 1.0;
      for (int r = 0; r < n; ++r) fall *= static_cast<double>(p - r);
      s += coeff[k] * fall * std::pow(u, p - n);
    }
    return s / std::pow(w, n);
  };
}

// |t - c|^p with p in (-1, 0): integrable cusp with unbounded value and
// derivatives.  Derivative closures only for n = 0 (used as rough source
// data, never differentiated analytically).
inline Profile1D cusp_profile(double c, double p) {
  return [c, p](double t, int n) {
    if (n != 0) throw Error("InsufficientJetOrder", "cusp profile carries no derivatives");
    const double r = std::abs(t - c);
    return std::pow(r, p);
  };
}

// Bivariate polynomial sum c(i,j) x^i y^j from a dense coefficient table.
inline AnalyticField poly_field(std::vector<std::vector<double>> c) {
  return {[c = std::move(c)](double x, double y, int ix, int iy) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      const int pi = static_cast<int>(i);
      if (pi < ix) continue;
      double fx = 1.0;
      for (int r = 0; r < ix; ++r) fx *= static_cast<double>(pi - r);
      for (std::size_t j = 0; j < c[i].size(); ++j) {
        const int pj = static_cast<int>(j);
        if (pj < iy || c[i][j] == 0.0) continue;
        double fy = 1.0;
        for (int r = 0; r < iy; ++r) fy *= static_cast<double>(pj - r);
        s += c[i][j] * fx * fy * std::pow(x, pi - ix) * std::pow(y, pj - iy);
      }
    }
    return s;
  }};
}

}  // namespace heston

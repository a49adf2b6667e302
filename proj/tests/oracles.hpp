#pragma once

// Reference computations used only by the tests. None of these call into the
// library's evaluation paths they are compared against.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace qsle::oracle {

inline constexpr double kPi = std::numbers::pi;

// Standardized q-Gaussian density from the infinite product, truncated after
// `factors` factors (raised until |q|^n < 1e-18), with
// x = 2 cos(theta) / sqrt(1 - q).
inline double product_density_theta(double q, double theta, int factors = 200) {
  if (q != 0.0) {
    factors = std::max(factors, static_cast<int>(std::log(1e-18) / std::log(std::abs(q))) + 1);
  }
  double product = 1.0;
  const std::complex<double> e2(std::cos(2 * theta), std::sin(2 * theta));
  double qn = 1.0;
  for (int n = 1; n <= factors; ++n) {
    qn *= q;
    product *= (1.0 - qn) * std::norm(1.0 - qn * e2);
  }
  return std::sqrt(1.0 - q) * std::sin(theta) * product / kPi;
}

inline double product_density(double q, double u, int factors = 200) {
  const double g = 2.0 / std::sqrt(1.0 - q);
  if (std::abs(u) >= g) return 0.0;
  return product_density_theta(q, std::acos(u / g), factors);
}

// Adaptive Gauss-Kronrod integral of h(theta) over [0, pi].
inline double integrate_theta(const std::function<double(double)>& h, double tol = 1e-14) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(h, 0.0, kPi, 15, tol);
}

// Integral of g(u) against the standardized q-Gaussian, via the product form
// and theta substitution.
inline double expect_product(double q, const std::function<double(double)>& g) {
  const double r = 2.0 / std::sqrt(1.0 - q);
  return integrate_theta([&](double theta) {
    const double u = r * std::cos(theta);
    return g(u) * product_density_theta(q, theta) * r * std::sin(theta);
  });
}

// Chebyshev polynomial of the second kind in trigonometric form.
inline double chebyshev_u(int n, double t) {
  if (std::abs(t) >= 1.0) {
    const double s = t > 0 ? 1.0 : ((n % 2 == 0) ? 1.0 : -1.0);
    return s * (n + 1);
  }
  const double theta = std::acos(t);
  return std::sin((n + 1) * theta) / std::sin(theta);
}

inline double bracket(int n, double q) {
  double s = 0.0;
  for (int k = 0; k < n; ++k) s += std::pow(q, k);
  return s;
}

inline double factorial(int n, double q) {
  double p = 1.0;
  for (int k = 1; k <= n; ++k) p *= bracket(k, q);
  return p;
}

// q-Hermite value by the recurrence, written independently of the library.
inline double hermite(double q, int n, double x) {
  double a = 1.0;
  double b = x;
  if (n == 0) return a;
  for (int k = 1; k < n; ++k) {
    const double c = x * b - bracket(k, q) * a;
    a = b;
    b = c;
  }
  return b;
}

}  // namespace qsle::oracle

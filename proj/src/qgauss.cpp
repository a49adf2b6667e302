#include "qsle/qgauss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "qsle/errors.hpp"
#include "qsle/random.hpp"

namespace qsle {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTailTolerance = 1e-16;
constexpr int kMaxSeriesTerms = 400;
constexpr int kSamplerTableSize = 1024;

void require_q(double q) {
  if (!(q > -1.0 && q < 1.0)) {
    throw DomainError("q must lie in (-1, 1), got " + std::to_string(q));
  }
}

// Coefficients (-1)^{k-1} q^{k(k-1)/2} of the Chebyshev series, k = 1..K,
// stored at index k-1.
std::vector<double> series_coefficients(double q, int terms) {
  std::vector<double> c(static_cast<std::size_t>(terms));
  double value = 1.0;
  for (int k = 1; k <= terms; ++k) {
    c[static_cast<std::size_t>(k - 1)] = value;
    value *= -std::pow(q, k);
  }
  return c;
}

// Smallest K so that every omitted summand (k > K) is bounded in magnitude by
// kTailTolerance, using |U_n| <= n + 1.
int adaptive_terms(double q) {
  const double aq = std::abs(q);
  double power = 1.0;  // |q|^{k(k-1)/2}
  for (int k = 1; k < kMaxSeriesTerms; ++k) {
    const double next_power = power * std::pow(aq, k);
    if (next_power * (2.0 * k + 1.0) < kTailTolerance) return k;
    power = next_power;
  }
  return kMaxSeriesTerms;
}

double standard_half_width(double q) { return 2.0 / std::sqrt(1.0 - q); }

// Standardized density from the first `terms` summands. u must lie inside
// the closed support.
double standard_series(double q, double u, int terms) {
  const double s1q = std::sqrt(1.0 - q);
  const double t = u * s1q / 2.0;
  const auto c = series_coefficients(q, terms);

  if (std::abs(t) > 1.0 - 1e-8) {
    // Near the edges the sin(theta) form avoids the vanishing square root
    // multiplying a large polynomial value.
    const double theta = std::acos(std::clamp(t, -1.0, 1.0));
    double sum = 0.0;
    for (int k = 1; k <= terms; ++k) {
      sum += c[static_cast<std::size_t>(k - 1)] * std::sin((2.0 * k - 1.0) * theta);
    }
    return s1q / kPi * sum;
  }

  // U_0, U_1, ... by the three-term recurrence; keep the even ones.
  double u_prev = 1.0;    // U_{n-1}
  double u_curr = 2 * t;  // U_n
  double sum = c[0];      // k = 1 uses U_0 = 1
  int n = 1;
  for (int k = 2; k <= terms; ++k) {
    const int target = 2 * k - 2;
    while (n < target) {
      const double next = 2.0 * t * u_curr - u_prev;
      u_prev = u_curr;
      u_curr = next;
      ++n;
    }
    sum += c[static_cast<std::size_t>(k - 1)] * u_curr;
  }
  const double radicand = std::max(0.0, 4.0 * (1.0 - t) * (1.0 + t));
  return s1q / (2.0 * kPi) * std::sqrt(radicand) * sum;
}

// Distribution function of the standardized law as a function of the angle
// theta in x = (2/sqrt(1-q)) cos(theta); the series is integrated term by term.
double standard_cdf_theta(double q, double theta, int terms) {
  const auto c = series_coefficients(q, terms);
  double sum = (kPi - theta) + 0.5 * std::sin(2.0 * theta);
  for (int k = 2; k <= terms; ++k) {
    const double a = 2.0 * k;
    const double b = 2.0 * k - 2.0;
    sum += c[static_cast<std::size_t>(k - 1)] *
           (std::sin(a * theta) / a - std::sin(b * theta) / b);
  }
  return std::clamp(sum / kPi, 0.0, 1.0);
}

double theta_of(const QGaussianParams& params, double x) {
  const double t = (x - params.location()) / params.half_width();
  return std::acos(std::clamp(t, -1.0, 1.0));
}

// Solve cdf(theta) = p for theta inside [lo, hi]; cdf decreases in theta.
double solve_theta(double q, int terms, double p, double lo, double hi) {
  auto f = [&](double theta) { return standard_cdf_theta(q, theta, terms) - p; };
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  std::uintmax_t iterations = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iterations);
  return 0.5 * (a + b);
}

double lemma_series(double q) {
  // sum_{k>=0} (2k+1)^2 q^{k(k+1)/2}
  double sum = 0.0;
  double power = 1.0;
  for (int k = 0; k < 10000; ++k) {
    const double term = (2.0 * k + 1.0) * (2.0 * k + 1.0) * power;
    sum += term;
    if (std::abs(term) < 1e-16 && k > 1) break;
    power *= std::pow(q, k + 1);
  }
  return sum;
}

}  // namespace

double q_bracket(int n, double q) {
  require_q(q);
  if (n < 0) throw DomainError("q_bracket needs n >= 0");
  double sum = 0.0;
  double power = 1.0;
  for (int k = 0; k < n; ++k) {
    sum += power;
    power *= q;
  }
  return sum;
}

double q_factorial(int n, double q) {
  require_q(q);
  if (n < 0) throw DomainError("q_factorial needs n >= 0");
  double product = 1.0;
  for (int k = 1; k <= n; ++k) product *= q_bracket(k, q);
  return product;
}

double q_pochhammer(double a, double q, int n) {
  require_q(q);
  if (n < 0) throw DomainError("q_pochhammer needs n >= 0");
  double product = 1.0;
  double power = 1.0;
  for (int k = 0; k < n; ++k) {
    product *= 1.0 - a * power;
    power *= q;
  }
  return product;
}

QGaussianParams::QGaussianParams(double q, double location, double scale)
    : q_(q), location_(location), scale_(scale) {
  if (!(q >= kMinQ && q <= kMaxQ)) {
    throw DomainError("q-Gaussian needs q in [-0.99, 0.99], got " + std::to_string(q));
  }
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("q-Gaussian scale must be positive and finite");
  }
  if (!std::isfinite(location)) throw DomainError("q-Gaussian location must be finite");
}

double QGaussianParams::half_width() const {
  return std::sqrt(scale_) * standard_half_width(q_);
}

Interval QGaussianParams::support() const {
  const double r = half_width();
  return {location_ - r, location_ + r};
}

double QGaussianParams::standardize(double x) const {
  return (x - location_) / std::sqrt(scale_);
}

double QGaussianParams::destandardize(double u) const {
  return location_ + std::sqrt(scale_) * u;
}

double density(const QGaussianParams& params, double x) {
  if (!params.support().contains_open(x)) return 0.0;
  const double u = params.standardize(x);
  return standard_series(params.q(), u, adaptive_terms(params.q())) /
         std::sqrt(params.scale());
}

double density_truncated(const QGaussianParams& params, int terms, double x) {
  if (terms < 2) throw ArgumentError("density_truncated needs terms >= 2");
  if (!params.support().contains_open(x)) return 0.0;
  const double u = params.standardize(x);
  return standard_series(params.q(), u, terms - 1) / std::sqrt(params.scale());
}

double truncation_bound(double q, int terms) {
  require_q(q);
  if (terms < 4) throw DomainError("truncation bound is only asserted for J >= 4");
  const double exponent = 0.5 * (terms - 1.0) * (terms - 2.0);
  const double one_minus_q2 = 1.0 - q * q;
  return std::pow(std::abs(q), exponent) / (kPi * one_minus_q2 * one_minus_q2);
}

DensityJet standard_density_jet(double q, double u) {
  require_q(q);
  const double s1q = std::sqrt(1.0 - q);
  const double g = 2.0 / s1q;
  if (!(std::abs(u) < g)) throw DomainError("density derivatives need u inside the support");
  const double theta = std::acos(std::clamp(u / g, -1.0, 1.0));
  const int terms = adaptive_terms(q);
  const auto c = series_coefficients(q, terms);

  double s0 = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
  for (int k = 1; k <= terms; ++k) {
    const double m = 2.0 * k - 1.0;
    const double ck = c[static_cast<std::size_t>(k - 1)];
    s0 += ck * std::sin(m * theta);
    s1 += ck * m * std::cos(m * theta);
    s2 -= ck * m * m * std::sin(m * theta);
  }
  const double amp = s1q / kPi;
  const double du = -g * std::sin(theta);
  const double ddu = -g * std::cos(theta);

  DensityJet jet;
  jet.value = amp * s0;
  jet.first = amp * s1 / du;
  jet.second = amp * (s2 * du - s1 * ddu) / (du * du * du);
  return jet;
}

double angular_density(double q, double theta) {
  require_q(q);
  const int terms = adaptive_terms(q);
  const auto c = series_coefficients(q, terms);
  double sum = 0.0;
  for (int k = 1; k <= terms; ++k) {
    sum += c[static_cast<std::size_t>(k - 1)] * std::sin((2.0 * k - 1.0) * theta);
  }
  return 2.0 / kPi * std::sin(theta) * sum;
}

double cdf(const QGaussianParams& params, double x) {
  const Interval s = params.support();
  if (x <= s.lo) return 0.0;
  if (x >= s.hi) return 1.0;
  return standard_cdf_theta(params.q(), theta_of(params, x), adaptive_terms(params.q()));
}

double inverse_cdf(const QGaussianParams& params, double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("inverse_cdf needs p in (0, 1)");
  const double theta = solve_theta(params.q(), adaptive_terms(params.q()), p, 0.0, kPi);
  return params.location() + params.half_width() * std::cos(theta);
}

QGaussianSampler::QGaussianSampler(const QGaussianParams& params) : params_(params) {
  const int terms = adaptive_terms(params.q());
  theta_.resize(kSamplerTableSize);
  cdf_.resize(kSamplerTableSize);
  for (int i = 0; i < kSamplerTableSize; ++i) {
    // theta runs from pi down to 0 so the table is increasing in p.
    const double theta = kPi * (1.0 - static_cast<double>(i) / (kSamplerTableSize - 1));
    theta_[static_cast<std::size_t>(i)] = theta;
    cdf_[static_cast<std::size_t>(i)] = standard_cdf_theta(params.q(), theta, terms);
  }
  cdf_.front() = 0.0;
  cdf_.back() = 1.0;
}

double QGaussianSampler::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile needs p in (0, 1)");
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), p);
  const auto hi_index = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(
      it - cdf_.begin(), 1, static_cast<std::ptrdiff_t>(cdf_.size()) - 1));
  const double theta_lo = theta_[hi_index];  // smaller theta, larger cdf
  const double theta_hi = theta_[hi_index - 1];
  const double theta =
      solve_theta(params_.q(), adaptive_terms(params_.q()), p, theta_lo, theta_hi);
  return params_.location() + params_.half_width() * std::cos(theta);
}

std::vector<double> sample(const QGaussianParams& params, std::uint64_t seed,
                           std::size_t count) {
  std::vector<double> draws;
  if (count == 0) return draws;
  draws.reserve(count);
  const QGaussianSampler sampler(params);
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) draws.push_back(sampler.quantile(rng.uniform()));
  return draws;
}

double equilibrium_density(const QGaussianParams& params, double x) {
  if (!params.support().contains_open(x)) return 0.0;
  const double t = (x - params.location()) / params.half_width();
  const double radicand = 4.0 * (1.0 - t) * (1.0 + t);
  if (!(radicand > 0.0)) return 0.0;
  return std::sqrt(1.0 - params.q()) / (kPi * std::sqrt(radicand)) / std::sqrt(params.scale());
}

double equilibrium_from_uniform(const QGaussianParams& params, double uniform) {
  return params.location() + params.half_width() * std::cos(kPi * uniform);
}

std::vector<double> sample_equilibrium(const QGaussianParams& params, std::uint64_t seed,
                                       std::size_t count) {
  std::vector<double> draws;
  draws.reserve(count);
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    draws.push_back(equilibrium_from_uniform(params, rng.uniform()));
  }
  return draws;
}

double bimodal_threshold() {
  static const double threshold = [] {
    // Scan down from 0 (series value 1) to the first sign change.
    double hi = 0.0;
    double lo = -1e-3;
    while (lemma_series(lo) > 0.0) {
      hi = lo;
      lo -= 1e-3;
      if (lo <= -0.999) throw DomainError("no sign change of the bimodality series");
    }
    std::uintmax_t iterations = 200;
    const auto [a, b] = boost::math::tools::toms748_solve(
        lemma_series, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
    return 0.5 * (a + b);
  }();
  return threshold;
}

int mode_count(const QGaussianParams& params) {
  return params.q() < bimodal_threshold() ? 2 : 1;
}

}  // namespace qsle

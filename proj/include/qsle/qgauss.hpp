#pragma once

// q-Gaussian distributions on a compact interval.
//
// The standardized density lives on [-2/sqrt(1-q), 2/sqrt(1-q)] and is a
// deformation of the Gaussian: q = 0 gives the semicircle law, q -> 1 the
// normal law. A general member of the family is obtained by shifting by a
// location and stretching by sqrt(scale).

#include <cstdint>
#include <vector>

namespace qsle {

// Constructor bounds on q. Closer to +-1 the series and products stop being
// accurate in double precision.
inline constexpr double kMinQ = -0.99;
inline constexpr double kMaxQ = 0.99;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double width() const { return hi - lo; }
  double center() const { return 0.5 * (lo + hi); }
  bool contains(double x) const { return x >= lo && x <= hi; }
  bool contains_open(double x) const { return x > lo && x < hi; }
};

// q-analogue of n: 1 + q + ... + q^{n-1}; zero for n = 0.
double q_bracket(int n, double q);

// [1]_q [2]_q ... [n]_q, with [0]_q! = 1.
double q_factorial(int n, double q);

// (a; q)_n = prod_{k<n} (1 - a q^k).
double q_pochhammer(double a, double q, int n);

class QGaussianParams {
 public:
  // Throws DomainError unless q in [kMinQ, kMaxQ] and scale > 0.
  explicit QGaussianParams(double q, double location = 0.0, double scale = 1.0);

  double q() const { return q_; }
  double location() const { return location_; }
  double scale() const { return scale_; }

  // 2 sqrt(scale) / sqrt(1 - q).
  double half_width() const;
  Interval support() const;

  double standardize(double x) const;
  double destandardize(double u) const;

  bool operator==(const QGaussianParams&) const = default;

 private:
  double q_;
  double location_;
  double scale_;
};

// Density of the q-Gaussian, evaluated from the Chebyshev series with the tail
// cut once the next summand is below 1e-16. Zero outside the support.
double density(const QGaussianParams& params, double x);

// Partial sum of the Chebyshev series keeping k = 1..terms-1. May dip below
// zero near the support edges for small `terms`; the raw value is returned.
double density_truncated(const QGaussianParams& params, int terms, double x);

// Uniform bound |q|^{(J-1)(J-2)/2} / (pi (1-q^2)^2) on the standardized
// truncation error. Requires terms >= 4.
double truncation_bound(double q, int terms);

// Standardized density and its first two derivatives in u, from the series
// differentiated term by term. Valid for |u| strictly inside the support.
struct DensityJet {
  double value = 0.0;
  double first = 0.0;
  double second = 0.0;
};
DensityJet standard_density_jet(double q, double u);

// Density of the angle theta in (0, pi) when u = (2/sqrt(1-q)) cos(theta) is
// standard q-Gaussian: (2/pi) sin(theta) sum_k c_k sin((2k-1) theta).
double angular_density(double q, double theta);

double cdf(const QGaussianParams& params, double x);

// Throws DomainError unless 0 < p < 1.
double inverse_cdf(const QGaussianParams& params, double p);

// Inverse-CDF sampler backed by a monotone table of the distribution function,
// refined by bracketed root finding.
class QGaussianSampler {
 public:
  explicit QGaussianSampler(const QGaussianParams& params);

  const QGaussianParams& params() const { return params_; }
  double quantile(double p) const;

 private:
  QGaussianParams params_;
  std::vector<double> theta_;  // decreasing in x; increasing in p below
  std::vector<double> cdf_;
};

std::vector<double> sample(const QGaussianParams& params, std::uint64_t seed,
                           std::size_t count);

// Arcsine (Chebyshev) equilibrium measure on the support of `params`.
double equilibrium_density(const QGaussianParams& params, double x);
std::vector<double> sample_equilibrium(const QGaussianParams& params, std::uint64_t seed,
                                       std::size_t count);
double equilibrium_from_uniform(const QGaussianParams& params, double uniform);

// Largest root q0 in (-1, 0) of sum_k (2k+1)^2 q^{k(k+1)/2}. Densities with
// q < q0 are bimodal.
double bimodal_threshold();
int mode_count(const QGaussianParams& params);

}  // namespace qsle

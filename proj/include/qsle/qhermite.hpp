#pragma once

// q-Hermite polynomials H_n^{(q)}: the monic orthogonal family of the
// standardized q-Gaussian, defined by x H_n = H_{n+1} + [n]_q H_{n-1}.

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qsle/qgauss.hpp"

namespace qsle {

// [H_0(x), ..., H_N(x)].
std::vector<double> eval_all(double q, double x, int max_degree);

// ||H_n||^2 under the standardized q-Gaussian: [n]_q!.
double norm_squared(double q, int n);

class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries);

  std::size_t dimension() const { return entries_.size(); }
  int operator[](std::size_t i) const { return entries_[i]; }
  const std::vector<int>& entries() const { return entries_; }
  int total_degree() const;
  // (sum alpha_i^l)^{1/l}.
  double quasinorm(double l) const;

  // Graded: total degree first, then lexicographic entries.
  std::strong_ordering operator<=>(const MultiIndex& other) const;
  bool operator==(const MultiIndex& other) const = default;

 private:
  std::vector<int> entries_;
};

// Product of [alpha_i]_q!, the squared norm of the tensor polynomial.
double norm_squared(double q, const MultiIndex& alpha);

enum class TruncationKind { TotalDegree, Hyperbolic };

struct TruncationRule {
  TruncationKind kind = TruncationKind::TotalDegree;
  int max_degree = 0;
  double quasinorm_exponent = 1.0;  // only for Hyperbolic, 0 < l < 1

  static TruncationRule total_degree(int n) { return {TruncationKind::TotalDegree, n, 1.0}; }
  static TruncationRule hyperbolic(int n, double l) { return {TruncationKind::Hyperbolic, n, l}; }
  bool operator==(const TruncationRule&) const = default;
};

// Multi-index truncation set in graded-lexicographic order. Index order fixes
// the column order of every design matrix and coefficient vector.
class IndexSet {
 public:
  IndexSet(std::size_t dimension, TruncationRule rule, std::vector<MultiIndex> indices);

  std::size_t dimension() const { return dimension_; }
  const TruncationRule& rule() const { return rule_; }
  std::size_t size() const { return indices_.size(); }
  const MultiIndex& operator[](std::size_t i) const { return indices_[i]; }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  int max_degree_in(std::size_t dim) const;
  // Position of alpha, or size() when absent.
  std::size_t find(const MultiIndex& alpha) const;

  bool operator==(const IndexSet&) const = default;

 private:
  std::size_t dimension_;
  TruncationRule rule_;
  std::vector<MultiIndex> indices_;
};

IndexSet build_index_set(std::size_t dimension, TruncationRule rule);

void to_json(nlohmann::json& j, const IndexSet& set);
IndexSet index_set_from_json(const nlohmann::json& j);

// Product of univariate q-Hermite values at (standardized) coordinates u.
double eval_multivariate(double q, const MultiIndex& alpha, std::span<const double> u);

// All basis values of `set` at u, in index order, sharing univariate tables.
std::vector<double> eval_basis(double q, const IndexSet& set, std::span<const double> u);

// Finite expansion sum_n a_n H_n^{(q)}; coeffs[n] is the coefficient of degree n.
struct QSeries {
  double q = 0.0;
  std::vector<double> coeffs;

  int degree() const;
  double operator()(double x) const;
};

// Parseval: sum_n [n]_q! a_n^2.
double norm_squared(const QSeries& series);

// sum_{n > N} [n]_q! a_n^2, the squared L2 error of truncating after degree N.
double tail_norm_squared(const QSeries& series, int max_degree);

// k-fold q-derivative acting on coefficients. Degree n maps to n-k with factor
// prod_{l=1..k} q^{-(n-l)/2} [n-l+1]_q. For q < 0 the half-integer power is
// taken as |q|^{-(n-l)/2}; squared norms are unaffected by that phase choice.
// Throws DomainError for q = 0.
QSeries q_derivative(const QSeries& series, int order);

// Right-hand side of the truncation rate estimate
//   |q|^{(2N-1-k)k/2} / prod_{l=1..k} [N-l+2]_q * ||D_q^{(k)} f||^2.
double truncation_rate_bound(double q, int max_degree, int order, double dq_norm_sq);

// Quadrature against a q-Gaussian measure: midpoint rule in the angle theta
// of x = location + half_width cos(theta), weights carrying the density.
// Exact (to rounding) for polynomials of degree below 2 count - 2 K, where K
// is the number of retained density series terms (K <= 30 for |q| <= 0.9).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
QuadratureRule quadrature_nodes(const QGaussianParams& params, std::size_t count);

// Tensor product of per-dimension rules over independent components.
class TensorQuadrature {
 public:
  // Throws CapabilityError for more than kMaxDimension components.
  TensorQuadrature(std::span<const QGaussianParams> priors, std::size_t count_per_dim);

  static constexpr std::size_t kMaxDimension = 3;

  std::size_t dimension() const { return rules_.size(); }
  std::size_t size() const;
  const QuadratureRule& rule(std::size_t dim) const { return rules_[dim]; }

  // Calls visit(point, weight) for every tensor node, in fixed order.
  void for_each(const std::function<void(std::span<const double>, double)>& visit) const;

  double integrate(const std::function<double(std::span<const double>)>& f) const;

 private:
  std::vector<QuadratureRule> rules_;
};

// Expectation of g under mu_q with node count starting at 64 (degree_hint + 1)
// and doubling until two successive values agree to 1e-11.
double expectation(const QGaussianParams& params, const std::function<double(double)>& g,
                   int degree_hint = 0);

}  // namespace qsle

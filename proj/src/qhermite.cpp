#include "qsle/qhermite.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "qsle/errors.hpp"

namespace qsle {

std::vector<double> eval_all(double q, double x, int max_degree) {
  if (max_degree < 0) throw ArgumentError("eval_all needs max_degree >= 0");
  std::vector<double> h(static_cast<std::size_t>(max_degree) + 1);
  h[0] = 1.0;
  if (max_degree >= 1) h[1] = x;
  for (int n = 1; n < max_degree; ++n) {
    const auto i = static_cast<std::size_t>(n);
    h[i + 1] = x * h[i] - q_bracket(n, q) * h[i - 1];
  }
  return h;
}

double norm_squared(double q, int n) { return q_factorial(n, q); }

MultiIndex::MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ArgumentError("multi-index needs dimension >= 1");
  for (int a : entries_) {
    if (a < 0) throw ArgumentError("multi-index entries must be nonnegative");
  }
}

int MultiIndex::total_degree() const {
  int sum = 0;
  for (int a : entries_) sum += a;
  return sum;
}

double MultiIndex::quasinorm(double l) const {
  double sum = 0.0;
  for (int a : entries_) sum += std::pow(static_cast<double>(a), l);
  return std::pow(sum, 1.0 / l);
}

std::strong_ordering MultiIndex::operator<=>(const MultiIndex& other) const {
  if (auto c = total_degree() <=> other.total_degree(); c != 0) return c;
  return entries_ <=> other.entries_;
}

double norm_squared(double q, const MultiIndex& alpha) {
  double product = 1.0;
  for (int a : alpha.entries()) product *= q_factorial(a, q);
  return product;
}

IndexSet::IndexSet(std::size_t dimension, TruncationRule rule, std::vector<MultiIndex> indices)
    : dimension_(dimension), rule_(rule), indices_(std::move(indices)) {
  if (dimension_ == 0) throw ArgumentError("index set needs dimension >= 1");
  for (const auto& alpha : indices_) {
    if (alpha.dimension() != dimension_) throw ArgumentError("index dimension mismatch");
  }
}

int IndexSet::max_degree_in(std::size_t dim) const {
  int m = 0;
  for (const auto& alpha : indices_) m = std::max(m, alpha[dim]);
  return m;
}

std::size_t IndexSet::find(const MultiIndex& alpha) const {
  const auto it = std::lower_bound(indices_.begin(), indices_.end(), alpha);
  if (it != indices_.end() && *it == alpha) return static_cast<std::size_t>(it - indices_.begin());
  return indices_.size();
}

namespace {

void enumerate(std::size_t dim, int budget, std::vector<int>& current,
               std::vector<MultiIndex>& out) {
  if (current.size() + 1 == dim) {
    for (int a = 0; a <= budget; ++a) {
      current.push_back(a);
      out.emplace_back(current);
      current.pop_back();
    }
    return;
  }
  for (int a = 0; a <= budget; ++a) {
    current.push_back(a);
    enumerate(dim, budget - a, current, out);
    current.pop_back();
  }
}

}  // namespace

IndexSet build_index_set(std::size_t dimension, TruncationRule rule) {
  if (dimension == 0) throw ArgumentError("index set needs dimension >= 1");
  if (rule.max_degree < 0) throw ArgumentError("index set needs N >= 0");
  if (rule.kind == TruncationKind::Hyperbolic &&
      !(rule.quasinorm_exponent > 0.0 && rule.quasinorm_exponent < 1.0)) {
    throw ArgumentError("hyperbolic truncation needs 0 < l < 1");
  }
  if (rule.kind == TruncationKind::TotalDegree) rule.quasinorm_exponent = 1.0;

  std::vector<MultiIndex> all;
  std::vector<int> current;
  enumerate(dimension, rule.max_degree, current, all);

  std::vector<MultiIndex> kept;
  kept.reserve(all.size());
  for (auto& alpha : all) {
    if (rule.kind == TruncationKind::Hyperbolic &&
        alpha.quasinorm(rule.quasinorm_exponent) > rule.max_degree * (1.0 + 1e-12)) {
      continue;
    }
    kept.push_back(std::move(alpha));
  }
  std::sort(kept.begin(), kept.end());
  return IndexSet(dimension, rule, std::move(kept));
}

void to_json(nlohmann::json& j, const IndexSet& set) {
  nlohmann::json indices = nlohmann::json::array();
  for (const auto& alpha : set.indices()) indices.push_back(alpha.entries());
  j = nlohmann::json{{"dimension", set.dimension()},
                     {"kind", set.rule().kind == TruncationKind::TotalDegree ? "total_degree"
                                                                             : "hyperbolic"},
                     {"max_degree", set.rule().max_degree},
                     {"indices", indices}};
  if (set.rule().kind == TruncationKind::Hyperbolic) {
    j["quasinorm_exponent"] = set.rule().quasinorm_exponent;
  }
}

IndexSet index_set_from_json(const nlohmann::json& j) {
  TruncationRule rule;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "total_degree") {
    rule = TruncationRule::total_degree(j.at("max_degree").get<int>());
  } else if (kind == "hyperbolic") {
    rule = TruncationRule::hyperbolic(j.at("max_degree").get<int>(),
                                      j.at("quasinorm_exponent").get<double>());
  } else {
    throw ArgumentError("unknown index set kind: " + kind);
  }
  std::vector<MultiIndex> indices;
  for (const auto& entry : j.at("indices")) indices.emplace_back(entry.get<std::vector<int>>());
  return IndexSet(j.at("dimension").get<std::size_t>(), rule, std::move(indices));
}

double eval_multivariate(double q, const MultiIndex& alpha, std::span<const double> u) {
  if (u.size() != alpha.dimension()) throw ArgumentError("point dimension mismatch");
  double product = 1.0;
  for (std::size_t i = 0; i < u.size(); ++i) product *= eval_all(q, u[i], alpha[i])[alpha[i]];
  return product;
}

std::vector<double> eval_basis(double q, const IndexSet& set, std::span<const double> u) {
  if (u.size() != set.dimension()) throw ArgumentError("point dimension mismatch");
  std::vector<std::vector<double>> tables(set.dimension());
  for (std::size_t d = 0; d < set.dimension(); ++d) {
    tables[d] = eval_all(q, u[d], set.max_degree_in(d));
  }
  std::vector<double> values(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    double product = 1.0;
    for (std::size_t d = 0; d < set.dimension(); ++d) {
      product *= tables[d][static_cast<std::size_t>(set[i][d])];
    }
    values[i] = product;
  }
  return values;
}

int QSeries::degree() const {
  for (std::size_t n = coeffs.size(); n-- > 0;) {
    if (coeffs[n] != 0.0) return static_cast<int>(n);
  }
  return -1;
}

double QSeries::operator()(double x) const {
  if (coeffs.empty()) return 0.0;
  const auto h = eval_all(q, x, static_cast<int>(coeffs.size()) - 1);
  double sum = 0.0;
  for (std::size_t n = 0; n < coeffs.size(); ++n) sum += coeffs[n] * h[n];
  return sum;
}

double norm_squared(const QSeries& series) { return tail_norm_squared(series, -1); }

double tail_norm_squared(const QSeries& series, int max_degree) {
  double sum = 0.0;
  for (std::size_t n = 0; n < series.coeffs.size(); ++n) {
    if (static_cast<int>(n) <= max_degree) continue;
    const double a = series.coeffs[n];
    sum += q_factorial(static_cast<int>(n), series.q) * a * a;
  }
  return sum;
}

QSeries q_derivative(const QSeries& series, int order) {
  if (order < 1) throw ArgumentError("q_derivative needs order >= 1");
  if (series.q == 0.0) throw DomainError("q-derivative is undefined at q = 0");
  const double aq = std::abs(series.q);
  QSeries out{series.q, {}};
  const auto size = series.coeffs.size();
  if (size <= static_cast<std::size_t>(order)) {
    out.coeffs.assign(1, 0.0);
    return out;
  }
  out.coeffs.assign(size - static_cast<std::size_t>(order), 0.0);
  for (std::size_t n = static_cast<std::size_t>(order); n < size; ++n) {
    const int deg = static_cast<int>(n);
    double factor = 1.0;
    for (int l = 1; l <= order; ++l) {
      factor *= std::pow(aq, -0.5 * (deg - l)) * q_bracket(deg - l + 1, series.q);
    }
    out.coeffs[n - static_cast<std::size_t>(order)] = series.coeffs[n] * factor;
  }
  return out;
}

double truncation_rate_bound(double q, int max_degree, int order, double dq_norm_sq) {
  if (!(q != 0.0 && std::abs(q) < 1.0)) throw DomainError("rate bound needs 0 < |q| < 1");
  if (order < 1) throw DomainError("rate bound needs k >= 1");
  if (max_degree < order - 1) throw DomainError("rate bound needs N >= k - 1");
  const double exponent = 0.5 * (2.0 * max_degree - 1.0 - order) * order;
  double denominator = 1.0;
  for (int l = 1; l <= order; ++l) denominator *= q_bracket(max_degree - l + 2, q);
  return std::pow(std::abs(q), exponent) / denominator * dq_norm_sq;
}

QuadratureRule quadrature_nodes(const QGaussianParams& params, std::size_t count) {
  if (count == 0) throw ArgumentError("quadrature needs count >= 1");
  QuadratureRule rule;
  rule.nodes.resize(count);
  rule.weights.resize(count);
  const double step = std::numbers::pi / static_cast<double>(count);
  const double r = params.half_width();
  for (std::size_t j = 0; j < count; ++j) {
    const double theta = (static_cast<double>(j) + 0.5) * step;
    rule.nodes[j] = params.location() + r * std::cos(theta);
    rule.weights[j] = step * angular_density(params.q(), theta);
  }
  return rule;
}

TensorQuadrature::TensorQuadrature(std::span<const QGaussianParams> priors,
                                   std::size_t count_per_dim) {
  if (priors.empty()) throw ArgumentError("tensor quadrature needs at least one component");
  if (priors.size() > kMaxDimension) {
    throw CapabilityError("tensor quadrature supports at most 3 dimensions");
  }
  for (const auto& p : priors) rules_.push_back(quadrature_nodes(p, count_per_dim));
}

std::size_t TensorQuadrature::size() const {
  std::size_t n = 1;
  for (const auto& r : rules_) n *= r.nodes.size();
  return n;
}

void TensorQuadrature::for_each(
    const std::function<void(std::span<const double>, double)>& visit) const {
  const std::size_t dim = rules_.size();
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> point(dim);
  const std::size_t total = size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    double weight = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
      point[d] = rules_[d].nodes[idx[d]];
      weight *= rules_[d].weights[idx[d]];
    }
    visit(point, weight);
    for (std::size_t d = dim; d-- > 0;) {
      if (++idx[d] < rules_[d].nodes.size()) break;
      idx[d] = 0;
    }
  }
}

double TensorQuadrature::integrate(const std::function<double(std::span<const double>)>& f) const {
  double sum = 0.0;
  for_each([&](std::span<const double> x, double w) { sum += w * f(x); });
  return sum;
}

double expectation(const QGaussianParams& params, const std::function<double(double)>& g,
                   int degree_hint) {
  auto integrate = [&](std::size_t count) {
    const auto rule = quadrature_nodes(params, count);
    double sum = 0.0;
    for (std::size_t j = 0; j < count; ++j) sum += rule.weights[j] * g(rule.nodes[j]);
    return sum;
  };
  std::size_t count = 64 * static_cast<std::size_t>(std::max(0, degree_hint) + 1);
  double previous = integrate(count);
  for (int round = 0; round < 12; ++round) {
    count *= 2;
    const double current = integrate(count);
    if (std::abs(current - previous) <= 1e-11 * std::max(1.0, std::abs(current))) return current;
    previous = current;
  }
  return previous;
}

}  // namespace qsle

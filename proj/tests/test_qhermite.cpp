#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include <nlohmann/json.hpp>

#include "oracles.hpp"
#include "qsle/errors.hpp"
#include "qsle/qhermite.hpp"

using namespace qsle;

namespace {

std::vector<double> random_coeffs(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> c(n);
  for (auto& v : c) v = dist(gen);
  return c;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("univariate recurrence") {
  for (double q : {-0.7, 0.0, 0.6}) {
    const auto h = eval_all(q, 2.0, 1);
    REQUIRE(h.size() == 2);
    CHECK(h[0] == 1.0);
    CHECK(h[1] == 2.0);
  }
  const auto h = eval_all(0.5, 1.0, 3);
  CHECK(h[0] == 1.0);
  CHECK(h[1] == 1.0);
  CHECK(h[2] == doctest::Approx(0.0).scale(1.0));
  CHECK(h[3] == doctest::Approx(-1.5));
  CHECK(eval_all(0.3, 0.7, 0) == std::vector<double>{1.0});

  // q = 0 gives Chebyshev polynomials of the second kind in x/2.
  for (int i = 0; i <= 100; ++i) {
    const double x = -2.0 + 4.0 * i / 100.0;
    const auto v = eval_all(0.0, x, 12);
    for (int n = 0; n <= 12; ++n) {
      CHECK(std::abs(v[n] - oracle::chebyshev_u(n, x / 2)) <= 1e-12 * std::max(1.0, std::abs(v[n])));
    }
  }
}

TEST_CASE("norms under the q-Gaussian") {
  CHECK(norm_squared(0.3, 0) == 1.0);
  CHECK(norm_squared(0.5, 2) == doctest::Approx(1.5));
  for (double q : {-0.5, 0.0, 0.5}) {
    for (int n = 0; n <= 8; ++n) {
      const double value =
          oracle::expect_product(q, [&](double u) { return std::pow(oracle::hermite(q, n, u), 2); });
      CAPTURE(q);
      CAPTURE(n);
      CHECK(std::abs(value - norm_squared(q, n)) <= 1e-8);
    }
  }
}

TEST_CASE("multivariate basis") {
  const double u[2] = {0.3, -1.2};
  CHECK(eval_multivariate(0.4, MultiIndex({0, 0}), u) == 1.0);
  const double ones[2] = {1.0, 1.0};
  CHECK(eval_multivariate(0.5, MultiIndex({1, 2}), ones) == doctest::Approx(0.0).scale(1.0));
  const double three[3] = {1.0, 1.0, 1.0};
  CHECK_THROWS_AS(eval_multivariate(0.5, MultiIndex({1, 2}), three), ArgumentError);
  CHECK_THROWS_AS(MultiIndex({1, -1}), ArgumentError);

  const auto set = build_index_set(2, TruncationRule::total_degree(4));
  const double point[2] = {0.8, -0.4};
  const auto values = eval_basis(0.2, set, point);
  for (std::size_t i = 0; i < set.size(); ++i) {
    CHECK(values[i] == doctest::Approx(eval_multivariate(0.2, set[i], point)).epsilon(1e-14));
  }
}

TEST_CASE("Gram matrix of the tensor basis is diagonal") {
  const double q = 0.3;
  const std::vector<QGaussianParams> priors(2, QGaussianParams(q));
  const TensorQuadrature quad(priors, 64);
  const auto set = build_index_set(2, TruncationRule::total_degree(3));
  for (std::size_t a = 0; a < set.size(); ++a) {
    for (std::size_t b = 0; b < set.size(); ++b) {
      const double g = quad.integrate([&](std::span<const double> x) {
        return eval_multivariate(q, set[a], x) * eval_multivariate(q, set[b], x);
      });
      const double expected = a == b ? norm_squared(q, set[a]) : 0.0;
      CHECK(std::abs(g - expected) <= 1e-7);
    }
  }
  const std::vector<QGaussianParams> four(4, QGaussianParams(q));
  CHECK_THROWS_AS(TensorQuadrature(four, 8), CapabilityError);
}

TEST_CASE("index sets") {
  const auto td = build_index_set(2, TruncationRule::total_degree(3));
  CHECK(td.size() == 10);
  const auto line = build_index_set(1, TruncationRule::total_degree(5));
  REQUIRE(line.size() == 6);
  for (int n = 0; n <= 5; ++n) CHECK(line[n] == MultiIndex({n}));

  // Graded, then lexicographic.
  CHECK(td[0] == MultiIndex({0, 0}));
  CHECK(td[1] == MultiIndex({0, 1}));
  CHECK(td[2] == MultiIndex({1, 0}));
  CHECK(td[3] == MultiIndex({0, 2}));
  CHECK(td[9] == MultiIndex({3, 0}));

  for (std::size_t m = 1; m <= 4; ++m) {
    for (int n = 0; n <= 6; ++n) {
      const auto set = build_index_set(m, TruncationRule::total_degree(n));
      CHECK(static_cast<double>(set.size()) == binomial(static_cast<int>(m) + n, n));
      std::set<std::vector<int>> unique;
      for (const auto& a : set.indices()) {
        CHECK(a.total_degree() <= n);
        unique.insert(a.entries());
      }
      CHECK(unique.size() == set.size());
      for (std::size_t i = 1; i < set.size(); ++i) CHECK(set[i - 1] < set[i]);
    }
  }

  // Hyperbolic membership by brute force over the total-degree set.
  for (double l : {0.3, 0.5, 0.75}) {
    for (std::size_t m = 2; m <= 3; ++m) {
      const auto full = build_index_set(m, TruncationRule::total_degree(5));
      const auto hyp = build_index_set(m, TruncationRule::hyperbolic(5, l));
      std::size_t expected = 0;
      for (const auto& a : full.indices()) {
        double s = 0.0;
        for (int v : a.entries()) s += std::pow(v, l);
        const bool member = std::pow(s, 1.0 / l) <= 5.0 + 1e-9;
        expected += member ? 1 : 0;
        CHECK((hyp.find(a) < hyp.size()) == member);
      }
      CHECK(hyp.size() == expected);
    }
  }
  const auto hyp = build_index_set(2, TruncationRule::hyperbolic(3, 0.5));
  for (auto excluded : {MultiIndex({1, 3}), MultiIndex({3, 1}), MultiIndex({2, 2}),
                        MultiIndex({1, 2}), MultiIndex({2, 1}), MultiIndex({1, 1})}) {
    CHECK(hyp.find(excluded) == hyp.size());
  }
  CHECK(hyp.find(MultiIndex({0, 3})) < hyp.size());

  CHECK_THROWS_AS(build_index_set(2, TruncationRule::hyperbolic(3, 1.0)), ArgumentError);
  CHECK_THROWS_AS(build_index_set(2, TruncationRule::hyperbolic(3, 0.0)), ArgumentError);
  CHECK_THROWS_AS(build_index_set(0, TruncationRule::total_degree(3)), ArgumentError);
}

TEST_CASE("index set JSON keeps order and rule") {
  for (auto rule : {TruncationRule::total_degree(4), TruncationRule::hyperbolic(6, 0.6)}) {
    const auto set = build_index_set(3, rule);
    const nlohmann::json j = set;
    CHECK(index_set_from_json(nlohmann::json::parse(j.dump())) == set);
  }
}

TEST_CASE("q-derivative in coefficient space") {
  QSeries h1{0.5, {0.0, 1.0}};
  const auto d1 = q_derivative(h1, 1);
  REQUIRE(d1.coeffs.size() == 1);
  CHECK(d1.coeffs[0] == doctest::Approx(1.0));

  QSeries h3{0.5, {0.0, 0.0, 0.0, 1.0}};
  const double expected = std::pow(0.5, -1.5) * 1.75 * 1.5 * 1.0;
  CHECK(q_derivative(h3, 3).coeffs[0] == doctest::Approx(expected).epsilon(1e-14));
  CHECK(q_derivative(h3, 3).coeffs[0] == doctest::Approx(7.42462).epsilon(1e-6));

  CHECK_THROWS_AS(q_derivative(QSeries{0.0, {1.0, 2.0}}, 1), DomainError);

  std::mt19937_64 gen(11);
  for (double q : {-0.6, 0.5}) {
    for (int trial = 0; trial < 5; ++trial) {
      QSeries f{q, random_coeffs(gen, 8)};
      QSeries g{q, random_coeffs(gen, 8)};
      const auto twice = q_derivative(q_derivative(f, 1), 1);
      const auto direct = q_derivative(f, 2);
      REQUIRE(twice.coeffs.size() == direct.coeffs.size());
      for (std::size_t n = 0; n < direct.coeffs.size(); ++n) {
        CHECK(std::abs(twice.coeffs[n] - direct.coeffs[n]) <= 1e-12 * std::max(1.0, std::abs(direct.coeffs[n])));
      }
      CHECK(direct.degree() == f.degree() - 2);

      // Linearity.
      QSeries sum{q, f.coeffs};
      for (std::size_t n = 0; n < sum.coeffs.size(); ++n) sum.coeffs[n] = 2.0 * f.coeffs[n] - g.coeffs[n];
      const auto ds = q_derivative(sum, 3);
      const auto df = q_derivative(f, 3);
      const auto dg = q_derivative(g, 3);
      for (std::size_t n = 0; n < ds.coeffs.size(); ++n) {
        CHECK(ds.coeffs[n] == doctest::Approx(2.0 * df.coeffs[n] - dg.coeffs[n]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("truncation rate estimate") {
  // f = H_{N+1}: tail equals |q|^N / [N+1]_q ||D_q f||^2 exactly. The stated
  // estimate carries |q|^{N-1} and is therefore larger by 1/|q|.
  for (double q : {-0.5, 0.5}) {
    for (int n = 3; n <= 8; ++n) {
      QSeries f{q, std::vector<double>(static_cast<std::size_t>(n) + 2, 0.0)};
      f.coeffs.back() = 1.0;
      const double tail = tail_norm_squared(f, n);
      const double dnorm = norm_squared(q_derivative(f, 1));
      CHECK(tail == doctest::Approx(q_factorial(n + 1, q)).epsilon(1e-14));
      CHECK(tail == doctest::Approx(std::pow(std::abs(q), n) / q_bracket(n + 1, q) * dnorm).epsilon(1e-12));
      const double bound = truncation_rate_bound(q, n, 1, dnorm);
      CHECK(tail <= bound);
      CHECK(bound * std::abs(q) == doctest::Approx(tail).epsilon(1e-12));
    }
  }

  std::mt19937_64 gen(5);
  for (double q : {-0.5, 0.5}) {
    for (int n = 3; n <= 8; ++n) {
      for (int trial = 0; trial < 20; ++trial) {
        QSeries f{q, random_coeffs(gen, 14)};
        for (int k = 1; k <= 2; ++k) {
          const double bound = truncation_rate_bound(q, n, k, norm_squared(q_derivative(f, k)));
          CHECK(tail_norm_squared(f, n) <= bound);
        }
      }
    }
  }

  CHECK(truncation_rate_bound(0.2, 5, 1, 1.0) < truncation_rate_bound(0.8, 5, 1, 1.0));
  CHECK_THROWS_AS(truncation_rate_bound(0.0, 5, 1, 1.0), DomainError);
  CHECK_THROWS_AS(truncation_rate_bound(0.5, 5, 0, 1.0), DomainError);
  CHECK_THROWS_AS(truncation_rate_bound(0.5, 1, 3, 1.0), DomainError);
}

TEST_CASE("quadrature rule") {
  const QGaussianParams p(0.4);
  const auto rule = quadrature_nodes(p, 256);
  double total = 0.0;
  double h2 = 0.0;
  double h33 = 0.0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const auto h = eval_all(0.4, rule.nodes[j], 3);
    total += rule.weights[j];
    h2 += rule.weights[j] * h[2];
    h33 += rule.weights[j] * h[3] * h[3];
  }
  CHECK(std::abs(total - 1.0) <= 1e-10);
  CHECK(std::abs(h2) <= 1e-9);
  CHECK(std::abs(h33 - q_factorial(3, 0.4)) <= 1e-8);

  // Shifted and scaled measure: mean and variance.
  const QGaussianParams shifted(-0.3, 5.0, 2.0);
  CHECK(expectation(shifted, [](double x) { return x; }, 1) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(expectation(shifted, [](double x) { return (x - 5.0) * (x - 5.0); }, 2) ==
        doctest::Approx(2.0).epsilon(1e-11));
}

TEST_CASE("Parseval identity for finite series") {
  std::mt19937_64 gen(3);
  for (double q : {-0.8, -0.2, 0.0, 0.5, 0.8}) {
    QSeries f{q, random_coeffs(gen, 10)};
    const double quad = expectation(QGaussianParams(q), [&](double x) { return f(x) * f(x); }, 18);
    CHECK(std::abs(quad - norm_squared(f)) <= 1e-8);
  }
}

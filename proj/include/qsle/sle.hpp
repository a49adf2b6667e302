#pragma once

// Spectral likelihood expansion: a likelihood written as a truncated series
// in the tensor q-Hermite basis of the prior, with coefficients from
// quadrature projection or (Christoffel) weighted least squares.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qsle/qgauss.hpp"
#include "qsle/qhermite.hpp"

namespace qsle {

using ScalarField = std::function<double(std::span<const double>)>;

// How design points are drawn and rows weighted in the least-squares fit.
//   Christoffel       draws from the equilibrium measure, kappa = P / sum_a H_a^2
//   EquilibriumRatio  draws from the equilibrium measure, kappa = f^{(q)} / v
//   Unweighted        draws from the prior, kappa = 1
enum class WeightingScheme { Christoffel, EquilibriumRatio, Unweighted };

enum class LeastSquaresSolver { Orthogonal, NormalEquations };

std::string to_string(WeightingScheme scheme);
WeightingScheme weighting_scheme_from_string(const std::string& name);

struct FitReport {
  std::size_t sample_count = 0;
  WeightingScheme scheme = WeightingScheme::Christoffel;
  LeastSquaresSolver solver = LeastSquaresSolver::Orthogonal;
  std::uint64_t seed = 0;
  double residual_norm = 0.0;       // ||sqrt(K)(A a - b)||
  double condition_estimate = 1.0;  // of sqrt(K) A
  // Heteroscedasticity-consistent standard errors of the fitted coefficients.
  std::vector<double> coefficient_std_errors;
};

class SleModel {
 public:
  SleModel(IndexSet index_set, std::vector<QGaussianParams> prior, std::vector<double> coeffs,
           FitReport report = {});

  double q() const { return prior_.front().q(); }
  std::size_t dimension() const { return prior_.size(); }
  const IndexSet& index_set() const { return index_set_; }
  const std::vector<QGaussianParams>& prior() const { return prior_; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  const FitReport& report() const { return report_; }

  // sum_a c_a H_a(u(x)); not sign constrained.
  double operator()(std::span<const double> x) const;

 private:
  IndexSet index_set_;
  std::vector<QGaussianParams> prior_;
  std::vector<double> coeffs_;
  FitReport report_;
};

double evaluate(const SleModel& model, std::span<const double> x);

// Coefficients a_alpha = (f, H_alpha) / prod [alpha_i]_q! by tensor
// quadrature with `nodes_per_dim` nodes per component (at most 3 components).
std::vector<double> project_coefficients(const ScalarField& target, const IndexSet& index_set,
                                         std::span<const QGaussianParams> prior,
                                         std::size_t nodes_per_dim);

struct ClsOptions {
  WeightingScheme scheme = WeightingScheme::Christoffel;
  std::size_t samples = 0;  // 0 selects 4 P
  double oversampling = 4.0;
  std::uint64_t seed = 0;
  LeastSquaresSolver solver = LeastSquaresSolver::Orthogonal;
  double max_condition = 1e12;
};

// Design points for a fit: positions and row weights kappa_j.
struct Design {
  std::vector<std::vector<double>> points;
  std::vector<double> weights;
};
Design draw_design(const IndexSet& index_set, std::span<const QGaussianParams> prior,
                   WeightingScheme scheme, std::size_t samples, std::uint64_t seed);

// Weighted least-squares fit on a design drawn per `options`. Throws
// ArgumentError when samples < P and IllConditionedError when the weighted
// design's condition estimate exceeds options.max_condition.
SleModel cls_fit(const ScalarField& target, const IndexSet& index_set,
                 std::span<const QGaussianParams> prior, const ClsOptions& options = {});

// Fit on given design points and target values.
SleModel cls_fit_design(const Design& design, std::span<const double> values,
                        const IndexSet& index_set, std::span<const QGaussianParams> prior,
                        const ClsOptions& options);

// E^{mu_q} (f - f_Lambda)^2 by tensor quadrature.
double mean_square_error(const SleModel& model, const ScalarField& target,
                         std::size_t nodes_per_dim);

void to_json(nlohmann::json& j, const SleModel& model);
SleModel sle_model_from_json(const nlohmann::json& j);

}  // namespace qsle

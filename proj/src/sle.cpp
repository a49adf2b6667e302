#include "qsle/sle.hpp"

#include <cmath>
#include <memory>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qsle/errors.hpp"
#include "qsle/random.hpp"

namespace qsle {
namespace {

std::vector<double> standardized(std::span<const QGaussianParams> prior,
                                 std::span<const double> x) {
  std::vector<double> u(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) u[d] = prior[d].standardize(x[d]);
  return u;
}

void check_prior(const IndexSet& index_set, std::span<const QGaussianParams> prior) {
  if (prior.size() != index_set.dimension()) {
    throw ArgumentError("prior dimension does not match the index set");
  }
  for (const auto& p : prior) {
    if (p.q() != prior.front().q()) throw ArgumentError("all prior components must share q");
  }
}

const char* solver_name(LeastSquaresSolver s) {
  return s == LeastSquaresSolver::Orthogonal ? "orthogonal" : "normal_equations";
}

}  // namespace

std::string to_string(WeightingScheme scheme) {
  switch (scheme) {
    case WeightingScheme::Christoffel:
      return "christoffel";
    case WeightingScheme::EquilibriumRatio:
      return "equilibrium_ratio";
    case WeightingScheme::Unweighted:
      return "unweighted";
  }
  return "unknown";
}

WeightingScheme weighting_scheme_from_string(const std::string& name) {
  if (name == "christoffel") return WeightingScheme::Christoffel;
  if (name == "equilibrium_ratio") return WeightingScheme::EquilibriumRatio;
  if (name == "unweighted") return WeightingScheme::Unweighted;
  throw ArgumentError("unknown weighting scheme: " + name);
}

SleModel::SleModel(IndexSet index_set, std::vector<QGaussianParams> prior,
                   std::vector<double> coeffs, FitReport report)
    : index_set_(std::move(index_set)),
      prior_(std::move(prior)),
      coeffs_(std::move(coeffs)),
      report_(std::move(report)) {
  check_prior(index_set_, prior_);
  if (coeffs_.size() != index_set_.size()) {
    throw ArgumentError("coefficient count does not match the index set");
  }
}

double SleModel::operator()(std::span<const double> x) const {
  if (x.size() != dimension()) throw ArgumentError("point dimension mismatch");
  const auto u = standardized(prior_, x);
  const auto basis = eval_basis(q(), index_set_, u);
  double sum = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i) sum += coeffs_[i] * basis[i];
  return sum;
}

double evaluate(const SleModel& model, std::span<const double> x) { return model(x); }

std::vector<double> project_coefficients(const ScalarField& target, const IndexSet& index_set,
                                         std::span<const QGaussianParams> prior,
                                         std::size_t nodes_per_dim) {
  check_prior(index_set, prior);
  const double q = prior.front().q();
  const TensorQuadrature quad(prior, nodes_per_dim);
  std::vector<double> coeffs(index_set.size(), 0.0);
  quad.for_each([&](std::span<const double> x, double w) {
    const double f = target(x);
    const auto basis = eval_basis(q, index_set, standardized(prior, x));
    for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += w * f * basis[i];
  });
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] /= norm_squared(q, index_set[i]);
  return coeffs;
}

Design draw_design(const IndexSet& index_set, std::span<const QGaussianParams> prior,
                   WeightingScheme scheme, std::size_t samples, std::uint64_t seed) {
  check_prior(index_set, prior);
  const std::size_t dim = prior.size();
  const double q = prior.front().q();
  const double basis_size = static_cast<double>(index_set.size());

  std::vector<std::unique_ptr<QGaussianSampler>> samplers;
  if (scheme == WeightingScheme::Unweighted) {
    for (const auto& p : prior) samplers.push_back(std::make_unique<QGaussianSampler>(p));
  }

  Rng rng(seed);
  Design design;
  design.points.reserve(samples);
  design.weights.reserve(samples);
  std::vector<double> x(dim);
  for (std::size_t j = 0; j < samples; ++j) {
    for (std::size_t d = 0; d < dim; ++d) {
      const auto support = prior[d].support();
      do {
        const double uniform = rng.uniform();
        x[d] = scheme == WeightingScheme::Unweighted ? samplers[d]->quantile(uniform)
                                                     : equilibrium_from_uniform(prior[d], uniform);
      } while (!support.contains_open(x[d]));
    }
    double kappa = 1.0;
    switch (scheme) {
      case WeightingScheme::Christoffel: {
        const auto basis = eval_basis(q, index_set, standardized(prior, x));
        double sum = 0.0;
        for (double b : basis) sum += b * b;
        kappa = basis_size / sum;
        break;
      }
      case WeightingScheme::EquilibriumRatio:
        for (std::size_t d = 0; d < dim; ++d) {
          kappa *= density(prior[d], x[d]) / equilibrium_density(prior[d], x[d]);
        }
        break;
      case WeightingScheme::Unweighted:
        break;
    }
    design.points.push_back(x);
    design.weights.push_back(kappa);
  }
  return design;
}

SleModel cls_fit_design(const Design& design, std::span<const double> values,
                        const IndexSet& index_set, std::span<const QGaussianParams> prior,
                        const ClsOptions& options) {
  check_prior(index_set, prior);
  const std::size_t rows = design.points.size();
  const std::size_t cols = index_set.size();
  if (values.size() != rows || design.weights.size() != rows) {
    throw ArgumentError("design and target value counts differ");
  }
  if (rows < cols) {
    throw ArgumentError("least squares needs at least P = " + std::to_string(cols) +
                        " samples, got " + std::to_string(rows));
  }
  const double q = prior.front().q();

  Eigen::MatrixXd weighted(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(rows));
  for (std::size_t j = 0; j < rows; ++j) {
    if (!(design.weights[j] > 0.0)) throw ArgumentError("design weights must be positive");
    const double s = std::sqrt(design.weights[j]);
    const auto basis = eval_basis(q, index_set, standardized(prior, design.points[j]));
    for (std::size_t i = 0; i < cols; ++i) {
      weighted(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = s * basis[i];
    }
    rhs(static_cast<Eigen::Index>(j)) = s * values[j];
  }

  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(weighted);
  const Eigen::MatrixXd r = qr.matrixQR()
                                .topRows(static_cast<Eigen::Index>(cols))
                                .triangularView<Eigen::Upper>();
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const auto& sv = svd.singularValues();
  const double condition =
      sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  if (!(condition <= options.max_condition)) {
    throw IllConditionedError("weighted design is ill-conditioned (condition " +
                              std::to_string(condition) + ") for N = " +
                              std::to_string(index_set.rule().max_degree) +
                              ", J = " + std::to_string(rows));
  }

  Eigen::VectorXd coeffs;
  if (options.solver == LeastSquaresSolver::Orthogonal) {
    coeffs = qr.solve(rhs);
  } else {
    const Eigen::MatrixXd gram = weighted.transpose() * weighted;
    coeffs = gram.ldlt().solve(weighted.transpose() * rhs);
  }

  const Eigen::VectorXd residual = weighted * coeffs - rhs;

  // Sandwich covariance (B^T B)^{-1} B^T diag(r^2) B (B^T B)^{-1}.
  const Eigen::MatrixXd bread =
      (weighted.transpose() * weighted).ldlt().solve(Eigen::MatrixXd::Identity(
          static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(cols)));
  const Eigen::MatrixXd scaled = weighted.array().colwise() * residual.array();
  const Eigen::MatrixXd covariance = bread * (scaled.transpose() * scaled) * bread;

  FitReport report;
  report.sample_count = rows;
  report.scheme = options.scheme;
  report.solver = options.solver;
  report.seed = options.seed;
  report.residual_norm = residual.norm();
  report.condition_estimate = condition;
  report.coefficient_std_errors.resize(cols);
  for (std::size_t i = 0; i < cols; ++i) {
    report.coefficient_std_errors[i] =
        std::sqrt(std::max(0.0, covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i))));
  }

  return SleModel(index_set, std::vector<QGaussianParams>(prior.begin(), prior.end()),
                  std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()),
                  std::move(report));
}

SleModel cls_fit(const ScalarField& target, const IndexSet& index_set,
                 std::span<const QGaussianParams> prior, const ClsOptions& options) {
  const std::size_t samples =
      options.samples > 0
          ? options.samples
          : static_cast<std::size_t>(std::ceil(options.oversampling * index_set.size()));
  if (samples < index_set.size()) {
    throw ArgumentError("least squares needs at least P = " + std::to_string(index_set.size()) +
                        " samples, got " + std::to_string(samples));
  }
  const auto design = draw_design(index_set, prior, options.scheme, samples, options.seed);
  std::vector<double> values(samples);
  for (std::size_t j = 0; j < samples; ++j) values[j] = target(design.points[j]);
  return cls_fit_design(design, values, index_set, prior, options);
}

double mean_square_error(const SleModel& model, const ScalarField& target,
                         std::size_t nodes_per_dim) {
  const TensorQuadrature quad(model.prior(), nodes_per_dim);
  return quad.integrate([&](std::span<const double> x) {
    const double e = target(x) - model(x);
    return e * e;
  });
}

void to_json(nlohmann::json& j, const SleModel& model) {
  nlohmann::json prior = nlohmann::json::array();
  for (const auto& p : model.prior()) {
    prior.push_back({{"q", p.q()}, {"location", p.location()}, {"scale", p.scale()}});
  }
  const auto& r = model.report();
  j = nlohmann::json{{"q", model.q()},
                     {"prior", prior},
                     {"index_set", model.index_set()},
                     {"coefficients", model.coeffs()},
                     {"fit_report",
                      {{"sample_count", r.sample_count},
                       {"scheme", to_string(r.scheme)},
                       {"solver", solver_name(r.solver)},
                       {"seed", r.seed},
                       {"residual_norm", r.residual_norm},
                       {"condition_estimate", r.condition_estimate},
                       {"coefficient_std_errors", r.coefficient_std_errors}}}};
}

SleModel sle_model_from_json(const nlohmann::json& j) {
  std::vector<QGaussianParams> prior;
  for (const auto& p : j.at("prior")) {
    prior.emplace_back(p.at("q").get<double>(), p.at("location").get<double>(),
                       p.at("scale").get<double>());
  }
  FitReport report;
  if (j.contains("fit_report")) {
    const auto& r = j.at("fit_report");
    report.sample_count = r.value("sample_count", std::size_t{0});
    report.scheme = weighting_scheme_from_string(r.value("scheme", std::string("christoffel")));
    report.solver = r.value("solver", std::string("orthogonal")) == "normal_equations"
                        ? LeastSquaresSolver::NormalEquations
                        : LeastSquaresSolver::Orthogonal;
    report.seed = r.value("seed", std::uint64_t{0});
    report.residual_norm = r.value("residual_norm", 0.0);
    report.condition_estimate = r.value("condition_estimate", 1.0);
    report.coefficient_std_errors =
        r.value("coefficient_std_errors", std::vector<double>{});
  }
  return SleModel(index_set_from_json(j.at("index_set")), std::move(prior),
                  j.at("coefficients").get<std::vector<double>>(), std::move(report));
}

}  // namespace qsle

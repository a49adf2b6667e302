#include "qsle/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>

#include <nlohmann/json.hpp>

#include "qsle/errors.hpp"
#include "qsle/io.hpp"
#include "qsle/qhermite.hpp"

namespace qsle {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double safe_log(double v) { return v > 0.0 ? std::log(v) : kNegInf; }

double prior_factor(const PosteriorSpec& spec, std::size_t d, double x) {
  const auto& p = spec.prior[d];
  if (spec.prior_terms) return std::max(density_truncated(p, *spec.prior_terms, x), 0.0);
  return density(p, x);
}

void check_dimension(const PosteriorSpec& spec, std::span<const double> x) {
  if (x.size() != spec.prior.size()) throw ArgumentError("point dimension mismatch");
}

}  // namespace

GaussianNoiseModel GaussianNoiseModel::isotropic(std::size_t dimension, double delta) {
  if (dimension == 0) throw ArgumentError("noise dimension must be positive");
  if (!(delta > 0.0)) throw ArgumentError("noise level must be positive");
  GaussianNoiseModel m;
  m.dimension_ = dimension;
  m.delta_ = delta;
  const auto n = static_cast<Eigen::Index>(dimension);
  m.covariance_ = Eigen::MatrixXd::Identity(n, n) * (delta * delta);
  m.log_det_ = static_cast<double>(dimension) * 2.0 * std::log(delta);
  return m;
}

GaussianNoiseModel::GaussianNoiseModel(const Eigen::MatrixXd& covariance)
    : dimension_(static_cast<std::size_t>(covariance.rows())), covariance_(covariance) {
  if (covariance.rows() == 0 || covariance.rows() != covariance.cols()) {
    throw ArgumentError("covariance must be a non-empty square matrix");
  }
  if (!covariance.isApprox(covariance.transpose(), 1e-12)) {
    throw ArgumentError("covariance must be symmetric");
  }
  factor_.compute(covariance);
  if (factor_.info() != Eigen::Success) throw ArgumentError("covariance must be positive definite");
  const Eigen::VectorXd diag = factor_.matrixLLT().diagonal();
  for (Eigen::Index i = 0; i < diag.size(); ++i) {
    if (!(diag(i) > 0.0)) throw ArgumentError("covariance must be positive definite");
    log_det_ += 2.0 * std::log(diag(i));
  }
}

double GaussianNoiseModel::norm_squared(std::span<const double> residual) const {
  if (residual.size() != dimension_) throw ArgumentError("residual dimension mismatch");
  if (delta_ > 0.0) {
    double s = 0.0;
    for (double r : residual) s += r * r;
    return s / (delta_ * delta_);
  }
  const Eigen::Map<const Eigen::VectorXd> r(residual.data(),
                                            static_cast<Eigen::Index>(residual.size()));
  const Eigen::VectorXd w = factor_.matrixL().solve(r);
  return w.squaredNorm();
}

double log_likelihood_exact(const ForwardMap& forward, const GaussianNoiseModel& noise,
                            std::span<const double> data, std::span<const double> x) {
  const auto phi = forward(x);
  if (phi.size() != data.size() || data.size() != noise.dimension()) {
    throw ArgumentError("forward map output, data and noise dimensions differ");
  }
  std::vector<double> r(phi.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = phi[i] - data[i];
  const double n = static_cast<double>(r.size());
  return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * noise.log_det() -
         0.5 * noise.norm_squared(r);
}

bool in_support(const PosteriorSpec& spec, std::span<const double> x) {
  check_dimension(spec, x);
  for (std::size_t d = 0; d < x.size(); ++d) {
    if (!spec.prior[d].support().contains_open(x[d])) return false;
  }
  return true;
}

double log_likelihood(const PosteriorSpec& spec, std::span<const double> x) {
  return std::visit(
      Overloaded{[&](const ExactLikelihood& l) {
                   return log_likelihood_exact(l.forward, l.noise, l.data, x);
                 },
                 [&](const SleLikelihood& l) {
                   return safe_log(std::max(l.model(x), spec.clamp_floor));
                 },
                 [](const FlatLikelihood&) { return 0.0; }},
      spec.likelihood);
}

double likelihood_value(const PosteriorSpec& spec, std::span<const double> x) {
  if (const auto* sle = std::get_if<SleLikelihood>(&spec.likelihood)) {
    return std::max(sle->model(x), spec.clamp_floor);
  }
  return std::exp(log_likelihood(spec, x));
}

double log_prior(const PosteriorSpec& spec, std::span<const double> x) {
  if (!in_support(spec, x)) return kNegInf;
  double s = 0.0;
  for (std::size_t d = 0; d < x.size(); ++d) s += safe_log(prior_factor(spec, d, x[d]));
  return s;
}

double log_posterior_unnormalized(const PosteriorSpec& spec, std::span<const double> x) {
  const double lp = log_prior(spec, x);
  if (lp == kNegInf) return kNegInf;
  return lp + log_likelihood(spec, x);
}

PotentialPenalty potential_and_penalty(const PosteriorSpec& spec, std::span<const double> x) {
  check_dimension(spec, x);
  PotentialPenalty out;
  out.potential = std::visit(
      Overloaded{[&](const ExactLikelihood& l) {
                   const auto phi = l.forward(x);
                   std::vector<double> r(phi.size());
                   for (std::size_t i = 0; i < r.size(); ++i) r[i] = phi[i] - l.data[i];
                   return 0.5 * l.noise.norm_squared(r);
                 },
                 [&](const SleLikelihood& l) {
                   return -safe_log(std::max(l.model(x), spec.clamp_floor));
                 },
                 [](const FlatLikelihood&) { return 0.0; }},
      spec.likelihood);
  for (std::size_t d = 0; d < x.size(); ++d) {
    const auto& p = spec.prior[d];
    if (!p.support().contains_open(x[d])) {
      out.at_boundary = true;
      continue;
    }
    const QGaussianParams standard(p.q());
    const double u = p.standardize(x[d]);
    const double f = spec.prior_terms
                         ? std::max(density_truncated(standard, *spec.prior_terms, u), 0.0)
                         : density(standard, u);
    if (f > 0.0) {
      out.penalty -= std::log(f);
    } else {
      out.at_boundary = true;
    }
  }
  if (out.at_boundary) out.penalty = std::numeric_limits<double>::infinity();
  return out;
}

std::vector<double> penalty_hessian_diag(const PosteriorSpec& spec, std::span<const double> x) {
  check_dimension(spec, x);
  std::vector<double> out(x.size());
  for (std::size_t d = 0; d < x.size(); ++d) {
    const auto& p = spec.prior[d];
    if (!p.support().contains_open(x[d])) {
      throw DomainError("penalty Hessian requested at or beyond the support boundary");
    }
    const auto jet = standard_density_jet(p.q(), p.standardize(x[d]));
    if (!(jet.value > 0.0)) throw DomainError("density vanishes at the requested point");
    out[d] = (jet.first * jet.first - jet.second * jet.value) / (jet.value * jet.value) / p.scale();
  }
  return out;
}

Estimate normalization_constant(const PosteriorSpec& spec, const NormalizationMethod& method) {
  auto integrand = [&](std::span<const double> x) {
    double v = likelihood_value(spec, x);
    if (spec.prior_terms) {
      for (std::size_t d = 0; d < x.size(); ++d) {
        const double f = density(spec.prior[d], x[d]);
        v *= f > 0.0 ? prior_factor(spec, d, x[d]) / f : 0.0;
      }
    }
    return v;
  };
  return std::visit(
      Overloaded{[&](const QuadratureMethod& m) {
                   const TensorQuadrature coarse(spec.prior, m.nodes_per_dim);
                   const TensorQuadrature fine(spec.prior, 2 * m.nodes_per_dim);
                   const double a = coarse.integrate(integrand);
                   const double b = fine.integrate(integrand);
                   return Estimate{b, std::abs(b - a)};
                 },
                 [&](const MonteCarloMethod& m) {
                   if (m.count < 2) throw ArgumentError("Monte Carlo needs at least two draws");
                   std::vector<QGaussianSampler> samplers;
                   for (const auto& p : spec.prior) samplers.emplace_back(p);
                   Rng rng(m.seed);
                   std::vector<double> x(spec.prior.size());
                   double mean = 0.0;
                   double m2 = 0.0;
                   for (std::size_t i = 0; i < m.count; ++i) {
                     for (std::size_t d = 0; d < x.size(); ++d) {
                       x[d] = samplers[d].quantile(rng.uniform());
                     }
                     const double v = integrand(x);
                     const double delta = v - mean;
                     mean += delta / static_cast<double>(i + 1);
                     m2 += delta * (v - mean);
                   }
                   const double n = static_cast<double>(m.count);
                   return Estimate{mean, std::sqrt(m2 / (n - 1.0) / n)};
                 }},
      method);
}

std::string describe(const Proposal& proposal) {
  return std::visit(Overloaded{[](const RandomWalkProposal& p) {
                                 std::string s = "random_walk(";
                                 for (std::size_t i = 0; i < p.step.size(); ++i) {
                                   if (i) s += ",";
                                   s += format_double(p.step[i]);
                                 }
                                 return s + ")";
                               },
                               [](const IndependenceProposal& p) {
                                 std::string s = "independence(";
                                 for (std::size_t i = 0; i < p.params.size(); ++i) {
                                   if (i) s += ";";
                                   s += format_double(p.params[i].q()) + "," +
                                        format_double(p.params[i].location()) + "," +
                                        format_double(p.params[i].scale());
                                 }
                                 return s + ")";
                               },
                               [](const EquilibriumProposal&) { return std::string("equilibrium"); }},
                    proposal);
}

bool mh_transition(const MhKernel& kernel, Rng& rng, std::vector<double>& state,
                   double& state_log_target, std::vector<double>& scratch) {
  kernel.propose(rng, state, scratch);
  const double u = rng.uniform();
  const double candidate = kernel.log_target(scratch);
  if (candidate == kNegInf) return false;
  bool accept = false;
  if (state_log_target == kNegInf) {
    accept = true;
  } else {
    const double log_ratio = (candidate - state_log_target) +
                             (kernel.log_q(scratch, state) - kernel.log_q(state, scratch));
    const double alpha = std::exp(std::min(0.0, log_ratio));
    accept = alpha > u;
  }
  if (accept) {
    state.swap(scratch);
    state_log_target = candidate;
  }
  return accept;
}

Chain mh_sample(const PosteriorSpec& spec, const Proposal& proposal, const MhOptions& options) {
  const std::size_t dim = spec.prior.size();
  const std::size_t burn_in = options.burn_in.value_or(options.steps / 5);
  if (!(options.steps > burn_in)) throw ArgumentError("steps must exceed burn-in");

  std::vector<double> state(dim);
  if (options.initial) {
    state = *options.initial;
  } else {
    for (std::size_t d = 0; d < dim; ++d) state[d] = spec.prior[d].location();
  }
  if (state.size() != dim || !in_support(spec, state)) {
    throw ArgumentError("initial MH state lies outside the prior support");
  }

  MhKernel kernel;
  kernel.log_target = [&](std::span<const double> x) {
    return in_support(spec, x) ? log_posterior_unnormalized(spec, x) : kNegInf;
  };
  std::vector<std::unique_ptr<QGaussianSampler>> samplers;
  std::visit(
      Overloaded{
          [&](const RandomWalkProposal& p) {
            if (p.step.size() != dim) throw ArgumentError("random-walk step dimension mismatch");
            kernel.propose = [step = p.step](Rng& rng, std::span<const double> from,
                                             std::vector<double>& to) {
              to.resize(from.size());
              for (std::size_t d = 0; d < from.size(); ++d) to[d] = from[d] + step[d] * rng.normal();
            };
            kernel.log_q = [](std::span<const double>, std::span<const double>) { return 0.0; };
          },
          [&](const IndependenceProposal& p) {
            if (p.params.size() != dim) throw ArgumentError("proposal dimension mismatch");
            for (const auto& q : p.params) samplers.push_back(std::make_unique<QGaussianSampler>(q));
            kernel.propose = [&samplers](Rng& rng, std::span<const double> from,
                                         std::vector<double>& to) {
              to.resize(from.size());
              for (std::size_t d = 0; d < from.size(); ++d) {
                to[d] = samplers[d]->quantile(rng.uniform());
              }
            };
            kernel.log_q = [params = p.params](std::span<const double>, std::span<const double> to) {
              double s = 0.0;
              for (std::size_t d = 0; d < to.size(); ++d) s += safe_log(density(params[d], to[d]));
              return s;
            };
          },
          [&](const EquilibriumProposal&) {
            kernel.propose = [&spec](Rng& rng, std::span<const double> from,
                                     std::vector<double>& to) {
              to.resize(from.size());
              for (std::size_t d = 0; d < from.size(); ++d) {
                to[d] = equilibrium_from_uniform(spec.prior[d], rng.uniform());
              }
            };
            kernel.log_q = [&spec](std::span<const double>, std::span<const double> to) {
              double s = 0.0;
              for (std::size_t d = 0; d < to.size(); ++d) {
                s += safe_log(equilibrium_density(spec.prior[d], to[d]));
              }
              return s;
            };
          }},
      proposal);

  Chain chain;
  chain.dimension = dim;
  chain.burn_in = burn_in;
  chain.seed = options.seed;
  chain.proposal = describe(proposal);
  const std::size_t kept = options.steps - burn_in;
  chain.samples.reserve(kept);
  chain.log_post.reserve(kept);
  chain.accepted.reserve(kept);

  Rng rng(options.seed);
  double state_log = kernel.log_target(state);
  std::vector<double> scratch(dim);
  std::size_t accepted = 0;
  for (std::size_t step = 0; step < options.steps; ++step) {
    const bool a = mh_transition(kernel, rng, state, state_log, scratch);
    if (step < burn_in) continue;
    accepted += a ? 1 : 0;
    chain.samples.push_back(state);
    chain.log_post.push_back(state_log);
    chain.accepted.push_back(a ? 1 : 0);
  }
  chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(kept);
  return chain;
}

std::vector<double> chain_mean(const Chain& chain) {
  std::vector<double> mean(chain.dimension, 0.0);
  for (const auto& s : chain.samples) {
    for (std::size_t d = 0; d < chain.dimension; ++d) mean[d] += s[d];
  }
  for (auto& m : mean) m /= static_cast<double>(chain.samples.size());
  return mean;
}

std::vector<double> chain_variance(const Chain& chain) {
  const auto mean = chain_mean(chain);
  std::vector<double> var(chain.dimension, 0.0);
  for (const auto& s : chain.samples) {
    for (std::size_t d = 0; d < chain.dimension; ++d) var[d] += (s[d] - mean[d]) * (s[d] - mean[d]);
  }
  const double n = static_cast<double>(chain.samples.size());
  for (auto& v : var) v /= std::max(1.0, n - 1.0);
  return var;
}

std::vector<double> effective_sample_size(const Chain& chain) {
  const std::size_t n = chain.samples.size();
  const auto mean = chain_mean(chain);
  std::vector<double> ess(chain.dimension, 0.0);
  for (std::size_t d = 0; d < chain.dimension; ++d) {
    auto autocov = [&](std::size_t lag) {
      double s = 0.0;
      for (std::size_t i = 0; i + lag < n; ++i) {
        s += (chain.samples[i][d] - mean[d]) * (chain.samples[i + lag][d] - mean[d]);
      }
      return s / static_cast<double>(n);
    };
    const double g0 = autocov(0);
    if (!(g0 > 0.0)) {
      ess[d] = 1.0;
      continue;
    }
    double tau = -g0;
    for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
      const double pair = autocov(2 * m) + autocov(2 * m + 1);
      if (!(pair > 0.0)) break;
      tau += 2.0 * pair;
    }
    ess[d] = static_cast<double>(n) * g0 / std::max(tau, g0 / static_cast<double>(n));
  }
  return ess;
}

void write_chain_csv(const Chain& chain, std::ostream& out) {
  out << "step";
  for (std::size_t d = 0; d < chain.dimension; ++d) out << ",x" << d + 1;
  out << ",log_post,accepted\n";
  for (std::size_t i = 0; i < chain.samples.size(); ++i) {
    out << chain.burn_in + i;
    for (double v : chain.samples[i]) out << ',' << format_double(v);
    out << ',' << format_double(chain.log_post[i]) << ',' << static_cast<int>(chain.accepted[i])
        << '\n';
  }
}

nlohmann::json chain_summary(const Chain& chain, const std::string& spec_hash) {
  return {{"acceptance_rate", chain.acceptance_rate},
          {"mean", chain_mean(chain)},
          {"variance", chain_variance(chain)},
          {"effective_sample_size", effective_sample_size(chain)},
          {"samples", chain.samples.size()},
          {"burn_in", chain.burn_in},
          {"seed", chain.seed},
          {"proposal", chain.proposal},
          {"spec_hash", spec_hash}};
}

}  // namespace qsle

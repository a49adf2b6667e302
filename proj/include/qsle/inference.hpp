#pragma once

// Posterior assembly over a product q-Gaussian prior and a Metropolis-Hastings
// sampler. Log densities use -infinity for points of zero posterior mass.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include "qsle/qgauss.hpp"
#include "qsle/random.hpp"
#include "qsle/sle.hpp"

namespace qsle {

using ForwardMap = std::function<std::vector<double>(std::span<const double>)>;

class GaussianNoiseModel {
 public:
  // delta^2 I.
  static GaussianNoiseModel isotropic(std::size_t dimension, double delta);
  // Full covariance; throws ArgumentError unless symmetric positive definite.
  explicit GaussianNoiseModel(const Eigen::MatrixXd& covariance);

  std::size_t dimension() const { return dimension_; }
  double log_det() const { return log_det_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

  // ||r||_Gamma^2 = r^T Gamma^{-1} r.
  double norm_squared(std::span<const double> residual) const;

 private:
  GaussianNoiseModel() = default;

  std::size_t dimension_ = 0;
  double delta_ = 0.0;  // > 0 for the isotropic form
  Eigen::MatrixXd covariance_;
  Eigen::LLT<Eigen::MatrixXd> factor_;
  double log_det_ = 0.0;
};

// -n/2 log(2 pi) - 1/2 log det Gamma - 1/2 ||phi(x) - y||_Gamma^2.
double log_likelihood_exact(const ForwardMap& forward, const GaussianNoiseModel& noise,
                            std::span<const double> data, std::span<const double> x);

struct ExactLikelihood {
  ForwardMap forward;
  GaussianNoiseModel noise;
  std::vector<double> data;
};

struct SleLikelihood {
  SleModel model;
};

// Likelihood identically one; the posterior is the prior.
struct FlatLikelihood {};

using Likelihood = std::variant<ExactLikelihood, SleLikelihood, FlatLikelihood>;

struct PosteriorSpec {
  std::vector<QGaussianParams> prior;
  Likelihood likelihood = FlatLikelihood{};
  // When set, each prior factor uses max(f_J, 0) with this many series terms.
  std::optional<int> prior_terms;
  double clamp_floor = 0.0;  // surrogate likelihood is max(f_Lambda, clamp_floor)
};

bool in_support(const PosteriorSpec& spec, std::span<const double> x);

// Likelihood value (not log) at x; surrogate values are clamped.
double likelihood_value(const PosteriorSpec& spec, std::span<const double> x);
double log_likelihood(const PosteriorSpec& spec, std::span<const double> x);

// Log of the product of prior factors (physical densities), -inf off support.
double log_prior(const PosteriorSpec& spec, std::span<const double> x);

double log_posterior_unnormalized(const PosteriorSpec& spec, std::span<const double> x);

struct PotentialPenalty {
  double potential = 0.0;  // Psi, the negative log likelihood up to constants
  double penalty = 0.0;    // H = -sum log f^(q)(u_i) of the standardized factors
  bool at_boundary = false;  // penalty is +inf
};
PotentialPenalty potential_and_penalty(const PosteriorSpec& spec, std::span<const double> x);

// d^2 H / dx_i^2 from analytic density derivatives. DomainError at or beyond
// the support boundary.
std::vector<double> penalty_hessian_diag(const PosteriorSpec& spec, std::span<const double> x);

struct QuadratureMethod {
  std::size_t nodes_per_dim = 512;
};
struct MonteCarloMethod {
  std::size_t count = 100000;
  std::uint64_t seed = 0;
};
using NormalizationMethod = std::variant<QuadratureMethod, MonteCarloMethod>;

struct Estimate {
  double value = 0.0;
  double error = 0.0;  // standard error (MC) or refinement difference (quadrature)
};

// Prior-measure average of the likelihood term (times f_J^+ / f when the
// prior is truncated).
Estimate normalization_constant(const PosteriorSpec& spec, const NormalizationMethod& method);

struct RandomWalkProposal {
  std::vector<double> step;  // per-component standard deviation
};
struct IndependenceProposal {
  std::vector<QGaussianParams> params;
};
// Arcsine measure on each prior factor's support.
struct EquilibriumProposal {};
using Proposal = std::variant<RandomWalkProposal, IndependenceProposal, EquilibriumProposal>;

std::string describe(const Proposal& proposal);

struct MhOptions {
  std::size_t steps = 10000;
  std::optional<std::size_t> burn_in;  // default steps / 5
  std::uint64_t seed = 0;
  std::optional<std::vector<double>> initial;  // default prior locations
};

struct Chain {
  std::size_t dimension = 0;
  std::size_t burn_in = 0;
  std::uint64_t seed = 0;
  std::string proposal;
  std::vector<std::vector<double>> samples;  // post burn-in
  std::vector<double> log_post;
  std::vector<unsigned char> accepted;
  double acceptance_rate = 0.0;  // over the recorded steps
};

// One generic MH transition. `propose` fills the candidate; `log_q(from, to)`
// is the log proposal density of `to` given `from` (only differences matter).
struct MhKernel {
  std::function<double(std::span<const double>)> log_target;
  std::function<void(Rng&, std::span<const double>, std::vector<double>&)> propose;
  std::function<double(std::span<const double>, std::span<const double>)> log_q;
};
// Returns true on acceptance; updates state and its log target in place.
bool mh_transition(const MhKernel& kernel, Rng& rng, std::vector<double>& state,
                   double& state_log_target, std::vector<double>& scratch);

Chain mh_sample(const PosteriorSpec& spec, const Proposal& proposal, const MhOptions& options);

std::vector<double> chain_mean(const Chain& chain);
std::vector<double> chain_variance(const Chain& chain);
// Per-component effective sample size (initial positive sequence estimator).
std::vector<double> effective_sample_size(const Chain& chain);

void write_chain_csv(const Chain& chain, std::ostream& out);
nlohmann::json chain_summary(const Chain& chain, const std::string& spec_hash);

}  // namespace qsle

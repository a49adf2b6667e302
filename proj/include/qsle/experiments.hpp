#pragma once

// Experiment drivers: the scalar replicated-observation problem, the
// divergence study on it, and the two-inclusion heat conduction inversion.
// Every function is deterministic in its configuration.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qsle/fem2d.hpp"
#include "qsle/inference.hpp"
#include "qsle/metrics.hpp"
#include "qsle/sle.hpp"

namespace qsle {

inline constexpr const char* kVersion = "0.1.0";

// Observations of the scalar problem.
inline constexpr std::array<double, 10> kOneDData{15.0389, -0.6183, 7.4771, 3.6470, 8.0871,
                                                  13.2434, 14.1286, 4.9253, 7.6447, 10.6851};

struct ClsSettings {
  WeightingScheme scheme = WeightingScheme::Christoffel;
  double oversampling = 4.0;
  LeastSquaresSolver solver = LeastSquaresSolver::Orthogonal;
};

struct McmcSettings {
  std::size_t steps = 20000;
  std::optional<std::size_t> burn_in;  // steps / 5 when unset
  std::string proposal = "independence";  // independence | random_walk | equilibrium
  double step = 0.0;     // random-walk standard deviation; 0 tunes it
  bool run = true;
};

struct OneDSettings {
  std::vector<double> q_values{-0.5, -0.2, 0.0, 0.2, 0.5};
  std::vector<int> n_values{2, 5, 7, 9, 12};
  double c = 4.0;
  double x_true = 10.0;
  double sigma = 5.0;
  double x0 = 11.5;
  int prior_terms = 100;
  std::size_t grid_points = 2000;
  std::string normalization = "quadrature";  // quadrature | monte_carlo
  std::size_t mc_count = 1000000;
  std::size_t histogram_bins = 50;
};

struct ConvergenceSettings {
  std::vector<int> j_values{5, 10, 20, 50, 100};
  // projection: quadrature coefficients, no design noise | cls: as in the table
  std::string coefficients = "projection";
  std::size_t projection_nodes = 512;
};

struct Heat2DSettings {
  int resolution = 32;
  std::vector<double> deltas{0.1, 0.5, 1.0};
  double kappa0 = 15.0;
  std::array<double, 2> kappa_true{32.0, 28.0};
  double q = 0.5;
  double prior_low = 10.0;
  double prior_high = 50.0;
  int sle_degree = 20;
  std::size_t posterior_grid = 121;
  std::optional<std::vector<Point2>> points;  // default jittered 5 x 2 grid
  std::uint64_t points_seed = 0;
};

struct DensityDumpSettings {
  double q = 0.5;
  int terms = 6;
  std::size_t points = 2000;
};

struct ExperimentConfig {
  std::string experiment = "one_d";  // one_d | heat_2d | convergence | density_dump
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  ClsSettings cls;
  McmcSettings mcmc;
  OneDSettings one_d;
  ConvergenceSettings convergence;
  Heat2DSettings heat_2d;
  DensityDumpSettings density_dump;
};

nlohmann::json to_json(const ExperimentConfig& config);
// Defaults fill absent keys; unknown keys and out-of-range values raise
// ConfigError naming the offending key.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string config_hash(const ExperimentConfig& config);

// ---- scalar problem --------------------------------------------------------

QGaussianParams one_d_prior(const OneDSettings& s, double q);
PosteriorSpec one_d_exact_spec(const OneDSettings& s, double q);
SleModel fit_one_d_sle(const OneDSettings& s, const ClsSettings& cls, double q, int degree,
                       std::uint64_t seed);
// Truncated expansion with quadrature-projected coefficients.
SleModel project_one_d_sle(const OneDSettings& s, double q, int degree, std::size_t nodes);
// Surrogate posterior: clamped SLE likelihood, prior factors truncated to
// `prior_terms` series terms when given.
PosteriorSpec one_d_sle_spec(const OneDSettings& s, const SleModel& model,
                             std::optional<int> prior_terms);

// Normalized posterior on a theta-uniform grid over the prior support.
DensityGrid posterior_on_grid(const PosteriorSpec& spec, std::size_t points);
// Same, normalized by an external constant of the prior-averaged likelihood.
DensityGrid posterior_on_grid_with_constant(const PosteriorSpec& spec, std::size_t points,
                                            double normalizer);

struct TableRow {
  double q = 0.0;
  int degree = 0;
  double rel_error = 0.0;
};
std::vector<TableRow> one_d_table(const ExperimentConfig& config);

struct DivergenceRow {
  double q = 0.0;
  int degree = 0;
  double kl = 0.0;    // KL(surrogate || exact)
  double tv = 0.0;
  double hellinger = 0.0;
  double mse = 0.0;   // E(f - f_Lambda)^2 under the prior
};
struct PriorTruncationRow {
  double q = 0.0;
  int degree = 0;
  int terms = 0;
  double kl = 0.0;  // KL(surrogate with truncated prior || surrogate)
};
struct ConvergenceResult {
  std::vector<DivergenceRow> divergences;
  std::vector<PriorTruncationRow> truncation;
};
ConvergenceResult convergence_study(const ExperimentConfig& config);

// ---- heat conduction -------------------------------------------------------

struct HeatSetup {
  HeatProblem problem;
  std::vector<Point2> points;
  std::vector<QGaussianParams> prior;
  std::shared_ptr<HeatForwardModel> forward;
};
HeatSetup make_heat_setup(const Heat2DSettings& s);

struct HeatRun {
  double delta = 0.0;
  Observations data;
  std::optional<SleModel> sle;
  DensityGrid exact_grid;
  DensityGrid sle_grid;
  std::array<double, 2> exact_argmax{};
  std::array<double, 2> sle_argmax{};
  Chain exact_chain;
  Chain sle_chain;
  double exact_step = 0.0;  // tuned random-walk scale
  double sle_step = 0.0;
};
HeatRun run_heat_case(const ExperimentConfig& config, const HeatSetup& setup, double delta,
                      std::uint64_t seed);

// Random-walk MH with a deterministic pilot phase that scales `initial_step` towards
// 30% acceptance.
Chain tuned_random_walk(const PosteriorSpec& spec, double initial_step, const MhOptions& options,
                        double* tuned_step);

// ---- artifacts -------------------------------------------------------------

struct ArtifactSet {
  std::filesystem::path directory;
  std::vector<std::string> files;  // relative names in write order
};

ArtifactSet run_one_d(const ExperimentConfig& config, const std::filesystem::path& out);
ArtifactSet run_convergence(const ExperimentConfig& config, const std::filesystem::path& out);
ArtifactSet run_heat_2d(const ExperimentConfig& config, const std::filesystem::path& out);
ArtifactSet run_density_dump(const ExperimentConfig& config, const std::filesystem::path& out);
ArtifactSet run_experiment(const ExperimentConfig& config, const std::filesystem::path& out);

}  // namespace qsle

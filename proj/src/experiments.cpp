#include "qsle/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qsle/errors.hpp"
#include "qsle/io.hpp"
#include "qsle/random.hpp"

namespace qsle {
namespace {

using nlohmann::json;

ForwardMap replicate(std::size_t n) {
  return [n](std::span<const double> x) { return std::vector<double>(n, x[0]); };
}

// Seed of grid cell (a, b) of an experiment; stable under changes elsewhere in the grid.
std::uint64_t cell_seed(std::uint64_t master, std::size_t a, std::size_t b) {
  return derive_seed(derive_seed(master, a), b);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string spec_fingerprint(const std::string& text) {
  return hex64(fnv1a64(text.data(), text.size()));
}

std::vector<GridAxis> support_axes(const std::vector<QGaussianParams>& prior, std::size_t points) {
  std::vector<GridAxis> axes;
  for (const auto& p : prior) axes.push_back(theta_uniform_axis(p.support(), points));
  return axes;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

std::array<double, 2> grid_point_2d(const DensityGrid& g, std::size_t flat) {
  const std::size_t n1 = g.axes[1].nodes.size();
  return {g.axes[0].nodes[flat / n1], g.axes[1].nodes[flat % n1]};
}

MhOptions chain_options(const McmcSettings& m, std::uint64_t seed) {
  MhOptions o;
  o.steps = m.steps;
  o.burn_in = m.burn_in;
  o.seed = seed;
  return o;
}

Chain run_chain(const PosteriorSpec& spec, const McmcSettings& m, std::uint64_t seed,
                std::optional<std::vector<double>> initial, double default_step, double* step_used) {
  auto options = chain_options(m, seed);
  options.initial = std::move(initial);
  if (step_used) *step_used = 0.0;
  if (m.proposal == "independence") return mh_sample(spec, IndependenceProposal{spec.prior}, options);
  if (m.proposal == "equilibrium") return mh_sample(spec, EquilibriumProposal{}, options);
  if (m.step > 0.0) {
    if (step_used) *step_used = m.step;
    return mh_sample(spec, RandomWalkProposal{std::vector<double>(spec.prior.size(), m.step)},
                     options);
  }
  return tuned_random_walk(spec, default_step, options, step_used);
}

class ArtifactWriter {
 public:
  explicit ArtifactWriter(const std::filesystem::path& dir) {
    set_.directory = dir;
    std::filesystem::create_directories(dir);
  }

  void write(const std::string& name, const std::string& content) {
    const auto path = set_.directory / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    set_.files.push_back(name);
    hashes_.push_back(spec_fingerprint(content));
  }

  void json_file(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  ArtifactSet finish(const ExperimentConfig& config, json seeds) {
    json files = json::array();
    for (std::size_t i = 0; i < set_.files.size(); ++i) {
      files.push_back({{"name", set_.files[i]}, {"fnv1a64", hashes_[i]}});
    }
    json manifest{{"experiment", config.experiment},
                  {"version", kVersion},
                  {"config_hash", config_hash(config)},
                  {"config", to_json(config)},
                  {"seeds", std::move(seeds)},
                  {"files", files}};
    const std::string text = manifest.dump(2) + "\n";
    std::ofstream(set_.directory / "manifest.json", std::ios::binary) << text;
    set_.files.push_back("manifest.json");
    return set_;
  }

 private:
  ArtifactSet set_;
  std::vector<std::string> hashes_;
};

std::string fmt(double v) { return format_double(v); }

Estimate normalizer(const PosteriorSpec& spec, const OneDSettings& s, std::uint64_t seed) {
  if (s.normalization == "monte_carlo") {
    return normalization_constant(spec, MonteCarloMethod{s.mc_count, seed});
  }
  return normalization_constant(spec, QuadratureMethod{s.grid_points});
}

// Densities of the surrogate posteriors on the grid of one table cell.
struct OneDCell {
  SleModel model;
  DensityGrid exact;
  DensityGrid approx;
  double rel_error = 0.0;
};

OneDCell one_d_cell(const ExperimentConfig& config, std::size_t qi, std::size_t ni) {
  const auto& s = config.one_d;
  const double q = s.q_values[qi];
  const int degree = s.n_values[ni];
  const auto seed = cell_seed(config.seed, qi, ni);
  auto model = fit_one_d_sle(s, config.cls, q, degree, derive_seed(seed, 0));
  const auto exact_spec = one_d_exact_spec(s, q);
  const auto sle_spec = one_d_sle_spec(s, model, s.prior_terms);
  OneDCell cell{model, {}, {}, 0.0};
  if (s.normalization == "monte_carlo") {
    cell.exact = posterior_on_grid_with_constant(exact_spec, s.grid_points,
                                                 normalizer(exact_spec, s, derive_seed(seed, 1)).value);
    cell.approx = posterior_on_grid_with_constant(sle_spec, s.grid_points,
                                                  normalizer(sle_spec, s, derive_seed(seed, 2)).value);
  } else {
    cell.exact = posterior_on_grid(exact_spec, s.grid_points);
    cell.approx = posterior_on_grid(sle_spec, s.grid_points);
  }
  cell.rel_error = posterior_relative_error(cell.exact, cell.approx);
  return cell;
}

}  // namespace

// ---- scalar problem --------------------------------------------------------

QGaussianParams one_d_prior(const OneDSettings& s, double q) {
  const double d = s.x0 - s.x_true;
  return QGaussianParams(q, s.x0, s.c * d * d * (1.0 - q) / 4.0);
}

PosteriorSpec one_d_exact_spec(const OneDSettings& s, double q) {
  PosteriorSpec spec;
  spec.prior = {one_d_prior(s, q)};
  spec.likelihood = ExactLikelihood{replicate(kOneDData.size()),
                                    GaussianNoiseModel::isotropic(kOneDData.size(), s.sigma),
                                    std::vector<double>(kOneDData.begin(), kOneDData.end())};
  return spec;
}

SleModel fit_one_d_sle(const OneDSettings& s, const ClsSettings& cls, double q, int degree,
                       std::uint64_t seed) {
  const auto spec = one_d_exact_spec(s, q);
  const auto& lik = std::get<ExactLikelihood>(spec.likelihood);
  const ScalarField target = [&lik](std::span<const double> x) {
    return std::exp(log_likelihood_exact(lik.forward, lik.noise, lik.data, x));
  };
  ClsOptions options;
  options.scheme = cls.scheme;
  options.oversampling = cls.oversampling;
  options.solver = cls.solver;
  options.seed = seed;
  return cls_fit(target, build_index_set(1, TruncationRule::total_degree(degree)), spec.prior,
                 options);
}

SleModel project_one_d_sle(const OneDSettings& s, double q, int degree, std::size_t nodes) {
  const auto spec = one_d_exact_spec(s, q);
  const auto& lik = std::get<ExactLikelihood>(spec.likelihood);
  const ScalarField target = [&lik](std::span<const double> x) {
    return std::exp(log_likelihood_exact(lik.forward, lik.noise, lik.data, x));
  };
  auto set = build_index_set(1, TruncationRule::total_degree(degree));
  auto coeffs = project_coefficients(target, set, spec.prior, nodes);
  return SleModel(std::move(set), spec.prior, std::move(coeffs));
}

PosteriorSpec one_d_sle_spec(const OneDSettings&, const SleModel& model,
                             std::optional<int> prior_terms) {
  PosteriorSpec spec;
  spec.prior = model.prior();
  spec.likelihood = SleLikelihood{model};
  spec.prior_terms = prior_terms;
  return spec;
}

DensityGrid posterior_on_grid(const PosteriorSpec& spec, std::size_t points) {
  return make_density_grid_log(support_axes(spec.prior, points), [&spec](std::span<const double> x) {
    return log_posterior_unnormalized(spec, x);
  });
}

DensityGrid posterior_on_grid_with_constant(const PosteriorSpec& spec, std::size_t points,
                                            double normalizer) {
  if (!(normalizer > 0.0)) throw DomainError("normalization constant must be positive");
  const double log_norm = std::log(normalizer);
  return tabulate(support_axes(spec.prior, points), [&](std::span<const double> x) {
    return std::exp(log_posterior_unnormalized(spec, x) - log_norm);
  });
}

std::vector<TableRow> one_d_table(const ExperimentConfig& config) {
  std::vector<TableRow> rows;
  const auto& s = config.one_d;
  for (std::size_t qi = 0; qi < s.q_values.size(); ++qi) {
    for (std::size_t ni = 0; ni < s.n_values.size(); ++ni) {
      rows.push_back({s.q_values[qi], s.n_values[ni], one_d_cell(config, qi, ni).rel_error});
    }
  }
  return rows;
}

ConvergenceResult convergence_study(const ExperimentConfig& config) {
  ConvergenceResult result;
  const auto& s = config.one_d;
  for (std::size_t qi = 0; qi < s.q_values.size(); ++qi) {
    const double q = s.q_values[qi];
    const auto exact_spec = one_d_exact_spec(s, q);
    const auto exact = posterior_on_grid(exact_spec, s.grid_points);
    const auto& lik = std::get<ExactLikelihood>(exact_spec.likelihood);
    const ScalarField target = [&lik](std::span<const double> x) {
      return std::exp(log_likelihood_exact(lik.forward, lik.noise, lik.data, x));
    };
    for (std::size_t ni = 0; ni < s.n_values.size(); ++ni) {
      const int degree = s.n_values[ni];
      const auto seed = cell_seed(config.seed, qi, ni);
      const auto model =
          config.convergence.coefficients == "cls"
              ? fit_one_d_sle(s, config.cls, q, degree, derive_seed(seed, 0))
              : project_one_d_sle(s, q, degree, config.convergence.projection_nodes);
      const auto surrogate = posterior_on_grid(one_d_sle_spec(s, model, std::nullopt), s.grid_points);
      DivergenceRow row;
      row.q = q;
      row.degree = degree;
      row.kl = kl_divergence(surrogate, exact);
      row.tv = tv_distance(surrogate, exact);
      row.hellinger = hellinger(surrogate, exact);
      row.mse = mean_square_error(model, target, s.grid_points);
      result.divergences.push_back(row);
      for (int terms : config.convergence.j_values) {
        const auto truncated = posterior_on_grid(one_d_sle_spec(s, model, terms), s.grid_points);
        result.truncation.push_back({q, degree, terms, kl_divergence(truncated, surrogate)});
      }
    }
  }
  return result;
}

// ---- heat conduction -------------------------------------------------------

HeatSetup make_heat_setup(const Heat2DSettings& s) {
  HeatSetup setup;
  setup.problem = HeatProblem::standard();
  setup.points = s.points ? *s.points : default_observation_points(s.points_seed);
  const double center = 0.5 * (s.prior_low + s.prior_high);
  const double half = 0.5 * (s.prior_high - s.prior_low);
  // half width 2 sqrt(scale / (1 - q)) equal to `half`
  const double scale = half * half * (1.0 - s.q) / 4.0;
  for (std::size_t i = 0; i < setup.problem.inclusions.size(); ++i) {
    setup.prior.emplace_back(s.q, center, scale);
  }
  setup.forward = std::make_shared<HeatForwardModel>(setup.problem, s.resolution, setup.points,
                                                     s.kappa0);
  return setup;
}

Chain tuned_random_walk(const PosteriorSpec& spec, double initial_step, const MhOptions& options,
                        double* tuned_step) {
  constexpr int kRounds = 8;
  constexpr std::size_t kPilot = 1000;
  double step = initial_step;
  MhOptions pilot;
  pilot.steps = kPilot;
  pilot.burn_in = 0;
  pilot.initial = options.initial;
  for (int round = 0; round < kRounds; ++round) {
    pilot.seed = derive_seed(options.seed, 1000 + round);
    const auto chain =
        mh_sample(spec, RandomWalkProposal{std::vector<double>(spec.prior.size(), step)}, pilot);
    pilot.initial = chain.samples.back();
    const double rate = chain.acceptance_rate;
    if (rate >= 0.2 && rate <= 0.4) break;
    step *= rate <= 0.0 ? 0.2 : std::clamp(rate / 0.3, 0.2, 5.0);
  }
  if (tuned_step) *tuned_step = step;
  MhOptions main = options;
  main.initial = pilot.initial;
  return mh_sample(spec, RandomWalkProposal{std::vector<double>(spec.prior.size(), step)}, main);
}

HeatRun run_heat_case(const ExperimentConfig& config, const HeatSetup& setup, double delta,
                      std::uint64_t seed) {
  const auto& s = config.heat_2d;
  HeatRun run;
  run.delta = delta;
  run.data = make_synthetic_data(setup.problem,
                                 ConductivityField{s.kappa0, {s.kappa_true[0], s.kappa_true[1]}},
                                 setup.points, delta, derive_seed(seed, 0), s.resolution);

  auto forward = setup.forward;
  PosteriorSpec exact;
  exact.prior = setup.prior;
  exact.likelihood = ExactLikelihood{[forward](std::span<const double> k) { return (*forward)(k); },
                                     GaussianNoiseModel::isotropic(setup.points.size(), delta),
                                     run.data.values};
  const auto& lik = std::get<ExactLikelihood>(exact.likelihood);
  const ScalarField target = [&lik](std::span<const double> x) {
    return std::exp(log_likelihood_exact(lik.forward, lik.noise, lik.data, x));
  };
  ClsOptions options;
  options.scheme = config.cls.scheme;
  options.oversampling = config.cls.oversampling;
  options.solver = config.cls.solver;
  options.seed = derive_seed(seed, 1);
  run.sle.emplace(cls_fit(target,
                    build_index_set(setup.prior.size(), TruncationRule::total_degree(s.sle_degree)),
                    setup.prior, options));

  PosteriorSpec surrogate;
  surrogate.prior = setup.prior;
  surrogate.likelihood = SleLikelihood{*run.sle};

  run.exact_grid = posterior_on_grid(exact, s.posterior_grid);
  run.sle_grid = posterior_on_grid(surrogate, s.posterior_grid);
  run.exact_argmax = grid_point_2d(run.exact_grid, argmax(run.exact_grid.values));
  run.sle_argmax = grid_point_2d(run.sle_grid, argmax(run.sle_grid.values));

  if (config.mcmc.run) {
    const double initial_step = 0.05 * (s.prior_high - s.prior_low);
    const std::vector<double> start{run.exact_argmax[0], run.exact_argmax[1]};
    // Component-wise Gaussian random walk regardless of mcmc.proposal.
    auto walk = config.mcmc;
    walk.proposal = "random_walk";
    run.exact_chain =
        run_chain(exact, walk, derive_seed(seed, 2), start, initial_step, &run.exact_step);
    run.sle_chain =
        run_chain(surrogate, walk, derive_seed(seed, 3), start, initial_step, &run.sle_step);
  }
  return run;
}

// ---- artifacts -------------------------------------------------------------

namespace {

std::string density_csv_header() { return "q,N,x,exact,sle\n"; }

json chain_stats(const Chain& chain) {
  const auto mean = chain_mean(chain);
  const auto var = chain_variance(chain);
  const auto ess = effective_sample_size(chain);
  json se = json::array();
  for (std::size_t i = 0; i < mean.size(); ++i) se.push_back(std::sqrt(var[i] / ess[i]));
  return {{"mean", mean}, {"variance", var}, {"ess", ess}, {"mean_std_error", se},
          {"acceptance_rate", chain.acceptance_rate}};
}

std::string chain_text(const Chain& chain) {
  std::ostringstream out;
  write_chain_csv(chain, out);
  return out.str();
}

std::string q_tag(double q) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", q);
  return buf;
}

}  // namespace

ArtifactSet run_one_d(const ExperimentConfig& config, const std::filesystem::path& out) {
  const auto& s = config.one_d;
  ArtifactWriter writer(out);
  std::ostringstream table, metrics, density, histogram;
  table << "q,N,rel_error\n";
  metrics << "q,N,J,metric,value\n";
  density << density_csv_header();
  histogram << "q,chain,bin_lo,bin_hi,frequency,exact_mass\n";
  json seeds = json::array();
  json chains = json::array();

  for (std::size_t qi = 0; qi < s.q_values.size(); ++qi) {
    const double q = s.q_values[qi];
    for (std::size_t ni = 0; ni < s.n_values.size(); ++ni) {
      const auto cell = one_d_cell(config, qi, ni);
      const int n = s.n_values[ni];
      seeds.push_back({{"q", q}, {"N", n}, {"seed", cell_seed(config.seed, qi, ni)}});
      table << fmt(q) << ',' << n << ',' << fmt(cell.rel_error) << '\n';
      metrics << fmt(q) << ',' << n << ',' << s.prior_terms << ",rel_error," << fmt(cell.rel_error)
              << '\n';
      metrics << fmt(q) << ',' << n << ',' << s.prior_terms << ",condition,"
              << fmt(cell.model.report().condition_estimate) << '\n';
      const auto& nodes = cell.exact.axes[0].nodes;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        density << fmt(q) << ',' << n << ',' << fmt(nodes[i]) << ',' << fmt(cell.exact.values[i])
                << ',' << fmt(cell.approx.values[i]) << '\n';
      }
    }

    if (!config.mcmc.run) continue;
    // Histograms of the exact-likelihood chain and of the highest-degree surrogate chain.
    const auto qseed = derive_seed(config.seed, 100000 + qi);
    const auto exact_spec = one_d_exact_spec(s, q);
    const std::size_t top = s.n_values.size() - 1;
    const auto model =
        fit_one_d_sle(s, config.cls, q, s.n_values[top], derive_seed(cell_seed(config.seed, qi, top), 0));
    const auto sle_spec = one_d_sle_spec(s, model, s.prior_terms);
    const auto support = exact_spec.prior[0].support();
    const double step0 = 0.1 * support.width();
    const std::pair<std::string, const PosteriorSpec*> runs[] = {{"exact", &exact_spec},
                                                                 {"sle", &sle_spec}};
    const auto exact_grid = posterior_on_grid(exact_spec, s.grid_points);
    for (std::size_t r = 0; r < 2; ++r) {
      const auto chain = run_chain(*runs[r].second, config.mcmc, derive_seed(qseed, r), std::nullopt,
                                   step0, nullptr);
      const std::string name = "chain_" + runs[r].first + "_q" + q_tag(q) + ".csv";
      writer.write(name, chain_text(chain));
      auto summary = chain_summary(chain, spec_fingerprint(name));
      summary["q"] = q;
      summary["kind"] = runs[r].first;
      summary["stats"] = chain_stats(chain);
      chains.push_back(summary);

      const std::size_t bins = s.histogram_bins;
      std::vector<double> counts(bins, 0.0), mass(bins, 0.0);
      const double w = support.width() / static_cast<double>(bins);
      auto bin_of = [&](double x) {
        return std::min(bins - 1, static_cast<std::size_t>(std::max(0.0, (x - support.lo) / w)));
      };
      for (const auto& x : chain.samples) counts[bin_of(x[0])] += 1.0;
      for (std::size_t i = 0; i < exact_grid.size(); ++i) {
        mass[bin_of(exact_grid.axes[0].nodes[i])] += exact_grid.weights[i] * exact_grid.values[i];
      }
      for (std::size_t b = 0; b < bins; ++b) {
        histogram << fmt(q) << ',' << runs[r].first << ',' << fmt(support.lo + b * w) << ','
                  << fmt(support.lo + (b + 1) * w) << ','
                  << fmt(counts[b] / static_cast<double>(chain.samples.size())) << ','
                  << fmt(mass[b]) << '\n';
      }
    }
  }

  writer.write("table1.csv", table.str());
  writer.write("metrics.csv", metrics.str());
  writer.write("density.csv", density.str());
  if (config.mcmc.run) {
    writer.write("histogram.csv", histogram.str());
    writer.json_file("chains.json", chains);
  }
  return writer.finish(config, seeds);
}

ArtifactSet run_convergence(const ExperimentConfig& config, const std::filesystem::path& out) {
  ArtifactWriter writer(out);
  const auto result = convergence_study(config);
  std::ostringstream kl, prior, metrics;
  kl << "q,N,kl,tv,hell,mse\n";
  prior << "q,N,J,kl\n";
  metrics << "q,N,J,metric,value\n";
  for (const auto& r : result.divergences) {
    kl << fmt(r.q) << ',' << r.degree << ',' << fmt(r.kl) << ',' << fmt(r.tv) << ','
       << fmt(r.hellinger) << ',' << fmt(r.mse) << '\n';
    const std::pair<const char*, double> values[] = {
        {"kl", r.kl}, {"tv", r.tv}, {"hellinger", r.hellinger}, {"mse", r.mse}};
    for (const auto& [name, v] : values) {
      metrics << fmt(r.q) << ',' << r.degree << ",," << name << ',' << fmt(v) << '\n';
    }
  }
  for (const auto& r : result.truncation) {
    prior << fmt(r.q) << ',' << r.degree << ',' << r.terms << ',' << fmt(r.kl) << '\n';
    metrics << fmt(r.q) << ',' << r.degree << ',' << r.terms << ",kl_prior," << fmt(r.kl) << '\n';
  }
  writer.write("kl.csv", kl.str());
  writer.write("kl_prior.csv", prior.str());
  writer.write("metrics.csv", metrics.str());
  json seeds = json::array();
  for (std::size_t qi = 0; qi < config.one_d.q_values.size(); ++qi) {
    for (std::size_t ni = 0; ni < config.one_d.n_values.size(); ++ni) {
      seeds.push_back({{"q", config.one_d.q_values[qi]},
                       {"N", config.one_d.n_values[ni]},
                       {"seed", cell_seed(config.seed, qi, ni)}});
    }
  }
  return writer.finish(config, seeds);
}

ArtifactSet run_heat_2d(const ExperimentConfig& config, const std::filesystem::path& out) {
  const auto& s = config.heat_2d;
  ArtifactWriter writer(out);
  const auto setup = make_heat_setup(s);

  const auto& mesh = setup.forward->mesh();
  auto truth_solution =
      solve(setup.problem, mesh, ConductivityField{s.kappa0, {s.kappa_true[0], s.kappa_true[1]}});
  std::ostringstream nodes, elements;
  write_nodes_csv(mesh, &truth_solution, nodes);
  write_elements_csv(mesh, elements);
  writer.write("mesh_nodes.csv", nodes.str());
  writer.write("mesh_elements.csv", elements.str());

  json seeds = json::array();
  json summary = json::array();
  for (std::size_t di = 0; di < s.deltas.size(); ++di) {
    const double delta = s.deltas[di];
    const auto seed = derive_seed(config.seed, di);
    seeds.push_back({{"delta", delta}, {"seed", seed}});
    const auto run = run_heat_case(config, setup, delta, seed);
    const std::string tag = "_d" + q_tag(delta);

    writer.json_file("observations" + tag + ".json", to_json(run.data));
    std::ostringstream grid;
    grid << "kappa1,kappa2,exact,sle\n";
    for (std::size_t i = 0; i < run.exact_grid.size(); ++i) {
      const auto p = grid_point_2d(run.exact_grid, i);
      grid << fmt(p[0]) << ',' << fmt(p[1]) << ',' << fmt(run.exact_grid.values[i]) << ','
           << fmt(run.sle_grid.values[i]) << '\n';
    }
    writer.write("posterior_grid" + tag + ".csv", grid.str());
    json sle_json;
    to_json(sle_json, *run.sle);
    writer.json_file("sle" + tag + ".json", sle_json);

    json entry{{"delta", delta},
               {"truth", s.kappa_true},
               {"exact_argmax", run.exact_argmax},
               {"sle_argmax", run.sle_argmax},
               {"argmax_relative_error",
                {std::abs(run.exact_argmax[0] - s.kappa_true[0]) / s.kappa_true[0],
                 std::abs(run.exact_argmax[1] - s.kappa_true[1]) / s.kappa_true[1]}},
               {"sle_condition", run.sle->report().condition_estimate}};
    if (config.mcmc.run) {
      writer.write("chain_exact" + tag + ".csv", chain_text(run.exact_chain));
      writer.write("chain_sle" + tag + ".csv", chain_text(run.sle_chain));
      entry["exact_chain"] = chain_stats(run.exact_chain);
      entry["exact_chain"]["step"] = run.exact_step;
      entry["sle_chain"] = chain_stats(run.sle_chain);
      entry["sle_chain"]["step"] = run.sle_step;
    }
    summary.push_back(entry);
  }
  writer.json_file("summary.json", summary);
  return writer.finish(config, seeds);
}

ArtifactSet run_density_dump(const ExperimentConfig& config, const std::filesystem::path& out) {
  const auto& s = config.density_dump;
  ArtifactWriter writer(out);
  const QGaussianParams params(s.q);
  const auto support = params.support();
  const double bound = truncation_bound(s.q, s.terms);
  std::ostringstream csv;
  csv << "x,density,truncated,abs_error,bound\n";
  for (std::size_t i = 0; i < s.points; ++i) {
    const double x = support.lo + support.width() * static_cast<double>(i) /
                                      static_cast<double>(s.points - 1);
    const double f = density(params, x);
    const double fj = density_truncated(params, s.terms, x);
    csv << fmt(x) << ',' << fmt(f) << ',' << fmt(fj) << ',' << fmt(std::abs(f - fj)) << ','
        << fmt(bound) << '\n';
  }
  writer.write("density.csv", csv.str());
  return writer.finish(config, json::array());
}

ArtifactSet run_experiment(const ExperimentConfig& config, const std::filesystem::path& out) {
  if (config.experiment == "one_d") return run_one_d(config, out);
  if (config.experiment == "convergence") return run_convergence(config, out);
  if (config.experiment == "heat_2d") return run_heat_2d(config, out);
  if (config.experiment == "density_dump") return run_density_dump(config, out);
  throw ConfigError("unknown experiment " + config.experiment);
}

}  // namespace qsle

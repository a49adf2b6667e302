#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "qsle/errors.hpp"
#include "qsle/experiments.hpp"
#include "qsle/random.hpp"

namespace qsle {
namespace {

using nlohmann::json;

const char* solver_name(LeastSquaresSolver s) {
  return s == LeastSquaresSolver::Orthogonal ? "orthogonal" : "normal_equations";
}

// Reads the members of one JSON object, rejecting keys it was not asked for.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + " must be an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key " + where(key));
    }
  }

  template <class T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for " + where(key) + ": " + e.what());
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }
  std::string where(const std::string& key = "") const {
    return key.empty() ? (path_.empty() ? std::string("config") : path_)
                       : (path_.empty() ? key : path_ + "." + key);
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_q(double q, const std::string& key) {
  require(q > -1.0 && q < 1.0, key + " must lie in (-1, 1)");
}

}  // namespace

nlohmann::json to_json(const ExperimentConfig& c) {
  json mcmc{{"steps", c.mcmc.steps},
            {"proposal", c.mcmc.proposal},
            {"step", c.mcmc.step},
            {"run", c.mcmc.run}};
  if (c.mcmc.burn_in) mcmc["burn_in"] = *c.mcmc.burn_in;
  json heat{{"resolution", c.heat_2d.resolution},
            {"deltas", c.heat_2d.deltas},
            {"kappa0", c.heat_2d.kappa0},
            {"kappa_true", c.heat_2d.kappa_true},
            {"q", c.heat_2d.q},
            {"prior_low", c.heat_2d.prior_low},
            {"prior_high", c.heat_2d.prior_high},
            {"sle_degree", c.heat_2d.sle_degree},
            {"posterior_grid", c.heat_2d.posterior_grid},
            {"points_seed", c.heat_2d.points_seed}};
  if (c.heat_2d.points) {
    json pts = json::array();
    for (const auto& p : *c.heat_2d.points) pts.push_back({p.x, p.y});
    heat["points"] = pts;
  }
  return {{"experiment", c.experiment},
          {"seed", c.seed},
          {"output_dir", c.output_dir},
          {"cls",
           {{"scheme", to_string(c.cls.scheme)},
            {"oversampling", c.cls.oversampling},
            {"solver", solver_name(c.cls.solver)}}},
          {"mcmc", mcmc},
          {"one_d",
           {{"q_values", c.one_d.q_values},
            {"n_values", c.one_d.n_values},
            {"c", c.one_d.c},
            {"x_true", c.one_d.x_true},
            {"sigma", c.one_d.sigma},
            {"x0", c.one_d.x0},
            {"prior_terms", c.one_d.prior_terms},
            {"grid_points", c.one_d.grid_points},
            {"normalization", c.one_d.normalization},
            {"mc_count", c.one_d.mc_count},
            {"histogram_bins", c.one_d.histogram_bins}}},
          {"convergence",
           {{"j_values", c.convergence.j_values},
            {"coefficients", c.convergence.coefficients},
            {"projection_nodes", c.convergence.projection_nodes}}},
          {"heat_2d", heat},
          {"density_dump",
           {{"q", c.density_dump.q}, {"terms", c.density_dump.terms}, {"points", c.density_dump.points}}}};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  {
    Section root(j, "");
    root.read("experiment", c.experiment);
    root.read("seed", c.seed);
    root.read("output_dir", c.output_dir);
    require(c.experiment == "one_d" || c.experiment == "heat_2d" || c.experiment == "convergence" ||
                c.experiment == "density_dump",
            "experiment must be one of one_d, heat_2d, convergence, density_dump");

    if (root.has("cls")) {
      Section s(root.at("cls"), "cls");
      std::string scheme = to_string(c.cls.scheme);
      std::string solver = solver_name(c.cls.solver);
      s.read("scheme", scheme);
      s.read("oversampling", c.cls.oversampling);
      s.read("solver", solver);
      try {
        c.cls.scheme = weighting_scheme_from_string(scheme);
      } catch (const ArgumentError&) {
        throw ConfigError("cls.scheme must be christoffel, equilibrium_ratio or unweighted");
      }
      require(solver == "orthogonal" || solver == "normal_equations",
              "cls.solver must be orthogonal or normal_equations");
      c.cls.solver = solver == "orthogonal" ? LeastSquaresSolver::Orthogonal
                                            : LeastSquaresSolver::NormalEquations;
      require(c.cls.oversampling >= 1.0, "cls.oversampling must be at least 1");
    }
    if (root.has("mcmc")) {
      Section s(root.at("mcmc"), "mcmc");
      s.read("steps", c.mcmc.steps);
      if (s.has("burn_in")) {
        std::size_t b = 0;
        s.read("burn_in", b);
        c.mcmc.burn_in = b;
      }
      s.read("proposal", c.mcmc.proposal);
      s.read("step", c.mcmc.step);
      s.read("run", c.mcmc.run);
      require(c.mcmc.proposal == "independence" || c.mcmc.proposal == "random_walk" ||
                  c.mcmc.proposal == "equilibrium",
              "mcmc.proposal must be independence, random_walk or equilibrium");
      require(c.mcmc.steps > c.mcmc.burn_in.value_or(c.mcmc.steps / 5),
              "mcmc.steps must exceed mcmc.burn_in");
      require(c.mcmc.step >= 0.0, "mcmc.step must be nonnegative");
    }
    if (root.has("one_d")) {
      Section s(root.at("one_d"), "one_d");
      auto& o = c.one_d;
      s.read("q_values", o.q_values);
      s.read("n_values", o.n_values);
      s.read("c", o.c);
      s.read("x_true", o.x_true);
      s.read("sigma", o.sigma);
      s.read("x0", o.x0);
      s.read("prior_terms", o.prior_terms);
      s.read("grid_points", o.grid_points);
      s.read("normalization", o.normalization);
      s.read("mc_count", o.mc_count);
      s.read("histogram_bins", o.histogram_bins);
      require(!o.q_values.empty(), "one_d.q_values must not be empty");
      for (double q : o.q_values) check_q(q, "one_d.q_values");
      require(!o.n_values.empty(), "one_d.n_values must not be empty");
      for (int n : o.n_values) require(n >= 0, "one_d.n_values must be nonnegative");
      require(o.c > 1.0, "one_d.c must exceed 1");
      require(o.sigma > 0.0, "one_d.sigma must be positive");
      require(o.x0 != o.x_true, "one_d.x0 must differ from one_d.x_true");
      require(o.prior_terms >= 2, "one_d.prior_terms must be at least 2");
      require(o.grid_points >= 10, "one_d.grid_points must be at least 10");
      require(o.normalization == "quadrature" || o.normalization == "monte_carlo",
              "one_d.normalization must be quadrature or monte_carlo");
      require(o.mc_count >= 2, "one_d.mc_count must be at least 2");
      require(o.histogram_bins >= 1, "one_d.histogram_bins must be positive");
    }
    if (root.has("convergence")) {
      Section s(root.at("convergence"), "convergence");
      s.read("j_values", c.convergence.j_values);
      s.read("coefficients", c.convergence.coefficients);
      s.read("projection_nodes", c.convergence.projection_nodes);
      require(c.convergence.coefficients == "projection" || c.convergence.coefficients == "cls",
              "convergence.coefficients must be projection or cls");
      require(c.convergence.projection_nodes >= 16, "convergence.projection_nodes must be at least 16");
      for (int t : c.convergence.j_values) require(t >= 2, "convergence.j_values must be at least 2");
    }
    if (root.has("heat_2d")) {
      Section s(root.at("heat_2d"), "heat_2d");
      auto& h = c.heat_2d;
      s.read("resolution", h.resolution);
      s.read("deltas", h.deltas);
      s.read("kappa0", h.kappa0);
      s.read("kappa_true", h.kappa_true);
      s.read("q", h.q);
      s.read("prior_low", h.prior_low);
      s.read("prior_high", h.prior_high);
      s.read("sle_degree", h.sle_degree);
      s.read("posterior_grid", h.posterior_grid);
      s.read("points_seed", h.points_seed);
      if (s.has("points")) {
        std::vector<std::array<double, 2>> raw;
        s.read("points", raw);
        std::vector<Point2> pts;
        for (const auto& p : raw) pts.push_back({p[0], p[1]});
        require(!pts.empty(), "heat_2d.points must not be empty");
        h.points = pts;
      }
      require(h.resolution >= 8, "heat_2d.resolution must be at least 8");
      require(!h.deltas.empty(), "heat_2d.deltas must not be empty");
      for (double d : h.deltas) require(d > 0.0, "heat_2d.deltas must be positive");
      require(h.kappa0 > 0.0, "heat_2d.kappa0 must be positive");
      check_q(h.q, "heat_2d.q");
      require(h.prior_high > h.prior_low && h.prior_low > 0.0,
              "heat_2d prior interval must be positive and nonempty");
      for (double k : h.kappa_true) {
        require(k > h.prior_low && k < h.prior_high, "heat_2d.kappa_true must lie in the prior interval");
      }
      require(h.sle_degree >= 0, "heat_2d.sle_degree must be nonnegative");
      require(h.posterior_grid >= 5, "heat_2d.posterior_grid must be at least 5");
    }
    if (root.has("density_dump")) {
      Section s(root.at("density_dump"), "density_dump");
      s.read("q", c.density_dump.q);
      s.read("terms", c.density_dump.terms);
      s.read("points", c.density_dump.points);
      check_q(c.density_dump.q, "density_dump.q");
      require(c.density_dump.terms >= 4, "density_dump.terms must be at least 4");
      require(c.density_dump.points >= 2, "density_dump.points must be at least 2");
    }
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string config_hash(const ExperimentConfig& config) {
  const auto text = to_json(config).dump();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(text.data(), text.size())));
  return buf;
}

}  // namespace qsle

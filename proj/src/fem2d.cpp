#include "qsle/fem2d.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <nlohmann/json.hpp>

#include "qsle/errors.hpp"
#include "qsle/io.hpp"
#include "qsle/random.hpp"

namespace qsle {
namespace {

constexpr double kSnapFraction = 0.3;

double cross(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

std::array<double, 3> barycentric(const Mesh& mesh, std::size_t e, Point2 p) {
  const auto& t = mesh.elements[e];
  const Point2 a = mesh.nodes[t[0]];
  const Point2 b = mesh.nodes[t[1]];
  const Point2 c = mesh.nodes[t[2]];
  const double area = cross(a, b, c);
  return {cross(p, b, c) / area, cross(a, p, c) / area, cross(a, b, p) / area};
}

bool inside(const std::array<double, 3>& lambda) {
  constexpr double tol = -1e-12;
  return lambda[0] >= tol && lambda[1] >= tol && lambda[2] >= tol;
}

void validate_geometry(const HeatProblem& problem) {
  if (!(problem.width > 0.0) || !(problem.height > 0.0)) {
    throw GeometryError("domain must have positive width and height");
  }
  for (std::size_t i = 0; i < problem.inclusions.size(); ++i) {
    const auto& d = problem.inclusions[i];
    if (!(d.radius > 0.0)) throw GeometryError("inclusion radius must be positive");
    if (!(d.center.x - d.radius > 0.0 && d.center.x + d.radius < problem.width &&
          d.center.y - d.radius > 0.0 && d.center.y + d.radius < problem.height)) {
      throw GeometryError("inclusion " + std::to_string(i + 1) + " touches the domain boundary");
    }
    for (std::size_t j = 0; j < i; ++j) {
      const auto& o = problem.inclusions[j];
      if (std::hypot(d.center.x - o.center.x, d.center.y - o.center.y) <= d.radius + o.radius) {
        throw GeometryError("inclusions " + std::to_string(j + 1) + " and " +
                            std::to_string(i + 1) + " overlap");
      }
    }
  }
}

}  // namespace

bool Disk::contains(Point2 p) const {
  return std::hypot(p.x - center.x, p.y - center.y) < radius;
}

HeatProblem HeatProblem::with_constant_data(double top, double left, double right, double bottom) {
  HeatProblem p;
  p.inclusions = {Disk{{0.3, 0.3}, 0.1}, Disk{{0.7, 0.3}, 0.1}};
  p.top_temperature = [top](double) { return top; };
  const double width = p.width;
  p.flux = [=](double x, double y) {
    if (y <= 0.0) return bottom;
    if (x <= 0.0) return left;
    if (x >= width) return right;
    return 0.0;
  };
  return p;
}

HeatProblem HeatProblem::standard() { return with_constant_data(200.0, 0.0, 0.0, 2000.0); }

double Mesh::element_area(std::size_t e) const {
  const auto& t = elements[e];
  return 0.5 * cross(nodes[t[0]], nodes[t[1]], nodes[t[2]]);
}

double Mesh::max_element_diameter() const {
  double h = 0.0;
  for (const auto& t : elements) {
    for (int i = 0; i < 3; ++i) {
      const Point2 a = nodes[t[i]];
      const Point2 b = nodes[t[(i + 1) % 3]];
      h = std::max(h, std::hypot(a.x - b.x, a.y - b.y));
    }
  }
  return h;
}

std::pair<int, std::array<double, 3>> Mesh::locate(Point2 p) const {
  const double width = nodes[static_cast<std::size_t>(nx)].x;
  const double height = nodes.back().y;
  const int ci = std::clamp(static_cast<int>(std::floor(p.x / width * nx)), 0, nx - 1);
  const int cj = std::clamp(static_cast<int>(std::floor(p.y / height * ny)), 0, ny - 1);
  for (int dj = -1; dj <= 1; ++dj) {
    for (int di = -1; di <= 1; ++di) {
      const int i = ci + di;
      const int j = cj + dj;
      if (i < 0 || j < 0 || i >= nx || j >= ny) continue;
      for (int k = 0; k < 2; ++k) {
        const auto e = static_cast<std::size_t>(2 * (j * nx + i) + k);
        const auto lambda = barycentric(*this, e, p);
        if (inside(lambda)) return {static_cast<int>(e), lambda};
      }
    }
  }
  for (std::size_t e = 0; e < elements.size(); ++e) {
    const auto lambda = barycentric(*this, e, p);
    if (inside(lambda)) return {static_cast<int>(e), lambda};
  }
  return {-1, {0.0, 0.0, 0.0}};
}

Mesh build_mesh(const HeatProblem& problem, int resolution) {
  if (resolution < 8) throw ArgumentError("mesh resolution must be at least 8 per unit length");
  validate_geometry(problem);

  Mesh mesh;
  mesh.nx = std::max(1, static_cast<int>(std::lround(problem.width * resolution)));
  mesh.ny = std::max(1, static_cast<int>(std::lround(problem.height * resolution)));
  mesh.region_count = static_cast<int>(problem.inclusions.size()) + 1;
  const double hx = problem.width / mesh.nx;
  const double hy = problem.height / mesh.ny;
  const double snap = kSnapFraction * std::min(hx, hy);
  const int stride = mesh.nx + 1;

  mesh.nodes.reserve(static_cast<std::size_t>(stride * (mesh.ny + 1)));
  for (int j = 0; j <= mesh.ny; ++j) {
    for (int i = 0; i <= mesh.nx; ++i) {
      Point2 p{i == mesh.nx ? problem.width : i * hx, j == mesh.ny ? problem.height : j * hy};
      const bool boundary = i == 0 || j == 0 || i == mesh.nx || j == mesh.ny;
      if (!boundary) {
        for (const auto& d : problem.inclusions) {
          const double dx = p.x - d.center.x;
          const double dy = p.y - d.center.y;
          const double r = std::hypot(dx, dy);
          if (r > 0.0 && std::abs(r - d.radius) < snap) {
            p = {d.center.x + d.radius * dx / r, d.center.y + d.radius * dy / r};
            break;
          }
        }
      }
      mesh.nodes.push_back(p);
    }
  }

  for (int j = 0; j < mesh.ny; ++j) {
    for (int i = 0; i < mesh.nx; ++i) {
      const int a = j * stride + i;
      const int b = a + 1;
      const int c = a + stride + 1;
      const int d = a + stride;
      if ((i + j) % 2 == 0) {
        mesh.elements.push_back({a, b, c});
        mesh.elements.push_back({a, c, d});
      } else {
        mesh.elements.push_back({a, b, d});
        mesh.elements.push_back({b, c, d});
      }
    }
  }

  mesh.region.assign(mesh.elements.size(), 0);
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    if (!(mesh.element_area(e) > 0.0)) {
      throw GeometryError("element " + std::to_string(e) + " is inverted after snapping");
    }
    const auto& t = mesh.elements[e];
    const Point2 centroid{(mesh.nodes[t[0]].x + mesh.nodes[t[1]].x + mesh.nodes[t[2]].x) / 3.0,
                          (mesh.nodes[t[0]].y + mesh.nodes[t[1]].y + mesh.nodes[t[2]].y) / 3.0};
    for (std::size_t k = 0; k < problem.inclusions.size(); ++k) {
      if (problem.inclusions[k].contains(centroid)) {
        mesh.region[e] = static_cast<int>(k) + 1;
        break;
      }
    }
  }

  for (int i = 0; i < mesh.nx; ++i) mesh.flux_edges.push_back({i, i + 1});
  for (int j = 0; j < mesh.ny; ++j) {
    mesh.flux_edges.push_back({j * stride, (j + 1) * stride});
    mesh.flux_edges.push_back({j * stride + mesh.nx, (j + 1) * stride + mesh.nx});
  }
  for (int i = 0; i <= mesh.nx; ++i) mesh.dirichlet_nodes.push_back(mesh.ny * stride + i);
  return mesh;
}

struct HeatSolver::Impl {
  HeatProblem problem;
  Mesh mesh;
  std::vector<int> free_index;  // -1 on Dirichlet nodes
  std::vector<double> dirichlet_value;
  Eigen::SparseMatrix<double> matrix;  // union pattern, values overwritten per solve
  std::vector<std::vector<double>> region_values;  // aligned with matrix.valuePtr()
  std::vector<Eigen::VectorXd> region_lift;  // K_r,fd u_d
  Eigen::VectorXd flux_load;
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> factor;
};

HeatSolver::HeatSolver(HeatProblem problem, Mesh mesh) : impl_(std::make_unique<Impl>()) {
  auto& s = *impl_;
  s.problem = std::move(problem);
  s.mesh = std::move(mesh);
  if (s.mesh.dirichlet_nodes.empty() || !s.problem.top_temperature) {
    throw GeometryError("system is singular without Dirichlet data");
  }
  const std::size_t n = s.mesh.nodes.size();
  s.free_index.assign(n, 0);
  s.dirichlet_value.assign(n, 0.0);
  for (int d : s.mesh.dirichlet_nodes) {
    s.free_index[static_cast<std::size_t>(d)] = -1;
    s.dirichlet_value[static_cast<std::size_t>(d)] = s.problem.top_temperature(s.mesh.nodes[d].x);
  }
  int next = 0;
  for (auto& f : s.free_index) {
    if (f == 0) f = next++;
  }
  const auto free_count = static_cast<Eigen::Index>(next);

  const auto regions = static_cast<std::size_t>(s.mesh.region_count);
  std::vector<std::vector<Eigen::Triplet<double>>> triplets(regions);
  s.region_lift.assign(regions, Eigen::VectorXd::Zero(free_count));
  for (std::size_t e = 0; e < s.mesh.elements.size(); ++e) {
    const auto& t = s.mesh.elements[e];
    const auto r = static_cast<std::size_t>(s.mesh.region[e]);
    const double area = s.mesh.element_area(e);
    // Gradients of the barycentric basis functions.
    std::array<double, 3> gx{};
    std::array<double, 3> gy{};
    for (int i = 0; i < 3; ++i) {
      const Point2 b = s.mesh.nodes[t[(i + 1) % 3]];
      const Point2 c = s.mesh.nodes[t[(i + 2) % 3]];
      gx[i] = (b.y - c.y) / (2.0 * area);
      gy[i] = (c.x - b.x) / (2.0 * area);
    }
    for (int i = 0; i < 3; ++i) {
      const int fi = s.free_index[static_cast<std::size_t>(t[i])];
      if (fi < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const double k = area * (gx[i] * gx[j] + gy[i] * gy[j]);
        const int fj = s.free_index[static_cast<std::size_t>(t[j])];
        if (fj >= 0) {
          triplets[r].emplace_back(fi, fj, k);
        } else {
          s.region_lift[r](fi) += k * s.dirichlet_value[static_cast<std::size_t>(t[j])];
        }
      }
    }
  }

  // Every region matrix shares the union pattern so values can be combined
  // directly in the factorized matrix.
  std::vector<Eigen::Triplet<double>> pattern;
  for (const auto& tr : triplets) {
    for (const auto& x : tr) pattern.emplace_back(x.row(), x.col(), 0.0);
  }
  s.matrix.resize(free_count, free_count);
  s.region_values.resize(regions);
  for (std::size_t r = 0; r < regions; ++r) {
    std::vector<Eigen::Triplet<double>> all = pattern;
    all.insert(all.end(), triplets[r].begin(), triplets[r].end());
    Eigen::SparseMatrix<double> m(free_count, free_count);
    m.setFromTriplets(all.begin(), all.end());
    m.makeCompressed();
    if (r == 0) {
      s.matrix = m;
    } else if (m.nonZeros() != s.matrix.nonZeros()) {
      throw GeometryError("inconsistent stiffness sparsity pattern");
    }
    s.region_values[r].assign(m.valuePtr(), m.valuePtr() + m.nonZeros());
  }
  s.factor.analyzePattern(s.matrix);

  s.flux_load = Eigen::VectorXd::Zero(free_count);
  if (s.problem.flux) {
    const double g = 0.5 / std::sqrt(3.0);
    for (const auto& edge : s.mesh.flux_edges) {
      const Point2 a = s.mesh.nodes[edge[0]];
      const Point2 b = s.mesh.nodes[edge[1]];
      const double length = std::hypot(b.x - a.x, b.y - a.y);
      for (double xi : {0.5 - g, 0.5 + g}) {
        const Point2 p{a.x + xi * (b.x - a.x), a.y + xi * (b.y - a.y)};
        const double h = s.problem.flux(p.x, p.y);
        const std::array<double, 2> phi{1.0 - xi, xi};
        for (int k = 0; k < 2; ++k) {
          const int f = s.free_index[static_cast<std::size_t>(edge[k])];
          if (f >= 0) s.flux_load(f) -= 0.5 * length * h * phi[k];
        }
      }
    }
  }
}

HeatSolver::~HeatSolver() = default;
HeatSolver::HeatSolver(HeatSolver&&) noexcept = default;
HeatSolver& HeatSolver::operator=(HeatSolver&&) noexcept = default;

const Mesh& HeatSolver::mesh() const { return impl_->mesh; }
const HeatProblem& HeatSolver::problem() const { return impl_->problem; }

NodalSolution HeatSolver::solve(const ConductivityField& field) {
  auto& s = *impl_;
  if (field.inclusion_kappa.size() + 1 != static_cast<std::size_t>(s.mesh.region_count)) {
    throw ArgumentError("conductivity field does not match the inclusion count");
  }
  std::vector<double> kappa{field.background};
  kappa.insert(kappa.end(), field.inclusion_kappa.begin(), field.inclusion_kappa.end());
  for (double k : kappa) {
    if (!(k > 0.0) || !std::isfinite(k)) throw ArgumentError("conductivities must be positive");
  }

  double* values = s.matrix.valuePtr();
  const auto nnz = static_cast<std::size_t>(s.matrix.nonZeros());
  std::fill(values, values + nnz, 0.0);
  Eigen::VectorXd rhs = s.flux_load;
  for (std::size_t r = 0; r < kappa.size(); ++r) {
    const auto& rv = s.region_values[r];
    for (std::size_t i = 0; i < nnz; ++i) values[i] += kappa[r] * rv[i];
    rhs -= kappa[r] * s.region_lift[r];
  }
  s.factor.factorize(s.matrix);
  if (s.factor.info() != Eigen::Success) {
    throw GeometryError("stiffness matrix is not positive definite");
  }
  const Eigen::VectorXd u = s.factor.solve(rhs);

  NodalSolution out;
  const double scale = std::max(rhs.norm(), (s.matrix * u).norm());
  out.relative_residual = scale > 0.0 ? (s.matrix * u - rhs).norm() / scale : 0.0;
  if (!(out.relative_residual <= 1e-10)) {
    throw GeometryError("linear solve did not reach the residual tolerance");
  }
  out.values.resize(s.mesh.nodes.size());
  for (std::size_t i = 0; i < out.values.size(); ++i) {
    const int f = s.free_index[i];
    out.values[i] = f >= 0 ? u(f) : s.dirichlet_value[i];
  }
  return out;
}

NodalSolution solve(const HeatProblem& problem, const Mesh& mesh, const ConductivityField& field) {
  HeatSolver solver(problem, mesh);
  return solver.solve(field);
}

double interpolate(const Mesh& mesh, const NodalSolution& solution, Point2 p) {
  const auto [e, lambda] = mesh.locate(p);
  if (e < 0) throw ArgumentError("point lies outside the mesh");
  const auto& t = mesh.elements[static_cast<std::size_t>(e)];
  return lambda[0] * solution.values[t[0]] + lambda[1] * solution.values[t[1]] +
         lambda[2] * solution.values[t[2]];
}

HeatForwardModel::HeatForwardModel(HeatProblem problem, int resolution, std::vector<Point2> points,
                                   double background)
    : points_(std::move(points)), background_(background) {
  auto mesh = build_mesh(problem, resolution);
  for (const auto& p : points_) {
    auto loc = mesh.locate(p);
    if (loc.first < 0) throw ArgumentError("observation point lies outside the mesh");
    located_.push_back(loc);
  }
  solver_ = std::make_shared<HeatSolver>(std::move(problem), std::move(mesh));
}

std::vector<double> HeatForwardModel::operator()(std::span<const double> inclusion_kappa) const {
  ConductivityField field{background_, {inclusion_kappa.begin(), inclusion_kappa.end()}};
  const auto solution = solver_->solve(field);
  const auto& mesh = solver_->mesh();
  std::vector<double> out(located_.size());
  for (std::size_t k = 0; k < located_.size(); ++k) {
    const auto& [e, lambda] = located_[k];
    const auto& t = mesh.elements[static_cast<std::size_t>(e)];
    out[k] = lambda[0] * solution.values[t[0]] + lambda[1] * solution.values[t[1]] +
             lambda[2] * solution.values[t[2]];
  }
  return out;
}

std::vector<Point2> default_observation_points(std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point2> points;
  for (double y : {0.15, 0.45}) {
    for (double x : {0.1, 0.3, 0.5, 0.7, 0.9}) {
      const double jx = 0.08 * (rng.uniform() - 0.5);
      const double jy = 0.08 * (rng.uniform() - 0.5);
      points.push_back({x + jx, y + jy});
    }
  }
  return points;
}

Observations make_synthetic_data(const HeatProblem& problem, const ConductivityField& truth,
                                 const std::vector<Point2>& points, double delta,
                                 std::uint64_t seed, int resolution) {
  if (!(delta >= 0.0)) throw ArgumentError("noise level must be nonnegative");
  Observations obs;
  obs.points = points;
  obs.noise_level = delta;
  obs.seed = seed;
  obs.data_resolution = 2 * resolution;
  const auto mesh = build_mesh(problem, obs.data_resolution);
  const auto solution = solve(problem, mesh, truth);
  Rng rng(seed);
  for (const auto& p : points) {
    const double v = interpolate(mesh, solution, p);
    obs.noiseless.push_back(v);
    obs.values.push_back(v + delta * rng.normal());
  }
  return obs;
}

void write_nodes_csv(const Mesh& mesh, const NodalSolution* solution, std::ostream& out) {
  out << (solution ? "node,x,y,u\n" : "node,x,y\n");
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    out << i << ',' << format_double(mesh.nodes[i].x) << ',' << format_double(mesh.nodes[i].y);
    if (solution) out << ',' << format_double(solution->values[i]);
    out << '\n';
  }
}

void write_elements_csv(const Mesh& mesh, std::ostream& out) {
  out << "element,n0,n1,n2,region\n";
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    const auto& t = mesh.elements[e];
    out << e << ',' << t[0] << ',' << t[1] << ',' << t[2] << ',' << mesh.region[e] << '\n';
  }
}

nlohmann::json to_json(const Observations& obs) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : obs.points) points.push_back({p.x, p.y});
  return {{"points", points},
          {"values", obs.values},
          {"noiseless", obs.noiseless},
          {"noise_level", obs.noise_level},
          {"seed", obs.seed},
          {"data_resolution", obs.data_resolution}};
}

}  // namespace qsle

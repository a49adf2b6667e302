#pragma once

// P1 finite elements for -div(kappa grad u) = 0 on a rectangle with circular
// inclusions, Dirichlet data on the top edge and flux data -kappa du/dnu = h
// on the other three edges.

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace qsle {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Point2&) const = default;
};

struct Disk {
  Point2 center;
  double radius = 0.0;
  bool contains(Point2 p) const;
  bool operator==(const Disk&) const = default;
};

struct HeatProblem {
  double width = 1.0;
  double height = 0.6;
  std::vector<Disk> inclusions;
  // u on the top edge, as a function of x.
  std::function<double(double)> top_temperature;
  // h(x, y) on the left, right and bottom edges.
  std::function<double(double, double)> flux;

  // Unit-width, 0.6-high plate with disks at (0.3, 0.3) and (0.7, 0.3) of
  // radius 0.1, u = 200 on top, h = 2000 on the bottom and 0 on the sides.
  static HeatProblem standard();
  // Same plate and disks with constant edge data.
  static HeatProblem with_constant_data(double top, double left, double right, double bottom);
};

struct ConductivityField {
  double background = 1.0;
  std::vector<double> inclusion_kappa;  // aligned with HeatProblem::inclusions
};

struct Mesh {
  std::vector<Point2> nodes;
  std::vector<std::array<int, 3>> elements;  // counter-clockwise
  std::vector<int> region;                    // 0 background, i for inclusion i
  std::vector<std::array<int, 2>> flux_edges;  // boundary segments off the top edge
  std::vector<int> dirichlet_nodes;            // on the top edge
  int nx = 0;
  int ny = 0;
  int region_count = 1;

  double element_area(std::size_t e) const;
  double max_element_diameter() const;
  // Containing element and barycentric coordinates; element < 0 when outside.
  std::pair<int, std::array<double, 3>> locate(Point2 p) const;
};

// Structured grid with `resolution` cells per unit length, each cell split in
// two triangles, nodes near inclusion circles moved radially onto them.
// ArgumentError for resolution < 8, GeometryError for inclusions touching the
// boundary or each other, or for an inverted element after snapping.
Mesh build_mesh(const HeatProblem& problem, int resolution);

struct NodalSolution {
  std::vector<double> values;
  double relative_residual = 0.0;
};

// Assembly and factorization workspace for one mesh; only kappa varies
// between solves. Not safe for concurrent use.
class HeatSolver {
 public:
  HeatSolver(HeatProblem problem, Mesh mesh);
  ~HeatSolver();
  HeatSolver(HeatSolver&&) noexcept;
  HeatSolver& operator=(HeatSolver&&) noexcept;

  const Mesh& mesh() const;
  const HeatProblem& problem() const;
  NodalSolution solve(const ConductivityField& field);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

NodalSolution solve(const HeatProblem& problem, const Mesh& mesh, const ConductivityField& field);

// Piecewise-linear interpolation of a nodal solution; ArgumentError outside.
double interpolate(const Mesh& mesh, const NodalSolution& solution, Point2 p);

// (kappa_1, ..., kappa_k) -> solution at fixed points, background fixed.
class HeatForwardModel {
 public:
  HeatForwardModel(HeatProblem problem, int resolution, std::vector<Point2> points,
                   double background);

  std::size_t output_dimension() const { return points_.size(); }
  const std::vector<Point2>& points() const { return points_; }
  const Mesh& mesh() const { return solver_->mesh(); }
  std::vector<double> operator()(std::span<const double> inclusion_kappa) const;

 private:
  std::shared_ptr<HeatSolver> solver_;
  std::vector<Point2> points_;
  std::vector<std::pair<int, std::array<double, 3>>> located_;
  double background_;
};

// Ten points on a 5 x 2 grid, x in {0.1, .., 0.9}, y in {0.15, 0.45}, each
// jittered uniformly within +-0.04 from a generator seeded with `seed`.
std::vector<Point2> default_observation_points(std::uint64_t seed = 0);

struct Observations {
  std::vector<Point2> points;
  std::vector<double> values;
  std::vector<double> noiseless;
  double noise_level = 0.0;
  std::uint64_t seed = 0;
  int data_resolution = 0;
};

// Solves at the truth on a mesh of 2 * `resolution`, then adds N(0, delta^2).
Observations make_synthetic_data(const HeatProblem& problem, const ConductivityField& truth,
                                 const std::vector<Point2>& points, double delta,
                                 std::uint64_t seed, int resolution);

void write_nodes_csv(const Mesh& mesh, const NodalSolution* solution, std::ostream& out);
void write_elements_csv(const Mesh& mesh, std::ostream& out);
nlohmann::json to_json(const Observations& obs);

}  // namespace qsle

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qsle/errors.hpp"
#include "qsle/fem2d.hpp"
#include "fem_oracles.hpp"

using namespace qsle;

using namespace qsle::fem_oracle;

TEST_CASE("mesh without inclusions") {
  auto problem = HeatProblem::standard();
  problem.inclusions.clear();
  const auto mesh = build_mesh(problem, 16);
  CHECK(mesh.nx == 16);
  CHECK(mesh.ny == 10);
  CHECK(mesh.nodes.size() == 17u * 11u);
  CHECK(mesh.elements.size() == 2u * 16u * 10u);
  std::set<std::pair<int, int>> edges;
  for (const auto& t : mesh.elements) {
    for (int i = 0; i < 3; ++i) {
      const int a = t[i];
      const int b = t[(i + 1) % 3];
      edges.insert({std::min(a, b), std::max(a, b)});
    }
  }
  const auto v = static_cast<long>(mesh.nodes.size());
  const auto e = static_cast<long>(edges.size());
  const auto f = static_cast<long>(mesh.elements.size());
  CHECK(v - e + f == 1);
  double area = 0.0;
  for (std::size_t k = 0; k < mesh.elements.size(); ++k) area += mesh.element_area(k);
  CHECK(area == doctest::Approx(0.6).epsilon(1e-14));
  for (int r : mesh.region) CHECK(r == 0);
  CHECK(mesh.dirichlet_nodes.size() == 17u);
  CHECK(mesh.flux_edges.size() == 16u + 2u * 10u);
}

TEST_CASE("mesh with inclusions") {
  const auto problem = HeatProblem::standard();
  const auto coarse = build_mesh(problem, 16);
  const auto mesh = build_mesh(problem, 32);
  const double ratio = static_cast<double>(mesh.elements.size()) / coarse.elements.size();
  CHECK(ratio > 3.6);
  CHECK(ratio < 4.4);
  std::array<int, 3> counts{};
  double area = 0.0;
  for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
    CHECK(mesh.element_area(e) > 0.0);
    area += mesh.element_area(e);
    const auto& t = mesh.elements[e];
    const Point2 c{(mesh.nodes[t[0]].x + mesh.nodes[t[1]].x + mesh.nodes[t[2]].x) / 3.0,
                   (mesh.nodes[t[0]].y + mesh.nodes[t[1]].y + mesh.nodes[t[2]].y) / 3.0};
    int expected = 0;
    if (std::hypot(c.x - 0.3, c.y - 0.3) < 0.1) expected = 1;
    if (std::hypot(c.x - 0.7, c.y - 0.3) < 0.1) expected = 2;
    CHECK(mesh.region[e] == expected);
    ++counts[static_cast<std::size_t>(mesh.region[e])];
  }
  CHECK(area == doctest::Approx(0.6).epsilon(1e-13));
  // Region areas approach the disk area under refinement.
  for (int r = 1; r <= 2; ++r) {
    double region_area = 0.0;
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
      if (mesh.region[e] == r) region_area += mesh.element_area(e);
    }
    CHECK(std::abs(region_area - kPi * 0.01) < 0.1 * kPi * 0.01);
  }
  // Nodes on the circles after snapping.
  int on_circle = 0;
  for (const auto& p : mesh.nodes) {
    if (std::abs(std::hypot(p.x - 0.3, p.y - 0.3) - 0.1) < 1e-12) ++on_circle;
  }
  CHECK(on_circle >= 6);
  CHECK(mesh.max_element_diameter() < 2.0 / 32.0);
  const auto again = build_mesh(problem, 32);
  CHECK(again.nodes == mesh.nodes);
}

TEST_CASE("mesh errors") {
  auto problem = HeatProblem::standard();
  CHECK_THROWS_AS(build_mesh(problem, 7), ArgumentError);
  problem.inclusions[0] = Disk{{0.05, 0.3}, 0.1};
  CHECK_THROWS_AS(build_mesh(problem, 16), GeometryError);
  problem.inclusions[0] = Disk{{0.55, 0.3}, 0.1};
  CHECK_THROWS_AS(build_mesh(problem, 16), GeometryError);
  problem.inclusions[0] = Disk{{0.3, 0.3}, -0.1};
  CHECK_THROWS_AS(build_mesh(problem, 16), GeometryError);
}

TEST_CASE("uniform conductivity reproduces the linear profile") {
  const auto problem = HeatProblem::standard();
  for (double kappa : {15.0, 40.0}) {
    for (int res : {16, 32, 64}) {
      const auto mesh = build_mesh(problem, res);
      const auto s = solve(problem, mesh, ConductivityField{kappa, {kappa, kappa}});
      CHECK(s.relative_residual <= 1e-10);
      CHECK(nodal_max_error(mesh, s, [&](Point2 p) { return linear_profile(kappa, p); }) < 1e-9);
    }
  }
}

TEST_CASE("second-order convergence on a harmonic perturbation") {
  const double kappa = 15.0;
  const double amplitude = 5.0;
  const auto problem = harmonic_problem(kappa, amplitude);
  auto exact = [&](Point2 p) { return harmonic_solution(kappa, amplitude, p); };
  std::vector<double> l2;
  std::vector<double> nodal;
  for (int res : {16, 32, 64}) {
    const auto mesh = build_mesh(problem, res);
    const auto s = solve(problem, mesh, ConductivityField{kappa, {kappa, kappa}});
    l2.push_back(l2_error(mesh, s, exact));
    nodal.push_back(nodal_max_error(mesh, s, exact));
  }
  for (std::size_t i = 1; i < l2.size(); ++i) {
    const double order = std::log2(l2[i - 1] / l2[i]);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
    CHECK(std::log2(nodal[i - 1] / nodal[i]) >= 1.8);
  }
}

TEST_CASE("constant data gives a constant solution") {
  const auto problem = HeatProblem::with_constant_data(200.0, 0.0, 0.0, 0.0);
  const auto mesh = build_mesh(problem, 16);
  const auto s = solve(problem, mesh, ConductivityField{15.0, {32.0, 28.0}});
  for (double v : s.values) CHECK(v == doctest::Approx(200.0).epsilon(1e-12));
}

TEST_CASE("standard problem solution shape") {
  const auto problem = HeatProblem::standard();
  const auto mesh = build_mesh(problem, 32);
  const auto s = solve(problem, mesh, ConductivityField{15.0, {32.0, 28.0}});
  // Between the disks the temperature rises towards 200 at the top.
  double previous = interpolate(mesh, s, {0.5, 0.0});
  for (int k = 1; k <= 12; ++k) {
    const double v = interpolate(mesh, s, {0.5, 0.05 * k});
    CHECK(v > previous);
    previous = v;
  }
  CHECK(interpolate(mesh, s, {0.5, 0.6}) == doctest::Approx(200.0).epsilon(1e-14));
  // Conductive disks flatten the profile compared with the uniform case.
  const auto uniform = solve(problem, mesh, ConductivityField{15.0, {15.0, 15.0}});
  CHECK(interpolate(mesh, s, {0.3, 0.0}) > interpolate(mesh, uniform, {0.3, 0.0}));
  CHECK_THROWS_AS(interpolate(mesh, s, {1.5, 0.3}), ArgumentError);
  CHECK_THROWS_AS(solve(problem, mesh, ConductivityField{15.0, {32.0}}), ArgumentError);
  CHECK_THROWS_AS(solve(problem, mesh, ConductivityField{15.0, {32.0, -1.0}}), ArgumentError);
}

TEST_CASE("forward model") {
  const auto points = default_observation_points(0);
  REQUIRE(points.size() == 10);
  for (const auto& p : points) {
    CHECK(p.x > 0.0);
    CHECK(p.x < 1.0);
    CHECK(p.y > 0.0);
    CHECK(p.y < 0.6);
  }
  CHECK(default_observation_points(0) == points);

  const HeatForwardModel model(HeatProblem::standard(), 32, points, 15.0);
  const std::vector<double> uniform{15.0, 15.0};
  const auto out = model(uniform);
  for (std::size_t k = 0; k < points.size(); ++k) {
    CHECK(out[k] == doctest::Approx(linear_profile(15.0, points[k])).epsilon(1e-11));
  }

  const std::vector<double> base{32.0, 28.0};
  const std::vector<double> nudged{32.0 + 1e-6, 28.0};
  const auto a = model(base);
  const auto b = model(nudged);
  double change = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) change = std::max(change, std::abs(a[k] - b[k]));
  CHECK(change > 0.0);
  CHECK(change < 1e-4);

  // Smooth response in kappa_1: no jump exceeds ten times its neighbours.
  std::vector<double> probe;
  for (int i = 0; i <= 20; ++i) {
    const std::vector<double> k{32.0 + 1e-3 * i, 28.0};
    probe.push_back(model(k)[0]);
  }
  for (std::size_t i = 1; i + 1 < probe.size(); ++i) {
    const double here = std::abs(probe[i + 1] - probe[i]);
    const double before = std::abs(probe[i] - probe[i - 1]);
    CHECK(here <= 10.0 * before + 1e-12);
  }

  const std::vector<Point2> bad{{1.2, 0.3}};
  CHECK_THROWS_AS(HeatForwardModel(HeatProblem::standard(), 16, bad, 15.0), ArgumentError);
}

TEST_CASE("synthetic data") {
  const auto problem = HeatProblem::standard();
  const auto points = default_observation_points(0);
  const ConductivityField truth{15.0, {32.0, 28.0}};
  const auto clean = make_synthetic_data(problem, truth, points, 0.0, 3, 16);
  CHECK(clean.data_resolution == 32);
  CHECK(clean.values == clean.noiseless);
  const HeatForwardModel fine(problem, 32, points, 15.0);
  const std::vector<double> k{32.0, 28.0};
  CHECK(fine(k) == clean.values);

  const auto noisy = make_synthetic_data(problem, truth, points, 0.1, 3, 16);
  CHECK(noisy.noiseless == clean.noiseless);
  double max_diff = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    max_diff = std::max(max_diff, std::abs(noisy.values[i] - noisy.noiseless[i]));
  }
  CHECK(max_diff > 0.0);
  CHECK(max_diff <= 0.5);
  CHECK(make_synthetic_data(problem, truth, points, 0.1, 3, 16).values == noisy.values);
  CHECK(make_synthetic_data(problem, truth, points, 0.1, 4, 16).values != noisy.values);
  CHECK_THROWS_AS(make_synthetic_data(problem, truth, points, -1.0, 3, 16), ArgumentError);

  const auto j = to_json(noisy);
  CHECK(j.at("points").size() == 10);
  CHECK(j.at("noise_level") == 0.1);
}

TEST_CASE("exports") {
  auto problem = HeatProblem::standard();
  const auto mesh = build_mesh(problem, 8);
  const auto s = solve(problem, mesh, ConductivityField{15.0, {32.0, 28.0}});
  std::ostringstream nodes;
  write_nodes_csv(mesh, &s, nodes);
  CHECK(nodes.str().rfind("node,x,y,u\n0,0,0,", 0) == 0);
  std::ostringstream elements;
  write_elements_csv(mesh, elements);
  CHECK(elements.str().rfind("element,n0,n1,n2,region\n0,0,1,10,0\n", 0) == 0);
}

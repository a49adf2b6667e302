#pragma once

// Discrepancies between densities tabulated on a shared tensor grid.

#include <functional>
#include <span>
#include <vector>

#include "qsle/qgauss.hpp"

namespace qsle {

struct GridAxis {
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // Lebesgue quadrature weights
};

// Nodes center + r cos(theta_i) with theta_i = (i + 1/2) pi / n, listed in
// increasing order; midpoint rule in theta.
GridAxis theta_uniform_axis(const Interval& interval, std::size_t count);

// Tensor grid, last axis fastest. `values` are whatever the producer stored;
// the factory functions below normalize them.
struct DensityGrid {
  std::vector<GridAxis> axes;
  std::vector<double> weights;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double total_mass() const;
};

using DensityFunction = std::function<double(std::span<const double>)>;

// Tabulates an unnormalized density and rescales it to unit mass.
DensityGrid make_density_grid(std::vector<GridAxis> axes, const DensityFunction& density);
// Same from a log density; values are shifted by the maximum before
// exponentiation so that tiny likelihoods do not underflow.
DensityGrid make_density_grid_log(std::vector<GridAxis> axes, const DensityFunction& log_density);
// Tabulates without normalizing.
DensityGrid tabulate(std::vector<GridAxis> axes, const DensityFunction& function);

bool same_grid(const DensityGrid& a, const DensityGrid& b);

// int p log(p / r); +infinity when r = 0 somewhere p > 0.
double kl_divergence(const DensityGrid& p, const DensityGrid& r);
double tv_distance(const DensityGrid& p, const DensityGrid& r);
double hellinger(const DensityGrid& p, const DensityGrid& r);
// ||e - a||_w / ||e||_w on the stored values. DomainError for zero exact norm.
double posterior_relative_error(const DensityGrid& exact, const DensityGrid& approx);

}  // namespace qsle

#include "qsle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qsle/errors.hpp"

namespace qsle {
namespace {

void check_shared(const DensityGrid& a, const DensityGrid& b) {
  if (!same_grid(a, b)) throw ArgumentError("densities are tabulated on different grids");
}

// Visits every tensor point with its flattened index and combined weight.
template <class Visit>
void for_each_point(const std::vector<GridAxis>& axes, Visit&& visit) {
  const std::size_t dim = axes.size();
  if (dim == 0) throw ArgumentError("grid needs at least one axis");
  std::vector<std::size_t> idx(dim, 0);
  std::vector<double> x(dim);
  std::size_t flat = 0;
  while (true) {
    double w = 1.0;
    for (std::size_t d = 0; d < dim; ++d) {
      x[d] = axes[d].nodes[idx[d]];
      w *= axes[d].weights[idx[d]];
    }
    visit(flat++, std::span<const double>(x), w);
    std::size_t d = dim;
    while (d > 0) {
      --d;
      if (++idx[d] < axes[d].nodes.size()) break;
      idx[d] = 0;
      if (d == 0) return;
    }
  }
}

std::size_t point_count(const std::vector<GridAxis>& axes) {
  std::size_t n = 1;
  for (const auto& a : axes) {
    if (a.nodes.empty() || a.nodes.size() != a.weights.size()) {
      throw ArgumentError("grid axis is empty or has mismatched weights");
    }
    n *= a.nodes.size();
  }
  return n;
}

void normalize(DensityGrid& g) {
  const double mass = g.total_mass();
  if (!(mass > 0.0) || !std::isfinite(mass)) throw DomainError("density has no finite positive mass");
  for (auto& v : g.values) v /= mass;
}

}  // namespace

GridAxis theta_uniform_axis(const Interval& interval, std::size_t count) {
  if (count == 0) throw ArgumentError("grid needs at least one node");
  if (!(interval.hi > interval.lo)) throw ArgumentError("grid interval is empty");
  GridAxis axis;
  axis.nodes.resize(count);
  axis.weights.resize(count);
  const double r = interval.width() / 2.0;
  const double step = std::numbers::pi / static_cast<double>(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Increasing order: theta decreasing from near pi.
    const double theta = std::numbers::pi - (static_cast<double>(i) + 0.5) * step;
    axis.nodes[i] = interval.center() + r * std::cos(theta);
    axis.weights[i] = r * std::sin(theta) * step;
  }
  return axis;
}

double DensityGrid::total_mass() const {
  double s = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) s += weights[i] * values[i];
  return s;
}

DensityGrid tabulate(std::vector<GridAxis> axes, const DensityFunction& function) {
  DensityGrid g;
  const std::size_t n = point_count(axes);
  g.weights.resize(n);
  g.values.resize(n);
  for_each_point(axes, [&](std::size_t i, std::span<const double> x, double w) {
    g.weights[i] = w;
    g.values[i] = function(x);
  });
  g.axes = std::move(axes);
  return g;
}

DensityGrid make_density_grid(std::vector<GridAxis> axes, const DensityFunction& density) {
  auto g = tabulate(std::move(axes), density);
  for (double v : g.values) {
    if (!(v >= 0.0)) throw DomainError("density values must be nonnegative");
  }
  normalize(g);
  return g;
}

DensityGrid make_density_grid_log(std::vector<GridAxis> axes, const DensityFunction& log_density) {
  auto g = tabulate(std::move(axes), log_density);
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : g.values) {
    if (std::isnan(v)) throw DomainError("log density is NaN");
    peak = std::max(peak, v);
  }
  if (!std::isfinite(peak)) throw DomainError("log density has no finite maximum");
  for (auto& v : g.values) v = std::exp(v - peak);
  normalize(g);
  return g;
}

bool same_grid(const DensityGrid& a, const DensityGrid& b) {
  if (a.axes.size() != b.axes.size() || a.values.size() != b.values.size()) return false;
  for (std::size_t d = 0; d < a.axes.size(); ++d) {
    if (a.axes[d].nodes != b.axes[d].nodes || a.axes[d].weights != b.axes[d].weights) return false;
  }
  return true;
}

double kl_divergence(const DensityGrid& p, const DensityGrid& r) {
  check_shared(p, r);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p.values[i];
    if (a <= 0.0) continue;
    const double b = r.values[i];
    if (b <= 0.0) return std::numeric_limits<double>::infinity();
    s += p.weights[i] * a * std::log(a / b);
  }
  return std::max(s, 0.0);
}

double tv_distance(const DensityGrid& p, const DensityGrid& r) {
  check_shared(p, r);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p.weights[i] * std::abs(p.values[i] - r.values[i]);
  return std::min(1.0, 0.5 * s);
}

double hellinger(const DensityGrid& p, const DensityGrid& r) {
  check_shared(p, r);
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p.values[i]) - std::sqrt(r.values[i]);
    s += p.weights[i] * d * d;
  }
  return std::sqrt(std::min(1.0, 0.5 * s));
}

double posterior_relative_error(const DensityGrid& exact, const DensityGrid& approx) {
  check_shared(exact, approx);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < exact.size(); ++i) {
    const double d = exact.values[i] - approx.values[i];
    num += exact.weights[i] * d * d;
    den += exact.weights[i] * exact.values[i] * exact.values[i];
  }
  if (!(den > 0.0)) throw DomainError("exact density has zero norm on the grid");
  return std::sqrt(num / den);
}

}  // namespace qsle

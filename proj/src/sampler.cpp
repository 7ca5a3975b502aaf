#include "rpde/sampler.hpp"

#include <cmath>
#include <numbers>

#include "rpde/errors.hpp"

namespace rpde {

DomainSpec DomainSpec::interval(double lo, double hi, std::optional<double> horizon) {
  DomainSpec d;
  d.geometry = Geometry::interval;
  d.lo = lo;
  d.hi = hi;
  d.time_horizon = horizon;
  d.validate();
  return d;
}

DomainSpec DomainSpec::square(double lo, double hi) {
  DomainSpec d;
  d.geometry = Geometry::square;
  d.lo = lo;
  d.hi = hi;
  d.validate();
  return d;
}

DomainSpec DomainSpec::square_with_hole(double lo, double hi, double radius) {
  DomainSpec d;
  d.geometry = Geometry::square_with_hole;
  d.lo = lo;
  d.hi = hi;
  d.hole_center = {0.5 * (lo + hi), 0.5 * (lo + hi)};
  d.hole_radius = radius;
  d.validate();
  return d;
}

void DomainSpec::validate() const {
  if (!(hi > lo)) throw ConfigError("domain upper bound must exceed lower bound");
  if (time_horizon && !(*time_horizon > 0.0)) throw ConfigError("time horizon T must be positive");
  if (geometry == Geometry::square_with_hole) {
    if (!(hole_radius > 0.0)) throw ConfigError("hole radius must be positive");
    const double half = 0.5 * (hi - lo);
    if (!(hole_radius < half)) throw ConfigError("hole radius must be smaller than half the square side");
  }
}

double DomainSpec::hole_perimeter() const {
  return geometry == Geometry::square_with_hole ? 2.0 * std::numbers::pi * hole_radius : 0.0;
}

double DomainSpec::volume() const {
  const double side = hi - lo;
  switch (geometry) {
    case Geometry::interval: return side;
    case Geometry::square: return side * side;
    case Geometry::square_with_hole: return side * side - std::numbers::pi * hole_radius * hole_radius;
  }
  return 0.0;
}

double DomainSpec::boundary_measure() const {
  if (geometry == Geometry::interval) return 2.0;
  return 4.0 * (hi - lo) + hole_perimeter();
}

bool DomainSpec::contains(std::span<const double> x) const {
  for (int k = 0; k < spatial_dim(); ++k) {
    if (x[static_cast<std::size_t>(k)] < lo || x[static_cast<std::size_t>(k)] > hi) return false;
  }
  if (geometry == Geometry::square_with_hole) {
    const double dx = x[0] - hole_center[0];
    const double dy = x[1] - hole_center[1];
    if (dx * dx + dy * dy < hole_radius * hole_radius) return false;
  }
  return true;
}

bool DomainSpec::on_boundary(std::span<const double> x, double tol) const {
  if (!contains(x)) {
    // Points a hair inside the hole still count as on the rim.
    if (geometry != Geometry::square_with_hole) return false;
  }
  bool on_edge = false;
  for (int k = 0; k < spatial_dim(); ++k) {
    const double c = x[static_cast<std::size_t>(k)];
    if (std::abs(c - lo) <= tol || std::abs(c - hi) <= tol) on_edge = true;
  }
  if (on_edge) return true;
  if (geometry == Geometry::square_with_hole) {
    const double r = std::hypot(x[0] - hole_center[0], x[1] - hole_center[1]);
    return std::abs(r - hole_radius) <= tol;
  }
  return false;
}

void SampleBatch::interior_input(int j, std::span<double> out) const {
  std::size_t k = 0;
  const auto jj = static_cast<std::size_t>(j);
  if (transient()) out[k++] = t[jj];
  for (int s = 0; s < spatial_dim; ++s) out[k++] = x[jj * static_cast<std::size_t>(spatial_dim) + static_cast<std::size_t>(s)];
  for (int m = 0; m < d; ++m) out[k++] = p[jj * static_cast<std::size_t>(d) + static_cast<std::size_t>(m)];
}

void SampleBatch::boundary_input(int j, std::span<double> out) const {
  std::size_t k = 0;
  const auto jj = static_cast<std::size_t>(j);
  if (transient()) out[k++] = t[jj];
  for (int s = 0; s < spatial_dim; ++s) {
    out[k++] = boundary_x[jj * static_cast<std::size_t>(spatial_dim) + static_cast<std::size_t>(s)];
  }
  for (int m = 0; m < d; ++m) out[k++] = p[jj * static_cast<std::size_t>(d) + static_cast<std::size_t>(m)];
}

void SampleBatch::initial_input(int j, std::span<double> out) const {
  interior_input(j, out);
  out[0] = 0.0;
}

ParamDistribution parse_param_distribution(const std::string& tag) {
  if (tag == "uniform01") return ParamDistribution::uniform01;
  throw UsageError("unknown parameter distribution '" + tag + "'");
}

std::vector<double> sample_params(int n, int d, ParamDistribution dist, RandomStream& rng) {
  if (n < 0 || d < 0) throw UsageError("sample_params: negative count");
  std::vector<double> p(static_cast<std::size_t>(n) * static_cast<std::size_t>(d));
  switch (dist) {
    case ParamDistribution::uniform01:
      for (double& v : p) v = rng.uniform();
      break;
  }
  return p;
}

SampleBatch sample_interior(int n, const DomainSpec& dom, int d, RandomStream& rng) {
  if (n < 1) throw UsageError("sample_interior: batch size must be >= 1");
  SampleBatch batch;
  batch.n = n;
  batch.spatial_dim = dom.spatial_dim();
  batch.d = d;
  if (dom.transient()) {
    batch.t.resize(static_cast<std::size_t>(n));
    for (double& t : batch.t) t = rng.uniform(0.0, *dom.time_horizon);
  }
  batch.x.reserve(static_cast<std::size_t>(n * batch.spatial_dim));
  if (dom.geometry == Geometry::interval) {
    for (int j = 0; j < n; ++j) batch.x.push_back(rng.uniform(dom.lo, dom.hi));
  } else {
    long attempts = 0;
    long accepted = 0;
    const double r2 = dom.hole_radius * dom.hole_radius;
    while (accepted < n) {
      const double x = rng.uniform(dom.lo, dom.hi);
      const double y = rng.uniform(dom.lo, dom.hi);
      ++attempts;
      const double dx = x - dom.hole_center[0];
      const double dy = y - dom.hole_center[1];
      if (dom.geometry == Geometry::square || dx * dx + dy * dy > r2) {
        batch.x.push_back(x);
        batch.x.push_back(y);
        ++accepted;
      }
      if (attempts >= 100 && 10 * accepted < attempts) {
        throw ConfigError("interior rejection sampling acceptance below 10%; the domain geometry is degenerate");
      }
    }
  }
  batch.p = sample_params(n, d, ParamDistribution::uniform01, rng);
  return batch;
}

std::vector<double> sample_boundary(int n, const DomainSpec& dom, RandomStream& rng) {
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(n * dom.spatial_dim()));
  const double side = dom.hi - dom.lo;
  for (int j = 0; j < n; ++j) {
    if (dom.geometry == Geometry::interval) {
      pts.push_back(rng.uniform() < 0.5 ? dom.lo : dom.hi);
      continue;
    }
    const double total = dom.boundary_measure();
    const double s = rng.uniform() * total;
    const double outer = 4.0 * side;
    if (s < outer) {
      const int edge = static_cast<int>(s / side);
      const double u = dom.lo + (s - edge * side);
      switch (edge) {
        case 0: pts.push_back(u); pts.push_back(dom.lo); break;
        case 1: pts.push_back(dom.hi); pts.push_back(u); break;
        case 2: pts.push_back(u); pts.push_back(dom.hi); break;
        default: pts.push_back(dom.lo); pts.push_back(u); break;
      }
    } else {
      const double phi = (s - outer) / dom.hole_radius;
      pts.push_back(dom.hole_center[0] + dom.hole_radius * std::cos(phi));
      pts.push_back(dom.hole_center[1] + dom.hole_radius * std::sin(phi));
    }
  }
  return pts;
}

SampleBatch sample_training_batch(int n, const DomainSpec& dom, int d, bool with_boundary, bool with_initial,
                                  RandomStream& rng) {
  SampleBatch batch = sample_interior(n, dom, d, rng);
  if (with_boundary) batch.boundary_x = sample_boundary(n, dom, rng);
  batch.has_initial = with_initial && dom.transient();
  return batch;
}

}  // namespace rpde

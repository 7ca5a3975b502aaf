#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpde/rng.hpp"

namespace rpde {

enum class Geometry { interval, square, square_with_hole };

/// Spatial domain D (optionally with a time horizon [0, T]).
struct DomainSpec {
  Geometry geometry = Geometry::interval;
  std::optional<double> time_horizon;
  double lo = 0.0;  // interval [lo, hi] or square [lo, hi]^2
  double hi = 1.0;
  std::array<double, 2> hole_center{0.0, 0.0};
  double hole_radius = 0.0;

  static DomainSpec interval(double lo, double hi, std::optional<double> horizon = std::nullopt);
  static DomainSpec square(double lo, double hi);
  static DomainSpec square_with_hole(double lo, double hi, double radius);

  void validate() const;
  int spatial_dim() const { return geometry == Geometry::interval ? 1 : 2; }
  bool transient() const { return time_horizon.has_value(); }
  /// Number of leading network inputs that are coordinates (time + space).
  int coord_dim() const { return spatial_dim() + (transient() ? 1 : 0); }

  /// Spatial measure |D|.
  double volume() const;
  /// Measure of the spatial boundary |dD| (point count for an interval).
  double boundary_measure() const;
  double hole_perimeter() const;

  bool contains(std::span<const double> x) const;
  /// Distance-style test for points on dD.
  bool on_boundary(std::span<const double> x, double tol) const;
};

/// Interior points with random parameters, plus optional boundary points
/// and initial-condition points for soft constraints.
///
/// Sample j's boundary point and initial point share its t and p; the
/// initial point is (0, x_j, p_j).
struct SampleBatch {
  int n = 0;
  int spatial_dim = 1;
  int d = 0;
  std::vector<double> t;           // n entries, empty for steady problems
  std::vector<double> x;           // n * spatial_dim
  std::vector<double> p;           // n * d
  std::vector<double> boundary_x;  // n * spatial_dim, empty unless requested
  bool has_initial = false;

  bool transient() const { return !t.empty(); }
  bool has_boundary() const { return !boundary_x.empty(); }
  int input_dim() const { return (transient() ? 1 : 0) + spatial_dim + d; }

  void interior_input(int j, std::span<double> out) const;
  void boundary_input(int j, std::span<double> out) const;
  void initial_input(int j, std::span<double> out) const;
};

enum class ParamDistribution { uniform01 };

ParamDistribution parse_param_distribution(const std::string& tag);

/// n points uniform on [0, T] x D with p ~ U[0,1]^d. Rejection sampling for
/// the hole domain; ConfigError if acceptance falls below 10%.
SampleBatch sample_interior(int n, const DomainSpec& dom, int d, RandomStream& rng);

/// n points uniform on dD with density proportional to arc length.
std::vector<double> sample_boundary(int n, const DomainSpec& dom, RandomStream& rng);

std::vector<double> sample_params(int n, int d, ParamDistribution dist, RandomStream& rng);

/// Interior batch plus the boundary/initial companions required by the
/// constraint mode.
SampleBatch sample_training_batch(int n, const DomainSpec& dom, int d, bool with_boundary, bool with_initial,
                                  RandomStream& rng);

}  // namespace rpde

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rpde/problems.hpp"

namespace rpde {

/// Uniform space-time grid on [0,1] x [0,T] (nx nodes, nt time steps).
struct Grid1D {
  int nx = 201;
  int nt = 200;
  double T = 1.0;
  double lo = 0.0;
  double hi = 1.0;

  double h() const { return (hi - lo) / (nx - 1); }
  double dt() const { return T / nt; }
  double x(int i) const { return lo + i * h(); }
  double t(int n) const { return n * dt(); }
};

struct SpaceTimeSolution {
  Grid1D grid;
  std::vector<double> u;  // (nt+1) rows of nx values, row n is time level n

  double at(int n, int i) const { return u[static_cast<std::size_t>(n * grid.nx + i)]; }
  /// Bilinear interpolation in (t, x).
  double interpolate(double t, double x) const;
};

/// Implicit Euler, conservative flux form with a evaluated at cell midpoints,
/// homogeneous Dirichlet ends, u(0,x) = ic_scale (x - x^2).
SpaceTimeSolution fd_diffusion_1d(const std::function<double(double)>& a, double c, const Grid1D& grid,
                                  double ic_scale = 10.0);
SpaceTimeSolution fd_diffusion_1d(const RandomFieldSpec& field, std::span<const double> p, double c,
                                  const Grid1D& grid, double ic_scale = 10.0);

/// Node grid on [lo,hi]^2 with spacing h and an optional centered hole
/// whose nodes (x^2 + y^2 <= r^2) are pinned to zero.
struct Grid2D {
  double lo = -1.0;
  double hi = 1.0;
  double h = 1.0 / 64.0;
  std::optional<double> hole_radius;

  int cells() const;
  int nodes() const { return cells() + 1; }
  double coord(int i) const { return lo + i * (hi - lo) / cells(); }
  bool masked(int i, int j) const;
  bool pinned(int i, int j) const;  // outer boundary or hole
};

struct GridSolution2D {
  Grid2D grid;
  std::vector<double> u;  // nodes x nodes, index i + j * nodes (i along x)
  double relative_residual = 0.0;
  int iterations = 0;

  double at(int i, int j) const { return u[static_cast<std::size_t>(i + j * grid.nodes())]; }
  /// Bilinear interpolation.
  double interpolate(double x, double y) const;
};

/// 5-point variable-coefficient stencil with arithmetic face averages of k;
/// Jacobi-preconditioned conjugate gradient to relative tolerance 1e-12.
GridSolution2D fd_poisson_2d(const std::function<double(double, double)>& k,
                             const std::function<double(double, double)>& f, const Grid2D& grid);
GridSolution2D fd_poisson_2d(const RandomFieldSpec& field, std::span<const double> p, const ForcingSpec& forcing,
                             const Grid2D& grid);

/// Center value of -lap u = 1 on [-1,1]^2 with zero boundary data, from the
/// double sine series truncated at odd m, n <= terms.
double poisson_square_series_center(int terms);

struct OracleConfig {
  int samples = 2000;
  int nx = 201;
  int nt = 200;
  double h = 1.0 / 64.0;
  std::uint64_t seed = 1;
  int threads = 1;
  bool keep_solutions = false;
};

/// Monte Carlo ensemble of grid solutions sampled at probe points.
/// Probes are (t, x) for transient problems and (x, y) otherwise.
struct EnsembleRun {
  ProblemTag tag = ProblemTag::diffusion_smooth;
  std::uint64_t seed = 0;
  int samples = 0;
  int d = 0;
  std::vector<std::array<double, 2>> probes;
  std::vector<double> params;  // samples x d
  std::vector<double> values;  // samples x probes
  std::vector<std::vector<double>> solutions;  // optional full grids

  double value(int member, int probe) const {
    return values[static_cast<std::size_t>(member) * probes.size() + static_cast<std::size_t>(probe)];
  }
  std::vector<double> probe_values(int probe) const;
};

/// Parameter draw of ensemble member m (its own random stream).
std::vector<double> member_params(std::uint64_t seed, int member, int d);

EnsembleRun mc_ensemble(const ProblemSpec& problem, const OracleConfig& config,
                        std::span<const std::array<double, 2>> probes);

}  // namespace rpde

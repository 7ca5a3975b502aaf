#include "rpde/oracle.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "rpde/errors.hpp"
#include "rpde/parallel.hpp"
#include "rpde/rng.hpp"

namespace rpde {

namespace {

// Locate the cell [k, k+1] of a uniform axis containing s, clamped to the range.
std::pair<int, double> locate(double s, double lo, double step, int cells) {
  double r = (s - lo) / step;
  r = std::clamp(r, 0.0, static_cast<double>(cells));
  int k = std::min(static_cast<int>(std::floor(r)), cells - 1);
  return {k, r - k};
}

}  // namespace

double SpaceTimeSolution::interpolate(double t, double x) const {
  const auto [n, ft] = locate(t, 0.0, grid.dt(), grid.nt);
  const auto [i, fx] = locate(x, grid.lo, grid.h(), grid.nx - 1);
  const double a = at(n, i) * (1 - fx) + at(n, i + 1) * fx;
  const double b = at(n + 1, i) * (1 - fx) + at(n + 1, i + 1) * fx;
  return a * (1 - ft) + b * ft;
}

SpaceTimeSolution fd_diffusion_1d(const std::function<double(double)>& a, double c, const Grid1D& grid,
                                  double ic_scale) {
  if (grid.nx < 3) throw UsageError("fd_diffusion_1d needs nx >= 3");
  if (grid.nt < 1) throw UsageError("fd_diffusion_1d needs nt >= 1");
  if (!(grid.T > 0.0)) throw UsageError("fd_diffusion_1d needs T > 0");
  const int nx = grid.nx;
  const int m = nx - 2;  // interior unknowns
  const double h = grid.h();
  const double dt = grid.dt();
  const double inv_h2 = 1.0 / (h * h);

  // Tridiagonal matrix (constant in time): lower[i] u_{i-1} + diag[i] u_i + upper[i] u_{i+1}.
  std::vector<double> lower(static_cast<std::size_t>(m)), diag(static_cast<std::size_t>(m)),
      upper(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const double x = grid.x(k + 1);
    const double aw = a(x - 0.5 * h);
    const double ae = a(x + 0.5 * h);
    lower[static_cast<std::size_t>(k)] = -aw * inv_h2;
    upper[static_cast<std::size_t>(k)] = -ae * inv_h2;
    diag[static_cast<std::size_t>(k)] = 1.0 / dt + (aw + ae) * inv_h2;
  }
  // Thomas forward elimination, done once.
  std::vector<double> cprime(static_cast<std::size_t>(m)), denom(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const double dk = diag[kk] - (k > 0 ? lower[kk] * cprime[kk - 1] : 0.0);
    if (!(std::abs(dk) > 0.0) || !std::isfinite(dk)) {
      throw NumericFault("fd_diffusion_1d: singular tridiagonal system at row " + std::to_string(k));
    }
    denom[kk] = dk;
    cprime[kk] = upper[kk] / dk;
  }

  SpaceTimeSolution sol;
  sol.grid = grid;
  sol.u.assign(static_cast<std::size_t>((grid.nt + 1) * nx), 0.0);
  for (int i = 1; i < nx - 1; ++i) {
    const double x = grid.x(i);
    sol.u[static_cast<std::size_t>(i)] = ic_scale * (x - x * x);
  }
  std::vector<double> rhs(static_cast<std::size_t>(m));
  for (int n = 0; n < grid.nt; ++n) {
    const double* prev = sol.u.data() + static_cast<std::size_t>(n * nx);
    double* next = sol.u.data() + static_cast<std::size_t>((n + 1) * nx);
    for (int k = 0; k < m; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      const double r = prev[k + 1] / dt + c;
      rhs[kk] = (r - (k > 0 ? lower[kk] * rhs[kk - 1] : 0.0)) / denom[kk];
    }
    next[m] = rhs[static_cast<std::size_t>(m - 1)];
    for (int k = m - 2; k >= 0; --k) {
      next[k + 1] = rhs[static_cast<std::size_t>(k)] - cprime[static_cast<std::size_t>(k)] * next[k + 2];
    }
  }
  return sol;
}

SpaceTimeSolution fd_diffusion_1d(const RandomFieldSpec& field, std::span<const double> p, double c,
                                  const Grid1D& grid, double ic_scale) {
  return fd_diffusion_1d(
      [&](double x) {
        const std::array<double, 1> xs{x};
        return field.evaluate(xs, p).value;
      },
      c, grid, ic_scale);
}

int Grid2D::cells() const {
  const double n = (hi - lo) / h;
  const int c = static_cast<int>(std::lround(n));
  if (c < 2 || std::abs(n - c) > 1e-9) throw UsageError("grid spacing must divide the square side into >= 2 cells");
  return c;
}

bool Grid2D::masked(int i, int j) const {
  if (!hole_radius) return false;
  const double x = coord(i), y = coord(j);
  return x * x + y * y <= *hole_radius * *hole_radius;
}

bool Grid2D::pinned(int i, int j) const {
  const int last = cells();
  return i == 0 || j == 0 || i == last || j == last || masked(i, j);
}

double GridSolution2D::interpolate(double x, double y) const {
  const int cells = grid.cells();
  const double step = (grid.hi - grid.lo) / cells;
  const auto [i, fx] = locate(x, grid.lo, step, cells);
  const auto [j, fy] = locate(y, grid.lo, step, cells);
  const double a = at(i, j) * (1 - fx) + at(i + 1, j) * fx;
  const double b = at(i, j + 1) * (1 - fx) + at(i + 1, j + 1) * fx;
  return a * (1 - fy) + b * fy;
}

GridSolution2D fd_poisson_2d(const std::function<double(double, double)>& k,
                             const std::function<double(double, double)>& f, const Grid2D& grid) {
  const int nn = grid.nodes();
  const double step = (grid.hi - grid.lo) / grid.cells();
  const double inv_h2 = 1.0 / (step * step);
  auto node = [nn](int i, int j) { return static_cast<std::size_t>(i + j * nn); };

  std::vector<double> kv(static_cast<std::size_t>(nn * nn));
  std::vector<int> index(static_cast<std::size_t>(nn * nn), -1);
  int unknowns = 0;
  for (int j = 0; j < nn; ++j) {
    for (int i = 0; i < nn; ++i) {
      kv[node(i, j)] = k(grid.coord(i), grid.coord(j));
      if (!grid.pinned(i, j)) index[node(i, j)] = unknowns++;
    }
  }

  GridSolution2D sol;
  sol.grid = grid;
  sol.u.assign(static_cast<std::size_t>(nn * nn), 0.0);
  if (unknowns == 0) return sol;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(unknowns) * 5);
  Eigen::VectorXd b(unknowns);
  constexpr std::array<std::array<int, 2>, 4> nbrs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (int j = 0; j < nn; ++j) {
    for (int i = 0; i < nn; ++i) {
      const int row = index[node(i, j)];
      if (row < 0) continue;
      double diag = 0.0;
      for (const auto& o : nbrs) {
        const int ni = i + o[0], nj = j + o[1];
        const double face = 0.5 * (kv[node(i, j)] + kv[node(ni, nj)]) * inv_h2;
        diag += face;
        const int col = index[node(ni, nj)];
        if (col >= 0) triplets.emplace_back(row, col, -face);
      }
      triplets.emplace_back(row, row, diag);
      b[row] = f(grid.coord(i), grid.coord(j));
    }
  }
  Eigen::SparseMatrix<double> A(unknowns, unknowns);
  A.setFromTriplets(triplets.begin(), triplets.end());

  Eigen::VectorXd x = Eigen::VectorXd::Zero(unknowns);
  const double bnorm = b.norm();
  if (bnorm > 0.0) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(1e-12);
    cg.setMaxIterations(20 * unknowns);
    cg.compute(A);
    x = cg.solve(b);
    sol.iterations = static_cast<int>(cg.iterations());
    sol.relative_residual = (b - A * x).norm() / bnorm;
    if (cg.info() != Eigen::Success || !(sol.relative_residual < 1e-10)) {
      throw NumericFault("fd_poisson_2d: conjugate gradient stalled at relative residual " +
                         std::to_string(sol.relative_residual) + " after " + std::to_string(sol.iterations) +
                         " iterations");
    }
  }
  for (int j = 0; j < nn; ++j) {
    for (int i = 0; i < nn; ++i) {
      const int row = index[node(i, j)];
      if (row >= 0) sol.u[node(i, j)] = x[row];
    }
  }
  return sol;
}

GridSolution2D fd_poisson_2d(const RandomFieldSpec& field, std::span<const double> p, const ForcingSpec& forcing,
                             const Grid2D& grid) {
  return fd_poisson_2d(
      [&](double x, double y) {
        const std::array<double, 2> xs{x, y};
        return field.evaluate(xs, p).value;
      },
      [&](double x, double y) {
        const std::array<double, 2> xs{x, y};
        return forcing(xs);
      },
      grid);
}

double poisson_square_series_center(int terms) {
  // On [0,L]^2, u = sum_{m,n odd} 16 / (pi^2 m n) / (pi^2 (m^2+n^2) / L^2) sin(m pi x/L) sin(n pi y/L).
  const double pi = std::numbers::pi;
  const double L = 2.0;
  double sum = 0.0;
  for (int m = 1; m <= terms; m += 2) {
    for (int n = 1; n <= terms; n += 2) {
      const double sign = ((m + n - 2) / 2) % 2 == 0 ? 1.0 : -1.0;
      sum += sign * 16.0 * L * L / (pi * pi * pi * pi * m * n * (m * m + n * n));
    }
  }
  return sum;
}

std::vector<double> EnsembleRun::probe_values(int probe) const {
  std::vector<double> out(static_cast<std::size_t>(samples));
  for (int m = 0; m < samples; ++m) out[static_cast<std::size_t>(m)] = value(m, probe);
  return out;
}

std::vector<double> member_params(std::uint64_t seed, int member, int d) {
  RandomStream rng(seed, streams::kOracleMember | static_cast<std::uint64_t>(member));
  std::vector<double> p(static_cast<std::size_t>(d));
  for (double& v : p) v = rng.uniform();
  return p;
}

EnsembleRun mc_ensemble(const ProblemSpec& problem, const OracleConfig& config,
                        std::span<const std::array<double, 2>> probes) {
  if (config.samples < 1) throw UsageError("oracle needs at least one sample");
  EnsembleRun run;
  run.tag = problem.tag;
  run.seed = config.seed;
  run.samples = config.samples;
  run.d = problem.d;
  run.probes.assign(probes.begin(), probes.end());
  const std::size_t np = probes.size();
  run.params.resize(static_cast<std::size_t>(config.samples) * static_cast<std::size_t>(problem.d));
  run.values.resize(static_cast<std::size_t>(config.samples) * np);
  if (config.keep_solutions) run.solutions.resize(static_cast<std::size_t>(config.samples));

  Grid1D g1;
  Grid2D g2;
  if (problem.transient()) {
    g1.nx = config.nx;
    g1.nt = config.nt;
    g1.T = *problem.domain.time_horizon;
    g1.lo = problem.domain.lo;
    g1.hi = problem.domain.hi;
  } else {
    g2.lo = problem.domain.lo;
    g2.hi = problem.domain.hi;
    g2.h = config.h;
    if (problem.domain.geometry == Geometry::square_with_hole) g2.hole_radius = problem.domain.hole_radius;
    g2.cells();
  }

  parallel_for_each(config.samples, config.threads, [&](int m) {
    const std::vector<double> p = member_params(config.seed, m, problem.d);
    std::copy(p.begin(), p.end(), run.params.begin() + static_cast<std::ptrdiff_t>(m) * problem.d);
    double* out = run.values.data() + static_cast<std::size_t>(m) * np;
    try {
      if (problem.transient()) {
        const SpaceTimeSolution s =
            fd_diffusion_1d(problem.field, p, problem.forcing.scale, g1, problem.ic_scale.value_or(0.0));
        for (std::size_t q = 0; q < np; ++q) out[q] = s.interpolate(probes[q][0], probes[q][1]);
        if (config.keep_solutions) run.solutions[static_cast<std::size_t>(m)] = s.u;
      } else {
        const GridSolution2D s = fd_poisson_2d(problem.field, p, problem.forcing, g2);
        for (std::size_t q = 0; q < np; ++q) out[q] = s.interpolate(probes[q][0], probes[q][1]);
        if (config.keep_solutions) run.solutions[static_cast<std::size_t>(m)] = s.u;
      }
    } catch (const NumericFault& e) {
      throw NumericFault("oracle member " + std::to_string(m) + " failed: " + e.what());
    }
  });
  return run;
}

}  // namespace rpde

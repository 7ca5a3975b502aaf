#include "doctest.h"

#include <cmath>

#include "rpde/errors.hpp"
#include "rpde/oracle.hpp"

using namespace rpde;

namespace {

// Steady solution of -(a u')' = c, u(0) = u(1) = 0, by composite Simpson
// quadrature of u(x) = int_0^x (C - c s) / a(s) ds.
struct SteadyQuadrature {
  std::function<double(double)> a;
  double c;
  double C = 0.0;

  double integral(double x, const std::function<double(double)>& g) const {
    const int n = 4000;
    const double h = x / n;
    double s = g(0.0) + g(x);
    for (int k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * g(k * h);
    return s * h / 3.0;
  }
  void fix_constant() {
    const double i1 = integral(1.0, [&](double s) { return 1.0 / a(s); });
    const double is = integral(1.0, [&](double s) { return s / a(s); });
    C = c * is / i1;
  }
  double operator()(double x) const {
    return integral(x, [&](double s) { return (C - c * s) / a(s); });
  }
};

double steady_error(const std::function<double(double)>& a, const SteadyQuadrature& exact, int nx) {
  Grid1D g;
  g.nx = nx;
  g.nt = 40;
  g.T = 1e3;
  const SpaceTimeSolution s = fd_diffusion_1d(a, 3.0, g, 10.0);
  double worst = 0.0;
  for (int i = 0; i < nx; ++i) worst = std::max(worst, std::abs(s.at(g.nt, i) - exact(g.x(i))));
  return worst;
}

}  // namespace

TEST_CASE("zero data stays zero") {
  Grid1D g;
  g.nx = 21;
  g.nt = 10;
  const SpaceTimeSolution s = fd_diffusion_1d([](double) { return 0.5; }, 0.0, g, 0.0);
  for (double v : s.u) CHECK(v == 0.0);
}

TEST_CASE("constant coefficient diffusion reaches the parabolic steady state") {
  Grid1D g;
  g.nx = 201;
  g.nt = 50;
  g.T = 1e3;
  const SpaceTimeSolution s = fd_diffusion_1d([](double) { return 0.26; }, 3.0, g, 10.0);
  const double center = s.at(g.nt, 100);
  CHECK(std::abs(center - 3.0 / 0.52 * 0.25) < 1e-4);
  CHECK(std::abs(center - 1.442308) < 1e-6);
  double worst = 0.0;
  for (int i = 1; i < g.nx - 1; ++i) {
    const double x = g.x(i);
    const double exact = 3.0 / 0.52 * x * (1 - x);
    worst = std::max(worst, std::abs(s.at(g.nt, i) - exact) / exact);
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("initial condition and boundary values") {
  Grid1D g;
  g.nx = 11;
  g.nt = 4;
  const SpaceTimeSolution s = fd_diffusion_1d([](double) { return 0.3; }, 3.0, g, 10.0);
  CHECK(s.at(0, 5) == doctest::Approx(2.5).epsilon(1e-15));
  for (int n = 0; n <= g.nt; ++n) {
    CHECK(s.at(n, 0) == 0.0);
    CHECK(s.at(n, g.nx - 1) == 0.0);
  }
  CHECK(s.interpolate(0.0, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("variable coefficient diffusion converges at second order") {
  const std::vector<double> p{0.9, 0.3, 0.7, 0.1, 0.5};
  const RandomFieldSpec field{FieldKind::smooth_diffusion};
  auto a = [&](double x) {
    const std::array<double, 1> xs{x};
    return field.evaluate(xs, p).value;
  };
  SteadyQuadrature exact{a, 3.0};
  exact.fix_constant();
  const double e1 = steady_error(a, exact, 26);
  const double e2 = steady_error(a, exact, 51);
  const double e3 = steady_error(a, exact, 101);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("Poisson with zero forcing is zero") {
  Grid2D g;
  g.h = 1.0 / 8;
  const GridSolution2D s = fd_poisson_2d([](double, double) { return 1.0; }, [](double, double) { return 0.0; }, g);
  for (double v : s.u) CHECK(v == 0.0);
}

TEST_CASE("unit Poisson center value matches the series") {
  const double series = poisson_square_series_center(401);
  CHECK(std::abs(series - 0.2946854) < 1e-6);
  Grid2D g;
  g.h = 1.0 / 64;
  const GridSolution2D s = fd_poisson_2d([](double, double) { return 1.0; }, [](double, double) { return 1.0; }, g);
  const double center = s.at(64, 64);
  CHECK(std::abs(center - series) / series < 5e-3);
  CHECK(std::abs(s.interpolate(0.0, 0.0) - center) < 1e-15);
  CHECK(s.relative_residual < 1e-10);
}

TEST_CASE("Poisson center converges at second order") {
  const double series = poisson_square_series_center(401);
  std::vector<double> err;
  for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
    Grid2D g;
    g.h = h;
    const GridSolution2D s = fd_poisson_2d([](double, double) { return 1.0; }, [](double, double) { return 1.0; }, g);
    err.push_back(std::abs(s.interpolate(0.0, 0.0) - series));
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.1));
  CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("point symmetry and maximum principle") {
  const std::vector<double> p{0.2, 0.8, 0.5};
  const RandomFieldSpec field{FieldKind::conductivity};
  Grid2D g;
  g.h = 1.0 / 16;
  const GridSolution2D s = fd_poisson_2d(field, p, ForcingSpec{ForcingKind::abs_product, 100.0}, g);
  const int last = g.cells();
  for (int j = 0; j <= last; ++j) {
    for (int i = 0; i <= last; ++i) {
      CHECK(std::abs(s.at(i, j) - s.at(last - i, last - j)) < 1e-10);
      CHECK(s.at(i, j) >= 0.0);
    }
  }
}

TEST_CASE("hole nodes are pinned to zero") {
  Grid2D g;
  g.h = 1.0 / 20;
  g.hole_radius = 0.3;
  const GridSolution2D s = fd_poisson_2d([](double, double) { return 1.0; }, [](double, double) { return 2.0; }, g);
  int masked = 0;
  for (int j = 0; j <= g.cells(); ++j) {
    for (int i = 0; i <= g.cells(); ++i) {
      if (g.masked(i, j)) {
        ++masked;
        CHECK(s.at(i, j) == 0.0);
      }
    }
  }
  CHECK(masked > 0);
  CHECK(s.interpolate(-0.6, 0.0) > 0.0);
  CHECK_THROWS_AS((Grid2D{-1.0, 1.0, 0.3}.cells()), UsageError);
}

TEST_CASE("ensembles are reproducible and single members match direct solves") {
  ProblemOverrides o;
  o.d = 4;
  const ProblemSpec pb = build_problem(ProblemTag::diffusion_smooth, o);
  OracleConfig cfg;
  cfg.samples = 1;
  cfg.nx = 41;
  cfg.nt = 20;
  cfg.seed = 17;
  const std::vector<std::array<double, 2>> probes{{0.5, 0.5}, {1.0, 0.25}};
  const EnsembleRun one = mc_ensemble(pb, cfg, probes);
  Grid1D g;
  g.nx = 41;
  g.nt = 20;
  const SpaceTimeSolution s = fd_diffusion_1d(pb.field, member_params(17, 0, 4), 3.0, g);
  CHECK(one.value(0, 0) == s.interpolate(0.5, 0.5));
  CHECK(one.value(0, 1) == s.interpolate(1.0, 0.25));

  cfg.samples = 30;
  const EnsembleRun a = mc_ensemble(pb, cfg, probes);
  cfg.threads = 2;
  const EnsembleRun b = mc_ensemble(pb, cfg, probes);
  CHECK(a.values == b.values);
  CHECK(a.params == b.params);
  cfg.seed = 18;
  CHECK(mc_ensemble(pb, cfg, probes).values != a.values);
}

TEST_CASE("mean standard error shrinks as one over root M") {
  ProblemOverrides o;
  o.d = 5;
  const ProblemSpec pb = build_problem(ProblemTag::diffusion_nonsmooth, o);
  OracleConfig cfg;
  cfg.nx = 31;
  cfg.nt = 10;
  const std::vector<std::array<double, 2>> probes{{1.0, 0.5}};
  std::vector<double> se;
  for (int M : {100, 400, 1600}) {
    cfg.samples = M;
    const auto v = mc_ensemble(pb, cfg, probes).probe_values(0);
    double m = 0.0;
    for (double x : v) m += x;
    m /= M;
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    se.push_back(std::sqrt(s2 / (M - 1) / M));
  }
  CHECK(se[0] / se[1] == doctest::Approx(2.0).epsilon(0.2));
  CHECK(se[1] / se[2] == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("steady heat ensemble") {
  ProblemOverrides o;
  o.d = 3;
  const ProblemSpec pb = build_problem(ProblemTag::heat_hole, o);
  OracleConfig cfg;
  cfg.samples = 3;
  cfg.h = 1.0 / 16;
  cfg.keep_solutions = true;
  const std::vector<std::array<double, 2>> probes{{-0.6, 0.0}, {-0.6, -0.6}};
  const EnsembleRun run = mc_ensemble(pb, cfg, probes);
  CHECK(run.solutions.size() == 3);
  CHECK(run.solutions[0].size() == 33u * 33u);
  for (int m = 0; m < 3; ++m) CHECK(run.value(m, 0) > 0.0);
}

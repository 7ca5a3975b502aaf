#pragma once

#include <array>
#include <functional>
#include <vector>

namespace rpde {

/// Pointwise data of a smooth field on a 2D domain.
struct FieldSample {
  double value = 0.0;
  std::array<double, 2> grad{0.0, 0.0};
  double laplacian = 0.0;
};

using Field = std::function<FieldSample(double x, double y)>;
/// Pointwise integrand F(x, y; u, grad u).
using Integrand = std::function<double(double x, double y, const FieldSample& u)>;
/// Pointwise weak form L(x, y; u, v), integrated to give the first variation along v.
using WeakForm = std::function<double(double x, double y, const FieldSample& u, const FieldSample& v)>;

/// Tensor-product midpoint rule on [x0,x1] x [y0,y1] with cell size h.
struct QuadGrid {
  double x0 = -1.0, x1 = 1.0, y0 = -1.0, y1 = 1.0;
  double h = 1.0 / 32.0;
  int nx() const;
  int ny() const;
};

double integrate(const std::function<double(double, double)>& g, const QuadGrid& grid);
double functional_value(const Integrand& F, const Field& u, const QuadGrid& grid);

/// |(F(u + eps v) - F(u)) / eps - integral of weak(u, v)|.
double first_variation_check(const Integrand& F, const WeakForm& weak, const Field& u, const Field& v,
                             const QuadGrid& grid, double eps);

/// k grad u . grad v - f v, the first-order weak form of the heat functional.
WeakForm heat_weak_form(std::function<double(double, double)> k, std::function<double(double, double)> f);
/// (k/2)|grad u|^2 - f u.
Integrand heat_integrand(std::function<double(double, double)> k, std::function<double(double, double)> f);

/// Terms of an integrand built from the reversal rules
///   c |grad u|^2 -> -2 c lap u,  c |u|^p -> c p |u|^(p-2) u,  c(x,y) g(u) -> c(x,y) g'(u).
enum class TermKind { gradient_square, power, function };

struct IntegrandTerm {
  TermKind kind = TermKind::gradient_square;
  std::function<double(double, double)> coeff;  // constant for gradient_square terms
  double power = 2.0;
  std::function<double(double)> g, g_prime;
};

struct RuleIntegrand {
  std::vector<IntegrandTerm> terms;

  Integrand integrand() const;
  /// Euler-Lagrange weak form: sum of rule(u) * v.
  WeakForm euler_lagrange() const;
};

/// Poisson functional (1/2)|grad u|^2 - f u in rule-table form.
RuleIntegrand poisson_rule_integrand(std::function<double(double, double)> f);

}  // namespace rpde

#include "rpde/variational.hpp"

#include <cmath>

#include "rpde/errors.hpp"

namespace rpde {

int QuadGrid::nx() const { return static_cast<int>(std::lround((x1 - x0) / h)); }
int QuadGrid::ny() const { return static_cast<int>(std::lround((y1 - y0) / h)); }

double integrate(const std::function<double(double, double)>& g, const QuadGrid& grid) {
  if (!(grid.h > 0.0) || grid.nx() < 1 || grid.ny() < 1) throw UsageError("quadrature grid is empty");
  const double hx = (grid.x1 - grid.x0) / grid.nx();
  const double hy = (grid.y1 - grid.y0) / grid.ny();
  double sum = 0.0;
  for (int i = 0; i < grid.nx(); ++i) {
    const double x = grid.x0 + (i + 0.5) * hx;
    double row = 0.0;
    for (int j = 0; j < grid.ny(); ++j) row += g(x, grid.y0 + (j + 0.5) * hy);
    sum += row;
  }
  return sum * hx * hy;
}

double functional_value(const Integrand& F, const Field& u, const QuadGrid& grid) {
  return integrate([&](double x, double y) { return F(x, y, u(x, y)); }, grid);
}

double first_variation_check(const Integrand& F, const WeakForm& weak, const Field& u, const Field& v,
                             const QuadGrid& grid, double eps) {
  if (!(eps > 0.0)) throw UsageError("first_variation_check: eps must be positive");
  // One pass: both functional values and the weak form share the field samples.
  const double diff = integrate(
      [&](double x, double y) {
        const FieldSample a = u(x, y);
        const FieldSample b = v(x, y);
        FieldSample c;
        c.value = a.value + eps * b.value;
        c.grad = {a.grad[0] + eps * b.grad[0], a.grad[1] + eps * b.grad[1]};
        c.laplacian = a.laplacian + eps * b.laplacian;
        return (F(x, y, c) - F(x, y, a)) / eps - weak(x, y, a, b);
      },
      grid);
  return std::abs(diff);
}

WeakForm heat_weak_form(std::function<double(double, double)> k, std::function<double(double, double)> f) {
  return [k = std::move(k), f = std::move(f)](double x, double y, const FieldSample& u, const FieldSample& v) {
    return k(x, y) * (u.grad[0] * v.grad[0] + u.grad[1] * v.grad[1]) - f(x, y) * v.value;
  };
}

Integrand heat_integrand(std::function<double(double, double)> k, std::function<double(double, double)> f) {
  return [k = std::move(k), f = std::move(f)](double x, double y, const FieldSample& u) {
    return 0.5 * k(x, y) * (u.grad[0] * u.grad[0] + u.grad[1] * u.grad[1]) - f(x, y) * u.value;
  };
}

Integrand RuleIntegrand::integrand() const {
  return [terms = terms](double x, double y, const FieldSample& u) {
    double s = 0.0;
    for (const IntegrandTerm& t : terms) {
      const double c = t.coeff(x, y);
      switch (t.kind) {
        case TermKind::gradient_square: s += c * (u.grad[0] * u.grad[0] + u.grad[1] * u.grad[1]); break;
        case TermKind::power: s += c * std::pow(std::abs(u.value), t.power); break;
        case TermKind::function: s += c * t.g(u.value); break;
      }
    }
    return s;
  };
}

WeakForm RuleIntegrand::euler_lagrange() const {
  return [terms = terms](double x, double y, const FieldSample& u, const FieldSample& v) {
    double s = 0.0;
    for (const IntegrandTerm& t : terms) {
      const double c = t.coeff(x, y);
      switch (t.kind) {
        case TermKind::gradient_square: s += c * (-2.0 * u.laplacian); break;
        case TermKind::power: s += c * t.power * std::pow(std::abs(u.value), t.power - 2.0) * u.value; break;
        case TermKind::function: s += c * t.g_prime(u.value); break;
      }
    }
    return s * v.value;
  };
}

RuleIntegrand poisson_rule_integrand(std::function<double(double, double)> f) {
  RuleIntegrand r;
  IntegrandTerm grad;
  grad.kind = TermKind::gradient_square;
  grad.coeff = [](double, double) { return 0.5; };
  IntegrandTerm load;
  load.kind = TermKind::function;
  load.coeff = std::move(f);
  load.g = [](double u) { return -u; };
  load.g_prime = [](double) { return -1.0; };
  r.terms = {grad, load};
  return r;
}

}  // namespace rpde

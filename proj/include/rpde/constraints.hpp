#pragma once

#include <span>
#include <string>

#include "rpde/autodiff.hpp"

namespace rpde {

enum class ConstraintMode { hard, soft };
ConstraintMode parse_constraint_mode(const std::string& tag);
std::string to_string(ConstraintMode mode);

/// Trial functions u = C(coords) + G(coords) * N, with G vanishing on the
/// constrained manifold so u matches the prescribed data there for any N.
enum class TrialKind {
  /// coords (t, x): u = s*(x - x^2) + t*(x - x^2)*N. u(0,x) = s*(x - x^2), u(t,0) = u(t,1) = 0.
  interval_parabola,
  /// coords (x, y): u = (1 - x^2)*(1 - y^2)*N. u = 0 on the boundary of [-1,1]^2.
  square_bubble,
};

struct TrialForm {
  TrialKind kind = TrialKind::interval_parabola;
  double ic_scale = 10.0;

  int coord_count() const { return 2; }
  /// C and G as jets along coordinate `direction` (or constants if -1).
  Jet2<double> particular(std::span<const double> coords, int direction) const;
  Jet2<double> multiplier(std::span<const double> coords, int direction) const;
  /// Prescribed value on the constrained manifold.
  double prescribed(std::span<const double> coords) const;
};

/// Product of a coordinate-only jet with a network jet; keeps tape
/// constants out of the recording when T is Var.
template <class T>
Jet2<T> mixed_product(const Jet2<double>& g, const Jet2<T>& n) {
  return {n.v * g.v, n.d1 * g.v + n.v * g.d1, (n.d2 * g.v + n.d1 * (2.0 * g.d1)) + n.v * g.d2};
}

template <class T>
Jet2<T> hard_wrap(const TrialForm& trial, const Jet2<T>& net, std::span<const double> coords, int direction) {
  const Jet2<double> c = trial.particular(coords, direction);
  Jet2<T> u = mixed_product(trial.multiplier(coords, direction), net);
  u.v = u.v + c.v;
  u.d1 = u.d1 + c.d1;
  u.d2 = u.d2 + c.d2;
  return u;
}

/// Value-only wrap.
double hard_wrap_value(const TrialForm& trial, double net, std::span<const double> coords);

struct PenaltyWeights {
  double lambda_ic = 1.0;
  double lambda_bc = 1.0;
  void validate() const;
};

/// lambda_ic * r_ic^2 + lambda_bc * r_bc^2.
template <class T>
T soft_penalty(const T& r_ic, const T& r_bc, const PenaltyWeights& w) {
  return w.lambda_ic * square(r_ic) + w.lambda_bc * square(r_bc);
}

}  // namespace rpde

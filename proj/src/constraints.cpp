#include "rpde/constraints.hpp"

#include <cmath>

#include "rpde/errors.hpp"

namespace rpde {

ConstraintMode parse_constraint_mode(const std::string& tag) {
  if (tag == "hard") return ConstraintMode::hard;
  if (tag == "soft") return ConstraintMode::soft;
  throw ConfigError("unknown constraint mode '" + tag + "' (expected hard or soft)");
}

std::string to_string(ConstraintMode mode) { return mode == ConstraintMode::hard ? "hard" : "soft"; }

namespace {

// Jet of a coordinate: seeded when it is the differentiation direction.
Jet2<double> coord_jet(std::span<const double> coords, int k, int direction) {
  return {coords[static_cast<std::size_t>(k)], k == direction ? 1.0 : 0.0, 0.0};
}

// q(x) = x - x^2 along x.
Jet2<double> parabola(const Jet2<double>& x) { return x - square(x); }

// 1 - x^2.
Jet2<double> bubble(const Jet2<double>& x) { return 1.0 - square(x); }

}  // namespace

Jet2<double> TrialForm::particular(std::span<const double> coords, int direction) const {
  switch (kind) {
    case TrialKind::interval_parabola: return ic_scale * parabola(coord_jet(coords, 1, direction));
    case TrialKind::square_bubble: return {0.0, 0.0, 0.0};
  }
  return {};
}

Jet2<double> TrialForm::multiplier(std::span<const double> coords, int direction) const {
  switch (kind) {
    case TrialKind::interval_parabola:
      return coord_jet(coords, 0, direction) * parabola(coord_jet(coords, 1, direction));
    case TrialKind::square_bubble:
      return bubble(coord_jet(coords, 0, direction)) * bubble(coord_jet(coords, 1, direction));
  }
  return {};
}

double TrialForm::prescribed(std::span<const double> coords) const {
  return particular(coords, -1).v;
}

double hard_wrap_value(const TrialForm& trial, double net, std::span<const double> coords) {
  return trial.particular(coords, -1).v + trial.multiplier(coords, -1).v * net;
}

void PenaltyWeights::validate() const {
  if (!(lambda_ic >= 0.0) || !std::isfinite(lambda_ic)) throw ConfigError("lambda_ic must be a finite value >= 0");
  if (!(lambda_bc >= 0.0) || !std::isfinite(lambda_bc)) throw ConfigError("lambda_bc must be a finite value >= 0");
}

}  // namespace rpde

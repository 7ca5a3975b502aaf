#include "rpde/problems.hpp"

#include <cmath>
#include <numbers>

#include "rpde/errors.hpp"

namespace rpde {

namespace {
constexpr double kPi = std::numbers::pi;
}

CoeffValue smooth_diffusion_coeff(double x, std::span<const double> p) {
  CoeffValue a{0.26, 0.0, 0.0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double j = static_cast<double>(i + 1);
    const double w = 0.5 * kPi * j;
    a.value += (0.05 / j) * std::cos(w * x) * p[i];
    a.dx -= 0.05 * 0.5 * kPi * std::sin(w * x) * p[i];
  }
  return a;
}

CoeffValue nonsmooth_diffusion_coeff(double x, std::span<const double> p) {
  CoeffValue a{0.2, 0.0, 0.0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double j = static_cast<double>(i + 1);
    const double w = 0.5 * kPi * j;
    const double c = std::cos(w * x);
    a.value += (0.1 / j) * c * c * p[i];
    // d/dx cos^2(wx) = -w sin(2wx)
    a.dx -= 0.1 * 0.5 * kPi * std::sin(2.0 * w * x) * p[i];
  }
  return a;
}

CoeffValue conductivity_with_gradient(double x, double y, std::span<const double> p) {
  CoeffValue k{1.0, 0.0, 0.0};
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double j = static_cast<double>(i + 1);
    const double w = 0.25 * kPi * std::pow(j, 1.5);
    const double c = std::cos(w * x * y);
    k.value += c * c * p[i] / j;
    const double s2 = std::sin(2.0 * w * x * y) * p[i] / j;
    k.dx -= w * y * s2;
    k.dy -= w * x * s2;
  }
  return k;
}

double conductivity(double x, double y, std::span<const double> p) {
  double k = 1.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double j = static_cast<double>(i + 1);
    const double c = std::cos(0.25 * kPi * std::pow(j, 1.5) * x * y);
    k += c * c * p[i] / j;
  }
  return k;
}

double RandomFieldSpec::base() const {
  switch (kind) {
    case FieldKind::smooth_diffusion: return 0.26;
    case FieldKind::nonsmooth_diffusion: return 0.2;
    case FieldKind::conductivity: return 1.0;
  }
  return 0.0;
}

double RandomFieldSpec::amplitude(int j) const {
  switch (kind) {
    case FieldKind::smooth_diffusion: return 0.05 / j;
    case FieldKind::nonsmooth_diffusion: return 0.1 / j;
    case FieldKind::conductivity: return 1.0 / j;
  }
  return 0.0;
}

CoeffValue RandomFieldSpec::evaluate(std::span<const double> xs, std::span<const double> p) const {
  switch (kind) {
    case FieldKind::smooth_diffusion: return smooth_diffusion_coeff(xs[0], p);
    case FieldKind::nonsmooth_diffusion: return nonsmooth_diffusion_coeff(xs[0], p);
    case FieldKind::conductivity: return conductivity_with_gradient(xs[0], xs[1], p);
  }
  return {};
}

double RandomFieldSpec::positivity_lower_bound(int d) const {
  double bound = base();
  // Only the plain cosine modes can be negative; cos^2 modes are >= 0 and p_j >= 0.
  if (kind == FieldKind::smooth_diffusion) {
    for (int j = 1; j <= d; ++j) bound -= amplitude(j);
  }
  return bound;
}

double ForcingSpec::operator()(std::span<const double> xs) const {
  switch (kind) {
    case ForcingKind::constant: return scale;
    case ForcingKind::abs_product: return scale * std::abs(xs[0] * xs[1]);
  }
  return 0.0;
}

ProblemTag parse_problem_tag(const std::string& tag) {
  if (tag == "diffusion-smooth") return ProblemTag::diffusion_smooth;
  if (tag == "diffusion-nonsmooth") return ProblemTag::diffusion_nonsmooth;
  if (tag == "heat-square") return ProblemTag::heat_square;
  if (tag == "heat-hole") return ProblemTag::heat_hole;
  throw ConfigError("unknown problem tag '" + tag +
                    "' (expected diffusion-smooth, diffusion-nonsmooth, heat-square or heat-hole)");
}

std::string to_string(ProblemTag tag) {
  switch (tag) {
    case ProblemTag::diffusion_smooth: return "diffusion-smooth";
    case ProblemTag::diffusion_nonsmooth: return "diffusion-nonsmooth";
    case ProblemTag::heat_square: return "heat-square";
    case ProblemTag::heat_hole: return "heat-hole";
  }
  return "?";
}

LossMode parse_loss_mode(const std::string& tag) {
  if (tag == "strong") return LossMode::strong;
  if (tag == "variational") return LossMode::variational;
  throw ConfigError("unknown loss mode '" + tag + "' (expected strong or variational)");
}

std::string to_string(LossMode mode) { return mode == LossMode::strong ? "strong" : "variational"; }

double heat_forcing(ProblemTag tag, double x, double y) {
  switch (tag) {
    case ProblemTag::heat_square: return 100.0 * std::abs(x * y);
    case ProblemTag::heat_hole: return 2.0;
    default: throw UsageError("heat_forcing: " + to_string(tag) + " is not a heat problem");
  }
}

double ProblemSpec::initial_value(double x) const {
  if (!ic_scale) throw UsageError("problem " + to_string(tag) + " has no initial condition");
  return *ic_scale * (x - x * x);
}

double ProblemSpec::boundary_value(std::span<const double>) const { return 0.0; }

void ProblemSpec::validate() const {
  domain.validate();
  weights.validate();
  if (d < 1) throw ConfigError("parameter dimension d must be >= 1");
  if (loss == LossMode::variational && transient()) {
    throw ConfigError("variational loss needs a steady problem; " + to_string(tag) + " is transient");
  }
  if (constraint == ConstraintMode::hard && !trial) {
    throw ConfigError("hard constraints need a trial form, and " + to_string(tag) + " has none");
  }
  if (transient() && !ic_scale) throw ConfigError("transient problem without an initial condition");
  if (!(field.positivity_lower_bound(d) > 0.0)) {
    throw ConfigError("random field can reach zero or below for d = " + std::to_string(d));
  }
}

ProblemSpec build_problem(ProblemTag tag, const ProblemOverrides& overrides) {
  ProblemSpec pb;
  pb.tag = tag;
  switch (tag) {
    case ProblemTag::diffusion_smooth:
    case ProblemTag::diffusion_nonsmooth:
      pb.domain = DomainSpec::interval(0.0, 1.0, 1.0);
      pb.field.kind = tag == ProblemTag::diffusion_smooth ? FieldKind::smooth_diffusion : FieldKind::nonsmooth_diffusion;
      pb.forcing = {ForcingKind::constant, 3.0};
      pb.ic_scale = 10.0;
      pb.constraint = ConstraintMode::hard;
      pb.loss = LossMode::strong;
      pb.d = tag == ProblemTag::diffusion_smooth ? 100 : 50;
      break;
    case ProblemTag::heat_square:
      pb.domain = DomainSpec::square(-1.0, 1.0);
      pb.field.kind = FieldKind::conductivity;
      pb.forcing = {ForcingKind::abs_product, 100.0};
      pb.constraint = ConstraintMode::hard;
      pb.loss = LossMode::variational;
      pb.d = 50;
      break;
    case ProblemTag::heat_hole:
      pb.domain = DomainSpec::square_with_hole(-1.0, 1.0, 0.3);
      pb.field.kind = FieldKind::conductivity;
      pb.forcing = {ForcingKind::constant, 2.0};
      pb.constraint = ConstraintMode::soft;
      pb.loss = LossMode::variational;
      pb.d = 30;
      pb.weights.lambda_bc = 1000.0;
      break;
  }
  if (tag != ProblemTag::heat_hole) {
    TrialForm trial;
    trial.kind = pb.is_diffusion() ? TrialKind::interval_parabola : TrialKind::square_bubble;
    trial.ic_scale = pb.ic_scale.value_or(0.0);
    pb.trial = trial;
  }

  if (overrides.d) pb.d = *overrides.d;
  if (overrides.constraint) pb.constraint = *overrides.constraint;
  if (overrides.loss) pb.loss = *overrides.loss;
  if (overrides.lambda_ic) {
    if (!pb.transient()) throw ConfigError("lambda_ic given for steady problem " + to_string(tag));
    pb.weights.lambda_ic = *overrides.lambda_ic;
  }
  if (overrides.lambda_bc) pb.weights.lambda_bc = *overrides.lambda_bc;
  pb.validate();
  return pb;
}

}  // namespace rpde

#pragma once

#include <optional>
#include <span>
#include <string>

#include "rpde/constraints.hpp"
#include "rpde/sampler.hpp"

namespace rpde {

struct CoeffValue {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
};

/// a(x,p) = 0.26 + sum_j (0.05/j) cos(pi/2 j x) p_j, with d a/dx.
CoeffValue smooth_diffusion_coeff(double x, std::span<const double> p);
/// a(x,p) = 0.2 + sum_j (0.1/j) cos^2(pi/2 j x) p_j, with d a/dx.
CoeffValue nonsmooth_diffusion_coeff(double x, std::span<const double> p);
/// k(x,y,p) = 1 + sum_j (1/j) cos^2(pi/4 j^1.5 x y) p_j.
double conductivity(double x, double y, std::span<const double> p);
/// k with its spatial gradient (for strong-form heat residuals).
CoeffValue conductivity_with_gradient(double x, double y, std::span<const double> p);

enum class FieldKind { smooth_diffusion, nonsmooth_diffusion, conductivity };

struct RandomFieldSpec {
  FieldKind kind = FieldKind::smooth_diffusion;

  double base() const;
  /// Amplitude multiplying p_j in mode j (1-based).
  double amplitude(int j) const;
  /// Evaluate at a spatial point (x or (x, y)).
  CoeffValue evaluate(std::span<const double> xs, std::span<const double> p) const;
  /// base minus the amplitudes of modes whose shape can turn negative.
  double positivity_lower_bound(int d) const;
};

enum class ForcingKind { constant, abs_product };

struct ForcingSpec {
  ForcingKind kind = ForcingKind::constant;
  double scale = 0.0;
  double operator()(std::span<const double> xs) const;
};

enum class ProblemTag { diffusion_smooth, diffusion_nonsmooth, heat_square, heat_hole };
ProblemTag parse_problem_tag(const std::string& tag);
std::string to_string(ProblemTag tag);

enum class LossMode { strong, variational };
LossMode parse_loss_mode(const std::string& tag);
std::string to_string(LossMode mode);

/// f(x,y) for the heat problems: 100|xy| on the square, 2 on the holed plate.
double heat_forcing(ProblemTag tag, double x, double y);

struct ProblemSpec {
  ProblemTag tag = ProblemTag::diffusion_smooth;
  DomainSpec domain;
  RandomFieldSpec field;
  ForcingSpec forcing;
  /// u(0, x) = ic_scale * (x - x^2) for transient problems.
  std::optional<double> ic_scale;
  ConstraintMode constraint = ConstraintMode::hard;
  LossMode loss = LossMode::strong;
  int d = 1;
  PenaltyWeights weights;
  std::optional<TrialForm> trial;

  bool transient() const { return domain.transient(); }
  int coord_dim() const { return domain.coord_dim(); }
  int input_dim() const { return coord_dim() + d; }
  bool is_diffusion() const { return tag == ProblemTag::diffusion_smooth || tag == ProblemTag::diffusion_nonsmooth; }

  double initial_value(double x) const;
  /// Dirichlet data; all benchmark problems have homogeneous boundaries.
  double boundary_value(std::span<const double> coords) const;
  void validate() const;
};

struct ProblemOverrides {
  std::optional<int> d;
  std::optional<ConstraintMode> constraint;
  std::optional<LossMode> loss;
  std::optional<double> lambda_ic;
  std::optional<double> lambda_bc;
};

ProblemSpec build_problem(ProblemTag tag, const ProblemOverrides& overrides = {});

}  // namespace rpde

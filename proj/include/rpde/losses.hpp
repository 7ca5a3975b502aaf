#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "rpde/autodiff.hpp"
#include "rpde/problems.hpp"
#include "rpde/resnet.hpp"
#include "rpde/sampler.hpp"

namespace rpde {

/// u_t - (a_x u_x + a u_xx) - c. `ut` is the jet along t, `ux` along x.
template <class T>
T diffusion_residual(const Jet2<T>& ut, const Jet2<T>& ux, double a, double a_x, double c) {
  return (ut.d1 - (ux.d1 * a_x + ux.d2 * a)) - c;
}

/// -(k_x u_x + k_y u_y + k (u_xx + u_yy)) - f.
template <class T>
T heat_residual(const Jet2<T>& ux, const Jet2<T>& uy, const CoeffValue& k, double f) {
  return -(((ux.d1 * k.dx + uy.d1 * k.dy) + (ux.d2 + uy.d2) * k.value)) - f;
}

/// (k/2)(u_x^2 + u_y^2) - f u.
template <class T>
T heat_variational_integrand(const Jet2<T>& ux, const Jet2<T>& uy, double k, double f) {
  return (square(ux.d1) + square(uy.d1)) * (0.5 * k) - ux.v * f;
}

/// Network-output quantities feeding one sample's loss term.
template <class T>
struct HeadInputs {
  T value{};
  std::array<T, 2> d1{};
  std::array<T, 2> d2{};
  T boundary{};  // network value at the boundary companion point (soft mode)
  T initial{};   // network value at the initial companion point (soft, transient)
};

/// Everything about a sample that does not depend on the network.
struct SampleContext {
  std::array<double, 3> coords{};     // leading network inputs (t, x) or (x, y)
  std::array<double, 3> boundary{};   // coords of the boundary companion
  double initial_data = 0.0;          // prescribed u(0, x)
  double boundary_data = 0.0;
  CoeffValue coeff;
  double forcing = 0.0;
};

/// Directions along which the network output must be differentiated, in
/// network-input coordinates.
std::vector<Direction> loss_directions(const ProblemSpec& problem);

SampleContext make_context(const ProblemSpec& problem, const SampleBatch& batch, int j);

/// One sample's contribution before the 1/n batch average.
///
/// Strong: r^2 (+ lambda_ic I^2 + lambda_bc B^2 in soft mode).
/// Variational: V (F + lambda_bc B^2), where V = |D|. Up to the constant V
/// this is the single-sample estimate F + lambda_bc B^2.
template <class T>
T sample_loss(const ProblemSpec& pb, const SampleContext& ctx, const HeadInputs<T>& in) {
  const std::vector<Direction> dirs = loss_directions(pb);
  std::array<Jet2<T>, 2> u;
  for (std::size_t k = 0; k < 2; ++k) {
    const Jet2<T> net{in.value, in.d1[k], dirs[k].second ? in.d2[k] : lift(in.value, 0.0)};
    u[k] = pb.constraint == ConstraintMode::hard
               ? hard_wrap(*pb.trial, net, std::span<const double>(ctx.coords.data(), 2), dirs[k].coord)
               : net;
  }
  T loss{};
  if (pb.loss == LossMode::strong) {
    const T r = pb.is_diffusion() ? diffusion_residual(u[0], u[1], ctx.coeff.value, ctx.coeff.dx, ctx.forcing)
                                  : heat_residual(u[0], u[1], ctx.coeff, ctx.forcing);
    loss = square(r);
    if (pb.constraint == ConstraintMode::soft) {
      loss = loss + pb.weights.lambda_bc * square(in.boundary - ctx.boundary_data);
      if (pb.transient()) loss = loss + pb.weights.lambda_ic * square(in.initial - ctx.initial_data);
    }
  } else {
    loss = heat_variational_integrand(u[0], u[1], ctx.coeff.value, ctx.forcing) * pb.domain.volume();
    if (pb.constraint == ConstraintMode::soft) {
      loss = loss + (pb.weights.lambda_bc * pb.domain.volume()) * square(in.boundary - ctx.boundary_data);
    }
  }
  return loss;
}

struct LossResult {
  double loss = 0.0;
  std::vector<double> gradient;
};

/// Mini-batch loss and parameter gradient for one problem.
///
/// `evaluate` runs the batched jet network with a fused reverse pass and a
/// small per-sample tape for the loss head. `evaluate_taped` records the
/// whole computation, network included, on a single tape; it is slow and
/// serves as a reference. `value` is a forward-only scalar evaluation.
class LossEvaluator {
 public:
  explicit LossEvaluator(ProblemSpec problem, int threads = 1);
  ~LossEvaluator();
  LossEvaluator(const LossEvaluator&) = delete;
  LossEvaluator& operator=(const LossEvaluator&) = delete;

  const ProblemSpec& problem() const { return problem_; }
  void set_threads(int threads) { threads_ = threads < 1 ? 1 : threads; }

  LossResult evaluate(const NetworkParams& params, const SampleBatch& batch);
  LossResult evaluate_taped(const NetworkParams& params, const SampleBatch& batch) const;
  double value(const NetworkParams& params, const SampleBatch& batch) const;

 private:
  struct Workspace;
  void check_batch(const NetworkParams& params, const SampleBatch& batch) const;

  ProblemSpec problem_;
  std::vector<Direction> dirs_;
  int threads_ = 1;
  std::vector<std::unique_ptr<Workspace>> workspaces_;
};

/// Strong-form batch loss (problem.loss must be strong).
LossResult strong_batch_loss(const ProblemSpec& problem, const NetworkParams& params, const SampleBatch& batch);
/// Variational batch loss (problem.loss must be variational).
LossResult variational_batch_loss(const ProblemSpec& problem, const NetworkParams& params, const SampleBatch& batch);

}  // namespace rpde

#include "rpde/losses.hpp"

#include <cmath>
#include <sstream>

#include "rpde/errors.hpp"
#include "rpde/parallel.hpp"

namespace rpde {

std::vector<Direction> loss_directions(const ProblemSpec& problem) {
  if (problem.is_diffusion()) return {{0, false}, {1, true}};
  const bool second = problem.loss == LossMode::strong;
  return {{0, second}, {1, second}};
}

SampleContext make_context(const ProblemSpec& problem, const SampleBatch& batch, int j) {
  SampleContext ctx;
  const auto jj = static_cast<std::size_t>(j);
  const auto sd = static_cast<std::size_t>(batch.spatial_dim);
  std::size_t k = 0;
  if (batch.transient()) {
    ctx.coords[k] = batch.t[jj];
    ctx.boundary[k] = batch.t[jj];
    ++k;
  }
  const std::span<const double> xs(batch.x.data() + jj * sd, sd);
  for (std::size_t s = 0; s < sd; ++s) {
    ctx.coords[k + s] = xs[s];
    if (batch.has_boundary()) ctx.boundary[k + s] = batch.boundary_x[jj * sd + s];
  }
  const std::span<const double> p(batch.p.data() + jj * static_cast<std::size_t>(batch.d),
                                  static_cast<std::size_t>(batch.d));
  ctx.coeff = problem.field.evaluate(xs, p);
  ctx.forcing = problem.forcing(xs);
  if (problem.transient()) ctx.initial_data = problem.initial_value(xs[0]);
  ctx.boundary_data = problem.boundary_value(std::span<const double>(ctx.boundary.data(), k + sd));
  return ctx;
}

namespace {

std::string describe_sample(const SampleBatch& batch, int j) {
  std::vector<double> input(static_cast<std::size_t>(batch.input_dim()));
  batch.interior_input(j, input);
  std::ostringstream os;
  os.precision(17);
  os << "sample " << j << " input (";
  for (std::size_t k = 0; k < input.size(); ++k) os << (k ? ", " : "") << input[k];
  os << ")";
  if (batch.has_boundary()) {
    os << " boundary point (";
    for (int s = 0; s < batch.spatial_dim; ++s) {
      os << (s ? ", " : "") << batch.boundary_x[static_cast<std::size_t>(j * batch.spatial_dim + s)];
    }
    os << ")";
  }
  return os.str();
}

[[noreturn]] void fault_at(const SampleBatch& batch, int j, const std::string& what) {
  throw NumericFault("non-finite loss term at " + describe_sample(batch, j) + ": " + what);
}

}  // namespace

struct LossEvaluator::Workspace {
  BatchJetEvaluator interior, boundary, initial;
  Eigen::MatrixXd in, bin, iin;
  Eigen::MatrixXd seeds, bseeds, iseeds;
  Tape tape;
  Eigen::VectorXd grad;  // aligned, so Eigen reductions into it are reproducible
  double loss = 0.0;
};

LossEvaluator::LossEvaluator(ProblemSpec problem, int threads)
    : problem_(std::move(problem)), dirs_(loss_directions(problem_)), threads_(threads < 1 ? 1 : threads) {
  problem_.validate();
}

LossEvaluator::~LossEvaluator() = default;

void LossEvaluator::check_batch(const NetworkParams& params, const SampleBatch& batch) const {
  if (batch.n < 1) throw UsageError("loss evaluation needs a nonempty batch");
  if (batch.input_dim() != params.layout().input_dim) {
    throw UsageError("batch input dimension " + std::to_string(batch.input_dim()) + " does not match network input " +
                     std::to_string(params.layout().input_dim));
  }
  if (batch.input_dim() != problem_.input_dim()) throw UsageError("batch does not match the problem dimensions");
  if (problem_.constraint == ConstraintMode::soft && !batch.has_boundary()) {
    throw UsageError("soft constraints need boundary points in the batch");
  }
  if (problem_.constraint == ConstraintMode::soft && problem_.transient() && !batch.has_initial) {
    throw UsageError("soft constraints on a transient problem need initial points in the batch");
  }
}

LossResult LossEvaluator::evaluate(const NetworkParams& params, const SampleBatch& batch) {
  check_batch(params, batch);
  const int n = batch.n;
  const int chunks = chunk_count(n);
  while (static_cast<int>(workspaces_.size()) < chunks) workspaces_.push_back(std::make_unique<Workspace>());
  const bool soft = problem_.constraint == ConstraintMode::soft;
  const bool initial = soft && problem_.transient();
  const double inv_n = 1.0 / n;
  const int in_dim = batch.input_dim();

  parallel_for_each(chunks, threads_, [&](int c) {
    Workspace& ws = *workspaces_[static_cast<std::size_t>(c)];
    const int lo = c * kChunkSize;
    const int m = std::min(n, lo + kChunkSize) - lo;
    ws.in.resize(in_dim, m);
    for (int j = 0; j < m; ++j) batch.interior_input(lo + j, std::span<double>(ws.in.col(j).data(), in_dim));
    ws.interior.forward(params, ws.in, dirs_);
    ws.seeds.setZero(ws.interior.channels(), m);
    if (soft) {
      ws.bin.resize(in_dim, m);
      for (int j = 0; j < m; ++j) batch.boundary_input(lo + j, std::span<double>(ws.bin.col(j).data(), in_dim));
      ws.boundary.forward(params, ws.bin, {});
      ws.bseeds.setZero(1, m);
    }
    if (initial) {
      ws.iin.resize(in_dim, m);
      for (int j = 0; j < m; ++j) batch.initial_input(lo + j, std::span<double>(ws.iin.col(j).data(), in_dim));
      ws.initial.forward(params, ws.iin, {});
      ws.iseeds.setZero(1, m);
    }

    ws.loss = 0.0;
    for (int j = 0; j < m; ++j) {
      const SampleContext ctx = make_context(problem_, batch, lo + j);
      Tape& tape = ws.tape;
      tape.clear();
      HeadInputs<Var> h;
      try {
        h.value = Var(&tape, tape.mark(ws.interior.value(j)));
        for (std::size_t k = 0; k < 2; ++k) {
          h.d1[k] = Var(&tape, tape.mark(ws.interior.d1(j, static_cast<int>(k))));
          if (dirs_[k].second) h.d2[k] = Var(&tape, tape.mark(ws.interior.d2(j, static_cast<int>(k))));
        }
        if (soft) h.boundary = Var(&tape, tape.mark(ws.boundary.value(j)));
        if (initial) h.initial = Var(&tape, tape.mark(ws.initial.value(j)));
        const Var loss = sample_loss(problem_, ctx, h);
        const GradientMap g = tape.backward(loss.id());
        std::size_t at = 0;
        ws.seeds(0, j) = g.values[at++] * inv_n;
        for (std::size_t k = 0; k < 2; ++k) {
          ws.seeds(ws.interior.channel_d1(static_cast<int>(k)), j) = g.values[at++] * inv_n;
          if (dirs_[k].second) ws.seeds(ws.interior.channel_d2(static_cast<int>(k)), j) = g.values[at++] * inv_n;
        }
        if (soft) ws.bseeds(0, j) = g.values[at++] * inv_n;
        if (initial) ws.iseeds(0, j) = g.values[at++] * inv_n;
        ws.loss += loss.value();
      } catch (const NumericFault& e) {
        fault_at(batch, lo + j, e.what());
      }
    }
    ws.grad.setZero(static_cast<Eigen::Index>(params.size()));
    const std::span<double> grad(ws.grad.data(), params.size());
    ws.interior.backward(ws.seeds, grad);
    if (soft) ws.boundary.backward(ws.bseeds, grad);
    if (initial) ws.initial.backward(ws.iseeds, grad);
  });

  LossResult result;
  result.gradient.assign(params.size(), 0.0);
  double total = 0.0;
  for (int c = 0; c < chunks; ++c) {
    const Workspace& ws = *workspaces_[static_cast<std::size_t>(c)];
    total += ws.loss;
    for (std::size_t k = 0; k < params.size(); ++k) result.gradient[k] += ws.grad[static_cast<Eigen::Index>(k)];
  }
  result.loss = total * inv_n;
  for (double g : result.gradient) {
    if (!std::isfinite(g)) throw NumericFault("non-finite entry in the batch gradient");
  }
  return result;
}

double LossEvaluator::value(const NetworkParams& params, const SampleBatch& batch) const {
  check_batch(params, batch);
  const bool soft = problem_.constraint == ConstraintMode::soft;
  const bool initial = soft && problem_.transient();
  std::vector<double> input(static_cast<std::size_t>(batch.input_dim()));
  double total = 0.0;
  for (int j = 0; j < batch.n; ++j) {
    const SampleContext ctx = make_context(problem_, batch, j);
    HeadInputs<double> h;
    batch.interior_input(j, input);
    for (std::size_t k = 0; k < 2; ++k) {
      const Jet2<double> jet = forward_jet(params, input, dirs_[k].coord);
      if (k == 0) h.value = jet.v;
      h.d1[k] = jet.d1;
      h.d2[k] = jet.d2;
    }
    if (soft) {
      batch.boundary_input(j, input);
      h.boundary = forward(params, input);
    }
    if (initial) {
      batch.initial_input(j, input);
      h.initial = forward(params, input);
    }
    const double loss = sample_loss(problem_, ctx, h);
    if (!std::isfinite(loss)) fault_at(batch, j, "loss term is " + std::to_string(loss));
    total += loss;
  }
  return total / batch.n;
}

LossResult LossEvaluator::evaluate_taped(const NetworkParams& params, const SampleBatch& batch) const {
  check_batch(params, batch);
  const bool soft = problem_.constraint == ConstraintMode::soft;
  const bool initial = soft && problem_.transient();
  Tape tape;
  std::vector<Var> theta;
  theta.reserve(params.size());
  for (double w : params.flat()) theta.emplace_back(&tape, tape.mark(w));
  const NetworkLayout& layout = params.layout();
  std::vector<double> input(static_cast<std::size_t>(batch.input_dim()));
  Var total;
  for (int j = 0; j < batch.n; ++j) {
    try {
      const SampleContext ctx = make_context(problem_, batch, j);
      HeadInputs<Var> h;
      batch.interior_input(j, input);
      for (std::size_t k = 0; k < 2; ++k) {
        const Jet2<Var> jet = record_forward_jet(layout, theta, input, dirs_[k].coord);
        if (k == 0) h.value = jet.v;
        h.d1[k] = jet.d1;
        h.d2[k] = jet.d2;
      }
      if (soft) {
        batch.boundary_input(j, input);
        h.boundary = record_forward(layout, theta, input);
      }
      if (initial) {
        batch.initial_input(j, input);
        h.initial = record_forward(layout, theta, input);
      }
      const Var loss = sample_loss(problem_, ctx, h);
      total = j == 0 ? loss : total + loss;
    } catch (const NumericFault& e) {
      fault_at(batch, j, e.what());
    }
  }
  const Var mean = total * (1.0 / batch.n);
  GradientMap g = tape.backward(mean.id());
  return {mean.value(), std::move(g.values)};
}

LossResult strong_batch_loss(const ProblemSpec& problem, const NetworkParams& params, const SampleBatch& batch) {
  if (problem.loss != LossMode::strong) throw UsageError("strong_batch_loss called for a variational problem");
  LossEvaluator eval(problem);
  return eval.evaluate(params, batch);
}

LossResult variational_batch_loss(const ProblemSpec& problem, const NetworkParams& params,
                                  const SampleBatch& batch) {
  if (problem.loss != LossMode::variational) throw UsageError("variational_batch_loss called for a strong problem");
  LossEvaluator eval(problem);
  return eval.evaluate(params, batch);
}

}  // namespace rpde

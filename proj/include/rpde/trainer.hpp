#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "rpde/checkpoint.hpp"
#include "rpde/losses.hpp"

namespace rpde {

/// Mini-batch training loop: one Adam step per call to step().
class Trainer {
 public:
  /// Fresh run: parameters from init_params(network, train.seed).
  Trainer(const RunConfig& config, int threads);
  /// Continue from a checkpoint. The checkpoint's problem, network,
  /// optimizer, batch size and seed must match `config`; only the budget and
  /// logging/output settings may differ.
  Trainer(const RunConfig& config, Checkpoint resume, int threads);

  /// Draw batch `iteration()`, take a descent step, return the batch loss
  /// at the pre-step parameters. NumericFault carries the iteration index.
  double step();

  std::uint64_t iteration() const { return iteration_; }
  const NetworkParams& params() const { return params_; }
  const AdamState& adam() const { return adam_; }
  const ProblemSpec& problem() const { return evaluator_->problem(); }
  Checkpoint checkpoint() const;

 private:
  RunConfig config_;
  std::unique_ptr<LossEvaluator> evaluator_;
  NetworkParams params_;
  AdamState adam_;
  std::uint64_t iteration_ = 0;
  std::vector<double> tail_;
};

/// Training batch for iteration `i` (deterministic in (seed, i)).
SampleBatch training_batch(const ProblemSpec& problem, int n, std::uint64_t seed, std::uint64_t i);

}  // namespace rpde

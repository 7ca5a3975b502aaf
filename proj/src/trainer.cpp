#include "rpde/trainer.hpp"

#include <cmath>

#include "rpde/errors.hpp"
#include "rpde/rng.hpp"

namespace rpde {

SampleBatch training_batch(const ProblemSpec& pb, int n, std::uint64_t seed, std::uint64_t i) {
  RandomStream rng(seed, streams::kTrainBatch | i);
  const bool soft = pb.constraint == ConstraintMode::soft;
  return sample_training_batch(n, pb.domain, pb.d, soft, soft && pb.transient(), rng);
}

Trainer::Trainer(const RunConfig& config, int threads) : config_(config) {
  config_.validate();
  evaluator_ = std::make_unique<LossEvaluator>(config_.problem(), threads);
  params_ = init_params(config_.network(evaluator_->problem()), config_.train_seed);
  adam_ = AdamState(config_.adam, params_.size());
}

Trainer::Trainer(const RunConfig& config, Checkpoint resume, int threads) : config_(config) {
  config_.validate();
  RunConfig a = config_, b = resume.config;
  a.iterations = b.iterations = 0;
  a.checkpoint_every = b.checkpoint_every = 0;
  a.log_every = b.log_every = 1;
  a.out_dir = b.out_dir = "";
  // Oracle, probe, evaluation and compare settings do not affect training.
  const auto training_part = [](const RunConfig& c) {
    std::string t = config_text(c, false);
    return t.substr(0, t.find("oracle.samples"));
  };
  if (training_part(a) != training_part(b)) {
    throw ConfigError("checkpoint was written for a different problem, network, optimizer or seed");
  }
  evaluator_ = std::make_unique<LossEvaluator>(config_.problem(), threads);
  params_ = std::move(resume.params);
  adam_ = std::move(resume.adam);
  adam_.config = config_.adam;
  iteration_ = resume.iteration;
  tail_ = std::move(resume.loss_tail);
}

double Trainer::step() {
  try {
    const SampleBatch batch = training_batch(evaluator_->problem(), config_.batch, config_.train_seed, iteration_);
    const LossResult r = evaluator_->evaluate(params_, batch);
    if (!std::isfinite(r.loss)) throw NumericFault("batch loss is not finite");
    adam_.config.lr = config_.learning_rate(iteration_);
    adam_step(adam_, params_.flat(), r.gradient);
    ++iteration_;
    tail_.push_back(r.loss);
    if (tail_.size() > kLossTail) tail_.erase(tail_.begin());
    return r.loss;
  } catch (const NumericFault& e) {
    throw NumericFault("iteration " + std::to_string(iteration_) + ": " + e.what());
  }
}

Checkpoint Trainer::checkpoint() const {
  Checkpoint ck;
  ck.config = config_;
  ck.iteration = iteration_;
  ck.params = params_;
  ck.adam = adam_;
  ck.loss_tail = tail_;
  return ck;
}

}  // namespace rpde

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rpde/csv_io.hpp"
#include "rpde/resnet.hpp"

namespace rpde {

/// Command-line settings shared by the subcommands. Empty strings mean
/// "not given".
struct CommandOptions {
  std::string config;
  std::string resume;      // train
  std::string checkpoint;  // evaluate
  std::string surrogate;   // compare
  std::string oracle;      // compare
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;  // overrides RPDE_THREADS
  std::ostream* log = nullptr;  // progress messages; null for silence
};

struct TrainOutcome {
  std::uint64_t start_iteration = 0;
  std::uint64_t final_iteration = 0;
  std::vector<double> losses;  // one per step taken by this invocation
  std::vector<std::string> checkpoints;
};

/// Writes <out>/loss.csv (iteration,loss every train.log_every steps) and
/// <out>/checkpoint_<iteration>.ckpt files.
TrainOutcome cmd_train(const CommandOptions& opts);

/// Writes <out>/oracle_{ensemble,summary,pdf}.csv.
EnsembleTable cmd_oracle(const CommandOptions& opts);

/// Writes <out>/surrogate_{ensemble,summary,pdf}.csv.
EnsembleTable cmd_evaluate(const CommandOptions& opts);

struct CompareReport {
  FieldComparison metrics;
  double mean_tol = 0.0, std_tol = 0.0, ks_tol = 0.0;
  bool mean_pass = false, std_pass = false, ks_pass = false;
  bool pass() const { return mean_pass && std_pass && ks_pass; }
  std::string text(const EnsembleTable& probes_of) const;
};

/// Writes <out>/compare_report.txt when an output directory is known.
CompareReport cmd_compare(const CommandOptions& opts);

/// Surrogate values at the probes for `samples` parameter draws; draw m uses
/// RandomStream(seed, kEvaluate | m).
EnsembleTable surrogate_ensemble(const ProblemSpec& problem, const NetworkParams& params,
                                 const std::vector<Probe>& probes, int samples, std::uint64_t seed);

/// Map the subcommand line to a command run and an exit code:
/// 0 ok, 1 compare thresholds not met, 2 config/usage error, 3 numeric fault.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rpde

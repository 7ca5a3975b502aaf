#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rpde/config.hpp"
#include "rpde/optimizer.hpp"
#include "rpde/resnet.hpp"

namespace rpde {

inline constexpr int kCheckpointVersion = 1;
inline constexpr std::size_t kLossTail = 1000;

/// Training state at the end of `iteration` completed steps.
///
/// File layout: a text header
///   RPDE-CHECKPOINT <version>
///   iteration <n>
///   param_count <P>
///   train_seed <seed>
///   loss_tail <k>
///   <k lines, one loss each, %.17g>
///   config_lines <c>
///   <c lines of canonical config text>
///   end_header
/// followed by little-endian f64 blocks: P parameters, then the Adam state
/// (u64 step, P first moments, P second moments).
///
/// The mini-batch stream of iteration i is RandomStream(train_seed,
/// kTrainBatch | i), so (train_seed, iteration) is the full RNG state.
struct Checkpoint {
  RunConfig config;
  std::uint64_t iteration = 0;
  NetworkParams params;
  AdamState adam;
  std::vector<double> loss_tail;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
/// ConfigError on version mismatch, malformed header or truncated payload.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rpde

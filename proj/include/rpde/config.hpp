#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rpde/optimizer.hpp"
#include "rpde/oracle.hpp"
#include "rpde/problems.hpp"
#include "rpde/resnet.hpp"

namespace rpde {

using Probe = std::array<double, 2>;

/// Everything a train/oracle/evaluate/compare run needs. Loaded from a flat
/// `key = value` file with dotted keys; unknown keys are rejected.
struct RunConfig {
  ProblemTag tag = ProblemTag::diffusion_smooth;
  ProblemOverrides overrides;

  int net_layers = 6;
  int net_width = 64;
  int net_block = 2;
  Activation activation = Activation::tanh;

  AdamConfig adam;
  // Geometric decay from adam.lr to lr_final over decay_iterations steps,
  // constant afterwards. decay_iterations = 0 keeps adam.lr throughout.
  double lr_final = 0.0;  // 0: same as adam.lr
  long decay_iterations = 0;
  double learning_rate(std::uint64_t iteration) const;

  int batch = 32;
  long iterations = 1000;
  std::uint64_t train_seed = 1;
  long checkpoint_every = 0;  // 0: initial and final checkpoints only
  long log_every = 100;

  int oracle_samples = 2000;
  int oracle_nx = 201;
  int oracle_nt = 200;
  double oracle_h = 1.0 / 64.0;
  std::uint64_t oracle_seed = 1;

  std::vector<Probe> probes;  // resolved; defaults depend on the problem

  int eval_samples = 2000;
  std::uint64_t eval_seed = 2;
  int pdf_points = 200;

  double mean_tol = 0.05;
  double std_tol = 0.15;
  double ks_tol = 0.1;

  std::string out_dir = "out";

  ProblemSpec problem() const { return build_problem(tag, overrides); }
  NetworkConfig network(const ProblemSpec& pb) const;
  OracleConfig oracle(int threads) const;
  void validate() const;
};

/// Default probe set for a problem: (t, x) pairs for diffusion, (x, y) otherwise.
std::vector<Probe> default_probes(ProblemTag tag);

/// "a,b; c,d" explicit pairs.
std::vector<Probe> parse_probe_points(const std::string& text);
/// "v1,v2,..." or "lo:hi:count".
std::vector<double> parse_axis(const std::string& text);

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical text form; parse_config_text(config_text(c)) reproduces c.
/// Without `with_output` the output.dir line is left out, so the text does
/// not depend on where a run writes.
std::string config_text(const RunConfig& config, bool with_output = true);

/// Coordinate names of the probe columns ("t","x" or "x","y").
std::array<std::string, 2> probe_axes(ProblemTag tag);

/// UsageError listing every probe outside the problem's closed domain.
void check_probes(const ProblemSpec& problem, const std::vector<Probe>& probes);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace rpde

#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace rpde {

struct AdamConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-15;
  void validate() const;
};

struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<double> m;
  std::vector<double> v;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::size_t size) : config(cfg), m(size, 0.0), v(size, 0.0) {}
};

/// One bias-corrected Adam update of theta. Non-finite gradient entries
/// raise NumericFault and leave both theta and the state untouched.
void adam_step(AdamState& state, std::span<double> theta, std::span<const double> grad);

/// Little-endian binary blocks: step, m, v. Hyperparameters are stored by
/// the caller (they come from the config).
void write_adam_state(std::ostream& out, const AdamState& state);
void read_adam_state(std::istream& in, AdamState& state, std::size_t size);

void write_f64_block(std::ostream& out, std::span<const double> values);
void read_f64_block(std::istream& in, std::span<double> values);

}  // namespace rpde

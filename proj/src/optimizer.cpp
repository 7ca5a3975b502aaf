#include "rpde/optimizer.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "rpde/errors.hpp"

namespace rpde {

static_assert(std::endian::native == std::endian::little, "checkpoint blocks assume a little-endian host");

void AdamConfig::validate() const {
  if (!(lr > 0.0)) throw ConfigError("adam.lr must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam.beta1 must lie in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam.beta2 must lie in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adam.eps must be positive");
}

void adam_step(AdamState& state, std::span<double> theta, std::span<const double> grad) {
  if (theta.size() != grad.size() || state.m.size() != theta.size() || state.v.size() != theta.size()) {
    throw UsageError("adam_step: gradient has " + std::to_string(grad.size()) + " entries for " +
                     std::to_string(theta.size()) + " parameters");
  }
  for (std::size_t k = 0; k < grad.size(); ++k) {
    if (!std::isfinite(grad[k])) {
      throw NumericFault("non-finite gradient entry " + std::to_string(k) + " at Adam step " +
                         std::to_string(state.step + 1));
    }
  }
  const AdamConfig& c = state.config;
  const std::uint64_t t = state.step + 1;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(t));
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const double g = grad[k];
    state.m[k] = c.beta1 * state.m[k] + (1.0 - c.beta1) * g;
    state.v[k] = c.beta2 * state.v[k] + (1.0 - c.beta2) * g * g;
    const double mhat = state.m[k] / bc1;
    const double vhat = state.v[k] / bc2;
    theta[k] -= c.lr * mhat / (std::sqrt(vhat) + c.eps);
  }
  state.step = t;
}

void write_f64_block(std::ostream& out, std::span<const double> values) {
  out.write(reinterpret_cast<const char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (!out) throw std::runtime_error("failed writing binary block");
}

void read_f64_block(std::istream& in, std::span<double> values) {
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size_bytes()));
  if (in.gcount() != static_cast<std::streamsize>(values.size_bytes())) {
    throw ConfigError("truncated binary block: expected " + std::to_string(values.size()) + " values");
  }
}

void write_adam_state(std::ostream& out, const AdamState& state) {
  const std::uint64_t step = state.step;
  out.write(reinterpret_cast<const char*>(&step), sizeof step);
  write_f64_block(out, state.m);
  write_f64_block(out, state.v);
}

void read_adam_state(std::istream& in, AdamState& state, std::size_t size) {
  std::uint64_t step = 0;
  in.read(reinterpret_cast<char*>(&step), sizeof step);
  if (in.gcount() != sizeof step) throw ConfigError("truncated Adam state");
  state.step = step;
  state.m.assign(size, 0.0);
  state.v.assign(size, 0.0);
  read_f64_block(in, state.m);
  read_f64_block(in, state.v);
}

}  // namespace rpde

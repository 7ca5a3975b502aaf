#include "rpde/resnet.hpp"

#include <cmath>
#include <string>
#include <type_traits>

#include "rpde/rng.hpp"

namespace rpde {

void NetworkConfig::validate() const {
  if (input_dim < 1) throw ConfigError("network input_dim must be >= 1");
  if (hidden_width < 1) throw ConfigError("network hidden_width must be >= 1");
  if (num_layers < 1) throw ConfigError("network num_layers must be >= 1");
  if (block_size < 1) throw ConfigError("network block_size must be >= 1");
  if (output_dim != 1) throw ConfigError("only scalar-output networks are supported");
  if (!widths.empty()) {
    if (widths.size() != static_cast<std::size_t>(num_layers)) {
      throw ConfigError("network widths list has " + std::to_string(widths.size()) + " entries for " +
                        std::to_string(num_layers) + " layers");
    }
    for (int w : widths) {
      if (w < 1) throw ConfigError("network layer widths must be >= 1");
    }
  }
}

NetworkLayout NetworkLayout::build(const NetworkConfig& config) {
  config.validate();
  NetworkLayout layout;
  layout.input_dim = config.input_dim;
  std::size_t offset = 0;
  int in = config.input_dim;
  const int r = config.block_size;
  for (int l = 0; l < config.num_layers; ++l) {
    LayerLayout ly;
    ly.in = in;
    ly.out = config.width(l);
    ly.weight = offset;
    offset += static_cast<std::size_t>(ly.in) * ly.out;
    ly.bias = offset;
    offset += static_cast<std::size_t>(ly.out);
    if (l >= r && l % r == 0) {
      ly.shortcut_from = l - r;
      const int from_width = config.width(l - r);
      if (from_width != ly.out) {
        ly.projection = static_cast<std::ptrdiff_t>(offset);
        offset += static_cast<std::size_t>(from_width) * ly.out;
      }
    }
    layout.hidden.push_back(ly);
    in = ly.out;
  }
  layout.output_in = in;
  layout.output_weight = offset;
  offset += static_cast<std::size_t>(in);
  layout.output_bias = offset;
  offset += 1;
  layout.total = offset;
  return layout;
}

std::size_t uniform_param_count(int input_dim, int width, int num_layers) {
  const auto n = static_cast<std::size_t>(input_dim);
  const auto w = static_cast<std::size_t>(width);
  return (n * w + w) + static_cast<std::size_t>(num_layers - 1) * (w * w + w) + (w + 1);
}

NetworkParams::NetworkParams(NetworkConfig config)
    : config_(std::move(config)), layout_(NetworkLayout::build(config_)), flat_(layout_.total, 0.0) {}

Eigen::Map<Eigen::MatrixXd> NetworkParams::weight(int layer) {
  const LayerLayout& ly = layout_.hidden[static_cast<std::size_t>(layer)];
  return {flat_.data() + ly.weight, ly.out, ly.in};
}
Eigen::Map<const Eigen::MatrixXd> NetworkParams::weight(int layer) const {
  const LayerLayout& ly = layout_.hidden[static_cast<std::size_t>(layer)];
  return {flat_.data() + ly.weight, ly.out, ly.in};
}
Eigen::Map<Eigen::VectorXd> NetworkParams::bias(int layer) {
  const LayerLayout& ly = layout_.hidden[static_cast<std::size_t>(layer)];
  return {flat_.data() + ly.bias, ly.out};
}
Eigen::Map<const Eigen::VectorXd> NetworkParams::bias(int layer) const {
  const LayerLayout& ly = layout_.hidden[static_cast<std::size_t>(layer)];
  return {flat_.data() + ly.bias, ly.out};
}
Eigen::Map<const Eigen::MatrixXd> NetworkParams::projection(int layer) const {
  const LayerLayout& ly = layout_.hidden[static_cast<std::size_t>(layer)];
  if (ly.projection < 0) return {nullptr, 0, 0};
  const int from = layout_.hidden[static_cast<std::size_t>(ly.shortcut_from)].out;
  return {flat_.data() + ly.projection, ly.out, from};
}
Eigen::Map<const Eigen::RowVectorXd> NetworkParams::output_weight() const {
  return {flat_.data() + layout_.output_weight, layout_.output_in};
}

StructuredParams NetworkParams::to_structured() const {
  StructuredParams s;
  for (int l = 0; l < config_.num_layers; ++l) {
    s.weights.emplace_back(weight(l));
    s.biases.emplace_back(bias(l));
    s.projections.emplace_back(projection(l));
  }
  s.output_weight = output_weight();
  s.output_bias = output_bias();
  return s;
}

NetworkParams NetworkParams::from_structured(const NetworkConfig& config, const StructuredParams& s) {
  NetworkParams p(config);
  if (s.weights.size() != static_cast<std::size_t>(config.num_layers)) {
    throw UsageError("from_structured: layer count mismatch");
  }
  for (int l = 0; l < config.num_layers; ++l) {
    const auto idx = static_cast<std::size_t>(l);
    const LayerLayout& ly = p.layout_.hidden[idx];
    if (s.weights[idx].rows() != ly.out || s.weights[idx].cols() != ly.in || s.biases[idx].size() != ly.out) {
      throw UsageError("from_structured: shape mismatch in layer " + std::to_string(l));
    }
    p.weight(l) = s.weights[idx];
    p.bias(l) = s.biases[idx];
    if (ly.projection >= 0) {
      const int from = p.layout_.hidden[static_cast<std::size_t>(ly.shortcut_from)].out;
      if (s.projections[idx].rows() != ly.out || s.projections[idx].cols() != from) {
        throw UsageError("from_structured: projection shape mismatch in layer " + std::to_string(l));
      }
      Eigen::Map<Eigen::MatrixXd>(p.flat_.data() + ly.projection, ly.out, from) = s.projections[idx];
    }
  }
  if (s.output_weight.size() != p.layout_.output_in) throw UsageError("from_structured: output shape mismatch");
  Eigen::Map<Eigen::RowVectorXd>(p.flat_.data() + p.layout_.output_weight, p.layout_.output_in) = s.output_weight;
  p.output_bias() = s.output_bias;
  return p;
}

NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed) {
  NetworkParams params(config);
  const NetworkLayout& layout = params.layout();
  std::span<double> theta = params.flat();
  RandomStream rng(seed, streams::kInit);
  auto fill = [&](std::size_t offset, int rows, int cols) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    const auto count = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    for (std::size_t k = 0; k < count; ++k) theta[offset + k] = rng.uniform(-limit, limit);
  };
  for (const LayerLayout& ly : layout.hidden) {
    fill(ly.weight, ly.out, ly.in);
    if (ly.projection >= 0) {
      fill(static_cast<std::size_t>(ly.projection), ly.out,
           layout.hidden[static_cast<std::size_t>(ly.shortcut_from)].out);
    }
  }
  fill(layout.output_weight, 1, layout.output_in);
  return params;
}

namespace {

// Scalar building blocks shared by the value, jet and taped evaluations.
// Each overload performs the same floating-point operations on the value
// component, which keeps forward() and forward_jet() bitwise consistent.

double from_bias(double b, std::type_identity<double>) { return b; }
Jet2<double> from_bias(double b, std::type_identity<Jet2<double>>) { return {b, 0.0, 0.0}; }
Jet2<Var> from_bias(const Var& b, std::type_identity<Jet2<Var>>) {
  const Var zero = lift(b, 0.0);
  return {b, zero, zero};
}

double weighted(double w, double y) { return w * y; }
Jet2<double> weighted(double w, const Jet2<double>& y) { return {w * y.v, w * y.d1, w * y.d2}; }
Jet2<Var> weighted(const Var& w, const Jet2<Var>& y) { return {w * y.v, w * y.d1, w * y.d2}; }
Var weighted(const Var& w, const Var& y) { return w * y; }

double activate(double z) { return std::tanh(z); }
template <class T>
Jet2<T> activate(const Jet2<T>& z) {
  return tanh(z);
}
Var activate(const Var& z) { return tanh(z); }

Var from_bias(const Var& b, std::type_identity<Var>) { return b; }

template <class S, class W>
S run_network(const NetworkLayout& layout, std::span<const W> theta, std::span<const S> input) {
  if (input.size() != static_cast<std::size_t>(layout.input_dim)) {
    throw UsageError("network input has " + std::to_string(input.size()) + " coordinates, expected " +
                     std::to_string(layout.input_dim));
  }
  const std::type_identity<S> tag;
  std::vector<std::vector<S>> outputs(layout.hidden.size());
  std::span<const S> in = input;
  for (std::size_t l = 0; l < layout.hidden.size(); ++l) {
    const LayerLayout& ly = layout.hidden[l];
    std::vector<S>& y = outputs[l];
    y.reserve(static_cast<std::size_t>(ly.out));
    for (int i = 0; i < ly.out; ++i) {
      S z = from_bias(theta[ly.bias + static_cast<std::size_t>(i)], tag);
      for (int j = 0; j < ly.in; ++j) {
        z = z + weighted(theta[ly.weight + static_cast<std::size_t>(i + j * ly.out)], in[static_cast<std::size_t>(j)]);
      }
      if (ly.shortcut_from >= 0) {
        const std::vector<S>& skip = outputs[static_cast<std::size_t>(ly.shortcut_from)];
        if (ly.projection >= 0) {
          const int from = static_cast<int>(skip.size());
          for (int m = 0; m < from; ++m) {
            z = z + weighted(theta[static_cast<std::size_t>(ly.projection) + static_cast<std::size_t>(i + m * ly.out)],
                             skip[static_cast<std::size_t>(m)]);
          }
        } else {
          z = z + skip[static_cast<std::size_t>(i)];
        }
      }
      y.push_back(activate(z));
    }
    in = y;
  }
  S out = from_bias(theta[layout.output_bias], tag);
  for (int j = 0; j < layout.output_in; ++j) {
    out = out + weighted(theta[layout.output_weight + static_cast<std::size_t>(j)], in[static_cast<std::size_t>(j)]);
  }
  return out;
}

void check_direction(const NetworkLayout& layout, int direction) {
  if (direction < 0 || direction >= layout.input_dim) {
    throw UsageError("jet direction " + std::to_string(direction) + " outside input dimension " +
                     std::to_string(layout.input_dim));
  }
}

}  // namespace

double forward(const NetworkParams& params, std::span<const double> input) {
  return run_network<double, double>(params.layout(), params.flat(), input);
}

Jet2<double> forward_jet(const NetworkParams& params, std::span<const double> input, int direction) {
  check_direction(params.layout(), direction);
  std::vector<Jet2<double>> seeded;
  seeded.reserve(input.size());
  for (std::size_t k = 0; k < input.size(); ++k) {
    seeded.push_back(static_cast<int>(k) == direction ? seed_jet(input[k]) : const_jet(input[k]));
  }
  return run_network<Jet2<double>, double>(params.layout(), params.flat(), std::span<const Jet2<double>>(seeded));
}

SurrogateOutput forward_jets(const NetworkParams& params, std::span<const double> input,
                             std::span<const int> directions) {
  SurrogateOutput out;
  for (int d : directions) out.jets.push_back(forward_jet(params, input, d));
  return out;
}

Jet2<Var> record_forward_jet(const NetworkLayout& layout, std::span<const Var> theta, std::span<const double> input,
                             int direction) {
  check_direction(layout, direction);
  if (theta.size() != layout.total) throw UsageError("record_forward_jet: parameter count mismatch");
  Tape* tape = theta.front().tape();
  std::vector<Jet2<Var>> seeded;
  for (std::size_t k = 0; k < input.size(); ++k) {
    const bool seed = static_cast<int>(k) == direction;
    seeded.push_back({Var(tape, tape->leaf(input[k])), Var(tape, tape->constant(seed ? 1.0 : 0.0)),
                      Var(tape, tape->constant(0.0))});
  }
  return run_network<Jet2<Var>, Var>(layout, theta, std::span<const Jet2<Var>>(seeded));
}

Var record_forward(const NetworkLayout& layout, std::span<const Var> theta, std::span<const double> input) {
  if (theta.size() != layout.total) throw UsageError("record_forward: parameter count mismatch");
  Tape* tape = theta.front().tape();
  std::vector<Var> leaves;
  for (double x : input) leaves.emplace_back(tape, tape->leaf(x));
  return run_network<Var, Var>(layout, theta, std::span<const Var>(leaves));
}

void BatchJetEvaluator::forward(const NetworkParams& params, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
                                std::span<const Direction> directions) {
  const NetworkLayout& layout = params.layout();
  if (inputs.rows() != layout.input_dim) {
    throw UsageError("batch input has " + std::to_string(inputs.rows()) + " rows, expected " +
                     std::to_string(layout.input_dim));
  }
  for (const Direction& d : directions) check_direction(layout, d.coord);
  params_ = &params;
  n_ = static_cast<int>(inputs.cols());
  dirs_.assign(directions.begin(), directions.end());
  d1_channel_.clear();
  d2_channel_.clear();
  channels_ = 1;
  for (const Direction& d : dirs_) {
    d1_channel_.push_back(channels_++);
    d2_channel_.push_back(d.second ? channels_++ : -1);
  }
  const int n = n_;
  const int cn = channels_ * n;
  layers_.resize(layout.hidden.size());

  LayerCache& first = layers_.front();
  first.in.setZero(layout.input_dim, cn);
  first.in.leftCols(n) = inputs;
  for (std::size_t k = 0; k < dirs_.size(); ++k) {
    first.in.block(dirs_[k].coord, d1_channel_[k] * n, 1, n).setOnes();
  }

  for (std::size_t l = 0; l < layout.hidden.size(); ++l) {
    const LayerLayout& ly = layout.hidden[l];
    LayerCache& c = layers_[l];
    const Eigen::MatrixXd& in = l == 0 ? c.in : layers_[l - 1].y;
    c.z.noalias() = params.weight(static_cast<int>(l)) * in;
    c.z.leftCols(n).colwise() += params.bias(static_cast<int>(l));
    if (ly.shortcut_from >= 0) {
      const Eigen::MatrixXd& skip = layers_[static_cast<std::size_t>(ly.shortcut_from)].y;
      if (ly.projection >= 0) {
        c.z.noalias() += params.projection(static_cast<int>(l)) * skip;
      } else {
        c.z += skip;
      }
    }
    c.s = c.z.leftCols(n).array().tanh();
    c.sp = 1.0 - c.s.square();
    c.spp = -2.0 * c.s * c.sp;
    c.y.resize(ly.out, cn);
    c.y.leftCols(n) = c.s.matrix();
    for (std::size_t k = 0; k < dirs_.size(); ++k) {
      const auto z1 = c.z.middleCols(d1_channel_[k] * n, n).array();
      c.y.middleCols(d1_channel_[k] * n, n) = (c.sp * z1).matrix();
      if (dirs_[k].second) {
        const auto z2 = c.z.middleCols(d2_channel_[k] * n, n).array();
        c.y.middleCols(d2_channel_[k] * n, n) = (c.spp * z1.square() + c.sp * z2).matrix();
      }
    }
  }

  const Eigen::RowVectorXd flat_out = params.output_weight() * layers_.back().y;
  out_.resize(channels_, n);
  for (int c = 0; c < channels_; ++c) out_.row(c) = flat_out.segment(c * n, n);
  out_.row(0).array() += params.output_bias();
}

void BatchJetEvaluator::backward(const Eigen::Ref<const Eigen::MatrixXd>& seeds, std::span<double> grad) {
  if (params_ == nullptr) throw UsageError("BatchJetEvaluator::backward called before forward");
  const NetworkParams& params = *params_;
  const NetworkLayout& layout = params.layout();
  if (seeds.rows() != channels_ || seeds.cols() != n_) throw UsageError("backward: seed shape mismatch");
  if (grad.size() != layout.total) throw UsageError("backward: gradient size mismatch");
  const int n = n_;
  const int cn = channels_ * n;

  seed_row_.resize(cn);
  for (int c = 0; c < channels_; ++c) seed_row_.segment(c * n, n) = seeds.row(c);

  output_sum_.noalias() = seed_row_ * layers_.back().y.transpose();
  Eigen::Map<Eigen::RowVectorXd>(grad.data() + layout.output_weight, layout.output_in) += output_sum_;
  grad[layout.output_bias] += seeds.row(0).sum();

  for (std::size_t l = 0; l < layers_.size(); ++l) layers_[l].ybar.setZero(layout.hidden[l].out, cn);
  layers_.back().ybar.noalias() = params.output_weight().transpose() * seed_row_;

  for (std::size_t l = layers_.size(); l-- > 0;) {
    const LayerLayout& ly = layout.hidden[l];
    LayerCache& c = layers_[l];
    sbar_ = c.ybar.leftCols(n).array();
    spbar_.setZero(ly.out, n);
    sppbar_.setZero(ly.out, n);
    c.zbar.resize(ly.out, cn);
    for (std::size_t k = 0; k < dirs_.size(); ++k) {
      const int c1 = d1_channel_[k] * n;
      const auto z1 = c.z.middleCols(c1, n).array();
      const auto y1bar = c.ybar.middleCols(c1, n).array();
      c.zbar.middleCols(c1, n) = (y1bar * c.sp).matrix();
      spbar_ += y1bar * z1;
      if (dirs_[k].second) {
        const int c2 = d2_channel_[k] * n;
        const auto z2 = c.z.middleCols(c2, n).array();
        const auto y2bar = c.ybar.middleCols(c2, n).array();
        c.zbar.middleCols(c2, n) = (y2bar * c.sp).matrix();
        c.zbar.middleCols(c1, n).array() += 2.0 * y2bar * c.spp * z1;
        spbar_ += y2bar * z2;
        sppbar_ += y2bar * z1.square();
      }
    }
    // s' = 1 - s^2 and s'' = -2 s + 2 s^3 are both functions of s.
    sbar_ += spbar_ * (-2.0 * c.s) + sppbar_ * (6.0 * c.s.square() - 2.0);
    c.zbar.leftCols(n) = (sbar_ * c.sp).matrix();

    const Eigen::MatrixXd& in = l == 0 ? c.in : layers_[l - 1].y;
    Eigen::Map<Eigen::MatrixXd>(grad.data() + ly.weight, ly.out, ly.in).noalias() += c.zbar * in.transpose();
    // Reduce into an aligned buffer first: Eigen's rowwise sum takes a
    // different summation order for unaligned destination elements.
    bias_sum_.noalias() = c.zbar.leftCols(n).rowwise().sum();
    Eigen::Map<Eigen::VectorXd>(grad.data() + ly.bias, ly.out) += bias_sum_;
    if (l > 0) layers_[l - 1].ybar.noalias() += params.weight(static_cast<int>(l)).transpose() * c.zbar;
    if (ly.shortcut_from >= 0) {
      LayerCache& skip = layers_[static_cast<std::size_t>(ly.shortcut_from)];
      if (ly.projection >= 0) {
        const auto proj = params.projection(static_cast<int>(l));
        Eigen::Map<Eigen::MatrixXd>(grad.data() + ly.projection, proj.rows(), proj.cols()).noalias() +=
            c.zbar * skip.y.transpose();
        skip.ybar.noalias() += proj.transpose() * c.zbar;
      } else {
        skip.ybar += c.zbar;
      }
    }
  }
}

}  // namespace rpde

#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

#include "rpde/autodiff.hpp"

namespace rpde {

enum class Activation { tanh };

/// Fully-connected residual network shape.
///
/// `num_layers` counts hidden layers only; the input and the affine output
/// layer are not included. Hidden layer 1 is a plain layer; after it, every
/// group of `block_size` layers forms a residual block whose last layer adds
/// the output of the layer `block_size` positions earlier *before* the
/// activation. Trailing layers that do not fill a block are plain.
struct NetworkConfig {
  int input_dim = 1;
  int hidden_width = 32;
  int num_layers = 4;
  int block_size = 2;
  Activation activation = Activation::tanh;
  int output_dim = 1;
  /// Per-layer widths; empty means `hidden_width` everywhere. Blocks whose
  /// end widths differ get a learned linear projection on the shortcut.
  std::vector<int> widths;

  void validate() const;
  int width(int layer) const { return widths.empty() ? hidden_width : widths[static_cast<std::size_t>(layer)]; }
};

struct LayerLayout {
  int in = 0;
  int out = 0;
  std::size_t weight = 0;  // out x in, column-major
  std::size_t bias = 0;
  int shortcut_from = -1;             // hidden layer whose output is added, or -1
  std::ptrdiff_t projection = -1;     // out x width(shortcut_from), column-major, or -1
};

/// Offsets of every tensor inside the flat parameter vector.
struct NetworkLayout {
  int input_dim = 0;
  std::vector<LayerLayout> hidden;
  int output_in = 0;
  std::size_t output_weight = 0;  // 1 x output_in
  std::size_t output_bias = 0;
  std::size_t total = 0;

  static NetworkLayout build(const NetworkConfig& config);
};

/// Closed-form parameter count for equal-width networks.
std::size_t uniform_param_count(int input_dim, int width, int num_layers);

/// Structured copy of the parameters, one matrix per tensor.
struct StructuredParams {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<Eigen::MatrixXd> projections;  // empty matrix where the block needs none
  Eigen::RowVectorXd output_weight;
  double output_bias = 0.0;
};

class NetworkParams {
 public:
  NetworkParams() = default;
  explicit NetworkParams(NetworkConfig config);

  const NetworkConfig& config() const { return config_; }
  const NetworkLayout& layout() const { return layout_; }
  std::size_t size() const { return flat_.size(); }

  std::span<double> flat() { return flat_; }
  std::span<const double> flat() const { return flat_; }

  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<Eigen::VectorXd> bias(int layer);
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Map<const Eigen::MatrixXd> projection(int layer) const;
  Eigen::Map<const Eigen::RowVectorXd> output_weight() const;
  double output_bias() const { return flat_[layout_.output_bias]; }
  double& output_bias() { return flat_[layout_.output_bias]; }

  StructuredParams to_structured() const;
  static NetworkParams from_structured(const NetworkConfig& config, const StructuredParams& s);

 private:
  NetworkConfig config_;
  NetworkLayout layout_;
  std::vector<double> flat_;
};

/// Glorot-uniform weights (limit sqrt(6/(fan_in+fan_out))), zero biases.
NetworkParams init_params(const NetworkConfig& config, std::uint64_t seed);

double forward(const NetworkParams& params, std::span<const double> input);

/// Output jet along input coordinate `direction`. The value component is
/// bitwise identical to forward().
Jet2<double> forward_jet(const NetworkParams& params, std::span<const double> input, int direction);

struct SurrogateOutput {
  std::vector<Jet2<double>> jets;  // one per requested direction
  double value() const { return jets.empty() ? 0.0 : jets.front().v; }
};

SurrogateOutput forward_jets(const NetworkParams& params, std::span<const double> input,
                             std::span<const int> directions);

/// Record the jet evaluation on a tape with the parameters as tape variables.
Jet2<Var> record_forward_jet(const NetworkLayout& layout, std::span<const Var> theta, std::span<const double> input,
                             int direction);

/// Value-only evaluation recorded on a tape.
Var record_forward(const NetworkLayout& layout, std::span<const Var> theta, std::span<const double> input);

/// Input coordinate to differentiate along, and whether the second
/// derivative along it is needed.
struct Direction {
  int coord = 0;
  bool second = false;
};

/// Batched jet evaluation with a fused reverse pass.
///
/// Evaluates a batch of inputs (columns) in one pass, carrying the value
/// plus first (and optionally second) directional derivatives as channels.
/// `backward` propagates adjoints of the output channels to the parameters.
/// The cache is reused across calls; reshaping happens only when the batch
/// or direction set changes.
class BatchJetEvaluator {
 public:
  void forward(const NetworkParams& params, const Eigen::Ref<const Eigen::MatrixXd>& inputs,
               std::span<const Direction> directions);

  int batch() const { return n_; }
  int channels() const { return channels_; }
  int channel_d1(int k) const { return d1_channel_[static_cast<std::size_t>(k)]; }
  int channel_d2(int k) const { return d2_channel_[static_cast<std::size_t>(k)]; }

  double value(int j) const { return out_(0, j); }
  double d1(int j, int k) const { return out_(channel_d1(k), j); }
  double d2(int j, int k) const { return out_(channel_d2(k), j); }
  /// channels x batch output block.
  const Eigen::MatrixXd& outputs() const { return out_; }

  /// Accumulate d(loss)/d(theta) into `grad` given seeds(c, j) =
  /// d(loss)/d(output channel c of sample j).
  void backward(const Eigen::Ref<const Eigen::MatrixXd>& seeds, std::span<double> grad);

 private:
  struct LayerCache {
    Eigen::MatrixXd in;   // only used for the first layer
    Eigen::MatrixXd z;    // pre-activation, width x (channels*n)
    Eigen::MatrixXd y;    // post-activation, width x (channels*n)
    Eigen::ArrayXXd s, sp, spp;
    Eigen::MatrixXd ybar;
    Eigen::MatrixXd zbar;
  };

  const NetworkParams* params_ = nullptr;
  std::vector<Direction> dirs_;
  std::vector<int> d1_channel_, d2_channel_;
  int n_ = 0;
  int channels_ = 1;
  std::vector<LayerCache> layers_;
  Eigen::MatrixXd out_;
  Eigen::RowVectorXd seed_row_, output_sum_;
  Eigen::VectorXd bias_sum_;
  Eigen::ArrayXXd sbar_, spbar_, sppbar_;
};

}  // namespace rpde

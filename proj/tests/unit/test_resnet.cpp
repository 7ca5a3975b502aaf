#include "doctest.h"

#include <cmath>

#include "rpde/errors.hpp"
#include "rpde/resnet.hpp"
#include "rpde/rng.hpp"

using namespace rpde;

namespace {

NetworkConfig make_config(int in, int width, int layers) {
  NetworkConfig c;
  c.input_dim = in;
  c.hidden_width = width;
  c.num_layers = layers;
  return c;
}

std::vector<double> random_point(int n, std::uint64_t seed) {
  RandomStream rng(seed, streams::kCheck);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (double& v : x) v = rng.uniform(-1.0, 1.0);
  return x;
}

}  // namespace

TEST_CASE("init is deterministic with zero biases") {
  const NetworkConfig cfg = make_config(4, 8, 3);
  const NetworkParams a = init_params(cfg, 11);
  const NetworkParams b = init_params(cfg, 11);
  const NetworkParams c = init_params(cfg, 12);
  CHECK(std::equal(a.flat().begin(), a.flat().end(), b.flat().begin()));
  CHECK_FALSE(std::equal(a.flat().begin(), a.flat().end(), c.flat().begin()));
  for (int l = 0; l < cfg.num_layers; ++l) CHECK(a.bias(l).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.output_bias() == 0.0);
}

TEST_CASE("glorot variance of a 256x256 layer") {
  const NetworkParams p = init_params(make_config(256, 256, 1), 3);
  const auto w = p.weight(0);
  const double mean = w.mean();
  const double var = (w.array() - mean).square().sum() / (w.size() - 1);
  CHECK(std::abs(var / (2.0 / 512.0) - 1.0) < 0.1);
}

TEST_CASE("zero network returns the output bias") {
  NetworkParams p(make_config(3, 5, 4));
  std::fill(p.flat().begin(), p.flat().end(), 0.0);
  p.output_bias() = 1.25;
  const std::vector<double> x{0.3, -2.0, 7.0};
  CHECK(forward(p, x) == 1.25);
  const Jet2<double> j = forward_jet(p, x, 1);
  CHECK(j.v == 1.25);
  CHECK(j.d1 == 0.0);
  CHECK(j.d2 == 0.0);
}

TEST_CASE("one hidden layer matches direct matrix arithmetic") {
  NetworkParams p(make_config(2, 3, 1));
  StructuredParams s = p.to_structured();
  s.weights[0] << 0.1, -0.4, 0.7, 0.2, -0.3, 0.5;
  s.biases[0] << 0.05, -0.1, 0.2;
  s.output_weight << 1.5, -2.0, 0.25;
  s.output_bias = 0.3;
  p = NetworkParams::from_structured(p.config(), s);
  const double x0 = 0.6, x1 = -0.8;
  // The comma initializer fills row by row: W = [[0.1, -0.4], [0.7, 0.2], [-0.3, 0.5]]
  const double h0 = std::tanh(0.1 * x0 - 0.4 * x1 + 0.05);
  const double h1 = std::tanh(0.7 * x0 + 0.2 * x1 - 0.1);
  const double h2 = std::tanh(-0.3 * x0 + 0.5 * x1 + 0.2);
  const double expect = 1.5 * h0 - 2.0 * h1 + 0.25 * h2 + 0.3;
  const std::vector<double> x{x0, x1};
  CHECK(std::abs(forward(p, x) - expect) < 1e-15);
}

TEST_CASE("three layers form one shortcut block 1->3") {
  const NetworkConfig cfg = make_config(2, 4, 3);
  const NetworkLayout layout = NetworkLayout::build(cfg);
  CHECK(layout.hidden[0].shortcut_from == -1);
  CHECK(layout.hidden[1].shortcut_from == -1);
  CHECK(layout.hidden[2].shortcut_from == 0);
  CHECK(layout.hidden[2].projection == -1);

  const NetworkParams p = init_params(cfg, 5);
  const StructuredParams s = p.to_structured();
  const Eigen::Vector2d x(0.4, -0.9);
  const Eigen::VectorXd y1 = (s.weights[0] * x + s.biases[0]).array().tanh();
  const Eigen::VectorXd y2 = (s.weights[1] * y1 + s.biases[1]).array().tanh();
  const Eigen::VectorXd y3 = (s.weights[2] * y2 + s.biases[2] + y1).array().tanh();
  const double expect = s.output_weight.dot(y3) + s.output_bias;
  const std::vector<double> xv{0.4, -0.9};
  CHECK(std::abs(forward(p, xv) - expect) < 1e-14);
}

TEST_CASE("zeroed block reduces to activation of the shortcut") {
  const NetworkConfig cfg = make_config(2, 4, 3);
  NetworkParams p = init_params(cfg, 9);
  p.weight(1).setZero();
  p.weight(2).setZero();
  const StructuredParams s = p.to_structured();
  const Eigen::Vector2d x(-0.2, 0.5);
  const Eigen::VectorXd y1 = (s.weights[0] * x).array().tanh();
  const Eigen::VectorXd y3 = y1.array().tanh();
  const std::vector<double> xv{-0.2, 0.5};
  CHECK(std::abs(forward(p, xv) - s.output_weight.dot(y3)) < 1e-15);
}

TEST_CASE("shortcut pattern for longer nets") {
  const NetworkLayout layout = NetworkLayout::build(make_config(3, 4, 6));
  std::vector<int> from;
  for (const auto& ly : layout.hidden) from.push_back(ly.shortcut_from);
  CHECK(from == std::vector<int>{-1, -1, 0, -1, 2, -1});
}

TEST_CASE("projection appears only for width mismatch") {
  NetworkConfig cfg = make_config(2, 4, 3);
  cfg.widths = {4, 6, 5};
  const NetworkLayout layout = NetworkLayout::build(cfg);
  CHECK(layout.hidden[2].projection >= 0);
  const NetworkParams p = init_params(cfg, 2);
  const StructuredParams s = p.to_structured();
  CHECK(s.projections[2].rows() == 5);
  CHECK(s.projections[2].cols() == 4);
  const Eigen::Vector2d x(0.1, 0.2);
  const Eigen::VectorXd y1 = (s.weights[0] * x).array().tanh();
  const Eigen::VectorXd y2 = (s.weights[1] * y1).array().tanh();
  const Eigen::VectorXd y3 = (s.weights[2] * y2 + s.projections[2] * y1).array().tanh();
  const std::vector<double> xv{0.1, 0.2};
  CHECK(std::abs(forward(p, xv) - s.output_weight.dot(y3)) < 1e-14);
}

TEST_CASE("parameter count formula") {
  CHECK(uniform_param_count(52, 256, 20) == 1263873u);
  const NetworkLayout layout = NetworkLayout::build(make_config(52, 256, 20));
  CHECK(layout.total == 1263873u);
}

TEST_CASE("structured round trip is lossless") {
  NetworkConfig cfg = make_config(3, 5, 5);
  cfg.widths = {5, 7, 6, 6, 4};
  const NetworkParams p = init_params(cfg, 8);
  const NetworkParams q = NetworkParams::from_structured(cfg, p.to_structured());
  CHECK(std::equal(p.flat().begin(), p.flat().end(), q.flat().begin()));
}

TEST_CASE("dimension mismatch is a usage error") {
  const NetworkParams p = init_params(make_config(3, 4, 2), 1);
  const std::vector<double> x{1.0, 2.0};
  CHECK_THROWS_AS(forward(p, x), UsageError);
  const std::vector<double> ok{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(forward_jet(p, ok, 3), UsageError);
}

TEST_CASE("jet value equals forward bitwise and derivatives match finite differences") {
  const NetworkParams p = init_params(make_config(5, 32, 6), 21);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> x = random_point(5, 100 + static_cast<std::uint64_t>(trial));
    for (int dir = 0; dir < 5; ++dir) {
      const Jet2<double> j = forward_jet(p, x, dir);
      CHECK(j.v == forward(p, x));
      const double h = 1e-3;
      auto f = [&](double delta) {
        std::vector<double> y = x;
        y[static_cast<std::size_t>(dir)] += delta;
        return forward(p, y);
      };
      const double d1 = (-f(2 * h) + 8 * f(h) - 8 * f(-h) + f(-2 * h)) / (12 * h);
      const double d2 = (-f(2 * h) + 16 * f(h) - 30 * f(0) + 16 * f(-h) - f(-2 * h)) / (12 * h * h);
      CHECK(std::abs(j.d1 - d1) / std::max(1.0, std::abs(j.d1)) < 1e-6);
      CHECK(std::abs(j.d2 - d2) / std::max(1.0, std::abs(j.d2)) < 1e-6);
    }
  }
}

TEST_CASE("dead input gives zero jets") {
  NetworkParams p = init_params(make_config(3, 8, 3), 4);
  p.weight(0).col(2).setZero();
  const std::vector<double> x{0.2, 0.4, 0.9};
  const Jet2<double> j = forward_jet(p, x, 2);
  CHECK(j.d1 == 0.0);
  CHECK(j.d2 == 0.0);
}

TEST_CASE("batched jets agree with scalar jets") {
  NetworkConfig cfg = make_config(4, 16, 5);
  cfg.widths = {16, 12, 16, 16, 10};
  const NetworkParams p = init_params(cfg, 31);
  const int n = 7;
  Eigen::MatrixXd in(4, n);
  for (int j = 0; j < n; ++j) {
    const auto x = random_point(4, 500 + static_cast<std::uint64_t>(j));
    for (int k = 0; k < 4; ++k) in(k, j) = x[static_cast<std::size_t>(k)];
  }
  const std::vector<Direction> dirs{{0, false}, {2, true}};
  BatchJetEvaluator ev;
  ev.forward(p, in, dirs);
  CHECK(ev.channels() == 4);
  for (int j = 0; j < n; ++j) {
    std::vector<double> x(in.col(j).data(), in.col(j).data() + 4);
    const Jet2<double> a = forward_jet(p, x, 0);
    const Jet2<double> b = forward_jet(p, x, 2);
    CHECK(std::abs(ev.value(j) - a.v) < 1e-13);
    CHECK(std::abs(ev.d1(j, 0) - a.d1) < 1e-12);
    CHECK(std::abs(ev.d1(j, 1) - b.d1) < 1e-12);
    CHECK(std::abs(ev.d2(j, 1) - b.d2) < 1e-11);
  }
}

TEST_CASE("fused reverse pass matches the taped jet gradient") {
  NetworkConfig cfg = make_config(3, 6, 4);
  cfg.widths = {6, 5, 4, 6};
  const NetworkParams p = init_params(cfg, 17);
  const int n = 3;
  Eigen::MatrixXd in(3, n);
  in << 0.1, -0.5, 0.8, 0.3, 0.2, -0.7, -0.4, 0.9, 0.6;
  const std::vector<Direction> dirs{{1, true}, {0, false}};
  BatchJetEvaluator ev;
  ev.forward(p, in, dirs);
  // Random linear functional of all output channels.
  Eigen::MatrixXd seeds(ev.channels(), n);
  RandomStream rng(1, 2);
  for (int c = 0; c < seeds.rows(); ++c)
    for (int j = 0; j < n; ++j) seeds(c, j) = rng.uniform(-1.0, 1.0);
  std::vector<double> fused(p.size(), 0.0);
  ev.backward(seeds, fused);

  Tape tape;
  std::vector<Var> theta;
  for (double w : p.flat()) theta.emplace_back(&tape, tape.mark(w));
  Var total;
  bool first = true;
  for (int j = 0; j < n; ++j) {
    const std::vector<double> x(in.col(j).data(), in.col(j).data() + 3);
    const Jet2<Var> jx = record_forward_jet(p.layout(), theta, x, 1);
    const Jet2<Var> jt = record_forward_jet(p.layout(), theta, x, 0);
    Var term = jx.v * seeds(0, j) + jx.d1 * seeds(ev.channel_d1(0), j) + jx.d2 * seeds(ev.channel_d2(0), j) +
               jt.d1 * seeds(ev.channel_d1(1), j);
    total = first ? term : total + term;
    first = false;
  }
  const GradientMap g = tape.backward(total.id());
  double worst = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    worst = std::max(worst, std::abs(g.values[k] - fused[k]) / std::max(1.0, std::abs(g.values[k])));
  }
  CHECK(worst < 1e-12);
}

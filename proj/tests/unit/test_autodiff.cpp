#include "doctest.h"

#include <cmath>
#include <numbers>

#include "rpde/autodiff.hpp"
#include "rpde/errors.hpp"
#include "rpde/rng.hpp"

using namespace rpde;

TEST_CASE("product of two leaves") {
  Tape tape;
  const Var x(&tape, tape.mark(3.0));
  const Var y(&tape, tape.mark(4.0));
  const Var f = x * y;
  CHECK(f.value() == 12.0);
  const GradientMap g = tape.backward(f.id());
  CHECK(g.values[0] == 4.0);
  CHECK(g.values[1] == 3.0);
}

TEST_CASE("tanh at zero has unit slope") {
  Tape tape;
  const Var x(&tape, tape.mark(0.0));
  const GradientMap g = tape.backward(tanh(x).id());
  CHECK(g.values[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("sin(x)^2 at pi/4") {
  Tape tape;
  const Var x(&tape, tape.mark(std::numbers::pi / 4));
  const GradientMap g = tape.backward(square(sin(x)).id());
  // d/dx sin^2 = sin(2x) = 1 at pi/4
  CHECK(std::abs(g.values[0] - 1.0) < 1e-14);
}

TEST_CASE("reverse sweep visits each node once") {
  Tape tape;
  Var x(&tape, tape.mark(0.3));
  Var acc = x;
  for (int i = 0; i < 50; ++i) acc = tanh(acc * 1.1 + x);
  tape.backward(acc.id());
  CHECK(tape.last_sweep_visits() == tape.size());
}

TEST_CASE("non-finite values raise a numeric fault") {
  Tape tape;
  const Var x(&tape, tape.mark(1e308));
  CHECK_THROWS_AS(x * 10.0, NumericFault);
  CHECK_THROWS_AS(tape.mark(std::nan("")), NumericFault);
}

TEST_CASE("record rejects inputs not on the tape") {
  Tape tape;
  tape.mark(1.0);
  const std::array<NodeId, 1> in{5};
  const std::array<double, 1> dp{1.0};
  CHECK_THROWS_AS(tape.record(OpTag::neg, in, -1.0, dp), UsageError);
}

TEST_CASE("clear keeps the tape reusable") {
  Tape tape;
  for (int round = 0; round < 3; ++round) {
    tape.clear();
    const Var x(&tape, tape.mark(2.0));
    const GradientMap g = tape.backward((x * x).id());
    CHECK(g.values.size() == 1);
    CHECK(g.values[0] == 4.0);
  }
}

TEST_CASE("affine node") {
  Tape tape;
  const std::array<Var, 2> in{Var(&tape, tape.mark(1.0)), Var(&tape, tape.mark(2.0))};
  const std::array<double, 2> w{3.0, -1.0};
  const Var f = affine(in, w, 0.5);
  CHECK(f.value() == 1.5);
  const GradientMap g = tape.backward(f.id());
  CHECK(g.values[0] == 3.0);
  CHECK(g.values[1] == -1.0);
}

TEST_CASE("jet_apply mul and tanh") {
  const std::array<Jet2<double>, 2> xy{seed_jet(2.0), seed_jet(2.0)};
  const Jet2<double> sq = jet_apply(OpTag::mul, xy);
  CHECK(sq.v == 4.0);
  CHECK(sq.d1 == 4.0);
  CHECK(sq.d2 == 2.0);

  const std::array<Jet2<double>, 1> z{seed_jet(0.0)};
  const Jet2<double> t = jet_apply(OpTag::tanh, z);
  CHECK(t.v == 0.0);
  CHECK(t.d1 == 1.0);
  CHECK(t.d2 == 0.0);
  CHECK_THROWS_AS(jet_apply(OpTag::mul, z), UsageError);
}

TEST_CASE("jets match finite differences for a composite") {
  auto f = [](double x) { return std::tanh(std::sin(x) * x + 0.3) * std::cos(x); };
  auto fj = [](Jet2<double> x) { return tanh(sin(x) * x + 0.3) * cos(x); };
  for (double x : {-1.3, -0.2, 0.0, 0.7, 2.1}) {
    const Jet2<double> j = fj(seed_jet(x));
    const double h = 1e-3;
    const double d1 = (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
    const double d2 = (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) / (12 * h * h);
    CHECK(j.v == f(x));
    CHECK(std::abs(j.d1 - d1) < 1e-9);
    CHECK(std::abs(j.d2 - d2) < 1e-6);
  }
}

TEST_CASE("jet over tape: d/dtheta of a second derivative") {
  // f(x; a) = tanh(a x); d2f/dx2 = a^2 s''(a x). Differentiate that in a.
  auto d2 = [](double a, double x) {
    const double s = std::tanh(a * x);
    return a * a * (-2.0 * s * (1.0 - s * s));
  };
  Tape tape;
  const Var a(&tape, tape.mark(0.7));
  const Jet2<Var> x{Var(&tape, tape.leaf(0.4)), Var(&tape, tape.constant(1.0)), Var(&tape, tape.constant(0.0))};
  const Jet2<Var> ax{a * x.v, a * x.d1, a * x.d2};
  const Jet2<Var> y = tanh(ax);
  CHECK(std::abs(y.d2.value() - d2(0.7, 0.4)) < 1e-14);
  const GradientMap g = tape.backward(y.d2.id());
  const double h = 1e-6;
  CHECK(std::abs(g.values[0] - (d2(0.7 + h, 0.4) - d2(0.7 - h, 0.4)) / (2 * h)) < 1e-8);
}

TEST_CASE("gradient_check on a recorded function") {
  auto f = [](Tape&, std::span<const Var> t) { return tanh(t[0] * t[1]) + square(t[2]) * t[0]; };
  const std::vector<double> theta{0.3, -0.8, 1.2};
  CHECK(gradient_check(f, theta, 1e-5) < 1e-8);
}

TEST_CASE("gradient_check flags a wrong gradient") {
  auto f = [](std::span<const double> t) { return t[0] * t[0]; };
  const std::vector<double> theta{1.0};
  const std::vector<double> wrong{3.0};
  CHECK(gradient_check(f, theta, wrong, 1e-5) > 0.1);
  CHECK_THROWS_AS(gradient_check(f, theta, wrong, 0.0), UsageError);
}

TEST_CASE("philox known-answer vectors") {
  const auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
  CHECK(zero == Philox4x32::Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  const auto ones = Philox4x32::block({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  CHECK(ones == Philox4x32::Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
}

TEST_CASE("random streams are reproducible and distinct") {
  RandomStream a(42, 7), b(42, 7), c(42, 8);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    if (x != c.uniform()) differs = true;
  }
  CHECK(differs);
}

#include "rpde/autodiff.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace rpde {

std::string_view to_string(OpTag op) {
  switch (op) {
    case OpTag::leaf: return "leaf";
    case OpTag::constant: return "constant";
    case OpTag::add: return "add";
    case OpTag::sub: return "sub";
    case OpTag::mul: return "mul";
    case OpTag::neg: return "neg";
    case OpTag::scale: return "scale";
    case OpTag::tanh: return "tanh";
    case OpTag::sin: return "sin";
    case OpTag::cos: return "cos";
    case OpTag::square: return "square";
    case OpTag::affine: return "affine";
  }
  return "unknown";
}

void Tape::reserve(std::size_t nodes, std::size_t edges) {
  nodes_.reserve(nodes);
  edges_.reserve(edges);
}

void Tape::clear() {
  nodes_.clear();
  edges_.clear();
  marked_.clear();
}

NodeId Tape::leaf(double value) { return record(OpTag::leaf, {}, value, {}); }

NodeId Tape::mark(double value) {
  const NodeId id = record(OpTag::leaf, {}, value, {});
  marked_.push_back(id);
  return id;
}

NodeId Tape::constant(double value) { return record(OpTag::constant, {}, value, {}); }

NodeId Tape::record(OpTag op, std::span<const NodeId> inputs, double value, std::span<const double> partials) {
  if (inputs.size() != partials.size()) {
    throw UsageError("Tape::record: " + std::string(to_string(op)) + " has " + std::to_string(inputs.size()) +
                     " inputs but " + std::to_string(partials.size()) + " partials");
  }
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "non-finite value " << value << " recorded by op " << to_string(op) << " at node " << nodes_.size();
    throw NumericFault(msg.str());
  }
  const auto id = static_cast<NodeId>(nodes_.size());
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (inputs[k] >= id) {
      throw UsageError("Tape::record: input node " + std::to_string(inputs[k]) + " is not on the tape");
    }
    if (!std::isfinite(partials[k])) {
      std::ostringstream msg;
      msg << "non-finite partial " << partials[k] << " recorded by op " << to_string(op) << " at node " << id;
      throw NumericFault(msg.str());
    }
  }
  nodes_.push_back({value, op, static_cast<std::uint32_t>(edges_.size()), static_cast<std::uint32_t>(inputs.size())});
  for (std::size_t k = 0; k < inputs.size(); ++k) edges_.push_back({inputs[k], partials[k]});
  return id;
}

std::vector<double> Tape::adjoints(NodeId root) const {
  if (root >= nodes_.size()) {
    throw UsageError("Tape::backward: root " + std::to_string(root) + " is not on the tape");
  }
  std::vector<double> adj(static_cast<std::size_t>(root) + 1, 0.0);
  adj[root] = 1.0;
  std::size_t visits = 0;
  for (std::size_t i = root + 1; i-- > 0;) {
    ++visits;
    const double a = adj[i];
    if (a == 0.0) continue;
    const Node& n = nodes_[i];
    const Edge* e = edges_.data() + n.first_edge;
    for (std::uint32_t k = 0; k < n.parent_count; ++k) adj[e[k].parent] += a * e[k].partial;
  }
  last_visits_ = visits;
  return adj;
}

GradientMap Tape::backward(NodeId root) const {
  adjoint_scratch_ = adjoints(root);
  GradientMap g;
  g.values.reserve(marked_.size());
  for (NodeId id : marked_) g.values.push_back(id <= root ? adjoint_scratch_[id] : 0.0);
  for (double v : g.values) {
    if (!std::isfinite(v)) throw NumericFault("non-finite gradient entry after reverse sweep");
  }
  return g;
}

namespace {

Var unary(const Var& a, OpTag op, double value, double partial) {
  const std::array<NodeId, 1> in{a.id()};
  const std::array<double, 1> dp{partial};
  return {a.tape(), a.tape()->record(op, in, value, dp)};
}

Var binary(const Var& a, const Var& b, OpTag op, double value, double pa, double pb) {
  const std::array<NodeId, 2> in{a.id(), b.id()};
  const std::array<double, 2> dp{pa, pb};
  return {a.tape(), a.tape()->record(op, in, value, dp)};
}

}  // namespace

Var operator+(const Var& a, const Var& b) { return binary(a, b, OpTag::add, a.value() + b.value(), 1.0, 1.0); }
Var operator-(const Var& a, const Var& b) { return binary(a, b, OpTag::sub, a.value() - b.value(), 1.0, -1.0); }
Var operator*(const Var& a, const Var& b) {
  return binary(a, b, OpTag::mul, a.value() * b.value(), b.value(), a.value());
}
Var operator-(const Var& a) { return unary(a, OpTag::neg, -a.value(), -1.0); }
Var operator*(const Var& a, double s) { return unary(a, OpTag::scale, a.value() * s, s); }
Var operator*(double s, const Var& a) { return unary(a, OpTag::scale, s * a.value(), s); }
Var operator+(const Var& a, double c) { return unary(a, OpTag::add, a.value() + c, 1.0); }
Var operator+(double c, const Var& a) { return unary(a, OpTag::add, c + a.value(), 1.0); }
Var operator-(const Var& a, double c) { return unary(a, OpTag::sub, a.value() - c, 1.0); }
Var operator-(double c, const Var& a) { return unary(a, OpTag::sub, c - a.value(), -1.0); }

Var tanh(const Var& a) {
  const double s = std::tanh(a.value());
  return unary(a, OpTag::tanh, s, 1.0 - s * s);
}
Var sin(const Var& a) { return unary(a, OpTag::sin, std::sin(a.value()), std::cos(a.value())); }
Var cos(const Var& a) { return unary(a, OpTag::cos, std::cos(a.value()), -std::sin(a.value())); }
Var square(const Var& a) { return unary(a, OpTag::square, a.value() * a.value(), 2.0 * a.value()); }

Var affine(std::span<const Var> inputs, std::span<const double> coeffs, double offset) {
  if (inputs.empty() || inputs.size() != coeffs.size()) throw UsageError("affine: coefficient count mismatch");
  std::vector<NodeId> ids(inputs.size());
  double value = offset;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    ids[k] = inputs[k].id();
    value += coeffs[k] * inputs[k].value();
  }
  Tape* tape = inputs.front().tape();
  return {tape, tape->record(OpTag::affine, ids, value, coeffs)};
}

Jet2<double> jet_apply(OpTag op, std::span<const Jet2<double>> in, std::span<const double> coeffs) {
  auto need = [&](std::size_t n_in, std::size_t n_coeff) {
    if (in.size() != n_in || coeffs.size() != n_coeff) {
      throw UsageError("jet_apply: wrong arity for op " + std::string(to_string(op)));
    }
  };
  switch (op) {
    case OpTag::add: need(2, 0); return in[0] + in[1];
    case OpTag::sub: need(2, 0); return in[0] - in[1];
    case OpTag::mul: need(2, 0); return in[0] * in[1];
    case OpTag::scale: need(1, 1); return in[0] * coeffs[0];
    case OpTag::tanh: need(1, 0); return tanh(in[0]);
    case OpTag::sin: need(1, 0); return sin(in[0]);
    case OpTag::cos: need(1, 0); return cos(in[0]);
    case OpTag::square: need(1, 0); return square(in[0]);
    case OpTag::affine: {
      if (in.empty()) throw UsageError("jet_apply: affine needs at least one input");
      need(in.size(), in.size() + 1);
      Jet2<double> out{coeffs[in.size()], 0.0, 0.0};
      for (std::size_t k = 0; k < in.size(); ++k) {
        out.v += coeffs[k] * in[k].v;
        out.d1 += coeffs[k] * in[k].d1;
        out.d2 += coeffs[k] * in[k].d2;
      }
      return out;
    }
    default:
      throw UsageError("jet_apply: unsupported op " + std::string(to_string(op)));
  }
}

double gradient_check(const std::function<double(std::span<const double>)>& f, std::span<const double> theta,
                      std::span<const double> analytic, double h) {
  if (!(h > 0.0)) throw UsageError("gradient_check: step must be positive");
  if (analytic.size() != theta.size()) throw UsageError("gradient_check: gradient size mismatch");
  std::vector<double> probe(theta.begin(), theta.end());
  double worst = 0.0;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    const double saved = probe[k];
    probe[k] = saved + h;
    const double fp = f(probe);
    probe[k] = saved - h;
    const double fm = f(probe);
    probe[k] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw NumericFault("gradient_check: non-finite function value probing coordinate " + std::to_string(k));
    }
    const double fd = (fp - fm) / (2.0 * h);
    worst = std::max(worst, std::abs(analytic[k] - fd) / std::max(1.0, std::abs(analytic[k])));
  }
  return worst;
}

double gradient_check(const std::function<Var(Tape&, std::span<const Var>)>& f, std::span<const double> theta,
                      double h) {
  Tape tape;
  auto evaluate = [&](std::span<const double> at, bool mark) {
    tape.clear();
    std::vector<Var> vars;
    vars.reserve(at.size());
    for (double x : at) vars.emplace_back(&tape, mark ? tape.mark(x) : tape.leaf(x));
    return f(tape, vars);
  };
  const Var root = evaluate(theta, true);
  const GradientMap g = tape.backward(root.id());
  auto value = [&](std::span<const double> at) { return evaluate(at, false).value(); };
  return gradient_check(value, theta, g.values, h);
}

}  // namespace rpde

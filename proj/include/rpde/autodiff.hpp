#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "rpde/errors.hpp"

namespace rpde {

enum class OpTag : std::uint8_t {
  leaf,
  constant,
  add,
  sub,
  mul,
  neg,
  scale,
  tanh,
  sin,
  cos,
  square,
  affine,
};

std::string_view to_string(OpTag op);

using NodeId = std::uint32_t;

/// One recorded scalar. Parents live in the owning tape's edge array at
/// [first_edge, first_edge + parent_count).
struct Node {
  double value = 0.0;
  OpTag op = OpTag::leaf;
  std::uint32_t first_edge = 0;
  std::uint32_t parent_count = 0;
};

struct Edge {
  NodeId parent = 0;
  double partial = 0.0;
};

/// Partial derivatives of a root with respect to the marked leaves, in
/// marking order.
struct GradientMap {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t k) const { return values[k]; }
};

/// Append-only scalar computation graph.
///
/// Nodes are topologically ordered by construction: a node may only reference
/// ids already on the tape. `clear()` keeps the allocation so one tape can be
/// reused across optimizer iterations.
class Tape {
 public:
  Tape() = default;

  void reserve(std::size_t nodes, std::size_t edges);
  void clear();

  /// Unmarked input (e.g. a network input coordinate).
  NodeId leaf(double value);
  /// Marked input; its adjoint is reported by backward().
  NodeId mark(double value);
  NodeId constant(double value);

  NodeId record(OpTag op, std::span<const NodeId> inputs, double value, std::span<const double> partials);

  /// Single reverse sweep from `root`; returns d(root)/d(marked leaf).
  GradientMap backward(NodeId root) const;
  /// Adjoints of every node with id <= root.
  std::vector<double> adjoints(NodeId root) const;

  const Node& node(NodeId id) const { return nodes_[id]; }
  std::span<const Edge> parents(NodeId id) const {
    const Node& n = nodes_[id];
    return {edges_.data() + n.first_edge, n.parent_count};
  }
  double value(NodeId id) const { return nodes_[id].value; }
  std::size_t size() const { return nodes_.size(); }
  std::span<const NodeId> marked() const { return marked_; }

  /// Node visits performed by the most recent reverse sweep.
  std::size_t last_sweep_visits() const { return last_visits_; }

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<NodeId> marked_;
  mutable std::vector<double> adjoint_scratch_;
  mutable std::size_t last_visits_ = 0;
};

/// Handle to a tape node with arithmetic that records as it evaluates.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  NodeId id() const { return id_; }
  double value() const { return tape_->value(id_); }

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = 0;
};

Var operator+(const Var& a, const Var& b);
Var operator-(const Var& a, const Var& b);
Var operator*(const Var& a, const Var& b);
Var operator-(const Var& a);
Var operator*(const Var& a, double s);
Var operator*(double s, const Var& a);
Var operator+(const Var& a, double c);
Var operator+(double c, const Var& a);
Var operator-(const Var& a, double c);
Var operator-(double c, const Var& a);
Var tanh(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var square(const Var& a);
/// sum_i coeffs[i] * inputs[i] + offset, recorded as one node.
Var affine(std::span<const Var> inputs, std::span<const double> coeffs, double offset);

inline double square(double a) { return a * a; }

/// Lift a double into the scalar domain of `like` (a tape constant for Var).
inline double lift(double, double c) { return c; }
inline Var lift(const Var& like, double c) { return {like.tape(), like.tape()->constant(c)}; }
inline double value_of(double a) { return a; }
inline double value_of(const Var& a) { return a.value(); }

/// Value with first and second derivative along one seeded direction.
template <class T>
struct Jet2 {
  T v{};
  T d1{};
  T d2{};
};

/// Apply f(a) given f, f' and f'' evaluated at a.v (second-order chain rule).
template <class T>
Jet2<T> chain(const Jet2<T>& a, const T& f, const T& fp, const T& fpp) {
  return {f, fp * a.d1, fpp * (a.d1 * a.d1) + fp * a.d2};
}

template <class T>
Jet2<T> operator+(const Jet2<T>& a, const Jet2<T>& b) {
  return {a.v + b.v, a.d1 + b.d1, a.d2 + b.d2};
}
template <class T>
Jet2<T> operator-(const Jet2<T>& a, const Jet2<T>& b) {
  return {a.v - b.v, a.d1 - b.d1, a.d2 - b.d2};
}
template <class T>
Jet2<T> operator*(const Jet2<T>& a, const Jet2<T>& b) {
  return {a.v * b.v, a.d1 * b.v + a.v * b.d1, (a.d2 * b.v + 2.0 * (a.d1 * b.d1)) + a.v * b.d2};
}
template <class T>
Jet2<T> operator*(const Jet2<T>& a, double s) {
  return {a.v * s, a.d1 * s, a.d2 * s};
}
template <class T>
Jet2<T> operator*(double s, const Jet2<T>& a) {
  return a * s;
}
template <class T>
Jet2<T> operator+(const Jet2<T>& a, double c) {
  return {a.v + c, a.d1, a.d2};
}
template <class T>
Jet2<T> operator+(double c, const Jet2<T>& a) {
  return a + c;
}
template <class T>
Jet2<T> operator-(double c, const Jet2<T>& a) {
  return {c - a.v, -a.d1, -a.d2};
}

template <class T>
Jet2<T> tanh(const Jet2<T>& a) {
  using std::tanh;
  const T s = tanh(a.v);
  const T sp = 1.0 - s * s;
  const T spp = (-2.0 * s) * sp;
  return chain(a, s, sp, spp);
}
template <class T>
Jet2<T> sin(const Jet2<T>& a) {
  using std::cos;
  using std::sin;
  const T s = sin(a.v);
  return chain(a, s, cos(a.v), -s);
}
template <class T>
Jet2<T> cos(const Jet2<T>& a) {
  using std::cos;
  using std::sin;
  const T c = cos(a.v);
  return chain(a, c, -sin(a.v), -c);
}
template <class T>
Jet2<T> square(const Jet2<T>& a) {
  return chain(a, a.v * a.v, 2.0 * a.v, lift(a.v, 2.0));
}

/// Jet of the input coordinate itself when it is the seeded direction.
inline Jet2<double> seed_jet(double x) { return {x, 1.0, 0.0}; }
inline Jet2<double> const_jet(double x) { return {x, 0.0, 0.0}; }

/// Evaluate a supported op on jets.
///
/// `scale` takes one coefficient; `affine` takes one coefficient per input
/// followed by the offset. Other ops take no coefficients.
Jet2<double> jet_apply(OpTag op, std::span<const Jet2<double>> inputs, std::span<const double> coeffs = {});

/// Max over coordinates of |analytic - central FD| / max(1, |analytic|).
///
/// `f` records the scalar function of the parameters on the supplied tape;
/// the analytic gradient comes from one reverse sweep.
double gradient_check(const std::function<Var(Tape&, std::span<const Var>)>& f, std::span<const double> theta,
                      double h);

/// Same measure for a gradient computed elsewhere.
double gradient_check(const std::function<double(std::span<const double>)>& f, std::span<const double> theta,
                      std::span<const double> analytic, double h);

}  // namespace rpde

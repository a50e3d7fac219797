// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Scalar reverse-mode automatic differentiation.
//
// A Tape is an append-only list of nodes. Every node stores its value and the
// local partial derivative with respect to each of its parents, as supplied by
// the operator kernel that created it. `backward` sweeps the tape once in
// reverse creation order, which is a valid reverse topological order because
// parents always precede children.

#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dfl {

/// Index of a node on a particular tape.
struct NodeId {
  std::uint32_t index = 0;

  friend bool operator==(NodeId, NodeId) = default;
  friend auto operator<=>(NodeId, NodeId) = default;
};

struct Edge {
  NodeId parent;
  double partial;
};

/// Adjoints produced by `Tape::backward`, indexed by node.
class GradientMap {
 public:
  GradientMap() = default;
  GradientMap(NodeId root, std::vector<double> adjoints)
      : root_(root), adjoints_(std::move(adjoints)) {}

  double operator[](NodeId node) const {
    return node.index < adjoints_.size() ? adjoints_[node.index] : 0.0;
  }
  NodeId root() const { return root_; }
  std::size_t size() const { return adjoints_.size(); }
  std::span<const double> adjoints() const { return adjoints_; }

 private:
  NodeId root_{};
  std::vector<double> adjoints_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) noexcept = default;
  Tape& operator=(Tape&&) noexcept = default;

  /// A parentless node. Throws NumericError on a non-finite value.
  NodeId leaf(double value, std::string_view label = "leaf");

  /// Appends a node computed from `inputs`; `partials[i]` is
  /// d(value)/d(inputs[i]). Throws on length mismatch or non-finite numbers.
  NodeId record(std::string_view label, std::span<const NodeId> inputs, double value,
                std::span<const double> partials);

  NodeId record(std::string_view label, std::initializer_list<NodeId> inputs, double value,
                std::initializer_list<double> partials) {
    return record(label, std::span<const NodeId>(inputs.begin(), inputs.size()), value,
                  std::span<const double>(partials.begin(), partials.size()));
  }

  double value(NodeId node) const { return nodes_.at(node.index).value; }
  std::string_view label(NodeId node) const { return labels_[nodes_.at(node.index).label]; }
  std::span<const Edge> parents(NodeId node) const;
  std::size_t size() const { return nodes_.size(); }
  bool contains(NodeId node) const { return node.index < nodes_.size(); }

  /// Reverse sweep from `root` with adjoint(root) = seed.
  GradientMap backward(NodeId root, double seed = 1.0) const;

  /// One node per line: `id op-label value [parent:partial ...]`.
  void dump(std::ostream& out) const;

  void clear();

 private:
  struct Node {
    double value;
    std::uint32_t label;
    std::uint32_t first_edge;
    std::uint32_t edge_count;
  };

  std::uint32_t intern(std::string_view label);

  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::string> labels_;
};

/// A scalar function that builds its computation on a tape from input leaves.
using TapeFunction = std::function<NodeId(Tape&, std::span<const NodeId>)>;

enum class Stencil {
  kThreePoint,  // (f(x+h) - f(x-h)) / 2h
  kFivePoint,   // (-f(x+2h) + 8f(x+h) - 8f(x-h) + f(x-2h)) / 12h
};

struct FiniteDifferenceReport {
  std::vector<double> analytic;
  std::vector<double> numeric;
  double max_abs_error = 0.0;
};

/// Compares `backward()` against central differences of `f` at `point`.
FiniteDifferenceReport finite_difference_report(const TapeFunction& f,
                                                std::span<const double> point, double h,
                                                Stencil stencil = Stencil::kThreePoint);

/// Max coordinate-wise |analytic - numeric|.
double finite_difference_check(const TapeFunction& f, std::span<const double> point, double h,
                               Stencil stencil = Stencil::kThreePoint);

}  // namespace dfl

// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/autodiff.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "dfl/error.hpp"

namespace dfl {

NodeId Tape::leaf(double value, std::string_view label) {
  if (!std::isfinite(value)) {
    throw NumericError("leaf value is not finite");
  }
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(Node{value, intern(label), static_cast<std::uint32_t>(edges_.size()), 0});
  return NodeId{id};
}

NodeId Tape::record(std::string_view label, std::span<const NodeId> inputs, double value,
                    std::span<const double> partials) {
  if (inputs.size() != partials.size()) {
    throw NumericError("record(" + std::string(label) + "): " + std::to_string(inputs.size()) +
                       " inputs but " + std::to_string(partials.size()) + " partials");
  }
  if (!std::isfinite(value)) {
    throw NumericError("record(" + std::string(label) + "): value is not finite");
  }
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (!std::isfinite(partials[i])) {
      throw NumericError("record(" + std::string(label) + "): partial " + std::to_string(i) +
                         " is not finite");
    }
    if (inputs[i].index >= id) {
      throw NumericError("record(" + std::string(label) + "): input is not on this tape");
    }
  }
  const auto first = static_cast<std::uint32_t>(edges_.size());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    edges_.push_back(Edge{inputs[i], partials[i]});
  }
  nodes_.push_back(Node{value, intern(label), first, static_cast<std::uint32_t>(inputs.size())});
  return NodeId{id};
}

std::span<const Edge> Tape::parents(NodeId node) const {
  const Node& n = nodes_.at(node.index);
  return {edges_.data() + n.first_edge, n.edge_count};
}

GradientMap Tape::backward(NodeId root, double seed) const {
  if (!contains(root)) {
    throw NumericError("backward: root is not on this tape");
  }
  std::vector<double> adjoint(static_cast<std::size_t>(root.index) + 1, 0.0);
  adjoint[root.index] = seed;
  for (std::size_t i = root.index + 1; i-- > 0;) {
    const double a = adjoint[i];
    if (a == 0.0) continue;
    const Node& n = nodes_[i];
    for (std::uint32_t e = 0; e < n.edge_count; ++e) {
      const Edge& edge = edges_[n.first_edge + e];
      adjoint[edge.parent.index] += a * edge.partial;
    }
  }
  return GradientMap(root, std::move(adjoint));
}

void Tape::dump(std::ostream& out) const {
  char buf[64];
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    std::snprintf(buf, sizeof buf, "%.17g", n.value);
    out << i << ' ' << labels_[n.label] << ' ' << buf;
    for (std::uint32_t e = 0; e < n.edge_count; ++e) {
      const Edge& edge = edges_[n.first_edge + e];
      std::snprintf(buf, sizeof buf, "%.17g", edge.partial);
      out << ' ' << edge.parent.index << ':' << buf;
    }
    out << '\n';
  }
}

void Tape::clear() {
  nodes_.clear();
  edges_.clear();
}

std::uint32_t Tape::intern(std::string_view label) {
  // Label sets are tiny (one per operator kind), so a scan beats hashing.
  for (std::uint32_t i = 0; i < labels_.size(); ++i) {
    if (labels_[i] == label) return i;
  }
  labels_.emplace_back(label);
  return static_cast<std::uint32_t>(labels_.size() - 1);
}

namespace {

double evaluate_at(const TapeFunction& f, std::span<const double> point) {
  Tape tape;
  std::vector<NodeId> inputs;
  inputs.reserve(point.size());
  for (double x : point) inputs.push_back(tape.leaf(x, "input"));
  return tape.value(f(tape, inputs));
}

}  // namespace

FiniteDifferenceReport finite_difference_report(const TapeFunction& f,
                                                std::span<const double> point, double h,
                                                Stencil stencil) {
  FiniteDifferenceReport report;
  {
    Tape tape;
    std::vector<NodeId> inputs;
    for (double x : point) inputs.push_back(tape.leaf(x, "input"));
    const NodeId root = f(tape, inputs);
    const GradientMap grad = tape.backward(root);
    for (NodeId in : inputs) report.analytic.push_back(grad[in]);
  }
  std::vector<double> shifted(point.begin(), point.end());
  auto at = [&](std::size_t i, double offset) {
    shifted[i] = point[i] + offset;
    const double v = evaluate_at(f, shifted);
    shifted[i] = point[i];
    return v;
  };
  for (std::size_t i = 0; i < point.size(); ++i) {
    double numeric = 0.0;
    if (stencil == Stencil::kThreePoint) {
      numeric = (at(i, h) - at(i, -h)) / (2.0 * h);
    } else {
      numeric = (-at(i, 2 * h) + 8.0 * at(i, h) - 8.0 * at(i, -h) + at(i, -2 * h)) / (12.0 * h);
    }
    report.numeric.push_back(numeric);
    report.max_abs_error = std::max(report.max_abs_error, std::abs(numeric - report.analytic[i]));
  }
  return report;
}

double finite_difference_check(const TapeFunction& f, std::span<const double> point, double h,
                               Stencil stencil) {
  return finite_difference_report(f, point, h, stencil).max_abs_error;
}

}  // namespace dfl

// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Empirical analysis of operator derivatives: Monte-Carlo estimates of the
// fraction of the input cube with a nonvanishing derivative, single-passing
// audits, gradient-quality ratios of implication instances, and dense
// derivative surfaces.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dfl/logic.hpp"
#include "dfl/operators.hpp"
#include "dfl/valuation.hpp"

namespace dfl {

/// A partial is "nonzero" above this magnitude.
inline constexpr double kNonzeroPartial = 1e-12;

/// Computes every partial derivative of an n-ary function at `x`.
using GradientFunction = std::function<void(std::span<const double> x, std::vector<double>& grad)>;

/// Partials of a catalog operator: binary operators need n = 2.
GradientFunction gradient_of(const OperatorDescriptor& op, std::size_t n);

/// outer(inner(x_1..x_k), inner(x_{k+1}..x_{2k}), ...) over `groups` groups
/// of `group_size` inputs, differentiated by the chain rule.
GradientFunction compose(const OperatorDescriptor& outer, const OperatorDescriptor& inner,
                         std::size_t groups, std::size_t group_size);

struct ClosedForm {
  double value;
  std::string label;
};

struct FractionEstimate {
  OperatorDescriptor op;
  std::size_t n = 0;
  std::size_t samples = 0;
  std::size_t hits = 0;  // integer count, so estimates are order independent
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<ClosedForm> closed_form;
  std::optional<ClosedForm> alternative;  // competing candidate, when one exists

  /// |estimate - closed form| in standard errors; nullopt without a form.
  std::optional<double> z_score() const;
};

/// Known closed forms of the nonvanishing fraction: Łukasiewicz 1/n!,
/// nilpotent 1/2^(n-1), Yager (t-norm n=2, aggregator any n) the positive
/// orthant of the unit p-ball Γ(1+1/p)^n / Γ(1+n/p).
std::optional<ClosedForm> nonvanishing_closed_form(const OperatorDescriptor& op, std::size_t n);

/// For the Yager aggregator with p = 2: the candidate with Γ(n/2 + 1/2) in
/// place of Γ(n/2 + 1).
std::optional<ClosedForm> nonvanishing_alternative(const OperatorDescriptor& op, std::size_t n);

/// Throws SemanticError when samples < 10^4.
FractionEstimate estimate_nonvanishing_fraction(const OperatorDescriptor& op, std::size_t n,
                                                std::size_t samples, std::uint64_t seed);

struct SinglePassingAudit {
  bool single_passing = true;
  std::vector<double> witness;  // a point with two or more nonzero partials
  std::size_t max_active = 0;
};

SinglePassingAudit single_passing_audit(const GradientFunction& f, std::size_t n,
                                        std::size_t samples, std::uint64_t seed);
SinglePassingAudit single_passing_audit(const OperatorDescriptor& op, std::size_t n,
                                        std::size_t samples, std::uint64_t seed);

/// Truth label of a subformula instance.
using Labeling = std::function<bool(const Formula& subformula, const VariableAssignment& mu)>;

/// Classical evaluation of subformulas with atom truth from `truth`.
Labeling classical_labels(std::function<bool(const std::string&, std::span<const std::size_t>)> truth);

struct GradientQuality {
  double cons = 0.0;         // sum of d e(phi) / d consequent occurrence
  double ant = 0.0;          // sum of d e(phi) / d negated antecedent occurrence
  double cons_ratio = 0.0;   // cons / (cons + ant)
  double cu_cons_ratio = 0.0;  // share of cons on instances with a true consequent
  double cu_ant_ratio = 0.0;   // share of ant on instances with a false antecedent
  std::size_t instances = 0;
  std::vector<std::size_t> not_applicable;  // formulas without a top implication
};

GradientQuality gradient_quality(const KnowledgeBase& kb, const GroundingTable& g, Tape& tape,
                                 const OperatorConfig& ops, const Labeling& labels);

struct SurfacePoint {
  double a, c, d_consequent, d_negated_antecedent;
};

/// Derivatives of an implication on the grid {0, step, ..., 1}^2, `a` major.
/// Throws SemanticError unless 1/step is an integer.
std::vector<SurfacePoint> derivative_surface(const BinaryOperator& implication, double step);

struct YagerFractionCheck {
  double estimate;
  double closed_form;
  double z_score;
};

YagerFractionCheck yager_tnorm_fraction_check(double p, std::size_t samples, std::uint64_t seed);

struct InteractionPoint {
  double a, c, d_negated_antecedent;
};

/// d A(I(a, c), I(a2, c2)) / d(1 - a) over the grid, with the second
/// instance fixed at a2 = sqrt(0.9), c2 = 0 so that (a2 - a2 c2)^2 = 0.9.
std::vector<InteractionPoint> implication_aggregator_interaction(const Aggregator& agg,
                                                                 const BinaryOperator& implication,
                                                                 double step);

}  // namespace dfl

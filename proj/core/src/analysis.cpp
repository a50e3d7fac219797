// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/analysis.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "dfl/error.hpp"
#include "dfl/random.hpp"

namespace dfl {
namespace {

constexpr std::size_t kMinSamples = 10000;

bool is_binary_family(Family f) {
  return f == Family::kTNorm || f == Family::kTConorm || f == Family::kImplication;
}

std::size_t count_active(const std::vector<double>& grad) {
  std::size_t n = 0;
  for (double d : grad) n += std::abs(d) > kNonzeroPartial;
  return n;
}

double orthant_ball(double p, std::size_t n) {
  const double nn = static_cast<double>(n);
  return std::exp(nn * std::lgamma(1.0 + 1.0 / p) - std::lgamma(1.0 + nn / p));
}

}  // namespace

GradientFunction gradient_of(const OperatorDescriptor& op, std::size_t n) {
  if (is_binary_family(op.family)) {
    if (n != 2) throw SemanticError(op.name + " takes exactly 2 inputs");
    const BinaryOperator k = BinaryOperator::make(op.family, op.name, op.params);
    return [k](std::span<const double> x, std::vector<double>& grad) {
      const BinaryEval r = k(x[0], x[1]);
      grad.assign({r.d_first, r.d_second});
    };
  }
  if (op.family != Family::kAggregator) throw SemanticError("no gradient for " + op.name);
  if (n < 1) throw SemanticError("aggregators need at least one input");
  const Aggregator agg = Aggregator::make(op.name, op.params);
  return [agg](std::span<const double> x, std::vector<double>& grad) { grad = agg(x).partials; };
}

GradientFunction compose(const OperatorDescriptor& outer, const OperatorDescriptor& inner,
                         std::size_t groups, std::size_t group_size) {
  if (outer.family != Family::kAggregator && !is_binary_family(outer.family)) {
    throw SemanticError("cannot compose " + outer.name);
  }
  const GradientFunction inner_grad = gradient_of(inner, group_size);
  const GradientFunction outer_grad = gradient_of(outer, groups);
  auto value_of = [](const OperatorDescriptor& op) -> std::function<double(std::span<const double>)> {
    if (is_binary_family(op.family)) {
      const BinaryOperator k = BinaryOperator::make(op.family, op.name, op.params);
      return [k](std::span<const double> x) { return k.value(x[0], x[1]); };
    }
    const Aggregator a = Aggregator::make(op.name, op.params);
    return [a](std::span<const double> x) { return a.value(x); };
  };
  const auto inner_value = value_of(inner);
  return [=](std::span<const double> x, std::vector<double>& grad) {
    std::vector<double> mid(groups), g_outer, g_inner;
    for (std::size_t k = 0; k < groups; ++k) mid[k] = inner_value(x.subspan(k * group_size, group_size));
    outer_grad(mid, g_outer);
    grad.assign(groups * group_size, 0.0);
    for (std::size_t k = 0; k < groups; ++k) {
      inner_grad(x.subspan(k * group_size, group_size), g_inner);
      for (std::size_t j = 0; j < group_size; ++j) grad[k * group_size + j] = g_outer[k] * g_inner[j];
    }
  };
}

std::optional<double> FractionEstimate::z_score() const {
  if (!closed_form) return std::nullopt;
  const double diff = std::abs(estimate - closed_form->value);
  if (std_error == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / std_error;
}

std::optional<ClosedForm> nonvanishing_closed_form(const OperatorDescriptor& op, std::size_t n) {
  const bool tnorm = op.family == Family::kTNorm && n == 2;
  if (!tnorm && op.family != Family::kAggregator) return std::nullopt;
  if (op.name == "lukasiewicz") return ClosedForm{1.0 / std::tgamma(static_cast<double>(n) + 1.0), "1/n!"};
  if (op.name == "nilpotent") return ClosedForm{std::pow(0.5, static_cast<double>(n) - 1.0), "1/2^(n-1)"};
  if (op.name != "yager" || !op.params.p) return std::nullopt;
  const double p = *op.params.p;
  if (tnorm) {
    const double v = std::sqrt(std::numbers::pi) * std::pow(4.0, -1.0 / p) * std::tgamma(1.0 / p) /
                     (p * std::tgamma(0.5 + 1.0 / p));
    return ClosedForm{v, "sqrt(pi) 4^(-1/p) G(1/p) / (p G(1/2 + 1/p))"};
  }
  if (p == 2.0) {
    const double nn = static_cast<double>(n);
    return ClosedForm{std::pow(std::numbers::pi, nn / 2) / (std::pow(2.0, nn) * std::tgamma(nn / 2 + 1)),
                      "pi^(n/2) / (2^n G(n/2 + 1))"};
  }
  return ClosedForm{orthant_ball(p, n), "G(1 + 1/p)^n / G(1 + n/p)"};
}

std::optional<ClosedForm> nonvanishing_alternative(const OperatorDescriptor& op, std::size_t n) {
  if (op.family != Family::kAggregator || op.name != "yager" || op.params.p != 2.0) return std::nullopt;
  const double nn = static_cast<double>(n);
  return ClosedForm{std::pow(std::numbers::pi, nn / 2) / (std::pow(2.0, nn) * std::tgamma(nn / 2 + 0.5)),
                    "pi^(n/2) / (2^n G(n/2 + 1/2))"};
}

FractionEstimate estimate_nonvanishing_fraction(const OperatorDescriptor& op, std::size_t n,
                                                std::size_t samples, std::uint64_t seed) {
  if (samples < kMinSamples) throw SemanticError("at least 10000 samples are required");
  const GradientFunction grad_fn = gradient_of(op, n);
  Rng rng(seed);
  std::vector<double> x(n), grad;
  FractionEstimate out;
  out.op = op;
  out.n = n;
  out.samples = samples;
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& v : x) v = rng.uniform();
    grad_fn(x, grad);
    out.hits += count_active(grad) > 0;
  }
  out.estimate = static_cast<double>(out.hits) / static_cast<double>(samples);
  out.std_error = std::sqrt(out.estimate * (1.0 - out.estimate) / static_cast<double>(samples));
  out.closed_form = nonvanishing_closed_form(op, n);
  out.alternative = nonvanishing_alternative(op, n);
  return out;
}

SinglePassingAudit single_passing_audit(const GradientFunction& f, std::size_t n, std::size_t samples,
                                        std::uint64_t seed) {
  if (samples < kMinSamples) throw SemanticError("at least 10000 samples are required");
  Rng rng(seed);
  std::vector<double> x(n), grad;
  SinglePassingAudit out;
  for (std::size_t s = 0; s < samples; ++s) {
    for (double& v : x) v = rng.uniform();
    f(x, grad);
    const std::size_t active = count_active(grad);
    if (active > out.max_active) out.max_active = active;
    if (active > 1 && out.single_passing) {
      out.single_passing = false;
      out.witness = x;
    }
  }
  return out;
}

SinglePassingAudit single_passing_audit(const OperatorDescriptor& op, std::size_t n,
                                        std::size_t samples, std::uint64_t seed) {
  return single_passing_audit(gradient_of(op, n), n, samples, seed);
}

Labeling classical_labels(std::function<bool(const std::string&, std::span<const std::size_t>)> truth) {
  return [truth = std::move(truth)](const Formula& f, const VariableAssignment& mu) {
    std::function<bool(const Formula&)> eval = [&](const Formula& s) -> bool {
      switch (s.kind()) {
        case Formula::Kind::kAtom: {
          std::vector<std::size_t> objects;
          for (const auto& v : s.names()) objects.push_back(mu.at(v));
          return truth(s.predicate(), objects);
        }
        case Formula::Kind::kNot: return !eval(s.child());
        case Formula::Kind::kAnd: return eval(s.lhs()) && eval(s.rhs());
        case Formula::Kind::kOr: return eval(s.lhs()) || eval(s.rhs());
        case Formula::Kind::kImplies: return !eval(s.lhs()) || eval(s.rhs());
        case Formula::Kind::kForAll: break;
      }
      throw SemanticError("labels are defined for quantifier-free subformulas");
    };
    return eval(f);
  };
}

GradientQuality gradient_quality(const KnowledgeBase& kb, const GroundingTable& g, Tape& tape,
                                 const OperatorConfig& ops, const Labeling& labels) {
  const KbEvaluation ev = evaluate_kb(tape, kb, g, ops, true);
  const GradientMap grad = tape.backward(ev.loss);
  GradientQuality out;
  for (std::size_t i = 0; i < kb.size(); ++i) {
    if (matrix(kb.formulas()[i].formula).kind() != Formula::Kind::kImplies) out.not_applicable.push_back(i);
  }
  double cu_cons = 0.0, cu_ant = 0.0;
  for (const ImplicationInstance& inst : ev.implications) {
    const auto& wf = kb.formulas()[inst.formula];
    // The loss is -sum w e, so de/dnode = -dL/dnode / w.
    const double d_cons = -grad[inst.consequent] / wf.weight;
    const double d_ant = grad[inst.antecedent] / wf.weight;  // d/d(not a) = -d/da
    const Formula& m = matrix(wf.formula);
    const std::vector<std::string> vars = free_and_bound(wf.formula).bound;
    VariableAssignment mu;
    for (std::size_t k = 0; k < vars.size(); ++k) mu[vars[k]] = inst.objects[k];
    out.cons += d_cons;
    out.ant += d_ant;
    if (labels(m.rhs(), mu)) cu_cons += d_cons;
    if (!labels(m.lhs(), mu)) cu_ant += d_ant;
    ++out.instances;
  }
  if (out.cons + out.ant > 0.0) out.cons_ratio = out.cons / (out.cons + out.ant);
  if (out.cons > 0.0) out.cu_cons_ratio = cu_cons / out.cons;
  if (out.ant > 0.0) out.cu_ant_ratio = cu_ant / out.ant;
  return out;
}

std::vector<SurfacePoint> derivative_surface(const BinaryOperator& implication, double step) {
  if (!(step > 0.0 && step <= 1.0)) throw SemanticError("grid step must lie in (0, 1]");
  const double cells = 1.0 / step;
  if (std::abs(cells - std::round(cells)) > 1e-9) throw SemanticError("grid step must divide 1");
  const int m = static_cast<int>(std::round(cells));
  std::vector<SurfacePoint> out;
  for (int i = 0; i <= m; ++i) {
    for (int j = 0; j <= m; ++j) {
      const double a = static_cast<double>(i) / m, c = static_cast<double>(j) / m;
      const BinaryEval r = implication(a, c);
      out.push_back({a, c, r.d_second, -r.d_first});
    }
  }
  return out;
}

YagerFractionCheck yager_tnorm_fraction_check(double p, std::size_t samples, std::uint64_t seed) {
  if (!(p >= 1.0)) throw SemanticError("Yager p must be at least 1");
  OperatorDescriptor op;
  op.family = Family::kTNorm;
  op.name = "yager";
  op.params.p = p;
  const FractionEstimate e = estimate_nonvanishing_fraction(op, 2, samples, seed);
  return {e.estimate, e.closed_form->value, *e.z_score()};
}

std::vector<InteractionPoint> implication_aggregator_interaction(const Aggregator& agg,
                                                                 const BinaryOperator& implication,
                                                                 double step) {
  const double a2 = std::sqrt(0.9), c2 = 0.0;
  const BinaryEval fixed = implication(a2, c2);
  std::vector<InteractionPoint> out;
  for (const SurfacePoint& s : derivative_surface(implication, step)) {
    const BinaryEval r = implication(s.a, s.c);
    const double values[] = {r.value, fixed.value};
    double d = std::numeric_limits<double>::infinity();  // log-domain pole at I = 0
    try {
      d = agg(values).partials[0] * -r.d_first;
    } catch (const NumericError&) {
    }
    out.push_back({s.a, s.c, d});
  }
  return out;
}

}  // namespace dfl

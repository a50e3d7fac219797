// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dfl/error.hpp"

namespace dfl {
namespace {

OperatorDescriptor op(Family family, const char* name, std::optional<double> p = std::nullopt) {
  OperatorDescriptor d;
  d.family = family;
  d.name = name;
  d.params.p = p;
  return d;
}

constexpr std::size_t kMillion = 1000000;

TEST(Fractions, LukasiewiczAggregatorIsOneOverNFactorial) {
  const FractionEstimate e = estimate_nonvanishing_fraction(op(Family::kAggregator, "lukasiewicz"), 3, kMillion, 1);
  ASSERT_TRUE(e.closed_form);
  EXPECT_DOUBLE_EQ(e.closed_form->value, 1.0 / 6.0);
  EXPECT_LT(*e.z_score(), 3.0);
  EXPECT_NEAR(e.std_error, std::sqrt(e.estimate * (1 - e.estimate) / kMillion), 1e-15);
}

TEST(Fractions, NilpotentAggregatorIsHalfToTheNMinusOne) {
  const FractionEstimate e = estimate_nonvanishing_fraction(op(Family::kAggregator, "nilpotent"), 2, kMillion, 2);
  EXPECT_DOUBLE_EQ(e.closed_form->value, 0.5);
  EXPECT_LT(*e.z_score(), 3.0);
  const FractionEstimate e4 = estimate_nonvanishing_fraction(op(Family::kAggregator, "nilpotent"), 4, 200000, 3);
  EXPECT_DOUBLE_EQ(e4.closed_form->value, 0.125);
  EXPECT_LT(*e4.z_score(), 4.0);
}

TEST(Fractions, YagerAggregatorSupportsTheBallVolumeCandidate) {
  for (std::size_t n : {2u, 3u, 4u}) {
    const FractionEstimate e = estimate_nonvanishing_fraction(op(Family::kAggregator, "yager", 2.0), n, kMillion, 10 + n);
    ASSERT_TRUE(e.closed_form && e.alternative);
    EXPECT_LT(*e.z_score(), 3.0) << n;
    EXPECT_GT(std::abs(e.estimate - e.alternative->value) / e.std_error, 50.0) << n;
  }
  EXPECT_NEAR(nonvanishing_closed_form(op(Family::kAggregator, "yager", 2.0), 2)->value, std::numbers::pi / 4, 1e-15);
  EXPECT_NEAR(nonvanishing_closed_form(op(Family::kAggregator, "yager", 2.0), 3)->value, std::numbers::pi / 6, 1e-15);
}

TEST(Fractions, GeneralYagerAggregator) {
  const FractionEstimate e = estimate_nonvanishing_fraction(op(Family::kAggregator, "yager", 3.0), 3, 400000, 8);
  EXPECT_LT(*e.z_score(), 4.0);
  // p = 1 reduces to Łukasiewicz.
  EXPECT_NEAR(nonvanishing_closed_form(op(Family::kAggregator, "yager", 1.0), 4)->value, 1.0 / 24, 1e-14);
}

TEST(Fractions, DrasticFamilyVanishesOnTheInterior) {
  for (const auto& d : {op(Family::kTNorm, "drastic"), op(Family::kTConorm, "drastic"),
                        op(Family::kImplication, "weber"), op(Family::kImplication, "dubois_prade")}) {
    const FractionEstimate e = estimate_nonvanishing_fraction(d, 2, 100000, 4);
    EXPECT_EQ(e.hits, 0u) << d.name;
  }
}

TEST(Fractions, RequiresEnoughSamples) {
  EXPECT_THROW(estimate_nonvanishing_fraction(op(Family::kAggregator, "min"), 2, 9999, 1), SemanticError);
}

TEST(Fractions, Reproducible) {
  const auto a = estimate_nonvanishing_fraction(op(Family::kAggregator, "lukasiewicz"), 2, 20000, 77);
  const auto b = estimate_nonvanishing_fraction(op(Family::kAggregator, "lukasiewicz"), 2, 20000, 77);
  EXPECT_EQ(a.hits, b.hits);
}

TEST(YagerTNorm, ClosedFormAgreesWithMonteCarlo) {
  const YagerFractionCheck p1 = yager_tnorm_fraction_check(1.0, kMillion, 5);
  EXPECT_NEAR(p1.closed_form, 0.5, 1e-14);
  EXPECT_LT(p1.z_score, 3.0);
  const YagerFractionCheck p2 = yager_tnorm_fraction_check(2.0, kMillion, 6);
  EXPECT_NEAR(p2.closed_form, std::numbers::pi / 4, 1e-14);
  EXPECT_LT(p2.z_score, 3.0);
  const YagerFractionCheck p20 = yager_tnorm_fraction_check(20.0, 100000, 7);
  EXPECT_GT(p20.estimate, 0.95);
  EXPECT_THROW(yager_tnorm_fraction_check(0.5, 100000, 1), SemanticError);
}

TEST(SinglePassing, MinIsSinglePassing) {
  const SinglePassingAudit a = single_passing_audit(op(Family::kAggregator, "min"), 4, 10000, 1);
  EXPECT_TRUE(a.single_passing);
  EXPECT_EQ(a.max_active, 1u);
}

TEST(SinglePassing, ProductIsNot) {
  const SinglePassingAudit a = single_passing_audit(op(Family::kAggregator, "product"), 2, 10000, 1);
  EXPECT_FALSE(a.single_passing);
  ASSERT_EQ(a.witness.size(), 2u);
  EXPECT_GT(a.witness[0], 0.0);
}

TEST(SinglePassing, CompositionOfSinglePassingIsSinglePassing) {
  const auto min_agg = op(Family::kAggregator, "min");
  EXPECT_TRUE(single_passing_audit(compose(min_agg, min_agg, 2, 2), 4, 10000, 3).single_passing);
  EXPECT_TRUE(single_passing_audit(compose(op(Family::kTNorm, "godel"), op(Family::kAggregator, "max"), 2, 3), 6,
                                   10000, 3)
                  .single_passing);
  EXPECT_FALSE(single_passing_audit(compose(op(Family::kAggregator, "product"), min_agg, 2, 2), 4, 10000, 3)
                   .single_passing);
}

struct Single {
  KnowledgeBase kb = parse_kb("forall x: a(x) -> c(x)");
  Tape tape;
  GroundingTable g;
  explicit Single(double a, double c)
      : g(build_grounding(tape, [=](const std::string& p, std::span<const std::size_t>) { return p == "a" ? a : c; },
                          kb.signature(), {0})) {}
};

Labeling all_true() {
  return [](const Formula&, const VariableAssignment&) { return true; };
}

TEST(GradientQuality, LukasiewiczSplitsEvenly) {
  Single s(0.8, 0.3);
  OperatorConfig ops;
  ops.implication = BinaryOperator::implication("lukasiewicz");
  const GradientQuality q = gradient_quality(s.kb, s.g, s.tape, ops, all_true());
  EXPECT_DOUBLE_EQ(q.cons, 1.0);
  EXPECT_DOUBLE_EQ(q.ant, 1.0);
  EXPECT_DOUBLE_EQ(q.cons_ratio, 0.5);
  EXPECT_DOUBLE_EQ(q.cu_cons_ratio, 1.0);
  EXPECT_DOUBLE_EQ(q.cu_ant_ratio, 0.0);
}

TEST(GradientQuality, GodelNeverTouchesTheAntecedent) {
  Single s(0.8, 0.3);
  const GradientQuality q = gradient_quality(s.kb, s.g, s.tape, OperatorConfig::symmetric("godel"), all_true());
  EXPECT_EQ(q.ant, 0.0);
  EXPECT_DOUBLE_EQ(q.cons_ratio, 1.0);
  EXPECT_EQ(q.instances, 1u);
}

TEST(GradientQuality, ReichenbachRatiosAndLabels) {
  KnowledgeBase kb = parse_kb("forall x: a(x) -> c(x)\nforall x: a(x) | c(x)");
  Tape tape;
  const double av[] = {0.9, 0.2, 0.6}, cv[] = {0.1, 0.7, 0.5};
  const GroundingTable g = build_grounding(
      tape, [&](const std::string& p, std::span<const std::size_t> o) { return p == "a" ? av[o[0]] : cv[o[0]]; },
      kb.signature(), {0, 1, 2});
  // Truth: a = {1, 0, 1}, c = {0, 1, 1}.
  const Labeling labels = classical_labels([](const std::string& p, std::span<const std::size_t> o) {
    return p == "a" ? o[0] != 1 : o[0] != 0;
  });
  const GradientQuality q = gradient_quality(kb, g, tape, OperatorConfig{}, labels);
  EXPECT_EQ(q.not_applicable, std::vector<std::size_t>{1});
  EXPECT_EQ(q.instances, 3u);
  // Oracle: e = prod I_i, de/dc_i = a_i e / I_i, de/d(not a_i) = (1 - c_i) e / I_i.
  double e = 1.0, cons = 0.0, ant = 0.0, cu_cons = 0.0, cu_ant = 0.0;
  double I[3];
  for (int i = 0; i < 3; ++i) e *= I[i] = 1 - av[i] + av[i] * cv[i];
  for (int i = 0; i < 3; ++i) {
    const double dc = av[i] * e / I[i], da = (1 - cv[i]) * e / I[i];
    cons += dc;
    ant += da;
    if (i != 0) cu_cons += dc;
    if (i == 1) cu_ant += da;
  }
  EXPECT_NEAR(q.cons, cons, 1e-14);
  EXPECT_NEAR(q.ant, ant, 1e-14);
  EXPECT_NEAR(q.cons_ratio, cons / (cons + ant), 1e-14);
  EXPECT_NEAR(q.cons_ratio + q.ant / (q.cons + q.ant), 1.0, 1e-15);
  EXPECT_NEAR(q.cu_cons_ratio, cu_cons / cons, 1e-14);
  EXPECT_NEAR(q.cu_ant_ratio, cu_ant / ant, 1e-14);
}

TEST(GradientQuality, WeightsCancel) {
  KnowledgeBase heavy;
  heavy.add(parse_formula("forall x: a(x) -> c(x)"), 7.0);
  Single s(0.8, 0.3);
  const GradientQuality q1 = gradient_quality(s.kb, s.g, s.tape, OperatorConfig{}, all_true());
  const GradientQuality q7 = gradient_quality(heavy, s.g, s.tape, OperatorConfig{}, all_true());
  EXPECT_NEAR(q1.cons, q7.cons, 1e-15);
}

TEST(Surface, ReichenbachGrid) {
  const auto rows = derivative_surface(BinaryOperator::implication("reichenbach"), 0.25);
  ASSERT_EQ(rows.size(), 25u);
  for (const auto& r : rows) {
    EXPECT_NEAR(r.d_consequent, r.a, 1e-15);
    EXPECT_NEAR(r.d_negated_antecedent, 1 - r.c, 1e-15);
  }
  EXPECT_THROW(derivative_surface(BinaryOperator::implication("reichenbach"), 0.3), SemanticError);
}

TEST(Surface, GodelAntecedentColumnIsZero) {
  for (const auto& r : derivative_surface(BinaryOperator::implication("godel"), 0.05)) {
    EXPECT_EQ(r.d_negated_antecedent, 0.0);
  }
}

TEST(Surface, KleeneDienesCase) {
  for (const auto& r : derivative_surface(BinaryOperator::implication("kleene_dienes"), 0.1)) {
    if (std::abs(r.a - 0.3) < 1e-9 && std::abs(r.c - 0.8) < 1e-9) {
      EXPECT_EQ(r.d_consequent, 1.0);
      EXPECT_EQ(r.d_negated_antecedent, 0.0);
    }
  }
}

TEST(Interaction, LogProductAndRmse) {
  const BinaryOperator rc = BinaryOperator::implication("reichenbach");
  const auto log_rows = implication_aggregator_interaction(Aggregator::make("log_product"), rc, 0.05);
  const auto rmse_rows = implication_aggregator_interaction(Aggregator::make("rmse"), rc, 0.05);
  ASSERT_EQ(log_rows.size(), 21u * 21u);
  EXPECT_NEAR(log_rows.front().d_negated_antecedent, 1.0, 1e-15);
  EXPECT_NEAR(rmse_rows.front().d_negated_antecedent, 0.0, 1e-15);
  for (const auto& r : log_rows) {
    const double expected = (1 - r.c) / (1 - r.a + r.a * r.c);
    if (std::isfinite(expected)) EXPECT_NEAR(r.d_negated_antecedent, expected, 1e-9);
  }
  // rmse: the fixed instance contributes 0.9 to the squared error sum.
  for (const auto& r : rmse_rows) {
    const double err = r.a - r.a * r.c;
    const double expected = err * (1 - r.c) / (2 * std::sqrt((err * err + 0.9) / 2));
    EXPECT_NEAR(r.d_negated_antecedent, expected, 1e-9);
  }
}

}  // namespace
}  // namespace dfl

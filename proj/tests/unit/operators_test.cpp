// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/operators.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "dfl/autodiff.hpp"
#include "dfl/error.hpp"
#include "dfl/random.hpp"

namespace dfl {
namespace {

OperatorParams with_p(double p) {
  OperatorParams params;
  params.p = p;
  return params;
}

const char* const kTNorms[] = {"godel", "product", "lukasiewicz", "drastic", "nilpotent"};
const char* const kImplications[] = {"kleene_dienes", "reichenbach", "lukasiewicz", "dubois_prade",
                                     "fodor",         "godel",       "goguen",      "weber"};

std::vector<BinaryOperator> all_binary() {
  std::vector<BinaryOperator> ops;
  for (const char* n : kTNorms) {
    ops.push_back(BinaryOperator::tnorm(n));
    ops.push_back(BinaryOperator::tconorm(n));
  }
  for (double p : {1.0, 2.0, 5.0}) {
    ops.push_back(BinaryOperator::tnorm("yager", with_p(p)));
    ops.push_back(BinaryOperator::tconorm("yager", with_p(p)));
    ops.push_back(BinaryOperator::implication("yager_s", with_p(p)));
    ops.push_back(BinaryOperator::implication("yager_r", with_p(p)));
  }
  for (const char* n : kImplications) ops.push_back(BinaryOperator::implication(n));
  ops.push_back(sigmoidal_implication("reichenbach", 9.0));
  ops.push_back(sigmoidal_implication("kleene_dienes", 3.0, -0.3));
  return ops;
}

TEST(Negation, Values) {
  EXPECT_EQ(negation(0.0), 1.0);
  EXPECT_EQ(negation(1.0), 0.0);
  EXPECT_DOUBLE_EQ(negation(0.3), 0.7);
  EXPECT_THROW(negation(1.5), NumericError);
}

TEST(TNorm, TableValues) {
  EXPECT_NEAR(BinaryOperator::tnorm("lukasiewicz").value(0.7, 0.5), 0.2, 1e-15);
  EXPECT_EQ(BinaryOperator::tnorm("nilpotent").value(0.4, 0.5), 0.0);
  EXPECT_EQ(BinaryOperator::tnorm("nilpotent").value(0.6, 0.5), 0.5);
  EXPECT_EQ(BinaryOperator::tnorm("godel").value(0.3, 0.8), 0.3);
  EXPECT_EQ(BinaryOperator::tnorm("drastic").value(0.3, 0.8), 0.0);
  EXPECT_EQ(BinaryOperator::tnorm("drastic").value(1.0, 0.8), 0.8);
  EXPECT_NEAR(BinaryOperator::tnorm("yager", with_p(2)).value(0.6, 0.8), 1.0 - std::sqrt(0.2), 1e-15);
}

TEST(TNorm, ErrorsOnUnknownNameAndBadP) {
  EXPECT_THROW(BinaryOperator::tnorm("hamacher"), SemanticError);
  EXPECT_THROW(BinaryOperator::tnorm("yager", with_p(0.5)), SemanticError);
  EXPECT_THROW(BinaryOperator::tnorm("yager"), SemanticError);
  EXPECT_THROW(BinaryOperator::tnorm("product", with_p(2)), SemanticError);
  EXPECT_THROW(BinaryOperator::tconorm("yager", with_p(0.5)), SemanticError);
  EXPECT_THROW(BinaryOperator::tnorm("product").value(1.2, 0.5), NumericError);
}

TEST(TConorm, TableValues) {
  EXPECT_NEAR(BinaryOperator::tconorm("product").value(0.3, 0.5), 0.65, 1e-15);
  EXPECT_EQ(BinaryOperator::tconorm("yager", with_p(2)).value(0.6, 0.8), 1.0);
  EXPECT_EQ(BinaryOperator::tconorm("nilpotent").value(0.6, 0.4), 1.0);
  EXPECT_EQ(BinaryOperator::tconorm("nilpotent").value(0.3, 0.4), 0.4);
  EXPECT_NEAR(BinaryOperator::tconorm("lukasiewicz").value(0.3, 0.4), 0.7, 1e-15);
}

TEST(Norms, NeutralityIsExact) {
  Rng rng(3);
  std::vector<BinaryOperator> ops;
  for (const char* n : kTNorms) ops.push_back(BinaryOperator::tnorm(n));
  for (double p : {1.0, 2.0, 5.0}) ops.push_back(BinaryOperator::tnorm("yager", with_p(p)));
  for (int k = 0; k < 1000; ++k) {
    const double a = rng.uniform();
    for (const auto& t : ops) {
      EXPECT_EQ(t.value(1.0, a), a) << t.name();
      EXPECT_EQ(t.value(a, 1.0), a) << t.name();
      const auto s = BinaryOperator::tconorm(t.name(), t.descriptor().params);
      EXPECT_EQ(s.value(0.0, a), a) << s.name();
      EXPECT_EQ(s.value(a, 0.0), a) << s.name();
    }
  }
}

TEST(Norms, DualityHolds) {
  for (const char* n : kTNorms) {
    EXPECT_LT(tnorm_duality_check(n, {}, 10000, 11), 1e-12) << n;
  }
  for (double p : {1.0, 2.0, 5.0}) {
    EXPECT_LT(tnorm_duality_check("yager", with_p(p), 10000, 11), 1e-12) << p;
  }
}

TEST(Norms, MinMaxTiesGoToFirstArgument) {
  const auto t = BinaryOperator::tnorm("godel")(0.4, 0.4);
  EXPECT_EQ(t.d_first, 1.0);
  EXPECT_EQ(t.d_second, 0.0);
  const auto s = BinaryOperator::tconorm("godel")(0.4, 0.4);
  EXPECT_EQ(s.d_first, 1.0);
  EXPECT_EQ(s.d_second, 0.0);
  const auto agg = Aggregator::make("min")(std::vector<double>{0.2, 0.5, 0.2});
  EXPECT_EQ(agg.partials, (std::vector<double>{1.0, 0.0, 0.0}));
}

TEST(Implication, TableValues) {
  EXPECT_NEAR(BinaryOperator::implication("reichenbach").value(0.9, 0.4), 0.46, 1e-15);
  EXPECT_NEAR(BinaryOperator::implication("goguen").value(0.8, 0.4), 0.5, 1e-15);
  EXPECT_EQ(BinaryOperator::implication("goguen").value(0.3, 0.4), 1.0);
  EXPECT_NEAR(BinaryOperator::implication("yager_r", with_p(2)).value(0.8, 0.4),
              1.0 - std::sqrt(0.32), 1e-15);
  EXPECT_NEAR(BinaryOperator::implication("yager_r", with_p(2)).value(0.8, 0.4), 0.43431, 1e-5);
  EXPECT_EQ(BinaryOperator::implication("weber").value(0.99, 0.1), 1.0);
  EXPECT_EQ(BinaryOperator::implication("weber").value(1.0, 0.1), 0.1);
  EXPECT_EQ(BinaryOperator::implication("dubois_prade").value(0.3, 0.0), 0.7);
  EXPECT_NEAR(BinaryOperator::implication("fodor").value(0.7, 0.2), 0.3, 1e-15);
  EXPECT_THROW(BinaryOperator::implication("material"), SemanticError);
}

TEST(Implication, BoundaryConditionsExact) {
  for (const auto& op : all_binary()) {
    if (op.family() != Family::kImplication) continue;
    EXPECT_EQ(op.value(0.0, 0.0), 1.0) << op.descriptor().spec();
    EXPECT_EQ(op.value(1.0, 0.0), 0.0) << op.descriptor().spec();
    EXPECT_EQ(op.value(1.0, 1.0), 1.0) << op.descriptor().spec();
    EXPECT_EQ(op.value(0.0, 1.0), 1.0) << op.descriptor().spec();
  }
}

TEST(Implication, ContrapositiveDifferentiableSymmetry) {
  std::vector<BinaryOperator> s_impls;
  for (const char* n : {"kleene_dienes", "reichenbach", "lukasiewicz", "dubois_prade", "fodor"}) {
    s_impls.push_back(BinaryOperator::implication(n));
  }
  for (double p : {1.0, 2.0, 5.0}) s_impls.push_back(BinaryOperator::implication("yager_s", with_p(p)));
  Rng rng(5);
  for (int k = 0; k < 10000; ++k) {
    const double a = rng.uniform(), c = rng.uniform();
    for (const auto& imp : s_impls) {
      if (imp.locus_distance(a, c) < 1e-9) continue;
      EXPECT_NEAR(consequent_derivative(imp, a, c),
                  negated_antecedent_derivative(imp, 1.0 - c, 1.0 - a), 1e-9)
          << imp.name() << " at " << a << "," << c;
    }
  }
}

TEST(Implication, LeftNeutralConsequentDerivativeIsOne) {
  Rng rng(6);
  for (const char* n : kImplications) {
    const auto imp = BinaryOperator::implication(n);
    if (!imp.descriptor().declares(Property::kLeftNeutral)) continue;
    for (int k = 0; k < 200; ++k) {
      const double c = 0.001 + 0.998 * rng.uniform();
      EXPECT_EQ(consequent_derivative(imp, 1.0, c), 1.0) << n << " c=" << c;
    }
  }
}

TEST(Implication, GodelHasNoAntecedentGradient) {
  const auto imp = BinaryOperator::implication("godel");
  Rng rng(7);
  for (int k = 0; k < 10000; ++k) {
    EXPECT_EQ(negated_antecedent_derivative(imp, rng.uniform(), rng.uniform()), 0.0);
  }
}

TEST(Implication, ReichenbachDerivatives) {
  const auto imp = BinaryOperator::implication("reichenbach");
  EXPECT_NEAR(consequent_derivative(imp, 0.9, 0.4), 0.9, 1e-15);
  EXPECT_NEAR(negated_antecedent_derivative(imp, 0.9, 0.4), 0.6, 1e-15);
  const auto kd = BinaryOperator::implication("kleene_dienes");
  EXPECT_EQ(consequent_derivative(kd, 0.3, 0.8), 1.0);
}

// Supremum oracle for R-implications: sup{b in [0,1] : T(a, b) <= c}, found
// by a 1e-4 grid scan followed by bisection on the last feasible cell.
double sup_oracle(const BinaryOperator& t, double a, double c) {
  double best = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    const double b = i * 1e-4;
    if (t.value(a, b) <= c) best = b;
  }
  double lo = best, hi = std::min(1.0, best + 1e-4);
  if (hi > lo && t.value(a, hi) > c) {
    for (int k = 0; k < 40; ++k) {
      const double mid = 0.5 * (lo + hi);
      (t.value(a, mid) <= c ? lo : hi) = mid;
    }
  } else {
    lo = hi;
  }
  return lo;
}

TEST(Implication, ClosedFormsMatchSupremum) {
  struct Pair {
    BinaryOperator t, i;
  };
  std::vector<Pair> pairs = {
      {BinaryOperator::tnorm("godel"), BinaryOperator::implication("godel")},
      {BinaryOperator::tnorm("product"), BinaryOperator::implication("goguen")},
      {BinaryOperator::tnorm("lukasiewicz"), BinaryOperator::implication("lukasiewicz")},
      {BinaryOperator::tnorm("drastic"), BinaryOperator::implication("weber")},
      {BinaryOperator::tnorm("nilpotent"), BinaryOperator::implication("fodor")},
  };
  for (double p : {1.0, 2.0, 5.0}) {
    pairs.push_back({BinaryOperator::tnorm("yager", with_p(p)),
                     BinaryOperator::implication("yager_r", with_p(p))});
  }
  for (const auto& [t, i] : pairs) {
    for (int ia = 0; ia <= 20; ++ia) {
      for (int ic = 0; ic <= 20; ++ic) {
        const double a = ia / 20.0, c = ic / 20.0;
        EXPECT_NEAR(i.value(a, c), sup_oracle(t, a, c), 1e-3)
            << i.descriptor().spec() << " at " << a << "," << c;
      }
    }
  }
}

TEST(Sigmoidal, FastPathAgreesWithGeneralForm) {
  Rng rng(8);
  for (double s : {0.01, 1.0, 3.0, 9.0, 20.0}) {
    for (int k = 0; k < 1000; ++k) {
      const double i = rng.uniform();
      EXPECT_NEAR(sigmoidal_half_offset(i, s), sigmoidal_transform(i, s, -0.5), 1e-12);
    }
  }
}

TEST(Sigmoidal, SmallSpreadApproachesBase) {
  const auto sig = sigmoidal_implication("reichenbach", 0.01);
  const auto rc = BinaryOperator::implication("reichenbach");
  for (int ia = 0; ia <= 10; ++ia) {
    for (int ic = 0; ic <= 10; ++ic) {
      const double a = ia / 10.0, c = ic / 10.0;
      EXPECT_NEAR(sig.value(a, c), rc.value(a, c), 2e-3);
    }
  }
}

TEST(Sigmoidal, Boundaries) {
  for (double s : {0.5, 9.0, 20.0}) {
    for (double b0 : {-0.5, -0.2, 0.3}) {
      const auto sig = sigmoidal_implication("reichenbach", s, b0);
      EXPECT_EQ(sig.value(0, 0), 1.0);
      EXPECT_EQ(sig.value(1, 0), 0.0);
      EXPECT_EQ(sig.value(1, 1), 1.0);
    }
  }
  EXPECT_THROW(sigmoidal_implication("reichenbach", 0.0), SemanticError);
  EXPECT_THROW(sigmoidal_implication("nope", 1.0), SemanticError);
}

TEST(Aggregator, Values) {
  const std::vector<double> xs = {0.2, 0.4, 0.6};
  EXPECT_NEAR(Aggregator::make("mae").value(xs), 0.4, 1e-15);
  EXPECT_NEAR(Aggregator::make("pme", with_p(1)).value(xs), 0.4, 1e-15);
  EXPECT_NEAR(Aggregator::make("rmse").value(xs),
              Aggregator::make("pme", with_p(2)).value(xs), 1e-15);
  EXPECT_NEAR(Aggregator::make("nilpotent").value(std::vector<double>{0.6, 0.7, 0.9}), 0.6, 1e-15);
  EXPECT_EQ(Aggregator::make("nilpotent").value(std::vector<double>{0.2, 0.7, 0.9}), 0.0);
  EXPECT_NEAR(Aggregator::make("lukasiewicz").value(std::vector<double>{0.9, 0.95, 0.97}), 0.82,
              1e-12);
  EXPECT_NEAR(Aggregator::make("log_product").value(xs), std::log(0.2 * 0.4 * 0.6), 1e-14);
  EXPECT_NEAR(Aggregator::make("pmean", with_p(2)).value(xs), std::sqrt((0.04 + 0.16 + 0.36) / 3),
              1e-15);
}

TEST(Aggregator, AllOnesBoundary) {
  for (const auto& d : catalog()) {
    if (d.family != Family::kAggregator) continue;
    const auto agg = Aggregator::make(d.name, d.params);
    for (std::size_t n : {1u, 2u, 5u}) {
      const std::vector<double> ones(n, 1.0);
      EXPECT_EQ(agg.value(ones), agg.is_log_domain() ? 0.0 : 1.0) << d.spec() << " n=" << n;
    }
  }
}

TEST(Aggregator, Errors) {
  EXPECT_THROW(Aggregator::make("product").value(std::vector<double>{}), NumericError);
  EXPECT_THROW(Aggregator::make("log_product").value(std::vector<double>{0.5, 0.0}), NumericError);
  EXPECT_THROW(Aggregator::make("pme", with_p(0)), SemanticError);
  EXPECT_THROW(Aggregator::make("pmean"), SemanticError);
  EXPECT_THROW(Aggregator::make("yager", with_p(0.9)), SemanticError);
  EXPECT_THROW(Aggregator::make("median"), SemanticError);
}

TEST(Aggregator, RecursiveExtensionMatchesClosedForm) {
  Rng rng(9);
  const std::pair<const char*, const char*> pairs[] = {
      {"product", "product"}, {"godel", "min"}, {"lukasiewicz", "lukasiewicz"}, {"nilpotent", "nilpotent"}};
  for (const auto& [tname, aname] : pairs) {
    const auto t = BinaryOperator::tnorm(tname);
    const auto agg = Aggregator::make(aname);
    for (int trial = 0; trial < 2000; ++trial) {
      const std::size_t n = 1 + rng.below(8);
      std::vector<double> xs(n);
      // Bias towards large values so the thresholded kernels are exercised.
      for (double& x : xs) x = std::sqrt(std::sqrt(rng.uniform()));
      double folded = xs[0];
      for (std::size_t i = 1; i < n; ++i) folded = t.value(folded, xs[i]);
      EXPECT_NEAR(agg.value(xs), folded, 1e-12) << aname << " n=" << n;
    }
  }
}

TEST(Aggregator, SinglePassing) {
  Rng rng(10);
  const auto mn = Aggregator::make("min");
  const auto mx = Aggregator::make("max");
  const auto prod = Aggregator::make("product");
  for (int k = 0; k < 1000; ++k) {
    std::vector<double> xs(4);
    for (double& x : xs) x = rng.uniform();
    auto nonzero = [](const AggregateEval& e) {
      return std::count_if(e.partials.begin(), e.partials.end(),
                           [](double d) { return std::abs(d) > 1e-12; });
    };
    EXPECT_LE(nonzero(mn(xs)), 1);
    EXPECT_LE(nonzero(mx(xs)), 1);
    EXPECT_EQ(nonzero(prod(xs)), 4);
  }
}

// Every kernel's analytic partials against a five-point central stencil at
// points at least 1e-3 from its declared nondifferentiable locus.
TEST(Derivatives, BinaryKernelsMatchFiniteDifferences) {
  Rng rng(12);
  for (const auto& op : all_binary()) {
    const TapeFunction f = [&op](Tape& t, std::span<const NodeId> x) {
      const auto r = op(t.value(x[0]), t.value(x[1]));
      return t.record(op.name(), {x[0], x[1]}, r.value, {r.d_first, r.d_second});
    };
    int checked = 0;
    while (checked < 1000) {
      const double a = rng.uniform(1e-3, 1 - 1e-3), b = rng.uniform(1e-3, 1 - 1e-3);
      if (op.locus_distance(a, b) < 1e-3) continue;
      ++checked;
      const std::vector<double> point = {a, b};
      const double err = finite_difference_check(f, point, 1e-5, Stencil::kFivePoint);
      ASSERT_LT(err, 1e-5) << op.descriptor().spec() << " at " << a << "," << b;
    }
  }
}

TEST(Derivatives, AggregatorsMatchFiniteDifferences) {
  Rng rng(13);
  for (const auto& d : catalog()) {
    if (d.family != Family::kAggregator) continue;
    const auto agg = Aggregator::make(d.name, d.params);
    const TapeFunction f = [&agg](Tape& t, std::span<const NodeId> x) {
      std::vector<double> v;
      for (NodeId id : x) v.push_back(t.value(id));
      const auto r = agg(v);
      return t.record(agg.name(), x, r.value, r.partials);
    };
    int checked = 0;
    while (checked < 1000) {
      const std::size_t n = 2 + rng.below(3);
      std::vector<double> xs(n);
      for (double& x : xs) x = rng.uniform(1e-3, 1 - 1e-3);
      if (agg.locus_distance(xs) < 1e-3) continue;
      ++checked;
      ASSERT_LT(finite_difference_check(f, xs, 1e-5, Stencil::kFivePoint), 1e-5) << d.spec();
    }
  }
}

TEST(Grammar, ParsesSpecs) {
  const auto y = parse_operator_spec(Family::kTNorm, "yager:p=2");
  EXPECT_EQ(y.name, "yager");
  EXPECT_EQ(*y.params.p, 2.0);
  const auto s = parse_operator_spec(Family::kImplication, "sigmoidal:base=reichenbach,s=9,b0=-0.5");
  EXPECT_EQ(s.params.base, "reichenbach");
  EXPECT_EQ(*s.params.s, 9.0);
  EXPECT_EQ(*s.params.b0, -0.5);
  EXPECT_THROW(parse_operator_spec(Family::kTNorm, "yager:q=2"), SemanticError);
  EXPECT_THROW(parse_operator_spec(Family::kTNorm, "yager:p=abc"), InputError);
  EXPECT_THROW(parse_operator_spec(Family::kTNorm, "godel:p=2"), SemanticError);
}

TEST(Grammar, ConfigAssignments) {
  OperatorConfig config;
  config.apply("tnorm=yager:p=2");
  config.apply("implication=sigmoidal:base=reichenbach,s=9,b0=-0.5");
  config.apply("aggregator=log_product");
  EXPECT_EQ(config.tnorm.descriptor().spec(), "yager:p=2");
  EXPECT_EQ(config.implication.descriptor().spec(), "sigmoidal:base=reichenbach,s=9,b0=-0.5");
  EXPECT_TRUE(config.aggregator.is_log_domain());
  EXPECT_THROW(config.apply("negation=standard"), SemanticError);
  EXPECT_THROW(config.apply("tnorm"), InputError);
}

TEST(Config, Symmetric) {
  const auto c = OperatorConfig::symmetric("godel");
  EXPECT_EQ(c.implication.name(), "kleene_dienes");
  EXPECT_EQ(c.aggregator.name(), "min");
  const auto y = OperatorConfig::symmetric("yager", with_p(2));
  EXPECT_EQ(y.implication.descriptor().spec(), "yager_s:p=2");
  EXPECT_THROW(OperatorConfig::symmetric("drastic"), SemanticError);
}

const PropertyCheck& find(const std::vector<PropertyCheck>& report, Property p) {
  for (const auto& c : report)
    if (c.property == p) return c;
  throw std::runtime_error("property missing from report");
}

TEST(PropertyAudit, KnownLawsAndCounterexamples) {
  const auto godel = property_audit(BinaryOperator::tnorm("godel").descriptor(), 2000);
  EXPECT_TRUE(find(godel, Property::kIdempotent).passed);

  const auto rc = property_audit(BinaryOperator::implication("reichenbach").descriptor(), 2000);
  EXPECT_TRUE(find(rc, Property::kContrapositive).passed);
  const auto& ip = find(rc, Property::kIdentity);
  EXPECT_FALSE(ip.passed);
  EXPECT_FALSE(ip.declared);
  ASSERT_FALSE(ip.witness.empty());

  const auto lk = property_audit(BinaryOperator::implication("lukasiewicz").descriptor(), 2000);
  for (Property p : {Property::kLeftNeutral, Property::kExchange, Property::kIdentity,
                     Property::kContrapositive}) {
    EXPECT_TRUE(find(lk, p).passed) << to_string(p);
  }
}

TEST(PropertyAudit, DeclaredPropertiesHoldAcrossCatalog) {
  for (const auto& d : catalog()) {
    for (const auto& check : property_audit(d, 3000)) {
      if (check.declared) {
        EXPECT_TRUE(check.passed) << d.spec() << " " << to_string(check.property);
      }
    }
  }
}

TEST(Catalog, SpecsRoundTrip) {
  for (const auto& d : catalog()) {
    const auto spec = parse_operator_spec(d.family, d.spec());
    EXPECT_EQ(spec.name, d.name);
    EXPECT_EQ(spec.params, d.params) << d.spec();
  }
}

}  // namespace
}  // namespace dfl

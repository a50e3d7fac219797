// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/autodiff.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "dfl/error.hpp"
#include "dfl/random.hpp"

namespace dfl {
namespace {

TEST(Tape, LeafHasNoParents) {
  Tape tape;
  const NodeId a = tape.leaf(0.9);
  const NodeId z = tape.leaf(0.0);
  EXPECT_EQ(tape.value(a), 0.9);
  EXPECT_EQ(tape.value(z), 0.0);
  EXPECT_TRUE(tape.parents(a).empty());
}

TEST(Tape, RejectsNonFinite) {
  Tape tape;
  EXPECT_THROW(tape.leaf(std::nan("")), NumericError);
  const NodeId a = tape.leaf(0.5);
  EXPECT_THROW(tape.record("x", {a}, 0.5, {std::numeric_limits<double>::infinity()}),
               NumericError);
  EXPECT_THROW(tape.record("x", {a}, 0.5, {1.0, 2.0}), NumericError);
}

TEST(Tape, RecordsKernelPartials) {
  Tape tape;
  const NodeId a = tape.leaf(0.5);
  const NodeId b = tape.leaf(0.4);
  const NodeId t = tape.record("T_P", {a, b}, 0.20, {0.4, 0.5});
  EXPECT_DOUBLE_EQ(tape.value(t), 0.20);
  const NodeId n = tape.record("N_C", {tape.leaf(0.3)}, 0.7, {-1.0});
  EXPECT_DOUBLE_EQ(tape.value(n), 0.7);
  EXPECT_EQ(tape.label(t), "T_P");
}

TEST(Backward, ProductRule) {
  Tape tape;
  const NodeId a = tape.leaf(0.5);
  const NodeId b = tape.leaf(0.4);
  const NodeId y = tape.record("mul", {a, b}, 0.2, {0.4, 0.5});
  const GradientMap g = tape.backward(y);
  EXPECT_DOUBLE_EQ(g[y], 1.0);
  EXPECT_DOUBLE_EQ(g[a], 0.4);
  EXPECT_DOUBLE_EQ(g[b], 0.5);
}

TEST(Backward, LeafRoot) {
  Tape tape;
  const NodeId y = tape.leaf(0.7);
  const GradientMap g = tape.backward(y);
  EXPECT_EQ(g.size(), 1u);
  EXPECT_DOUBLE_EQ(g[y], 1.0);
}

TEST(Backward, Reichenbach) {
  Tape tape;
  const double av = 0.9, cv = 0.4;
  const NodeId a = tape.leaf(av);
  const NodeId c = tape.leaf(cv);
  const NodeId y = tape.record("I_RC", {a, c}, 1 - av + av * cv, {cv - 1, av});
  const GradientMap g = tape.backward(y);
  EXPECT_NEAR(g[a], -0.6, 1e-15);
  EXPECT_NEAR(g[c], 0.9, 1e-15);
}

TEST(Backward, UnreachableIsZeroAndSeedScales) {
  Tape tape;
  const NodeId a = tape.leaf(1.0);
  const NodeId b = tape.leaf(2.0);
  const NodeId y = tape.record("neg", {a}, -1.0, {-1.0});
  const GradientMap g = tape.backward(y, -1.0);
  EXPECT_DOUBLE_EQ(g[y], -1.0);
  EXPECT_DOUBLE_EQ(g[a], 1.0);
  EXPECT_DOUBLE_EQ(g[b], 0.0);
}

TEST(Backward, Linearity) {
  Tape tape;
  const NodeId a = tape.leaf(0.3);
  const NodeId b = tape.leaf(0.6);
  const NodeId sum = tape.record("add", {a, b}, 0.9, {1.0, 1.0});
  EXPECT_DOUBLE_EQ(tape.backward(sum)[a], 1.0);
  EXPECT_DOUBLE_EQ(tape.backward(sum)[b], 1.0);
  const NodeId scaled = tape.record("scale", {a}, 3.5 * 0.3, {3.5});
  EXPECT_DOUBLE_EQ(tape.backward(scaled)[a], 3.5);
}

TEST(Backward, RepeatedInputAccumulates) {
  Tape tape;
  const NodeId a = tape.leaf(0.5);
  const NodeId sq = tape.record("mul", {a, a}, 0.25, {0.5, 0.5});
  EXPECT_DOUBLE_EQ(tape.backward(sq)[a], 1.0);
}

// Brute-force oracle: sum over every root-to-node path of the product of
// partials along it.
double path_sum(const Tape& tape, NodeId from, NodeId target) {
  if (from == target) return 1.0;
  double total = 0.0;
  for (const Edge& e : tape.parents(from)) {
    total += e.partial * path_sum(tape, e.parent, target);
  }
  return total;
}

TEST(Backward, MatchesPathEnumerationOnRandomDags) {
  Rng rng(2026);
  for (int trial = 0; trial < 500; ++trial) {
    Tape tape;
    const int nodes = 2 + static_cast<int>(rng.below(5));  // 2..6 nodes
    std::vector<NodeId> ids;
    ids.push_back(tape.leaf(rng.uniform()));
    for (int i = 1; i < nodes; ++i) {
      std::vector<NodeId> inputs;
      std::vector<double> partials;
      for (int j = 0; j < i; ++j) {
        if (rng.uniform() < 0.6) {
          inputs.push_back(ids[static_cast<std::size_t>(j)]);
          partials.push_back(rng.uniform(-2.0, 2.0));
        }
      }
      ids.push_back(inputs.empty() ? tape.leaf(rng.uniform())
                                   : tape.record("op", inputs, rng.uniform(), partials));
    }
    const NodeId root = ids.back();
    const GradientMap g = tape.backward(root);
    for (NodeId id : ids) {
      EXPECT_NEAR(g[id], path_sum(tape, root, id), 1e-12);
    }
  }
}

TEST(Tape, DumpFormat) {
  Tape tape;
  const NodeId a = tape.leaf(0.5, "atom");
  tape.record("N_C", {a}, 0.5, {-1.0});
  std::ostringstream out;
  tape.dump(out);
  EXPECT_EQ(out.str(), "0 atom 0.5\n1 N_C 0.5 0:-1\n");
}

TapeFunction product_fn() {
  return [](Tape& t, std::span<const NodeId> x) {
    const double a = t.value(x[0]), b = t.value(x[1]);
    return t.record("T_P", {x[0], x[1]}, a * b, {b, a});
  };
}

TEST(FiniteDifference, ProductFamily) {
  const std::vector<double> p1 = {0.5, 0.4};
  EXPECT_LT(finite_difference_check(product_fn(), p1, 1e-5), 1e-6);

  const TapeFunction sp = [](Tape& t, std::span<const NodeId> x) {
    const double a = t.value(x[0]), b = t.value(x[1]);
    return t.record("S_P", {x[0], x[1]}, a + b - a * b, {1 - b, 1 - a});
  };
  const std::vector<double> p2 = {0.3, 0.5};
  EXPECT_LT(finite_difference_check(sp, p2, 1e-5), 1e-6);

  const TapeFunction rc = [](Tape& t, std::span<const NodeId> x) {
    const double a = t.value(x[0]), c = t.value(x[1]);
    return t.record("I_RC", {x[0], x[1]}, 1 - a + a * c, {c - 1, a});
  };
  const std::vector<double> p3 = {0.9, 0.4};
  EXPECT_LT(finite_difference_check(rc, p3, 1e-5), 1e-6);
  EXPECT_LT(finite_difference_check(rc, p3, 1e-5, Stencil::kFivePoint), 1e-9);
}

TEST(FiniteDifference, DetectsWrongPartial) {
  const TapeFunction wrong = [](Tape& t, std::span<const NodeId> x) {
    const double a = t.value(x[0]);
    return t.record("sq", {x[0]}, a * a, {a});  // should be 2a
  };
  const std::vector<double> p = {0.5};
  EXPECT_NEAR(finite_difference_check(wrong, p, 1e-5), 0.5, 1e-6);
}

}  // namespace
}  // namespace dfl

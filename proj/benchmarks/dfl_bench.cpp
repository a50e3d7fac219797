// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include "dfl/analysis.hpp"
#include "dfl/operators.hpp"
#include "dfl/oracle.hpp"
#include "dfl/random.hpp"
#include "dfl/trainer.hpp"
#include "dfl/valuation.hpp"

namespace {

void BM_BinaryKernel(benchmark::State& state, const char* name) {
  const dfl::BinaryOperator op = dfl::BinaryOperator::implication(name);
  dfl::Rng rng(1);
  std::vector<double> xs(1024);
  for (double& x : xs) x = rng.uniform();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(op(xs[i & 1023], xs[(i + 1) & 1023]));
    ++i;
  }
}
BENCHMARK_CAPTURE(BM_BinaryKernel, reichenbach, "reichenbach");
BENCHMARK_CAPTURE(BM_BinaryKernel, goguen, "goguen");

void BM_Aggregator(benchmark::State& state) {
  const dfl::Aggregator agg = dfl::Aggregator::make("log_product");
  dfl::Rng rng(2);
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (double& x : xs) x = rng.uniform(0.01, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(agg(xs));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Aggregator)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

// Forward and backward pass of the digit rules over a batch of b objects.
void BM_DigitKbGradient(benchmark::State& state) {
  const dfl::KnowledgeBase kb = dfl::class_kb(10, {1, 2, 3});
  const std::size_t b = static_cast<std::size_t>(state.range(0));
  std::vector<std::size_t> batch(b);
  for (std::size_t i = 0; i < b; ++i) batch[i] = i;
  dfl::Rng rng(3);
  std::vector<double> values;
  const dfl::OperatorConfig ops = dfl::OperatorConfig::product_logic();
  for (auto _ : state) {
    dfl::Tape tape;
    dfl::GroundingTable g(kb.signature(), batch);
    for (std::size_t s = 0; s < g.size(); ++s) g.set(s, tape.leaf(rng.uniform(0.01, 0.99), "atom"));
    const dfl::NodeId loss = dfl::dfl_loss(tape, kb, g, ops);
    benchmark::DoNotOptimize(tape.backward(loss));
  }
}
BENCHMARK(BM_DigitKbGradient)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_NonvanishingFraction(benchmark::State& state) {
  dfl::OperatorDescriptor d;
  d.family = dfl::Family::kAggregator;
  d.name = "lukasiewicz";
  for (auto _ : state) benchmark::DoNotOptimize(dfl::estimate_nonvanishing_fraction(d, 3, 100000, 7));
}
BENCHMARK(BM_NonvanishingFraction)->Unit(benchmark::kMillisecond);

void BM_WorldEnumeration(benchmark::State& state) {
  const std::size_t atoms = static_cast<std::size_t>(state.range(0));
  std::string text;
  dfl::LookupTable table;
  for (std::size_t i = 0; i < atoms; ++i) {
    text += (i ? " | " : "") + std::string("a") + std::to_string(i);
    table.set({"a" + std::to_string(i), {}}, 0.5);
  }
  const dfl::KnowledgeBase kb = dfl::parse_kb(text);
  for (auto _ : state) benchmark::DoNotOptimize(dfl::semantic_loss(kb, table.interpretation(), {}));
}
BENCHMARK(BM_WorldEnumeration)->DenseRange(8, 16, 4)->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  dfl::TrainConfig c;
  const dfl::SyntheticTask task = dfl::make_synthetic_task(c.task_options());
  const dfl::TinyModel model(c.dim, c.hidden, 10, c.slices, 1);
  dfl::Rng rng(4);
  for (auto _ : state) {
    const dfl::StepBatch b = dfl::draw_batch(task, c, rng);
    benchmark::DoNotOptimize(dfl::term_gradients(model, task, c, b));
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0
//
// Gradient-descent fuzzy maximum satisfiability and a small semi-supervised
// harness: a 10-class synthetic task, a two-layer classifier with a
// neural-tensor `same` scorer, and training against
//   L = L_sup + w_dfl * L_dfl + L_same
// with plain gradient descent.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dfl/analysis.hpp"
#include "dfl/logic.hpp"
#include "dfl/operators.hpp"
#include "dfl/random.hpp"
#include "dfl/valuation.hpp"

namespace dfl {

// ---------------------------------------------------------------------------
// Fuzzy maximum satisfiability over free truth values

enum class MaxSatParameterization {
  kProjected,  // descend on the truth values, clip to [0, 1]
  kLogit,      // truth = sigmoid(z), descend on z
};

struct MaxSatOptions {
  double learning_rate = 0.1;
  std::size_t steps = 1000;
  MaxSatParameterization parameterization = MaxSatParameterization::kProjected;
  /// Success: every formula's valuation is at least 1 - tolerance.
  double tolerance = 1e-6;
};

struct MaxSatResult {
  std::vector<GroundAtom> atoms;       // grounding slot order
  std::vector<double> values;          // final truth values
  std::vector<double> trajectory;      // sum_phi w e(phi) before each step, then final
  std::vector<double> formula_values;  // final per-formula valuations
  bool converged = false;
  std::size_t steps_taken = 0;
};

/// Minimizes the DFL loss over the atoms of `table` (the initial values).
/// Never throws for non-convergence; `converged` reports it.
MaxSatResult fuzzy_max_sat(const KnowledgeBase& kb, const LookupTable& table,
                           const OperatorConfig& ops, const MaxSatOptions& options = {});

struct MaxSatStudy {
  std::size_t inits = 0;
  std::size_t successes = 0;
  double rate() const { return inits ? static_cast<double>(successes) / inits : 0.0; }
};

/// Runs fuzzy_max_sat from `inits` uniform random initializations of the
/// KB's ground atoms over `objects` named objects.
MaxSatStudy max_sat_study(const KnowledgeBase& kb, std::size_t objects, const OperatorConfig& ops,
                          std::size_t inits, std::uint64_t seed, const MaxSatOptions& options = {});

// ---------------------------------------------------------------------------
// Synthetic task

struct SyntheticTaskOptions {
  std::size_t classes = 10;
  std::size_t dim = 16;
  std::size_t points = 5000;
  std::size_t test_points = 1000;
  double labeled_fraction = 0.01;
  double spread = 1.0;  // standard deviation of the blob centers; noise is unit
  std::uint64_t seed = 1;
};

struct SyntheticTask {
  std::size_t classes = 0;
  std::size_t dim = 0;
  std::vector<std::vector<double>> x;  // training points
  std::vector<int> y;                  // ground truth, retained for evaluation
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;
  std::vector<std::vector<double>> test_x;
  std::vector<int> test_y;
};

/// Gaussian blobs; the labeled split is stratified and has
/// round(fraction * points) members (at least one per class).
SyntheticTask make_synthetic_task(const SyntheticTaskOptions& options);

// ---------------------------------------------------------------------------
// Model

/// Embedding e = tanh(W1 x + b1); classes = softmax(W2 e + b2);
/// same(x1, x2) = sigmoid(u . tanh(e1' W[k] e2 + V [e1; e2] + c)).
class TinyModel {
 public:
  TinyModel(std::size_t dim, std::size_t hidden, std::size_t classes, std::size_t slices,
            std::uint64_t seed);

  std::size_t dim() const { return dim_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t classes() const { return classes_; }
  std::size_t slices() const { return slices_; }

  std::vector<double>& params() { return theta_; }
  const std::vector<double>& params() const { return theta_; }

  struct PointCache {
    std::vector<double> embedding;
    std::vector<double> probs;
  };
  PointCache forward(std::span<const double> x) const;

  struct PairCache {
    std::vector<double> hidden;  // tanh(q)
    double value = 0.0;
  };
  PairCache same(std::span<const double> e1, std::span<const double> e2) const;

  /// Accumulates into `grad` (sized like params) the gradient given dL/dprobs
  /// and an extra dL/dembedding for the point `x`.
  void backward_point(std::span<const double> x, const PointCache& cache,
                      std::span<const double> d_probs, std::span<const double> d_embedding,
                      std::vector<double>& grad) const;

  /// Accumulates into `grad` and into the two embedding gradients given
  /// dL/d(pre-sigmoid logit) of the same-scorer.
  void backward_same(std::span<const double> e1, std::span<const double> e2, const PairCache& cache,
                     double d_logit, std::vector<double>& grad, std::span<double> d_e1,
                     std::span<double> d_e2) const;

  int predict(std::span<const double> x) const;

 private:
  std::size_t dim_, hidden_, classes_, slices_;
  std::vector<double> theta_;
  // Offsets of each parameter block in theta_.
  std::size_t w1_, b1_, w2_, b2_, wt_, v_, c_, u_;
};

double evaluate(const TinyModel& model, const std::vector<std::vector<double>>& x,
                const std::vector<int>& y);

// ---------------------------------------------------------------------------
// Knowledge base over class predicates and `same`

/// Predicate name of class k: zero ... nine for k < 10, else c<k>.
std::string class_predicate(std::size_t k);

/// Formula groups: (1) class_k(x) & class_k(y) -> same(x, y) for each k;
/// (2) class_k(x) & same(x, y) -> class_k(y) for each k; (3) same(x, y) ->
/// same(y, x). `groups` selects which are included.
KnowledgeBase class_kb(std::size_t classes, const std::vector<int>& groups);

// ---------------------------------------------------------------------------
// Training

struct TrainConfig {
  OperatorConfig ops = OperatorConfig::product_logic();
  double w_dfl = 10.0;
  double learning_rate = 0.001;
  std::size_t steps = 1000;
  std::uint64_t seed = 1;
  double labeled_fraction = 0.01;
  std::size_t batch_sup = 64;
  std::size_t batch_dfl = 4;
  std::size_t eval_every = 100;
  std::vector<int> formulas{1, 2, 3};
  std::size_t hidden = 32;
  std::size_t slices = 4;
  std::size_t points = 5000;
  std::size_t test_points = 1000;
  std::size_t dim = 16;
  double spread = 1.0;

  /// `key=value`; operator keys use the operator grammar. Unknown keys and
  /// invalid values are SemanticErrors; malformed numbers InputErrors.
  void apply(std::string_view assignment);
  /// Lines of `key=value`, `#` comments. Errors carry the line number.
  static TrainConfig parse(std::string_view text);
  static TrainConfig load(const std::string& path);
  /// Canonical `key=value` lines, stable across platforms.
  std::string serialize() const;
  void validate() const;
  SyntheticTaskOptions task_options() const;
};

struct MetricsRecord {
  std::size_t step = 0;
  double loss_sup = 0.0;
  double loss_dfl = 0.0;
  double accuracy = 0.0;
  double cons_pct = 0.0;
  double cu_cons_pct = 0.0;
  double cu_ant_pct = 0.0;
};

/// Header and one row, with fixed formatting.
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsRecord& record);

/// Indices used by one gradient step.
struct StepBatch {
  std::vector<std::size_t> supervised;            // labeled points
  std::vector<std::pair<std::size_t, std::size_t>> same_pairs;  // labeled, 1:1 undersampled
  std::vector<std::size_t> dfl;                   // unlabeled points
};

StepBatch draw_batch(const SyntheticTask& task, const TrainConfig& config, Rng& rng);

struct TermGradients {
  double loss_sup = 0.0;
  double loss_dfl = 0.0;
  double loss_same = 0.0;
  std::vector<double> sup;
  std::vector<double> dfl;  // unweighted
  std::vector<double> same;
};

/// Gradients of each loss term at the current parameters. The DFL term is
/// skipped (zero) when `with_dfl` is false.
TermGradients term_gradients(const TinyModel& model, const SyntheticTask& task,
                             const TrainConfig& config, const StepBatch& batch, bool with_dfl = true);

/// Gradient quality of the KB on a batch of points, labelled by ground truth
/// (or by `labels_override` when given, indexed like `points`).
GradientQuality batch_gradient_quality(const TinyModel& model, const SyntheticTask& task,
                                       const TrainConfig& config,
                                       const std::vector<std::size_t>& points,
                                       const std::vector<int>* labels_override = nullptr);

/// Model initialization and batch streams derived from config.seed:
/// Rng root(seed); model seed = root.next(); batches use root.split().
struct TrainResult {
  TinyModel model;
  std::vector<MetricsRecord> metrics;
};

TrainResult semi_supervised_train(const SyntheticTask& task, const TrainConfig& config,
                                  const std::function<void(const MetricsRecord&)>& on_record = {});

// ---------------------------------------------------------------------------
// Sweeps

struct SweepRun {
  std::string value;
  std::uint64_t seed = 0;
  std::optional<MetricsRecord> final;  // nullopt when the run failed
  std::string error;
};

struct SweepResult {
  std::string axis;
  std::vector<SweepRun> runs;
  /// Per value, the mean of the successful runs' final records.
  std::vector<std::pair<std::string, MetricsRecord>> means;
  std::size_t failures() const;
};

/// Axis in {tnorm, tconorm, aggregator, implication, s, b0, w_dfl, formulas,
/// or any config key}. One run per (value, seed); runs are independent and
/// execute on up to `jobs` threads. A failing run is recorded, not thrown.
SweepResult config_sweep(const TrainConfig& base, const std::string& axis,
                         const std::vector<std::string>& values, const std::vector<std::uint64_t>& seeds,
                         std::size_t jobs = 1);

std::string sweep_csv(const SweepResult& result);

}  // namespace dfl

// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0

#include "dfl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "dfl/error.hpp"

namespace dfl {

// ---------------------------------------------------------------------------
// Fuzzy maximum satisfiability

namespace {

double sigmoid(double z) { return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z)); }

double logit(double p) {
  p = std::clamp(p, 1e-12, 1.0 - 1e-12);
  return std::log(p / (1.0 - p));
}

}  // namespace

MaxSatResult fuzzy_max_sat(const KnowledgeBase& kb, const LookupTable& table, const OperatorConfig& ops,
                           const MaxSatOptions& options) {
  if (!(options.learning_rate > 0.0)) throw SemanticError("learning rate must be positive");
  const std::vector<std::size_t> batch = table.all_objects();
  MaxSatResult out;
  std::vector<double> z;  // free parameters
  {
    const GroundingTable g(kb.signature(), batch);
    for (std::size_t s = 0; s < g.size(); ++s) {
      out.atoms.push_back(g.atom(s));
      out.values.push_back(table.get(out.atoms.back().predicate, out.atoms.back().objects));
    }
  }
  const bool logit_param = options.parameterization == MaxSatParameterization::kLogit;
  if (logit_param) {
    for (double v : out.values) z.push_back(logit(v));
  }
  const double threshold = 1.0 - options.tolerance;
  auto satisfied = [&](const Tape& tape, const KbEvaluation& ev) {
    out.formula_values.clear();
    bool ok = true;
    for (NodeId v : ev.formula_values) {
      double e = tape.value(v);
      if (ops.aggregator.is_log_domain()) e = std::exp(e);
      out.formula_values.push_back(tape.value(v));
      ok = ok && e >= threshold;
    }
    return ok;
  };
  for (std::size_t step = 0;; ++step) {
    Tape tape;
    GroundingTable g(kb.signature(), batch);
    for (std::size_t s = 0; s < g.size(); ++s) g.set(s, tape.leaf(out.values[s], "atom"));
    const KbEvaluation ev = evaluate_kb(tape, kb, g, ops);
    out.trajectory.push_back(-tape.value(ev.loss));
    out.converged = satisfied(tape, ev);
    if (out.converged || step == options.steps) break;
    const GradientMap grad = tape.backward(ev.loss);
    for (std::size_t s = 0; s < g.size(); ++s) {
      const double d = grad[g.node(s)];
      if (logit_param) {
        z[s] -= options.learning_rate * d * out.values[s] * (1.0 - out.values[s]);
        out.values[s] = sigmoid(z[s]);
      } else {
        out.values[s] = std::clamp(out.values[s] - options.learning_rate * d, 0.0, 1.0);
      }
    }
    out.steps_taken = step + 1;
  }
  return out;
}

MaxSatStudy max_sat_study(const KnowledgeBase& kb, std::size_t objects, const OperatorConfig& ops,
                          std::size_t inits, std::uint64_t seed, const MaxSatOptions& options) {
  std::vector<std::size_t> batch(objects);
  LookupTable base;
  for (std::size_t i = 0; i < objects; ++i) batch[i] = base.domain().intern("o" + std::to_string(i + 1));
  const GroundingTable g(kb.signature(), batch);
  Rng rng(seed);
  MaxSatStudy study;
  for (std::size_t run = 0; run < inits; ++run) {
    LookupTable table = base;
    for (std::size_t s = 0; s < g.size(); ++s) table.set(g.atom(s), rng.uniform());
    study.successes += fuzzy_max_sat(kb, table, ops, options).converged;
    ++study.inits;
  }
  return study;
}

// ---------------------------------------------------------------------------
// Synthetic task

SyntheticTask make_synthetic_task(const SyntheticTaskOptions& o) {
  if (o.classes < 2 || o.dim < 1 || o.points < o.classes) {
    throw SemanticError("synthetic task needs >= 2 classes, >= 1 dimension and >= 1 point per class");
  }
  if (!(o.labeled_fraction > 0.0 && o.labeled_fraction <= 1.0)) {
    throw SemanticError("labeled_fraction must lie in (0, 1]");
  }
  Rng rng(o.seed);
  std::vector<std::vector<double>> centers(o.classes, std::vector<double>(o.dim));
  for (auto& c : centers) {
    for (double& v : c) v = o.spread * rng.normal();
  }
  auto draw = [&](std::size_t n, std::vector<std::vector<double>>& xs, std::vector<int>& ys) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k = i % o.classes;  // balanced
      std::vector<double> x(o.dim);
      for (std::size_t d = 0; d < o.dim; ++d) x[d] = centers[k][d] + rng.normal();
      xs.push_back(std::move(x));
      ys.push_back(static_cast<int>(k));
    }
  };
  SyntheticTask task;
  task.classes = o.classes;
  task.dim = o.dim;
  draw(o.points, task.x, task.y);
  draw(o.test_points, task.test_x, task.test_y);

  // Stratified labeled split: equal shares per class, remainder at random.
  const std::size_t n_labeled =
      std::max(o.classes, static_cast<std::size_t>(std::llround(o.labeled_fraction * o.points)));
  std::vector<std::vector<std::size_t>> by_class(o.classes);
  for (std::size_t i = 0; i < o.points; ++i) by_class[static_cast<std::size_t>(task.y[i])].push_back(i);
  for (auto& members : by_class) rng.shuffle(members);
  std::vector<char> is_labeled(o.points, 0);
  std::vector<std::size_t> rest;
  const std::size_t per_class = n_labeled / o.classes;
  for (auto& members : by_class) {
    for (std::size_t j = 0; j < members.size(); ++j) {
      if (j < per_class) {
        is_labeled[members[j]] = 1;
      } else {
        rest.push_back(members[j]);
      }
    }
  }
  rng.shuffle(rest);
  for (std::size_t j = 0; j < n_labeled - per_class * o.classes && j < rest.size(); ++j) is_labeled[rest[j]] = 1;
  for (std::size_t i = 0; i < o.points; ++i) (is_labeled[i] ? task.labeled : task.unlabeled).push_back(i);
  return task;
}

// ---------------------------------------------------------------------------
// Model

TinyModel::TinyModel(std::size_t dim, std::size_t hidden, std::size_t classes, std::size_t slices,
                     std::uint64_t seed)
    : dim_(dim), hidden_(hidden), classes_(classes), slices_(slices) {
  if (!dim || !hidden || classes < 2 || !slices) throw SemanticError("model dimensions must be positive");
  std::size_t at = 0;
  auto block = [&](std::size_t size) {
    const std::size_t start = at;
    at += size;
    return start;
  };
  w1_ = block(hidden * dim);
  b1_ = block(hidden);
  w2_ = block(classes * hidden);
  b2_ = block(classes);
  wt_ = block(slices * hidden * hidden);
  v_ = block(slices * 2 * hidden);
  c_ = block(slices);
  u_ = block(slices);
  theta_.assign(at, 0.0);
  Rng rng(seed);
  auto fill = [&](std::size_t start, std::size_t size, double scale) {
    for (std::size_t i = 0; i < size; ++i) theta_[start + i] = scale * rng.normal();
  };
  const double h = static_cast<double>(hidden);
  fill(w1_, hidden * dim, 1.0 / std::sqrt(static_cast<double>(dim)));
  fill(w2_, classes * hidden, 1.0 / std::sqrt(h));
  fill(wt_, slices * hidden * hidden, 1.0 / h);
  fill(v_, slices * 2 * hidden, 1.0 / std::sqrt(2.0 * h));
  fill(u_, slices, 1.0 / std::sqrt(static_cast<double>(slices)));
}

TinyModel::PointCache TinyModel::forward(std::span<const double> x) const {
  PointCache c;
  c.embedding.resize(hidden_);
  for (std::size_t i = 0; i < hidden_; ++i) {
    double s = theta_[b1_ + i];
    const double* row = &theta_[w1_ + i * dim_];
    for (std::size_t d = 0; d < dim_; ++d) s += row[d] * x[d];
    c.embedding[i] = std::tanh(s);
  }
  c.probs.resize(classes_);
  double top = -INFINITY;
  for (std::size_t k = 0; k < classes_; ++k) {
    double s = theta_[b2_ + k];
    const double* row = &theta_[w2_ + k * hidden_];
    for (std::size_t i = 0; i < hidden_; ++i) s += row[i] * c.embedding[i];
    c.probs[k] = s;
    top = std::max(top, s);
  }
  double total = 0.0;
  for (double& p : c.probs) total += p = std::exp(p - top);
  for (double& p : c.probs) p /= total;
  return c;
}

TinyModel::PairCache TinyModel::same(std::span<const double> e1, std::span<const double> e2) const {
  PairCache c;
  c.hidden.resize(slices_);
  double z = 0.0;
  for (std::size_t k = 0; k < slices_; ++k) {
    double q = theta_[c_ + k];
    const double* w = &theta_[wt_ + k * hidden_ * hidden_];
    for (std::size_t i = 0; i < hidden_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < hidden_; ++j) row += w[i * hidden_ + j] * e2[j];
      q += e1[i] * row;
    }
    const double* v = &theta_[v_ + k * 2 * hidden_];
    for (std::size_t i = 0; i < hidden_; ++i) q += v[i] * e1[i] + v[hidden_ + i] * e2[i];
    c.hidden[k] = std::tanh(q);
    z += theta_[u_ + k] * c.hidden[k];
  }
  c.value = sigmoid(z);
  return c;
}

void TinyModel::backward_point(std::span<const double> x, const PointCache& cache,
                               std::span<const double> d_probs, std::span<const double> d_embedding,
                               std::vector<double>& grad) const {
  double dot = 0.0;
  for (std::size_t k = 0; k < classes_; ++k) dot += d_probs[k] * cache.probs[k];
  std::vector<double> d_e(d_embedding.begin(), d_embedding.end());
  for (std::size_t k = 0; k < classes_; ++k) {
    const double d_logit = cache.probs[k] * (d_probs[k] - dot);
    if (d_logit == 0.0) continue;
    grad[b2_ + k] += d_logit;
    for (std::size_t i = 0; i < hidden_; ++i) {
      grad[w2_ + k * hidden_ + i] += d_logit * cache.embedding[i];
      d_e[i] += theta_[w2_ + k * hidden_ + i] * d_logit;
    }
  }
  for (std::size_t i = 0; i < hidden_; ++i) {
    const double d_pre = d_e[i] * (1.0 - cache.embedding[i] * cache.embedding[i]);
    if (d_pre == 0.0) continue;
    grad[b1_ + i] += d_pre;
    for (std::size_t d = 0; d < dim_; ++d) grad[w1_ + i * dim_ + d] += d_pre * x[d];
  }
}

void TinyModel::backward_same(std::span<const double> e1, std::span<const double> e2, const PairCache& cache,
                              double d_logit, std::vector<double>& grad, std::span<double> d_e1,
                              std::span<double> d_e2) const {
  for (std::size_t k = 0; k < slices_; ++k) {
    grad[u_ + k] += d_logit * cache.hidden[k];
    const double d_q = d_logit * theta_[u_ + k] * (1.0 - cache.hidden[k] * cache.hidden[k]);
    if (d_q == 0.0) continue;
    grad[c_ + k] += d_q;
    const double* w = &theta_[wt_ + k * hidden_ * hidden_];
    double* gw = &grad[wt_ + k * hidden_ * hidden_];
    for (std::size_t i = 0; i < hidden_; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < hidden_; ++j) {
        gw[i * hidden_ + j] += d_q * e1[i] * e2[j];
        row += w[i * hidden_ + j] * e2[j];
        d_e2[j] += d_q * e1[i] * w[i * hidden_ + j];
      }
      d_e1[i] += d_q * row;
    }
    const double* v = &theta_[v_ + k * 2 * hidden_];
    double* gv = &grad[v_ + k * 2 * hidden_];
    for (std::size_t i = 0; i < hidden_; ++i) {
      gv[i] += d_q * e1[i];
      gv[hidden_ + i] += d_q * e2[i];
      d_e1[i] += d_q * v[i];
      d_e2[i] += d_q * v[hidden_ + i];
    }
  }
}

int TinyModel::predict(std::span<const double> x) const {
  const PointCache c = forward(x);
  return static_cast<int>(std::max_element(c.probs.begin(), c.probs.end()) - c.probs.begin());
}

double evaluate(const TinyModel& model, const std::vector<std::vector<double>>& x, const std::vector<int>& y) {
  if (x.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < x.size(); ++i) correct += model.predict(x[i]) == y[i];
  return static_cast<double>(correct) / static_cast<double>(x.size());
}

// ---------------------------------------------------------------------------
// Knowledge base

std::string class_predicate(std::size_t k) {
  static const char* const kNames[] = {"zero", "one", "two",   "three", "four",
                                       "five", "six", "seven", "eight", "nine"};
  return k < 10 ? kNames[k] : "c" + std::to_string(k);
}

KnowledgeBase class_kb(std::size_t classes, const std::vector<int>& groups) {
  KnowledgeBase kb;
  auto has = [&](int g) { return std::find(groups.begin(), groups.end(), g) != groups.end(); };
  for (int g : groups) {
    if (g < 1 || g > 3) throw SemanticError("unknown formula group " + std::to_string(g) + " (expected 1, 2 or 3)");
  }
  const Formula same_xy = Formula::atom("same", {"x", "y"});
  if (has(1)) {
    for (std::size_t k = 0; k < classes; ++k) {
      const std::string p = class_predicate(k);
      kb.add(Formula::forall({"x", "y"}, Formula::implies(Formula::conj(Formula::atom(p, {"x"}), Formula::atom(p, {"y"})),
                                                          same_xy)));
    }
  }
  if (has(2)) {
    for (std::size_t k = 0; k < classes; ++k) {
      const std::string p = class_predicate(k);
      kb.add(Formula::forall({"x", "y"},
                             Formula::implies(Formula::conj(Formula::atom(p, {"x"}), same_xy), Formula::atom(p, {"y"}))));
    }
  }
  if (has(3)) kb.add(Formula::forall({"x", "y"}, Formula::implies(same_xy, Formula::atom("same", {"y", "x"}))));
  return kb;
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

double parse_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x)) {
    throw InputError("malformed number for " + key + ": '" + v + "'");
  }
  return x;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  if (v.empty() || !std::all_of(v.begin(), v.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    throw InputError("malformed count for " + key + ": '" + v + "'");
  }
  return static_cast<std::size_t>(std::stoull(v));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void TrainConfig::apply(std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos) throw InputError("expected key=value, got '" + std::string(assignment) + "'");
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  if (key == "tnorm" || key == "tconorm" || key == "implication" || key == "aggregator") {
    ops.apply(key + "=" + value);
  } else if (key == "s" || key == "b0") {
    // Sigmoidal parameters; a plain implication becomes the sigmoidal base.
    const OperatorDescriptor d = ops.implication.descriptor();
    const bool sig = d.name == "sigmoidal";
    OperatorParams params;
    params.base = sig ? d.params.base : d.name;
    params.p = d.params.p;
    params.s = key == "s" ? parse_real(key, value) : (sig && d.params.s ? *d.params.s : 1.0);
    params.b0 = key == "b0" ? parse_real(key, value) : (sig && d.params.b0 ? *d.params.b0 : -0.5);
    ops.implication = BinaryOperator::implication("sigmoidal", params);
  } else if (key == "w_dfl") {
    w_dfl = parse_real(key, value);
  } else if (key == "lr") {
    learning_rate = parse_real(key, value);
  } else if (key == "steps") {
    steps = parse_count(key, value);
  } else if (key == "seed") {
    seed = parse_count(key, value);
  } else if (key == "labeled_fraction") {
    labeled_fraction = parse_real(key, value);
  } else if (key == "batch_sup") {
    batch_sup = parse_count(key, value);
  } else if (key == "batch_dfl") {
    batch_dfl = parse_count(key, value);
  } else if (key == "eval_every") {
    eval_every = parse_count(key, value);
  } else if (key == "formulas") {
    std::vector<int> groups;
    std::stringstream in(value);
    std::string item;
    while (std::getline(in, item, ',')) groups.push_back(static_cast<int>(parse_count(key, trim(item))));
    if (groups.empty()) throw SemanticError("formulas must list at least one group");
    for (int g : groups) {
      if (g < 1 || g > 3) throw SemanticError("unknown formula group " + std::to_string(g) + " (expected 1, 2 or 3)");
    }
    formulas = groups;
  } else if (key == "hidden") {
    hidden = parse_count(key, value);
  } else if (key == "slices") {
    slices = parse_count(key, value);
  } else if (key == "points") {
    points = parse_count(key, value);
  } else if (key == "test_points") {
    test_points = parse_count(key, value);
  } else if (key == "dim") {
    dim = parse_count(key, value);
  } else if (key == "spread") {
    spread = parse_real(key, value);
  } else {
    throw SemanticError("unknown configuration key '" + key + "'");
  }
}

TrainConfig TrainConfig::parse(std::string_view text) {
  TrainConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string body = trim(line.substr(0, line.find('#')));
    if (body.empty()) continue;
    try {
      c.apply(body);
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(n) + ": " + e.what());
    } catch (const SemanticError& e) {
      throw SemanticError("line " + std::to_string(n) + ": " + e.what());
    }
  }
  c.validate();
  return c;
}

TrainConfig TrainConfig::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string TrainConfig::serialize() const {
  std::string groups;
  for (int g : formulas) groups += (groups.empty() ? "" : ",") + std::to_string(g);
  std::string out;
  out += "tnorm=" + ops.tnorm.descriptor().spec() + "\n";
  out += "tconorm=" + ops.tconorm.descriptor().spec() + "\n";
  out += "implication=" + ops.implication.descriptor().spec() + "\n";
  out += "aggregator=" + ops.aggregator.descriptor().spec() + "\n";
  out += "w_dfl=" + fmt(w_dfl) + "\n";
  out += "lr=" + fmt(learning_rate) + "\n";
  out += "steps=" + std::to_string(steps) + "\n";
  out += "seed=" + std::to_string(seed) + "\n";
  out += "labeled_fraction=" + fmt(labeled_fraction) + "\n";
  out += "batch_sup=" + std::to_string(batch_sup) + "\n";
  out += "batch_dfl=" + std::to_string(batch_dfl) + "\n";
  out += "eval_every=" + std::to_string(eval_every) + "\n";
  out += "formulas=" + groups + "\n";
  out += "hidden=" + std::to_string(hidden) + "\n";
  out += "slices=" + std::to_string(slices) + "\n";
  out += "points=" + std::to_string(points) + "\n";
  out += "test_points=" + std::to_string(test_points) + "\n";
  out += "dim=" + std::to_string(dim) + "\n";
  out += "spread=" + fmt(spread) + "\n";
  return out;
}

void TrainConfig::validate() const {
  if (!(w_dfl >= 0.0)) throw SemanticError("w_dfl must be non-negative");
  if (!(learning_rate > 0.0)) throw SemanticError("lr must be positive");
  if (!(labeled_fraction > 0.0 && labeled_fraction <= 1.0)) throw SemanticError("labeled_fraction must lie in (0, 1]");
  if (!batch_sup || !batch_dfl || !eval_every || !hidden || !slices || !dim) {
    throw SemanticError("batch sizes, eval_every, hidden, slices and dim must be positive");
  }
  if (points < 10 || batch_dfl > points) throw SemanticError("points must be >= 10 and >= batch_dfl");
  if (!(spread > 0.0)) throw SemanticError("spread must be positive");
  if (formulas.empty()) throw SemanticError("formulas must list at least one group");
}

SyntheticTaskOptions TrainConfig::task_options() const {
  SyntheticTaskOptions o;
  o.dim = dim;
  o.points = points;
  o.test_points = test_points;
  o.labeled_fraction = labeled_fraction;
  o.spread = spread;
  o.seed = seed;
  return o;
}

std::string metrics_csv_header() { return "step,loss_sup,loss_dfl,accuracy,cons_pct,cu_cons_pct,cu_ant_pct"; }

std::string metrics_csv_row(const MetricsRecord& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.6f,%.6f,%.4f,%.6f,%.6f,%.6f", r.step, r.loss_sup, r.loss_dfl, r.accuracy,
                r.cons_pct, r.cu_cons_pct, r.cu_ant_pct);
  return buf;
}

// ---------------------------------------------------------------------------
// Training

StepBatch draw_batch(const SyntheticTask& task, const TrainConfig& config, Rng& rng) {
  StepBatch b;
  std::vector<std::size_t> pool = task.labeled;
  rng.shuffle(pool);
  pool.resize(std::min(pool.size(), config.batch_sup));
  b.supervised = pool;
  std::vector<std::pair<std::size_t, std::size_t>> positives, negatives;
  for (std::size_t i : b.supervised) {
    for (std::size_t j : b.supervised) {
      if (i == j) continue;
      (task.y[i] == task.y[j] ? positives : negatives).emplace_back(i, j);
    }
  }
  rng.shuffle(negatives);
  negatives.resize(std::min(negatives.size(), positives.size()));
  b.same_pairs = positives;
  b.same_pairs.insert(b.same_pairs.end(), negatives.begin(), negatives.end());
  const auto picks = sample_batch(task.unlabeled.size(), config.batch_dfl, rng.next());
  for (std::size_t p : picks) b.dfl.push_back(task.unlabeled[p]);
  std::sort(b.dfl.begin(), b.dfl.end());
  return b;
}

namespace {

// Forward caches for a DFL batch and the grounding built from them.
struct ModelGrounding {
  std::vector<TinyModel::PointCache> points;
  std::vector<TinyModel::PairCache> pairs;  // b x b, row-major by position
  std::vector<std::size_t> slot_point;      // per slot: point position
  std::vector<std::size_t> slot_other;      // per slot: second position (same only)
  std::vector<int> slot_class;              // per slot: class, or -1 for same
  std::vector<double> raw;                  // unclamped model output per slot
};

ModelGrounding ground_model(Tape& tape, GroundingTable& g, const TinyModel& model, const SyntheticTask& task,
                            const std::vector<std::size_t>& points) {
  ModelGrounding mg;
  const std::size_t b = points.size();
  for (std::size_t p : points) mg.points.push_back(model.forward(task.x[p]));
  mg.pairs.reserve(b * b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) mg.pairs.push_back(model.same(mg.points[i].embedding, mg.points[j].embedding));
  }
  std::map<std::string, int> class_of;
  for (std::size_t k = 0; k < model.classes(); ++k) class_of[class_predicate(k)] = static_cast<int>(k);
  for (std::size_t s = 0; s < g.size(); ++s) {
    const GroundAtom atom = g.atom(s);
    const std::size_t i = g.position_of(atom.objects.at(0));
    double v;
    if (atom.predicate == "same") {
      const std::size_t j = g.position_of(atom.objects.at(1));
      v = mg.pairs[i * b + j].value;
      mg.slot_class.push_back(-1);
      mg.slot_other.push_back(j);
    } else {
      const auto it = class_of.find(atom.predicate);
      if (it == class_of.end()) throw SemanticError("no model output for predicate '" + atom.predicate + "'");
      v = mg.points[i].probs[static_cast<std::size_t>(it->second)];
      mg.slot_class.push_back(it->second);
      mg.slot_other.push_back(0);
    }
    mg.slot_point.push_back(i);
    mg.raw.push_back(v);
    g.set(s, tape.leaf(std::clamp(v, kModelEpsilon, 1.0 - kModelEpsilon), "atom"));
  }
  return mg;
}

double log_sigmoid(double z) { return z >= 0 ? -std::log1p(std::exp(-z)) : z - std::log1p(std::exp(z)); }

}  // namespace

TermGradients term_gradients(const TinyModel& model, const SyntheticTask& task, const TrainConfig& config,
                             const StepBatch& batch, bool with_dfl) {
  const std::size_t np = model.params().size(), h = model.hidden(), C = model.classes();
  TermGradients out;
  out.sup.assign(np, 0.0);
  out.dfl.assign(np, 0.0);
  out.same.assign(np, 0.0);
  const std::vector<double> zero_e(h, 0.0);

  // Supervised cross-entropy, summed over the batch.
  for (std::size_t p : batch.supervised) {
    const auto cache = model.forward(task.x[p]);
    const std::size_t y = static_cast<std::size_t>(task.y[p]);
    const double py = std::max(cache.probs[y], 1e-300);
    out.loss_sup -= std::log(py);
    std::vector<double> d_probs(C, 0.0);
    d_probs[y] = -1.0 / py;
    model.backward_point(task.x[p], cache, d_probs, zero_e, out.sup);
  }

  // Binary cross-entropy of `same` on labeled pairs, summed over pairs.
  if (!batch.same_pairs.empty()) {
    std::map<std::size_t, TinyModel::PointCache> caches;
    std::map<std::size_t, std::vector<double>> d_e;
    for (const auto& [i, j] : batch.same_pairs) {
      for (std::size_t p : {i, j}) {
        if (!caches.count(p)) {
          caches.emplace(p, model.forward(task.x[p]));
          d_e.emplace(p, std::vector<double>(h, 0.0));
        }
      }
    }
    for (const auto& [i, j] : batch.same_pairs) {
      const auto pc = model.same(caches.at(i).embedding, caches.at(j).embedding);
      double z = 0.0;
      for (std::size_t k = 0; k < model.slices(); ++k) z += model.params()[np - model.slices() + k] * pc.hidden[k];
      const double t = task.y[i] == task.y[j] ? 1.0 : 0.0;
      out.loss_same -= t * log_sigmoid(z) + (1.0 - t) * log_sigmoid(-z);
      model.backward_same(caches.at(i).embedding, caches.at(j).embedding, pc, pc.value - t, out.same, d_e.at(i),
                          d_e.at(j));
    }
    const std::vector<double> zero_p(C, 0.0);
    for (const auto& [p, cache] : caches) model.backward_point(task.x[p], cache, zero_p, d_e.at(p), out.same);
  }

  // DFL loss on the unlabeled batch.
  if (with_dfl) {
    const KnowledgeBase kb = class_kb(task.classes, config.formulas);
    Tape tape;
    GroundingTable g(kb.signature(), batch.dfl);
    const ModelGrounding mg = ground_model(tape, g, model, task, batch.dfl);
    const NodeId loss = dfl_loss(tape, kb, g, config.ops);
    out.loss_dfl = tape.value(loss);
    const GradientMap grad = tape.backward(loss);
    const std::size_t b = batch.dfl.size();
    std::vector<std::vector<double>> d_probs(b, std::vector<double>(C, 0.0)), d_e(b, std::vector<double>(h, 0.0));
    for (std::size_t s = 0; s < g.size(); ++s) {
      const double v = mg.raw[s];
      if (v < kModelEpsilon || v > 1.0 - kModelEpsilon) continue;  // clamped: no gradient
      const double d = grad[g.node(s)];
      if (d == 0.0) continue;
      const std::size_t i = mg.slot_point[s];
      if (mg.slot_class[s] >= 0) {
        d_probs[i][static_cast<std::size_t>(mg.slot_class[s])] += d;
      } else {
        const std::size_t j = mg.slot_other[s];
        const auto& pc = mg.pairs[i * b + j];
        model.backward_same(mg.points[i].embedding, mg.points[j].embedding, pc, d * pc.value * (1.0 - pc.value), out.dfl,
                            d_e[i], d_e[j]);
      }
    }
    for (std::size_t i = 0; i < b; ++i) model.backward_point(task.x[batch.dfl[i]], mg.points[i], d_probs[i], d_e[i], out.dfl);
  }
  return out;
}

GradientQuality batch_gradient_quality(const TinyModel& model, const SyntheticTask& task, const TrainConfig& config,
                                       const std::vector<std::size_t>& points, const std::vector<int>* labels_override) {
  const KnowledgeBase kb = class_kb(task.classes, config.formulas);
  Tape tape;
  GroundingTable g(kb.signature(), points);
  ground_model(tape, g, model, task, points);
  std::map<std::size_t, int> label;
  for (std::size_t i = 0; i < points.size(); ++i) {
    label[points[i]] = labels_override ? labels_override->at(i) : task.y[points[i]];
  }
  std::map<std::string, int> class_of;
  for (std::size_t k = 0; k < task.classes; ++k) class_of[class_predicate(k)] = static_cast<int>(k);
  const Labeling labels = classical_labels([&](const std::string& p, std::span<const std::size_t> o) {
    if (p == "same") return label.at(o[0]) == label.at(o[1]);
    return label.at(o[0]) == class_of.at(p);
  });
  return gradient_quality(kb, g, tape, config.ops, labels);
}

TrainResult semi_supervised_train(const SyntheticTask& task, const TrainConfig& config,
                                  const std::function<void(const MetricsRecord&)>& on_record) {
  config.validate();
  class_kb(task.classes, config.formulas);  // reject unknown groups before work
  Rng root(config.seed);
  TrainResult result{TinyModel(task.dim, config.hidden, task.classes, config.slices, root.next()), {}};
  Rng batches = root.split();
  Rng eval_rng = root.split();
  TinyModel& model = result.model;

  auto record = [&](std::size_t step) {
    const StepBatch eb = draw_batch(task, config, eval_rng);
    const TermGradients t = term_gradients(model, task, config, eb, true);
    const GradientQuality q = batch_gradient_quality(model, task, config, eb.dfl);
    MetricsRecord r;
    r.step = step;
    r.loss_sup = t.loss_sup;
    r.loss_dfl = t.loss_dfl;
    r.accuracy = evaluate(model, task.test_x, task.test_y);
    r.cons_pct = q.cons_ratio;
    r.cu_cons_pct = q.cu_cons_ratio;
    r.cu_ant_pct = q.cu_ant_ratio;
    result.metrics.push_back(r);
    if (on_record) on_record(r);
  };

  std::vector<double>& theta = model.params();
  for (std::size_t step = 0; step < config.steps; ++step) {
    if (step % config.eval_every == 0) record(step);
    const StepBatch b = draw_batch(task, config, batches);
    const TermGradients t = term_gradients(model, task, config, b, config.w_dfl > 0.0);
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] -= config.learning_rate * (t.sup[i] + config.w_dfl * t.dfl[i] + t.same[i]);
    }
  }
  record(config.steps);
  return result;
}

// ---------------------------------------------------------------------------
// Sweeps

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(std::count_if(runs.begin(), runs.end(), [](const SweepRun& r) { return !r.final; }));
}

SweepResult config_sweep(const TrainConfig& base, const std::string& axis, const std::vector<std::string>& values,
                         const std::vector<std::uint64_t>& seeds, std::size_t jobs) {
  if (values.empty() || seeds.empty()) throw SemanticError("sweep needs at least one value and one seed");
  SweepResult result;
  result.axis = axis;
  for (const auto& v : values) {
    for (std::uint64_t s : seeds) result.runs.push_back({v, s, std::nullopt, ""});
  }
  std::mutex mu;
  std::size_t next = 0;
  auto worker = [&] {
    for (;;) {
      std::size_t idx;
      {
        std::lock_guard<std::mutex> lock(mu);
        if (next == result.runs.size()) return;
        idx = next++;
      }
      SweepRun& run = result.runs[idx];
      try {
        TrainConfig c = base;
        c.seed = run.seed;
        c.apply(axis + "=" + run.value);  // a `seed` axis overrides the run seed
        run.seed = c.seed;
        c.validate();
        const SyntheticTask task = make_synthetic_task(c.task_options());
        run.final = semi_supervised_train(task, c).metrics.back();
      } catch (const std::exception& e) {
        run.error = e.what();
      }
    }
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, result.runs.size()));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& v : values) {
    MetricsRecord mean;
    std::size_t n = 0;
    for (const auto& r : result.runs) {
      if (r.value != v || !r.final) continue;
      const MetricsRecord& f = *r.final;
      mean.step = f.step;
      mean.loss_sup += f.loss_sup;
      mean.loss_dfl += f.loss_dfl;
      mean.accuracy += f.accuracy;
      mean.cons_pct += f.cons_pct;
      mean.cu_cons_pct += f.cu_cons_pct;
      mean.cu_ant_pct += f.cu_ant_pct;
      ++n;
    }
    if (!n) continue;
    const double d = static_cast<double>(n);
    mean.loss_sup /= d;
    mean.loss_dfl /= d;
    mean.accuracy /= d;
    mean.cons_pct /= d;
    mean.cu_cons_pct /= d;
    mean.cu_ant_pct /= d;
    result.means.emplace_back(v, mean);
  }
  return result;
}

namespace {

// RFC 4180 quoting for fields with separators, quotes or newlines.
std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (char c : v) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

}  // namespace

std::string sweep_csv(const SweepResult& result) {
  std::string out = "axis,value,seed," + metrics_csv_header() + "\n";
  for (const auto& r : result.runs) {
    if (!r.final) continue;
    out += csv_field(result.axis) + "," + csv_field(r.value) + "," + std::to_string(r.seed) + "," + metrics_csv_row(*r.final) + "\n";
  }
  for (const auto& [v, m] : result.means) out += csv_field(result.axis) + "," + csv_field(v) + ",mean," + metrics_csv_row(m) + "\n";
  return out;
}

}  // namespace dfl

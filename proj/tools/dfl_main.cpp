// Copyright 2026 The DFL Authors
// SPDX-License-Identifier: Apache-2.0
//
// dfl: command-line front end for evaluation, operator analysis, training,
// sweeps and the exact oracle. Data goes to standard output (or --out);
// diagnostics go to standard error under DFL_LOG=info|debug.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dfl/analysis.hpp"
#include "dfl/error.hpp"
#include "dfl/logic.hpp"
#include "dfl/operators.hpp"
#include "dfl/oracle.hpp"
#include "dfl/trainer.hpp"
#include "dfl/valuation.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Logging

enum class LogLevel { kQuiet, kInfo, kDebug };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("DFL_LOG");
    if (!env) return LogLevel::kQuiet;
    const std::string v = env;
    if (v == "debug") return LogLevel::kDebug;
    if (v == "info") return LogLevel::kInfo;
    return LogLevel::kQuiet;
  }();
  return level;
}

void log(LogLevel level, const std::string& message) {
  if (level > log_level()) return;
  std::cerr << (level == LogLevel::kDebug ? "[debug] " : "[info] ") << message << '\n';
}

// ---------------------------------------------------------------------------
// Formatting and output

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dfl::InputError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

/// 64-bit FNV-1a, used for platform-independent manifest hashes.
std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

/// Everything a command needs to emit its data and manifest.
struct Run {
  std::vector<std::string> argv;
  std::string command;
  std::string out_path;       // empty: standard output
  std::string manifest_path;  // empty: beside out_path, or none
  std::optional<std::uint64_t> seed;
  std::string canonical;  // hashed inputs: options and file contents
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void input_file(const std::string& path) {
    const std::string content = read_file(path);
    canonical += "file:" + std::to_string(content.size()) + "\n" + content + "\n";
  }
  void input(const std::string& key, const std::string& value) { canonical += key + "=" + value + "\n"; }

  void emit(const std::string& data) const {
    if (out_path.empty()) {
      std::cout << data << std::flush;
    } else {
      std::ofstream out(out_path, std::ios::binary);
      if (!out) throw dfl::InputError("cannot write '" + out_path + "'");
      out << data;
      log(LogLevel::kInfo, "wrote " + out_path);
    }
    write_manifest();
  }

  void write_manifest() const {
    const std::string path =
        !manifest_path.empty() ? manifest_path : (out_path.empty() ? "" : out_path + ".manifest.json");
    if (path.empty()) return;
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(fnv1a(canonical)));
    nlohmann::ordered_json m;
    m["command"] = argv;
    m["subcommand"] = command;
    m["config_hash"] = hash;
    m["seed"] = seed ? nlohmann::ordered_json(*seed) : nlohmann::ordered_json(nullptr);
    m["version"] = kVersion;
    m["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m["outputs"] = out_path.empty() ? std::vector<std::string>{} : std::vector<std::string>{out_path};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw dfl::InputError("cannot write '" + path + "'");
    out << m.dump(2) << '\n';
  }
};

// ---------------------------------------------------------------------------
// Operator selection

dfl::OperatorConfig operator_config(const std::vector<std::string>& assignments, Run& run) {
  dfl::OperatorConfig ops;
  for (const auto& a : assignments) ops.apply(a);
  run.input("ops", ops.describe());
  return ops;
}

const std::map<std::string, dfl::Family> kSuffixes = {
    {"_tnorm", dfl::Family::kTNorm},
    {"_tconorm", dfl::Family::kTConorm},
    {"_agg", dfl::Family::kAggregator},
    {"_impl", dfl::Family::kImplication},
};

std::string family_name(dfl::Family f) {
  switch (f) {
    case dfl::Family::kNegation: return "negation";
    case dfl::Family::kTNorm: return "tnorm";
    case dfl::Family::kTConorm: return "tconorm";
    case dfl::Family::kAggregator: return "aggregator";
    case dfl::Family::kImplication: return "implication";
  }
  return "?";
}

/// `name[_tnorm|_tconorm|_agg|_impl][:key=value,...]`. Without a suffix the
/// name must belong to exactly one of the allowed families.
dfl::OperatorDescriptor resolve_operator(const std::string& text, const std::vector<dfl::Family>& allowed) {
  const auto colon = text.find(':');
  std::string name = text.substr(0, colon);
  const std::string params = colon == std::string::npos ? "" : text.substr(colon);
  std::vector<dfl::Family> families = allowed;
  for (const auto& [suffix, family] : kSuffixes) {
    if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      name.resize(name.size() - suffix.size());
      families = {family};
      break;
    }
  }
  std::vector<dfl::OperatorDescriptor> matches;
  for (dfl::Family family : families) {
    for (const auto& d : dfl::catalog()) {
      if (d.family != family || d.name != name) continue;
      const dfl::OperatorSpec spec = dfl::parse_operator_spec(family, name + params);
      dfl::OperatorParams p = params.empty() ? d.params : spec.params;
      if (family == dfl::Family::kAggregator) {
        matches.push_back(dfl::Aggregator::make(name, p).descriptor());
      } else {
        matches.push_back(dfl::BinaryOperator::make(family, name, p).descriptor());
      }
    }
  }
  if (matches.empty()) throw dfl::InputError("unknown operator '" + text + "' for this command");
  if (matches.size() > 1) {
    std::string names;
    for (const auto& m : matches) names += " " + m.name + "_" + (m.family == dfl::Family::kAggregator ? "agg" : m.family == dfl::Family::kImplication ? "impl" : family_name(m.family));
    throw dfl::InputError("operator '" + text + "' is ambiguous; use one of:" + names);
  }
  return matches.front();
}

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::logic_error&) {
      throw dfl::InputError("expected a comma-separated list of counts, got '" + text + "'");
    }
  }
  if (out.empty()) throw dfl::InputError("empty list '" + text + "'");
  return out;
}

// ---------------------------------------------------------------------------
// Commands

struct EvalArgs {
  std::string kb, grounding;
  std::vector<std::string> ops;
};

void cmd_eval(const EvalArgs& a, Run& run) {
  run.input_file(a.kb);
  run.input_file(a.grounding);
  const dfl::KnowledgeBase kb = dfl::load_kb(a.kb);
  const dfl::LookupTable table = dfl::load_grounding(a.grounding);
  const dfl::OperatorConfig ops = operator_config(a.ops, run);
  log(LogLevel::kInfo, "operators: " + ops.describe());
  dfl::Tape tape;
  const dfl::GroundingTable g = dfl::build_grounding(tape, table.interpretation(), kb.signature(), table.all_objects());
  const dfl::KbEvaluation ev = dfl::evaluate_kb(tape, kb, g, ops);
  const double loss = tape.value(ev.loss);
  std::string out = "valuation," + num(-loss) + "\nloss," + num(loss) + "\n";
  for (std::size_t i = 0; i < ev.formula_values.size(); ++i) {
    out += "formula_" + std::to_string(i + 1) + "," + num(tape.value(ev.formula_values[i])) + "\n";
  }
  log(LogLevel::kDebug, "tape nodes: " + std::to_string(tape.size()));
  dfl::Tape grad_tape;
  const dfl::GroundingTable g2 =
      dfl::build_grounding(grad_tape, table.interpretation(), kb.signature(), table.all_objects());
  out += "\npredicate,args,value,dL_datom,dVal_datom\n";
  for (const dfl::AtomGradient& r : dfl::atom_gradients(grad_tape, kb, g2, ops)) {
    std::string args;
    for (std::size_t o : r.atom.objects) args += (args.empty() ? "" : ";") + table.domain().name(o);
    out += r.atom.predicate + "," + args + "," + num(r.value) + "," + num(r.d_loss) + "," + num(r.d_valuation) + "\n";
  }
  run.emit(out);
}

struct AnalyzeArgs {
  std::string op;
  std::string n = "2";
  std::size_t samples = 1000000;
  std::size_t audit_samples = 100000;
  std::optional<std::uint64_t> seed;
  double step = 0.1;
  std::string kb, grounding, truth;
  std::vector<std::string> ops;
};

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, Run& run) {
  if (!seed) throw dfl::InputError("--seed is required for this command");
  run.seed = seed;
  run.input("seed", std::to_string(*seed));
  return *seed;
}

void cmd_fractions(const AnalyzeArgs& a, Run& run) {
  const std::uint64_t seed = require_seed(a.seed, run);
  const dfl::OperatorDescriptor d = resolve_operator(
      a.op, {dfl::Family::kAggregator, dfl::Family::kTNorm, dfl::Family::kTConorm, dfl::Family::kImplication});
  run.input("op", family_name(d.family) + ":" + d.spec());
  run.input("n", a.n);
  run.input("samples", std::to_string(a.samples));
  std::string out = "family,op,n,samples,hits,estimate,std_error,closed_form,z_score,closed_form_label,alternative\n";
  for (std::size_t n : parse_sizes(a.n)) {
    const dfl::FractionEstimate e = dfl::estimate_nonvanishing_fraction(d, n, a.samples, seed);
    out += family_name(d.family) + "," + d.spec() + "," + std::to_string(n) + "," + std::to_string(e.samples) + "," +
           std::to_string(e.hits) + "," + num(e.estimate) + "," + num(e.std_error) + "," +
           (e.closed_form ? num(e.closed_form->value) : "") + "," + (e.z_score() ? num(*e.z_score()) : "") + "," +
           (e.closed_form ? e.closed_form->label : "") + "," + (e.alternative ? num(e.alternative->value) : "") + "\n";
  }
  run.emit(out);
}

void cmd_single_passing(const AnalyzeArgs& a, Run& run) {
  const std::uint64_t seed = require_seed(a.seed, run);
  const dfl::OperatorDescriptor d = resolve_operator(
      a.op, {dfl::Family::kAggregator, dfl::Family::kTNorm, dfl::Family::kTConorm, dfl::Family::kImplication});
  run.input("op", family_name(d.family) + ":" + d.spec());
  run.input("n", a.n);
  run.input("samples", std::to_string(a.audit_samples));
  std::string out = "family,op,n,samples,single_passing,max_active,witness\n";
  for (std::size_t n : parse_sizes(a.n)) {
    const dfl::SinglePassingAudit r = dfl::single_passing_audit(d, n, a.audit_samples, seed);
    std::string witness;
    for (double x : r.witness) witness += (witness.empty() ? "" : ";") + num(x);
    out += family_name(d.family) + "," + d.spec() + "," + std::to_string(n) + "," + std::to_string(a.audit_samples) + "," +
           (r.single_passing ? "true" : "false") + "," + std::to_string(r.max_active) + "," + witness + "\n";
  }
  run.emit(out);
}

void cmd_surface(const AnalyzeArgs& a, Run& run) {
  const dfl::OperatorDescriptor d = resolve_operator(a.op, {dfl::Family::kImplication});
  run.input("op", d.spec());
  run.input("step", num(a.step));
  const dfl::BinaryOperator impl = dfl::BinaryOperator::implication(d.name, d.params);
  std::string out = "a,c,d_consequent,d_negated_antecedent\n";
  for (const dfl::SurfacePoint& p : dfl::derivative_surface(impl, a.step)) {
    out += num(p.a) + "," + num(p.c) + "," + num(p.d_consequent) + "," + num(p.d_negated_antecedent) + "\n";
  }
  run.emit(out);
}

void cmd_quality(const AnalyzeArgs& a, Run& run) {
  if (a.kb.empty() || a.grounding.empty()) throw dfl::InputError("quality needs --kb and --grounding");
  run.input_file(a.kb);
  run.input_file(a.grounding);
  const dfl::KnowledgeBase kb = dfl::load_kb(a.kb);
  const dfl::LookupTable table = dfl::load_grounding(a.grounding);
  std::optional<dfl::LookupTable> truth;
  if (!a.truth.empty()) {
    run.input_file(a.truth);
    truth = dfl::load_grounding(a.truth);
  }
  const dfl::OperatorConfig ops = operator_config(a.ops, run);
  // Classical labels: the --truth table, else the grounding rounded at 1/2.
  // Objects are matched by name, since the two files intern independently.
  const dfl::LookupTable& source = truth ? *truth : table;
  const dfl::Labeling labels = dfl::classical_labels([&](const std::string& p, std::span<const std::size_t> o) {
    std::vector<std::size_t> mapped;
    for (std::size_t i : o) mapped.push_back(source.domain().index_of(table.domain().name(i)));
    return source.get(p, mapped) >= 0.5;
  });
  dfl::Tape tape;
  const dfl::GroundingTable g = dfl::build_grounding(tape, table.interpretation(), kb.signature(), table.all_objects());
  const dfl::GradientQuality q = dfl::gradient_quality(kb, g, tape, ops, labels);
  std::string out = "instances,cons,ant,cons_pct,cu_cons_pct,cu_ant_pct,not_applicable\n";
  std::string na;
  for (std::size_t i : q.not_applicable) na += (na.empty() ? "" : ";") + std::to_string(i + 1);
  out += std::to_string(q.instances) + "," + num(q.cons) + "," + num(q.ant) + "," + num(q.cons_ratio) + "," +
         num(q.cu_cons_ratio) + "," + num(q.cu_ant_ratio) + "," + na + "\n";
  run.emit(out);
}

struct TrainArgs {
  std::string config;
  std::vector<std::string> set;
  std::optional<std::uint64_t> seed;
  // sweep
  std::string axis;
  std::vector<std::string> values;
  std::size_t repeats = 1;
  std::size_t jobs = 1;
};

dfl::TrainConfig train_config(const TrainArgs& a, Run& run) {
  dfl::TrainConfig c;
  if (!a.config.empty()) {
    run.input_file(a.config);
    c = dfl::TrainConfig::load(a.config);
  }
  for (const auto& s : a.set) c.apply(s);
  c.seed = require_seed(a.seed, run);
  c.validate();
  run.input("config", c.serialize());
  return c;
}

void cmd_train(const TrainArgs& a, Run& run) {
  const dfl::TrainConfig c = train_config(a, run);
  log(LogLevel::kInfo, "operators: " + c.ops.describe());
  const auto start = std::chrono::steady_clock::now();
  const dfl::SyntheticTask task = dfl::make_synthetic_task(c.task_options());
  std::string out = dfl::metrics_csv_header() + "\n";
  const bool streaming = run.out_path.empty();
  if (streaming) std::cout << out << std::flush;
  const dfl::TrainResult r = dfl::semi_supervised_train(task, c, [&](const dfl::MetricsRecord& m) {
    const std::string row = dfl::metrics_csv_row(m) + "\n";
    if (streaming) std::cout << row << std::flush;
    out += row;
    log(LogLevel::kDebug, "step " + std::to_string(m.step));
  });
  const dfl::MetricsRecord& f = r.metrics.back();
  char summary[160];
  std::snprintf(summary, sizeof summary, "# final step=%zu accuracy=%.4f cons_pct=%.6f cu_cons_pct=%.6f cu_ant_pct=%.6f\n",
                f.step, f.accuracy, f.cons_pct, f.cu_cons_pct, f.cu_ant_pct);
  out += summary;
  log(LogLevel::kInfo, "trained in " + num(std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()) + " s");
  if (streaming) {
    std::cout << summary << std::flush;
    run.write_manifest();
  } else {
    run.emit(out);
  }
}

void cmd_sweep(const TrainArgs& a, Run& run) {
  if (a.axis.empty() || a.values.empty()) throw dfl::InputError("sweep needs --axis and --values/--value");
  if (a.repeats < 1) throw dfl::InputError("--repeats must be at least 1");
  const dfl::TrainConfig c = train_config(a, run);
  run.input("axis", a.axis);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < a.repeats; ++i) seeds.push_back(c.seed + i);
  std::string values;
  for (const auto& v : a.values) values += v + ";";
  run.input("values", values);
  run.input("repeats", std::to_string(a.repeats));
  const dfl::SweepResult r = dfl::config_sweep(c, a.axis, a.values, seeds, a.jobs);
  for (const auto& s : r.runs) {
    if (!s.final) std::cerr << "dfl: run " << a.axis << "=" << s.value << " seed " << s.seed << " failed: " << s.error << '\n';
  }
  if (r.failures() == r.runs.size()) {
    std::cerr << "dfl: every sweep run failed: " << r.runs.front().error << '\n';
    throw dfl::SemanticError("sweep produced no results");
  }
  run.emit(dfl::sweep_csv(r));
}

struct OracleArgs {
  std::string kb, grounding;
  bool dump = false;
};

void cmd_oracle(const OracleArgs& a, Run& run) {
  run.input_file(a.kb);
  run.input_file(a.grounding);
  run.input("dump", a.dump ? "1" : "0");
  const dfl::KnowledgeBase kb = dfl::load_kb(a.kb);
  const dfl::LookupTable table = dfl::load_grounding(a.grounding);
  const dfl::EquivalenceReport r = dfl::equivalence_report(kb, table.interpretation(), table.all_objects());
  std::string out = "exact,dpfl,gap,single_occurrence,atoms,worlds\n";
  out += num(r.exact) + "," + num(r.dpfl) + "," + num(r.gap) + "," + (r.single_occurrence ? "true" : "false") + "," +
         std::to_string(r.atoms) + "," + std::to_string(r.worlds) + "\n";
  if (a.dump) {
    std::string rows;
    const dfl::Enumeration e = dfl::enumerate_worlds(
        kb, table.interpretation(), table.all_objects(), [&](const dfl::World& w, double p, bool sat) {
          std::string bits;
          for (std::size_t i = 0; i < w.atoms->size(); ++i) bits += w.value(i) ? '1' : '0';
          rows += bits + "," + num(p) + "," + (sat ? "1" : "0") + "\n";
        });
    std::string header;
    for (const auto& atom : e.atoms) header += (header.empty() ? "" : " ") + dfl::to_string(atom, &table.domain());
    out += "\n# atoms: " + header + "\nworld,probability,satisfied\n" + rows;
  }
  run.emit(out);
}

}  // namespace

int main(int argc, char** argv) {
  Run run;
  run.argv.assign(argv, argv + argc);

  CLI::App app{"Differentiable fuzzy logics: evaluation, analysis, training and exact oracles"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  auto add_output = [&](CLI::App* cmd) {
    cmd->add_option("--out", run.out_path, "Write data to this file (a manifest is written beside it)");
    cmd->add_option("--manifest", run.manifest_path, "Write the run manifest to this file");
  };

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand("eval", "Valuation, loss and atom gradients of a KB on a grounding");
  eval->add_option("--kb", eval_args.kb, "Knowledge base file")->required();
  eval->add_option("--grounding", eval_args.grounding, "Grounding (truth values) file")->required();
  eval->add_option("--op", eval_args.ops, "Operator override, e.g. tnorm=godel (repeatable)");
  add_output(eval);

  AnalyzeArgs an;
  CLI::App* analyze = app.add_subcommand("analyze", "Operator derivative analysis");
  analyze->require_subcommand(1);
  CLI::App* fractions = analyze->add_subcommand("fractions", "Monte-Carlo nonvanishing-derivative fraction");
  CLI::App* single = analyze->add_subcommand("single-passing", "Audit for at most one nonzero partial");
  for (CLI::App* cmd : {fractions, single}) {
    cmd->add_option("--op", an.op, "Operator, e.g. lukasiewicz_agg or yager_agg:p=2")->required();
    cmd->add_option("--n", an.n, "Arity, or a comma-separated list of arities");
    cmd->add_option("--samples", cmd == fractions ? an.samples : an.audit_samples,
                    "Monte-Carlo samples (at least 10000)");
    cmd->add_option("--seed", an.seed, "Random seed (required)");
    add_output(cmd);
  }
  CLI::App* surface = analyze->add_subcommand("surface", "Implication derivatives on a grid");
  surface->add_option("--op", an.op, "Implication, e.g. reichenbach")->required();
  surface->add_option("--step", an.step, "Grid step (1/step must be an integer)");
  add_output(surface);
  CLI::App* quality = analyze->add_subcommand("quality", "Gradient-quality ratios of a KB's implications");
  quality->add_option("--kb", an.kb, "Knowledge base file")->required();
  quality->add_option("--grounding", an.grounding, "Grounding file")->required();
  quality->add_option("--truth", an.truth, "Classical truth (0/1) file; default rounds the grounding");
  quality->add_option("--op", an.ops, "Operator override (repeatable)");
  add_output(quality);

  TrainArgs tr;
  CLI::App* train = app.add_subcommand("train", "Semi-supervised training on the synthetic digit task");
  CLI::App* sweep = app.add_subcommand("sweep", "Training runs over one configuration axis");
  for (CLI::App* cmd : {train, sweep}) {
    cmd->add_option("--config", tr.config, "Configuration file (key=value lines)");
    cmd->add_option("--set", tr.set, "Configuration override key=value (repeatable)");
    cmd->add_option("--seed", tr.seed, "Random seed (required)");
    add_output(cmd);
  }
  sweep->add_option("--axis", tr.axis, "Configuration key to vary")->required();
  sweep->add_option("--values", tr.values, "Comma-separated values")->delimiter(',');
  sweep->add_option("--value", tr.values, "One value (repeatable; may contain commas)");
  sweep->add_option("--repeats", tr.repeats, "Seeds per value: seed, seed+1, ...");
  sweep->add_option("--jobs", tr.jobs, "Parallel runs");

  OracleArgs oa;
  CLI::App* oracle = app.add_subcommand("oracle", "Exact world-enumeration oracles");
  oracle->require_subcommand(1);
  CLI::App* compare = oracle->add_subcommand("compare", "Semantic loss vs product-logic valuation");
  compare->add_option("--kb", oa.kb, "Knowledge base file")->required();
  compare->add_option("--grounding", oa.grounding, "Grounding (probabilities) file")->required();
  compare->add_flag("--dump", oa.dump, "Also list every world");
  add_output(compare);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (eval->parsed()) {
      run.command = "eval";
      cmd_eval(eval_args, run);
    } else if (fractions->parsed()) {
      run.command = "analyze fractions";
      cmd_fractions(an, run);
    } else if (single->parsed()) {
      run.command = "analyze single-passing";
      cmd_single_passing(an, run);
    } else if (surface->parsed()) {
      run.command = "analyze surface";
      cmd_surface(an, run);
    } else if (quality->parsed()) {
      run.command = "analyze quality";
      cmd_quality(an, run);
    } else if (train->parsed()) {
      run.command = "train";
      cmd_train(tr, run);
    } else if (sweep->parsed()) {
      run.command = "sweep";
      cmd_sweep(tr, run);
    } else if (compare->parsed()) {
      run.command = "oracle compare";
      cmd_oracle(oa, run);
    }
  } catch (const dfl::Error& e) {
    std::cerr << "dfl: " << e.what() << '\n';
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "dfl: internal error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

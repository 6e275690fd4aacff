// metaopt command-line tool.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "metaopt/active_learning.hpp"
#include "metaopt/bench.hpp"
#include "metaopt/errors.hpp"
#include "metaopt/fm.hpp"
#include "metaopt/qaoa.hpp"
#include "metaopt/qubo.hpp"
#include "metaopt/tmm.hpp"

using namespace metaopt;
using nlohmann::json;

namespace {

struct Globals {
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;
  std::string config;
};

// Writes to `path`, or stdout for "" and "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

std::vector<std::size_t> parse_list(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      out.push_back(std::stoul(item));
    } catch (const std::exception&) {
      throw ConfigError("'" + item + "' is not a non-negative integer");
    }
  }
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

RunConfig load_config(const Globals& g, bool override_workers) {
  if (g.config.empty()) throw ConfigError("--config <run-config.json> is required");
  json doc = read_json_file(g.config);
  if (override_workers) doc["workers"] = g.workers;
  if (g.seed) doc["seed"] = *g.seed;
  return parse_run_config(doc, std::filesystem::path(g.config).parent_path());
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string stack;
  std::string bits;
  std::string out;
  bool fom = false;
};

void cmd_simulate(const Globals& g, const SimulateArgs& a, bool workers_given) {
  tmm::SweepResult result;
  std::optional<double> fom;
  if (!a.stack.empty()) {
    const auto spec = parse_simulation_spec(read_json_file(a.stack), std::filesystem::path(a.stack).parent_path());
    result = tmm::sweep(spec.stack, spec.grid, spec.conditions, g.workers);
  } else {
    if (a.bits.empty()) throw ConfigError("simulate needs --stack, or --config with --bits");
    const auto cfg = load_config(g, workers_given);
    const auto bits = parse_bit_string(a.bits);
    result = tmm::sweep(decode(bits, cfg.encoding), cfg.grid, cfg.conditions, cfg.workers);
    if (a.fom) fom = tmm::evaluate_fom(result, cfg.fom);
  }
  emit(a.out, result.to_csv());
  std::fprintf(stderr, "%zu conditions x %zu wavelengths in %.3f s on %zu workers\n", result.conditions.size(),
               result.wavelengths.size(), result.elapsed_s, result.workers);
  if (fom) std::fprintf(stderr, "fom %.12g\n", *fom);
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string out;
  fm::TrainConfig cfg;
};

void cmd_train(const Globals& g, TrainArgs a) {
  std::ifstream in(a.data);
  if (!in) throw ConfigError("cannot open dataset '" + a.data + "'");
  const auto data = fm::load_dataset_csv(in);
  a.cfg.workers = g.workers;
  a.cfg.seed = g.seed.value_or(0);
  const auto report = fm::train_with_report(data, a.cfg);
  emit(a.out, fm::to_json(report.model).dump(2) + "\n");
  std::fprintf(stderr, "%zu rows, %zu bits: loss %.6g -> %.6g (best epoch %zu)\n", data.size(), data.n(),
               report.loss_history.front(), report.loss_history[report.best_epoch], report.best_epoch);
}

// ---------------------------------------------------------------- solve

struct SolveArgs {
  std::string qubo;
  std::string model;
  std::string solver = "annealing";
  std::string out;
  std::size_t p = 1;
  std::uint64_t shots = 1024;
  std::optional<std::size_t> restarts;
  std::size_t outer_budget = 0;
  std::size_t sweeps = 200;
};

void cmd_solve(const Globals& g, const SolveArgs& a) {
  if (a.qubo.empty() == a.model.empty()) throw ConfigError("solve needs exactly one of --qubo or --model");
  const auto q = a.qubo.empty() ? qubo::from_fm(fm::model_from_json(read_json_file(a.model)))
                                : qubo::qubo_from_json(read_json_file(a.qubo));
  const std::uint64_t seed = g.seed.value_or(0);
  const auto kind = parse_solver_kind(a.solver);

  std::optional<qubo::Solution> reference;
  if (q.n() <= qubo::kBruteForceMaxVariables) reference = qubo::brute_force(q, g.workers);

  json report = json::object();
  qubo::Solution solution;
  switch (kind) {
    case SolverKind::exhaustive:
      if (!reference) throw CapacityError("exhaustive search supports at most 26 variables");
      solution = *reference;
      break;
    case SolverKind::annealing:
      solution = qubo::simulated_annealing(q, qubo::AnnealingConfig::scaled_for(q, a.sweeps, a.restarts.value_or(10), seed));
      break;
    case SolverKind::qaoa: {
      qaoa::QaoaConfig cfg;
      cfg.p = a.p;
      cfg.shots = a.shots;
      cfg.restarts = a.restarts.value_or(5);
      cfg.outer_budget = a.outer_budget;
      cfg.seed = seed;
      const auto r = qaoa::run_qaoa(q, cfg);
      solution = {r.best_bits, r.best_energy, "qaoa", r.elapsed_s, r.evaluations};
      report["qaoa"] = qaoa::to_json(r);
      break;
    }
  }
  std::optional<qubo::Accuracy> acc;
  if (reference) acc = qubo::accuracy(solution.energy, reference->energy);
  json out = qubo::solution_report(solution, acc ? &*acc : nullptr);
  out["offset"] = q.offset();
  if (reference) out["reference_energy"] = reference->energy;
  out.update(report);
  emit(a.out, out.dump(2) + "\n");
}

// ---------------------------------------------------------------- optimize

struct OptimizeArgs {
  std::string log;
};

void cmd_optimize(const Globals& g, const OptimizeArgs& a, bool workers_given) {
  const auto cfg = load_config(g, workers_given);
  std::optional<RunLogWriter> writer;
  if (!a.log.empty()) {
    std::filesystem::remove(a.log);
    writer.emplace(a.log);
  }
  const auto log = run(cfg, writer ? &*writer : nullptr, [](const IterationRecord& r) {
    std::fprintf(stderr, "iter %4zu  %-12s fom %.6f  best %.6f  loss %.3g\n", r.iteration, r.source.c_str(), r.fom,
                 r.best_fom, r.fm_loss);
  });
  const json summary{{"best_bits", to_bit_string(log.best_bits)},
                     {"best_fom", log.best_fom},
                     {"seed_best_fom", log.seed_best_fom},
                     {"iterations", log.iterations.size()}};
  std::cout << summary.dump(2) << "\n";
}

// ---------------------------------------------------------------- benches

struct BenchTmmArgs {
  std::size_t layers = 1000;
  double thickness_nm = 100.0;
  std::size_t wavelengths = 100;
  std::string conditions = "50,100,200,350";
  std::string workers = "1,2,4,8";
  std::string out;
};

void cmd_bench_tmm(const Globals& g, const BenchTmmArgs& a) {
  const auto stack = bench::random_binary_stack(a.layers, a.thickness_nm, g.seed.value_or(0));
  const auto table = bench::bench_tmm(stack, SpectralGrid::linspace(0.3, 2.5, a.wavelengths),
                                      parse_list(a.conditions), parse_list(a.workers));
  emit(a.out, table.to_csv());
}

struct BenchFmArgs {
  std::string sizes;
  std::string workers = "1,2,4,8";
  std::size_t epochs = 5;
  std::string out;
};

void cmd_bench_fm(const Globals& g, const BenchFmArgs& a) {
  std::vector<bench::FmSize> sizes;
  if (a.sizes.empty()) {
    sizes = bench::default_fm_sizes();
  } else {
    std::stringstream in(a.sizes);
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto x = item.find('x');
      if (x == std::string::npos) throw ConfigError("FM sizes look like 120x1000");
      sizes.push_back({std::stoul(item.substr(0, x)), std::stoul(item.substr(x + 1))});
    }
  }
  fm::TrainConfig base;
  base.epochs = a.epochs;
  base.seed = g.seed.value_or(0);
  emit(a.out, bench::bench_fm(sizes, parse_list(a.workers), base).to_csv());
}

struct BenchQaoaArgs {
  std::string sizes = "4,8,12,16,20,24";
  std::size_t p = 1;
  std::uint64_t shots = 1024;
  std::size_t restarts = 5;
  std::size_t outer_budget = 0;
  std::string out;
};

void cmd_bench_qaoa(const Globals& g, const BenchQaoaArgs& a) {
  bench::QaoaBenchSettings settings;
  settings.qaoa.p = a.p;
  settings.qaoa.shots = a.shots;
  settings.qaoa.restarts = a.restarts;
  settings.qaoa.outer_budget = a.outer_budget;
  settings.seed = g.seed.value_or(0);
  emit(a.out, bench::bench_qaoa(parse_list(a.sizes), settings).to_csv());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum-inspired active-learning optimizer for layered optical structures"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed_value = 0;
  auto* workers_opt = app.add_option("--workers", g.workers, "Worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed_value, "Random seed");
  app.add_option("--config", g.config, "Run-config JSON document");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Stack + grid + conditions -> spectra CSV");
  simulate->add_option("--stack", sim.stack, "Stack JSON {materials, substrate, layers, grid, conditions}");
  simulate->add_option("--bits", sim.bits, "Design bits decoded with the --config encoding");
  simulate->add_flag("--fom", sim.fom, "Also print the design FOM (with --config/--bits)");
  simulate->add_option("-o,--out", sim.out, "Output CSV (default stdout)");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Dataset CSV (bits,fom) -> FM model JSON");
  train->add_option("--data", tr.data, "Dataset CSV")->required();
  train->add_option("--latent-dim", tr.cfg.latent_dim, "Latent dimension k");
  train->add_option("--learning-rate", tr.cfg.learning_rate, "Step size");
  train->add_option("--epochs", tr.cfg.epochs, "Epochs");
  train->add_option("--batch-size", tr.cfg.batch_size, "Mini-batch size");
  train->add_option("--init-scale", tr.cfg.init_scale, "Std of the initial latent factors");
  train->add_option("-o,--out", tr.out, "Output JSON (default stdout)");

  SolveArgs so;
  auto* solve = app.add_subcommand("solve", "QUBO JSON or FM model -> solution JSON");
  solve->add_option("--qubo", so.qubo, "QUBO JSON {n, offset, entries}");
  solve->add_option("--model", so.model, "FM model JSON, compiled to a QUBO");
  solve->add_option("--solver", so.solver, "exhaustive | annealing | qaoa")
      ->check(CLI::IsMember({"exhaustive", "annealing", "qaoa"}));
  solve->add_option("--p", so.p, "QAOA layers");
  solve->add_option("--shots", so.shots, "QAOA shots");
  solve->add_option("--restarts", so.restarts, "Restarts (annealing default 10, qaoa default 5)");
  solve->add_option("--outer-budget", so.outer_budget, "QAOA objective evaluations per restart (0 = 250 p)");
  solve->add_option("--sweeps", so.sweeps, "Annealing sweeps");
  solve->add_option("-o,--out", so.out, "Output JSON (default stdout)");

  OptimizeArgs op;
  auto* optimize = app.add_subcommand("optimize", "Run config -> active-learning run log (JSON lines)");
  optimize->add_option("--log", op.log, "Run log path");

  BenchTmmArgs bt;
  auto* bench_tmm = app.add_subcommand("bench-tmm", "Sweep wall-clock over conditions x workers -> CSV");
  bench_tmm->add_option("--layers", bt.layers, "Layers in the random two-material stack");
  bench_tmm->add_option("--thickness", bt.thickness_nm, "Layer thickness in nm");
  bench_tmm->add_option("--wavelengths", bt.wavelengths, "Grid points over 0.3-2.5 um");
  bench_tmm->add_option("--conditions", bt.conditions, "Comma-separated condition counts");
  bench_tmm->add_option("--workers-list", bt.workers, "Comma-separated worker counts");
  bench_tmm->add_option("-o,--out", bt.out, "Output CSV (default stdout)");

  BenchFmArgs bf;
  auto* bench_fm = app.add_subcommand("bench-fm", "FM training wall-clock over sizes x workers -> CSV");
  bench_fm->add_option("--sizes", bf.sizes, "Comma-separated BITSxROWS (default 120/240 x 1000..10000)");
  bench_fm->add_option("--workers-list", bf.workers, "Comma-separated worker counts");
  bench_fm->add_option("--epochs", bf.epochs, "Epochs per cell");
  bench_fm->add_option("-o,--out", bf.out, "Output CSV (default stdout)");

  BenchQaoaArgs bq;
  auto* bench_qaoa = app.add_subcommand("bench-qaoa", "Accuracy and time of each solver over problem sizes -> CSV");
  bench_qaoa->add_option("--sizes", bq.sizes, "Comma-separated n");
  bench_qaoa->add_option("--p", bq.p, "QAOA layers");
  bench_qaoa->add_option("--shots", bq.shots, "QAOA shots");
  bench_qaoa->add_option("--restarts", bq.restarts, "QAOA restarts");
  bench_qaoa->add_option("--outer-budget", bq.outer_budget, "QAOA evaluations per restart (0 = 250 p)");
  bench_qaoa->add_option("-o,--out", bq.out, "Output CSV (default stdout)");

  for (auto* sub : app.get_subcommands({})) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (*seed_opt) g.seed = seed_value;

  try {
    if (*simulate) cmd_simulate(g, sim, static_cast<bool>(*workers_opt));
    if (*train) cmd_train(g, tr);
    if (*solve) cmd_solve(g, so);
    if (*optimize) cmd_optimize(g, op, static_cast<bool>(*workers_opt));
    if (*bench_tmm) cmd_bench_tmm(g, bt);
    if (*bench_fm) cmd_bench_fm(g, bf);
    if (*bench_qaoa) cmd_bench_qaoa(g, bq);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", describe(e).c_str());
    return 1;
  }
  return 0;
}

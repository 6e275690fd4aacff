#include "metaopt/active_learning.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "metaopt/errors.hpp"
#include "metaopt/qaoa.hpp"
#include "metaopt/qubo.hpp"
#include "metaopt/tmm.hpp"

namespace metaopt {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed streams, one per consumer.
constexpr std::uint64_t kSeedStream = 0x5EED;
constexpr std::uint64_t kLoopStream = 0x1005;
constexpr std::uint64_t kTrainStream = 0x7000;
constexpr std::uint64_t kSolverStream = 0x5000;

BitVector random_bits(std::size_t n, std::mt19937_64& rng) {
  BitVector bits(n);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1U);
  return bits;
}

bool space_exhausted(const fm::Dataset& data) {
  const std::size_t n = data.n();
  return n < 63 && data.size() >= (std::size_t{1} << n);
}

// A uniformly drawn design that is not in the dataset.
BitVector fresh_random(const fm::Dataset& data, std::mt19937_64& rng) {
  const std::size_t n = data.n();
  if (space_exhausted(data)) {
    throw ExhaustedSpaceError("all " + std::to_string(data.size()) + " designs of the " + std::to_string(n) +
                              "-bit space are already in the dataset");
  }
  constexpr int kDraws = 10000;
  for (int attempt = 0; attempt < kDraws; ++attempt) {
    auto bits = random_bits(n, rng);
    if (!data.contains(bits)) return bits;
  }
  // Nearly saturated small space: scan from a random start.
  const std::uint64_t size = std::uint64_t{1} << n;
  const std::uint64_t start = rng() % size;
  for (std::uint64_t k = 0; k < size; ++k) {
    auto bits = bits_from_index((start + k) % size, n);
    if (!data.contains(bits)) return bits;
  }
  throw ExhaustedSpaceError("no unseen design left");
}

double best_fom_of(const fm::Dataset& data) {
  double best = -std::numeric_limits<double>::infinity();
  for (double y : data.targets()) best = std::max(best, -y);
  return best;
}

struct SolverOutput {
  BitVector bits;
  nlohmann::json report;
};

SolverOutput solve_surrogate(const qubo::QuboMatrix& q, const RunConfig& config, std::size_t iteration) {
  const std::uint64_t seed = mix_seed(config.seed, kSolverStream + iteration);
  switch (config.solver.kind) {
    case SolverKind::exhaustive: {
      auto s = qubo::brute_force(q, config.workers);
      auto report = qubo::solution_report(s);
      return {std::move(s.bits), std::move(report)};
    }
    case SolverKind::annealing: {
      const auto& settings = config.solver.annealing;
      auto sa = qubo::AnnealingConfig::scaled_for(q, settings.sweeps, settings.restarts, seed);
      if (settings.t_hot) sa.t_hot = *settings.t_hot;
      if (settings.t_cold) sa.t_cold = *settings.t_cold;
      auto s = qubo::simulated_annealing(q, sa);
      auto report = qubo::solution_report(s);
      report["t_hot"] = sa.t_hot;
      report["t_cold"] = sa.t_cold;
      return {std::move(s.bits), std::move(report)};
    }
    case SolverKind::qaoa: {
      auto qc = config.solver.qaoa;
      qc.seed = seed;
      auto result = qaoa::run_qaoa(q, qc);
      auto report = qaoa::to_json(result);
      return {std::move(result.best_bits), std::move(report)};
    }
  }
  throw ConfigError("unknown solver kind");
}

}  // namespace

double evaluate_design(const RunConfig& config, std::span<const std::uint8_t> bits) {
  const LayerStack stack = decode(bits, config.encoding);
  const auto result = tmm::sweep(stack, config.grid, config.conditions, config.workers);
  return tmm::evaluate_fom(result, config.fom);
}

nlohmann::json IterationRecord::to_json() const {
  return {{"type", "iteration"},
          {"iteration", iteration},
          {"proposed", to_bit_string(proposed)},
          {"bits", to_bit_string(bits)},
          {"source", source},
          {"fom", fom},
          {"fm_loss", fm_loss},
          {"best_fom", best_fom},
          {"solver", solver_report},
          {"timings", {{"train_s", timings.train_s}, {"solve_s", timings.solve_s}, {"simulate_s", timings.simulate_s}}}};
}

fm::Dataset seed_dataset(const RunConfig& config) {
  config.validate();
  const std::size_t n = config.bits();
  fm::Dataset data(n);
  std::mt19937_64 rng(mix_seed(config.seed, kSeedStream));
  while (data.size() < config.initial_points) {
    auto bits = random_bits(n, rng);
    if (data.contains(bits)) continue;
    double fom = 0.0;
    try {
      fom = evaluate_design(config, bits);
    } catch (const Error&) {
      std::throw_with_nested(Error("simulating seed design " + to_bit_string(bits) + " failed"));
    }
    data.append(std::move(bits), -fom, "seed");
  }
  return data;
}

fm::TrainConfig surrogate_train_config(const RunConfig& config, std::size_t iteration) {
  fm::TrainConfig train = config.fm;
  train.seed = mix_seed(config.seed, kTrainStream + iteration);
  train.workers = config.workers;
  return train;
}

IterationRecord iterate(fm::Dataset& dataset, const RunConfig& config, std::mt19937_64& rng,
                        std::size_t iteration) {
  try {
    IterationRecord record;
    record.iteration = iteration;

    auto t = Clock::now();
    const auto report = fm::train_with_report(dataset, surrogate_train_config(config, iteration));
    record.fm_loss = report.loss_history[report.best_epoch];
    record.timings.train_s = seconds_since(t);

    t = Clock::now();
    const auto q = qubo::from_fm(report.model);
    auto solved = solve_surrogate(q, config, iteration);
    record.timings.solve_s = seconds_since(t);
    record.proposed = solved.bits;
    record.solver_report = std::move(solved.report);

    if (!dataset.contains(record.proposed)) {
      record.bits = record.proposed;
      record.source = "solver";
    } else {
      record.source = "perturbation";
      std::vector<std::size_t> order(dataset.n());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t i : order) {
        BitVector candidate = record.proposed;
        candidate[i] ^= 1U;
        if (!dataset.contains(candidate)) {
          record.bits = std::move(candidate);
          break;
        }
      }
      if (record.bits.empty()) record.bits = fresh_random(dataset, rng);
    }

    t = Clock::now();
    record.fom = evaluate_design(config, record.bits);
    record.timings.simulate_s = seconds_since(t);

    dataset.append(record.bits, -record.fom, record.source);
    record.best_fom = best_fom_of(dataset);
    return record;
  } catch (const Error& e) {
    std::throw_with_nested(IterationError(iteration, e.what()));
  }
}

RunLogWriter::RunLogWriter(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw ConfigError("cannot open run log '" + path.string() + "' for appending");
}

void RunLogWriter::write_config(const nlohmann::json& config) {
  out_ << config.dump() << '\n';
  out_.flush();
}

void RunLogWriter::write_iteration(const IterationRecord& record) {
  out_ << record.to_json().dump() << '\n';
  out_.flush();
}

RunLog run(const RunConfig& config, RunLogWriter* writer, const IterationObserver& observer) {
  config.validate();
  RunLog log;
  log.config = config.echo;

  fm::Dataset dataset = seed_dataset(config);
  log.seed_points = dataset.size();
  log.seed_best_fom = best_fom_of(dataset);
  log.best_fom = log.seed_best_fom;
  for (std::size_t r = 0; r < dataset.size(); ++r) {
    if (-dataset.y(r) == log.best_fom) {
      log.best_bits = dataset.x(r);
      break;
    }
  }
  if (writer) {
    writer->write_config({{"type", "config"},
                          {"config", config.echo},
                          {"seed_points", log.seed_points},
                          {"seed_best_fom", log.seed_best_fom},
                          {"seed_best_bits", to_bit_string(log.best_bits)}});
  }

  std::mt19937_64 rng(mix_seed(config.seed, kLoopStream));
  std::size_t stale = 0;
  for (std::size_t it = 0; it < config.max_iterations; ++it) {
    IterationRecord record = iterate(dataset, config, rng, it);
    const bool improved = record.fom > log.best_fom;
    if (improved) {
      log.best_fom = record.fom;
      log.best_bits = record.bits;
    }
    log.best_trace.push_back(log.best_fom);
    if (writer) writer->write_iteration(record);
    if (observer) observer(record);
    log.iterations.push_back(std::move(record));

    if (config.stop_patience > 0) {
      stale = (it == 0 || improved) ? 0 : stale + 1;
      if (stale >= config.stop_patience) break;
    }
  }
  return log;
}

RandomSearchResult random_search(const RunConfig& config, std::size_t budget, std::uint64_t seed) {
  const std::size_t n = config.bits();
  RandomSearchResult result;
  result.best_fom = -std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::unordered_set<std::string> seen;
  while (result.evaluations < budget) {
    if (n < 63 && seen.size() >= (std::size_t{1} << n)) break;
    auto bits = random_bits(n, rng);
    if (!seen.insert(to_bit_string(bits)).second) continue;
    const double fom = evaluate_design(config, bits);
    ++result.evaluations;
    if (fom > result.best_fom) {
      result.best_fom = fom;
      result.best_bits = std::move(bits);
    }
  }
  return result;
}

RunLog read_run_log(std::istream& in) {
  RunLog log;
  std::string line;
  bool have_config = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(std::string("run log line is not JSON: ") + e.what());
    }
    const auto type = doc.value("type", std::string{});
    if (type == "config") {
      log.config = doc.at("config");
      log.seed_points = doc.value("seed_points", std::size_t{0});
      log.seed_best_fom = doc.value("seed_best_fom", 0.0);
      log.best_fom = log.seed_best_fom;
      if (doc.contains("seed_best_bits")) log.best_bits = parse_bit_string(doc.at("seed_best_bits").get<std::string>());
      have_config = true;
    } else if (type == "iteration") {
      if (!have_config) throw SchemaError("run log must start with a config line");
      IterationRecord r;
      r.iteration = doc.at("iteration").get<std::size_t>();
      r.proposed = parse_bit_string(doc.at("proposed").get<std::string>());
      r.bits = parse_bit_string(doc.at("bits").get<std::string>());
      r.source = doc.at("source").get<std::string>();
      r.fom = doc.at("fom").get<double>();
      r.fm_loss = doc.at("fm_loss").get<double>();
      r.best_fom = doc.at("best_fom").get<double>();
      r.solver_report = doc.at("solver");
      const auto& t = doc.at("timings");
      r.timings = {t.at("train_s").get<double>(), t.at("solve_s").get<double>(), t.at("simulate_s").get<double>()};
      if (r.fom > log.best_fom) {
        log.best_fom = r.fom;
        log.best_bits = r.bits;
      }
      log.best_trace.push_back(log.best_fom);
      log.iterations.push_back(std::move(r));
    } else {
      throw SchemaError("unknown run log line type '" + type + "'");
    }
  }
  if (!have_config) throw SchemaError("run log has no config line");
  return log;
}

}  // namespace metaopt

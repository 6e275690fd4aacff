#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metaopt/config.hpp"
#include "metaopt/fm.hpp"

namespace metaopt {

/// decode -> sweep -> evaluate_fom for one design.
double evaluate_design(const RunConfig& config, std::span<const std::uint8_t> bits);

struct ComponentTimings {
  double train_s = 0.0;
  double solve_s = 0.0;
  double simulate_s = 0.0;
};

struct IterationRecord {
  std::size_t iteration = 0;
  BitVector proposed;       // solver output on the surrogate
  BitVector bits;           // design actually simulated and appended
  std::string source;       // "solver" or "perturbation"
  double fom = 0.0;
  double fm_loss = 0.0;     // training MSE of the surrogate
  double best_fom = 0.0;    // best FOM in the dataset after this iteration
  nlohmann::json solver_report;
  ComponentTimings timings;

  nlohmann::json to_json() const;
};

struct RunLog {
  nlohmann::json config;
  std::size_t seed_points = 0;
  double seed_best_fom = 0.0;
  std::vector<IterationRecord> iterations;
  std::vector<double> best_trace;  // parallel to iterations
  BitVector best_bits;
  double best_fom = 0.0;
};

/// `initial_points` distinct seeded designs with targets -FOM.
fm::Dataset seed_dataset(const RunConfig& config);

/// Training settings used for the surrogate of a given iteration.
fm::TrainConfig surrogate_train_config(const RunConfig& config, std::size_t iteration);

/// One loop step: train, compile to QUBO, solve, de-duplicate, simulate, append.
/// `rng` drives the de-duplication perturbations.
IterationRecord iterate(fm::Dataset& dataset, const RunConfig& config, std::mt19937_64& rng,
                        std::size_t iteration = 0);

/// Appends JSON lines to a file, flushing after every line.
class RunLogWriter {
 public:
  explicit RunLogWriter(const std::filesystem::path& path);
  void write_config(const nlohmann::json& config);
  void write_iteration(const IterationRecord& record);

 private:
  std::ofstream out_;
};

using IterationObserver = std::function<void(const IterationRecord&)>;

/// seed_dataset, then iterate until max_iterations or until stop_patience
/// consecutive iterations after the first fail to raise the best FOM.
RunLog run(const RunConfig& config, RunLogWriter* writer = nullptr, const IterationObserver& observer = {});

struct RandomSearchResult {
  BitVector best_bits;
  double best_fom = 0.0;
  std::size_t evaluations = 0;
};

/// `budget` distinct uniformly random designs, evaluated like the loop does.
RandomSearchResult random_search(const RunConfig& config, std::size_t budget, std::uint64_t seed);

/// Reads a RunLog written by RunLogWriter.
RunLog read_run_log(std::istream& in);

}  // namespace metaopt

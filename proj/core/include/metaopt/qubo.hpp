#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metaopt/bits.hpp"
#include "metaopt/fm.hpp"

namespace metaopt::qubo {

/// Upper-triangular QUBO: minimize sum_{i<=j} Q_ij x_i x_j over binary x.
/// `offset` is a constant carried alongside and never part of energy().
class QuboMatrix {
 public:
  explicit QuboMatrix(std::size_t n, double offset = 0.0);

  std::size_t n() const noexcept { return n_; }
  double offset() const noexcept { return offset_; }
  void set_offset(double offset) noexcept { offset_ = offset; }

  double at(std::size_t i, std::size_t j) const { return q_[i * n_ + j]; }
  /// Writes entry (i, j); requires i <= j. Throws DimensionError otherwise.
  void set(std::size_t i, std::size_t j, double value);
  void add(std::size_t i, std::size_t j, double value) { set(i, j, at(i, j) + value); }

  /// Q_ij + Q_ji for i != j, i.e. the coupling seen from either variable.
  double coupling(std::size_t i, std::size_t j) const {
    return i < j ? q_[i * n_ + j] : q_[j * n_ + i];
  }

  /// Largest absolute entry, 0 for the zero matrix.
  double max_abs() const noexcept;

  friend bool operator==(const QuboMatrix&, const QuboMatrix&) = default;

 private:
  std::size_t n_;
  double offset_;
  std::vector<double> q_;  // row-major n x n, lower triangle kept at zero
};

struct Solution {
  BitVector bits;
  double energy = 0.0;
  std::string solver;
  double elapsed_s = 0.0;
  std::uint64_t evaluations = 0;
};

/// Q_ii = w_i, Q_ij = <v_i, v_j> (i < j), offset = w0.
QuboMatrix from_fm(const fm::FMModel& model);

/// x^T Q x without the offset. Throws DimensionError on a length mismatch.
double energy(const QuboMatrix& q, std::span<const std::uint8_t> x);

inline constexpr std::size_t kBruteForceMaxVariables = 26;

/// Exhaustive minimum; ties go to the lexicographically smallest bit vector
/// (variable 0 compared first). `workers` split the enumeration by leading bits.
/// Throws CapacityError above kBruteForceMaxVariables.
Solution brute_force(const QuboMatrix& q, std::size_t workers = 1);

struct AnnealingConfig {
  std::size_t sweeps = 200;
  double t_hot = 2.0;
  double t_cold = 0.01;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;

  /// Temperatures proportional to the largest |Q_ij| of `q`.
  static AnnealingConfig scaled_for(const QuboMatrix& q, std::size_t sweeps, std::size_t restarts,
                                    std::uint64_t seed);
};

/// Single-flip Metropolis with a geometric schedule from t_hot to t_cold over
/// `sweeps` passes, best state kept across restarts. Throws ConfigError when
/// t_cold <= 0 or t_cold > t_hot.
Solution simulated_annealing(const QuboMatrix& q, const AnnealingConfig& config);

/// Same, also recording the best energy seen so far (across restarts) after every sweep.
Solution simulated_annealing(const QuboMatrix& q, const AnnealingConfig& config,
                             std::vector<double>* best_trace);

enum class AccuracyMode { ratio, gap };

struct Accuracy {
  double value = 0.0;
  AccuracyMode mode = AccuracyMode::ratio;
};

const char* to_string(AccuracyMode mode) noexcept;

/// found / optimum when the optimum is nonzero and both share a sign,
/// otherwise 1 / (1 + |found - optimum|).
Accuracy accuracy(double found, double optimum);

/// Upper triangle uniform in [-1, 1]; n must lie in 4..32.
QuboMatrix random_qubo(std::size_t n, std::uint64_t seed);

nlohmann::json to_json(const QuboMatrix& q);
QuboMatrix qubo_from_json(const nlohmann::json& doc);

/// {bits, energy, accuracy, solver, elapsed_s, evaluations}; accuracy is null
/// unless a reference optimum is supplied, in which case accuracy_mode follows.
nlohmann::json solution_report(const Solution& s, const Accuracy* acc = nullptr);

}  // namespace metaopt::qubo

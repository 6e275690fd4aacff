#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metaopt/fm.hpp"
#include "metaopt/materials.hpp"
#include "metaopt/qaoa.hpp"

namespace metaopt::bench {

/// Rows of pre-formatted cells under a header line.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const;
};

/// `count` s-polarized conditions with angles evenly spaced over 0..89 degrees.
std::vector<IncidenceCondition> angle_sweep(std::size_t count);

/// Alternating two-material stack with seeded random material choice.
LayerStack random_binary_stack(std::size_t layers, double thickness_nm, std::uint64_t seed);

/// Columns: conditions, workers, seconds, serial_seconds, speedup, system_matrices.
/// serial_seconds is a separate workers=1 run of the same cell.
Table bench_tmm(const LayerStack& stack, const SpectralGrid& grid, const std::vector<std::size_t>& condition_counts,
                const std::vector<std::size_t>& workers);

struct FmSize {
  std::size_t bits = 0;  // n_d
  std::size_t rows = 0;  // n_t
};

/// {120, 240} x {1000, 2000, ..., 10000}.
std::vector<FmSize> default_fm_sizes();

/// Columns: n_d, n_t, workers, seconds, serial_seconds, speedup, final_loss.
Table bench_fm(const std::vector<FmSize>& sizes, const std::vector<std::size_t>& workers, const fm::TrainConfig& base);

struct QaoaBenchSettings {
  qaoa::QaoaConfig qaoa;
  std::size_t sa_sweeps = 200;
  std::size_t sa_restarts = 10;
  std::uint64_t seed = 0;
};

/// Columns: n, solver, energy, optimum, accuracy, accuracy_mode, elapsed_s, evaluations, depth.
/// Solvers: exhaustive, annealing, and qaoa for n within the statevector cap.
Table bench_qaoa(const std::vector<std::size_t>& sizes, const QaoaBenchSettings& settings);

}  // namespace metaopt::bench

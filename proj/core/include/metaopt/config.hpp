#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metaopt/fm.hpp"
#include "metaopt/materials.hpp"
#include "metaopt/qaoa.hpp"
#include "metaopt/qubo.hpp"
#include "metaopt/tmm.hpp"

namespace metaopt {

enum class SolverKind { exhaustive, annealing, qaoa };

const char* to_string(SolverKind kind) noexcept;
SolverKind parse_solver_kind(std::string_view text);

struct AnnealingSettings {
  std::size_t sweeps = 200;
  std::size_t restarts = 10;
  /// Unset temperatures are scaled to the QUBO coefficients.
  std::optional<double> t_hot;
  std::optional<double> t_cold;
};

struct SolverSettings {
  SolverKind kind = SolverKind::annealing;
  AnnealingSettings annealing;
  qaoa::QaoaConfig qaoa;  // seed is overridden per iteration
};

/// Everything one active-learning run needs. Built from a JSON document by
/// parse_run_config; unknown keys are rejected at every level.
struct RunConfig {
  BinaryEncoding encoding;
  tmm::FomSpec fom;
  SpectralGrid grid;
  std::vector<IncidenceCondition> conditions;
  SolverSettings solver;
  fm::TrainConfig fm;
  std::size_t initial_points = 20;
  std::size_t max_iterations = 100;
  std::size_t stop_patience = 0;  // 0 disables early stopping
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  nlohmann::json echo;  // normalized copy of the source document

  std::size_t bits() const noexcept { return encoding.total_bits(); }

  /// Throws ConfigError when counts or solver capacity are violated.
  void validate() const;
};

/// Named material definitions: {"n": 1.5, "k": 0} | {"table": [[wl, n, k], ...]} | {"csv": "path"}.
/// Relative CSV paths resolve against `base_dir`.
using MaterialLibrary = std::map<std::string, MaterialPtr>;
MaterialLibrary parse_materials(const nlohmann::json& doc, const std::filesystem::path& base_dir);

SpectralGrid parse_grid(const nlohmann::json& doc);
std::vector<IncidenceCondition> parse_conditions(const nlohmann::json& doc);
tmm::FomSpec parse_fom(const nlohmann::json& doc);

RunConfig parse_run_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
RunConfig load_run_config(const std::filesystem::path& path);

/// Stack document for the simulate command:
/// {materials, ambient?, substrate, layers: [{material, thickness_nm}], grid, conditions}
struct SimulationSpec {
  LayerStack stack;
  SpectralGrid grid;
  std::vector<IncidenceCondition> conditions;
};
SimulationSpec parse_simulation_spec(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace metaopt

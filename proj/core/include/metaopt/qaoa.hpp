#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "metaopt/qubo.hpp"

namespace metaopt::qaoa {

/// E(z) = constant + sum_i h_i z_i + sum_{i<j} J_ij z_i z_j over spins z = 1 - 2x.
struct IsingModel {
  std::size_t n = 0;
  std::vector<double> h;
  std::vector<double> J;  // row-major n x n, only i < j populated
  double constant = 0.0;

  double coupling(std::size_t i, std::size_t j) const { return i < j ? J[i * n + j] : J[j * n + i]; }

  /// Energy of the spin configuration that corresponds to bit vector x.
  double energy_of_bits(std::span<const std::uint8_t> x) const;
};

/// Substitutes x_i = (1 - z_i)/2, so E(z) = energy(q, x) + q.offset().
IsingModel qubo_to_ising(const qubo::QuboMatrix& q);

/// 2^n amplitudes; qubit q is bit q of the basis index and carries variable x_q.
struct Statevector {
  std::size_t n = 0;
  std::vector<std::complex<double>> amplitudes;

  double norm() const noexcept;
};

inline constexpr std::size_t kMaxQubits = 24;

Statevector uniform_state(std::size_t n);

/// Ising energy of every basis state, indexed like the amplitudes.
std::vector<double> basis_energies(const IsingModel& ising);

/// Multiplies amplitude i by exp(-i gamma E_i).
void apply_cost_layer(Statevector& state, std::span<const double> energies, double gamma);
Statevector apply_cost_layer(const Statevector& state, const IsingModel& ising, double gamma);

/// exp(-i beta X) on every qubit.
void apply_mixer_layer(Statevector& state, double beta);
Statevector apply_mixer_layer(const Statevector& state, double beta);

double expectation(const Statevector& state, std::span<const double> energies);
double expectation(const Statevector& state, const IsingModel& ising);

/// Bit string (variable 0 first) -> count.
using Histogram = std::map<std::string, std::uint64_t>;

/// `shots` independent draws from |a_i|^2.
Histogram sample(const Statevector& state, std::uint64_t shots, std::uint64_t seed);

struct QaoaParams {
  std::vector<double> gammas;
  std::vector<double> betas;

  std::size_t layers() const noexcept { return gammas.size(); }
};

/// Uniform state followed by p alternating cost/mixer layers, written into `state`.
void prepare(Statevector& state, std::span<const double> energies, const QaoaParams& params);

struct DepthReport {
  std::size_t qubits = 0;
  std::size_t layers = 0;
  std::size_t depth = 0;
  std::size_t two_qubit_gates = 0;
  std::size_t single_qubit_gates = 0;
  std::size_t linear_fit_depth = 0;              // 9n - 3, the regularity of the published depths
  std::optional<std::size_t> published_depth;    // reported depth for n in {10, 12, 16, 20}
};

/// Depth of an explicit decomposition: Hadamard layer, then per QAOA layer one
/// ZZ phase per nonzero coupling (round-robin order), one Z phase per nonzero
/// field and one X rotation per qubit, scheduled as soon as their qubits are free.
DepthReport circuit_metrics(const IsingModel& ising, std::size_t p);
/// Same for a fully populated problem (all couplings and fields nonzero).
DepthReport circuit_metrics(std::size_t n, std::size_t p);

struct QaoaConfig {
  std::size_t p = 1;
  std::uint64_t shots = 1024;
  std::size_t outer_budget = 0;  // 0 selects 250 * p evaluations
  std::size_t restarts = 5;
  std::uint64_t seed = 0;

  std::size_t budget() const noexcept { return outer_budget == 0 ? 250 * p : outer_budget; }
};

struct QaoaResult {
  BitVector best_bits;
  double best_energy = 0.0;  // energy(q, best_bits), offset excluded
  double optimum_energy = 0.0;
  BitVector optimum_bits;
  qubo::Accuracy accuracy;
  std::string reference = "brute_force";
  std::vector<double> expectation_trace;  // every objective evaluation of the chosen restart
  double optimized_expectation = 0.0;     // includes the offset
  double uniform_expectation = 0.0;
  double optimum_probability = 0.0;  // |<optimum|psi>|^2 of the final state
  QaoaParams params;
  Histogram shots_histogram;
  std::uint64_t shots = 0;
  std::size_t restart = 0;
  std::size_t evaluations = 0;
  DepthReport depth_report;
  double elapsed_s = 0.0;
};

/// Optimizes (gamma, beta) with Nelder-Mead from seeded uniform(0, pi) starts,
/// samples the final state and reports its most frequent bit string.
/// Throws CapacityError for more than kMaxQubits variables.
QaoaResult run_qaoa(const qubo::QuboMatrix& q, const QaoaConfig& config);

nlohmann::json to_json(const DepthReport& report);
nlohmann::json to_json(const QaoaResult& result);

}  // namespace metaopt::qaoa

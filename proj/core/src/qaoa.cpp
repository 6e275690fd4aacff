#include "metaopt/qaoa.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include "metaopt/errors.hpp"
#include "metaopt/nelder_mead.hpp"

namespace metaopt::qaoa {
namespace {

using Clock = std::chrono::steady_clock;

void check_capacity(std::size_t n) {
  if (n > kMaxQubits) {
    throw CapacityError("statevector simulation is capped at " + std::to_string(kMaxQubits) +
                        " qubits, got " + std::to_string(n));
  }
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string index_to_bit_string(std::uint64_t index, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t q = 0; q < n; ++q) {
    if ((index >> q) & 1U) s[q] = '1';
  }
  return s;
}

// Round-robin tournament order: n-1 rounds (n even) or n rounds (n odd) of disjoint pairs.
std::vector<std::pair<std::size_t, std::size_t>> round_robin_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (n < 2) return pairs;
  const std::size_t m = n % 2 == 0 ? n : n + 1;  // m - 1 is a bye when n is odd
  for (std::size_t round = 0; round + 1 < m; ++round) {
    auto add = [&](std::size_t a, std::size_t b) {
      if (a >= n || b >= n) return;
      pairs.emplace_back(std::min(a, b), std::max(a, b));
    };
    add(round, m - 1);
    for (std::size_t k = 1; k < m / 2; ++k) {
      add((round + k) % (m - 1), (round + m - 1 - k) % (m - 1));
    }
  }
  return pairs;
}

DepthReport schedule(std::size_t n, std::size_t p, const std::vector<std::pair<std::size_t, std::size_t>>& couplings,
                     const std::vector<std::size_t>& fields) {
  DepthReport report;
  report.qubits = n;
  report.layers = p;
  std::vector<std::size_t> level(n, 0);
  std::size_t depth = 0;
  auto place1 = [&](std::size_t q) {
    level[q] += 1;
    depth = std::max(depth, level[q]);
    ++report.single_qubit_gates;
  };
  for (std::size_t q = 0; q < n; ++q) place1(q);  // Hadamards
  for (std::size_t layer = 0; layer < p; ++layer) {
    for (const auto& [a, b] : couplings) {
      const std::size_t l = std::max(level[a], level[b]) + 1;
      level[a] = level[b] = l;
      depth = std::max(depth, l);
      ++report.two_qubit_gates;
    }
    for (std::size_t q : fields) place1(q);
    for (std::size_t q = 0; q < n; ++q) place1(q);
  }
  report.depth = std::max<std::size_t>(depth, 1);
  report.linear_fit_depth = n > 0 ? 9 * n - 3 : 0;
  switch (n) {
    case 10: report.published_depth = 87; break;
    case 12: report.published_depth = 105; break;
    case 16: report.published_depth = 141; break;
    case 20: report.published_depth = 177; break;
    default: break;
  }
  return report;
}

}  // namespace

double IsingModel::energy_of_bits(std::span<const std::uint8_t> x) const {
  if (x.size() != n) throw DimensionError("spin configuration length mismatch");
  double e = constant;
  for (std::size_t i = 0; i < n; ++i) {
    const double zi = x[i] != 0 ? -1.0 : 1.0;
    e += h[i] * zi;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double zj = x[j] != 0 ? -1.0 : 1.0;
      e += J[i * n + j] * zi * zj;
    }
  }
  return e;
}

IsingModel qubo_to_ising(const qubo::QuboMatrix& q) {
  const std::size_t n = q.n();
  IsingModel ising;
  ising.n = n;
  ising.h.assign(n, 0.0);
  ising.J.assign(n * n, 0.0);
  ising.constant = q.offset();
  for (std::size_t i = 0; i < n; ++i) {
    const double diag = q.at(i, i);
    ising.h[i] -= diag / 2.0;
    ising.constant += diag / 2.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double c = q.at(i, j);
      // x_i x_j = (1 - z_i - z_j + z_i z_j) / 4
      ising.J[i * n + j] = c / 4.0;
      ising.h[i] -= c / 4.0;
      ising.h[j] -= c / 4.0;
      ising.constant += c / 4.0;
    }
  }
  return ising;
}

double Statevector::norm() const noexcept {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return std::sqrt(s);
}

Statevector uniform_state(std::size_t n) {
  check_capacity(n);
  const std::size_t dim = std::size_t{1} << n;
  const double a = 1.0 / std::sqrt(static_cast<double>(dim));
  return {n, std::vector<std::complex<double>>(dim, {a, 0.0})};
}

std::vector<double> basis_energies(const IsingModel& ising) {
  const std::size_t n = ising.n;
  check_capacity(n);
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> energies(dim);
  // Gray-code walk in short runs, each restarted from an exact evaluation.
  const std::size_t inner = std::min<std::size_t>(n, 8);
  const std::size_t run = std::size_t{1} << inner;
  BitVector x(n);
  std::vector<double> local(n);  // h_q + sum_j J_qj z_j
  for (std::size_t base = 0; base < dim; base += run) {
    for (std::size_t q = 0; q < n; ++q) x[q] = static_cast<std::uint8_t>((base >> q) & 1U);
    for (std::size_t q = 0; q < n; ++q) {
      double f = ising.h[q];
      for (std::size_t j = 0; j < n; ++j) {
        if (j != q) f += ising.coupling(q, j) * (x[j] != 0 ? -1.0 : 1.0);
      }
      local[q] = f;
    }
    double e = ising.energy_of_bits(x);
    std::size_t index = base;
    energies[index] = e;
    for (std::size_t step = 1; step < run; ++step) {
      const auto q = static_cast<std::size_t>(std::countr_zero(step));
      const double z = x[q] != 0 ? -1.0 : 1.0;
      e -= 2.0 * z * local[q];
      x[q] ^= 1U;
      for (std::size_t j = 0; j < n; ++j) {
        if (j != q) local[j] -= 2.0 * z * ising.coupling(q, j);
      }
      index ^= std::size_t{1} << q;
      energies[index] = e;
    }
  }
  return energies;
}

void apply_cost_layer(Statevector& state, std::span<const double> energies, double gamma) {
  if (energies.size() != state.amplitudes.size()) throw DimensionError("energy table size mismatch");
  for (std::size_t i = 0; i < energies.size(); ++i) {
    const double phase = -gamma * energies[i];
    state.amplitudes[i] *= std::complex<double>(std::cos(phase), std::sin(phase));
  }
}

Statevector apply_cost_layer(const Statevector& state, const IsingModel& ising, double gamma) {
  if (ising.n != state.n) throw DimensionError("Ising model and state disagree on qubit count");
  Statevector out = state;
  apply_cost_layer(out, basis_energies(ising), gamma);
  return out;
}

void apply_mixer_layer(Statevector& state, double beta) {
  const double c = std::cos(beta);
  const std::complex<double> mis{0.0, -std::sin(beta)};
  auto& a = state.amplitudes;
  const std::size_t dim = a.size();
  for (std::size_t q = 0; q < state.n; ++q) {
    const std::size_t stride = std::size_t{1} << q;
    for (std::size_t block = 0; block < dim; block += 2 * stride) {
      for (std::size_t i = block; i < block + stride; ++i) {
        const auto lo = a[i];
        const auto hi = a[i + stride];
        a[i] = c * lo + mis * hi;
        a[i + stride] = mis * lo + c * hi;
      }
    }
  }
}

Statevector apply_mixer_layer(const Statevector& state, double beta) {
  Statevector out = state;
  apply_mixer_layer(out, beta);
  return out;
}

double expectation(const Statevector& state, std::span<const double> energies) {
  if (energies.size() != state.amplitudes.size()) throw DimensionError("energy table size mismatch");
  double e = 0.0;
  for (std::size_t i = 0; i < energies.size(); ++i) e += std::norm(state.amplitudes[i]) * energies[i];
  return e;
}

double expectation(const Statevector& state, const IsingModel& ising) {
  if (ising.n != state.n) throw DimensionError("Ising model and state disagree on qubit count");
  return expectation(state, basis_energies(ising));
}

Histogram sample(const Statevector& state, std::uint64_t shots, std::uint64_t seed) {
  Histogram histogram;
  if (shots == 0) return histogram;
  std::vector<double> cdf(state.amplitudes.size());
  double total = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    total += std::norm(state.amplitudes[i]);
    cdf[i] = total;
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::map<std::size_t, std::uint64_t> counts;
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = unit(rng) * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    std::size_t index = static_cast<std::size_t>(it - cdf.begin());
    ++counts[index];
  }
  for (const auto& [index, count] : counts) histogram[index_to_bit_string(index, state.n)] = count;
  return histogram;
}

void prepare(Statevector& state, std::span<const double> energies, const QaoaParams& params) {
  if (params.gammas.size() != params.betas.size()) throw DimensionError("gammas and betas differ in length");
  const double a = 1.0 / std::sqrt(static_cast<double>(state.amplitudes.size()));
  std::fill(state.amplitudes.begin(), state.amplitudes.end(), std::complex<double>(a, 0.0));
  for (std::size_t layer = 0; layer < params.layers(); ++layer) {
    apply_cost_layer(state, energies, params.gammas[layer]);
    apply_mixer_layer(state, params.betas[layer]);
  }
}

DepthReport circuit_metrics(const IsingModel& ising, std::size_t p) {
  std::vector<std::pair<std::size_t, std::size_t>> couplings;
  for (const auto& [a, b] : round_robin_pairs(ising.n)) {
    if (ising.coupling(a, b) != 0.0) couplings.emplace_back(a, b);
  }
  std::vector<std::size_t> fields;
  for (std::size_t q = 0; q < ising.n; ++q) {
    if (ising.h[q] != 0.0) fields.push_back(q);
  }
  return schedule(ising.n, p, couplings, fields);
}

DepthReport circuit_metrics(std::size_t n, std::size_t p) {
  std::vector<std::size_t> fields(n);
  for (std::size_t q = 0; q < n; ++q) fields[q] = q;
  return schedule(n, p, round_robin_pairs(n), fields);
}

QaoaResult run_qaoa(const qubo::QuboMatrix& q, const QaoaConfig& config) {
  const auto start = Clock::now();
  const std::size_t n = q.n();
  check_capacity(n);
  if (config.p == 0) throw ConfigError("QAOA needs at least one layer");
  if (config.restarts == 0) throw ConfigError("QAOA needs at least one restart");

  const IsingModel ising = qubo_to_ising(q);
  const std::vector<double> energies = basis_energies(ising);
  const qubo::Solution optimum = qubo::brute_force(q);

  QaoaResult result;
  result.optimum_energy = optimum.energy;
  result.optimum_bits = optimum.bits;
  result.shots = config.shots;
  result.depth_report = circuit_metrics(ising, config.p);
  {
    double sum = 0.0;
    for (double e : energies) sum += e;
    result.uniform_expectation = sum / static_cast<double>(energies.size());
  }

  Statevector state = uniform_state(n);
  const std::size_t p = config.p;
  auto unpack = [p](std::span<const double> x) {
    QaoaParams params;
    params.gammas.assign(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(p));
    params.betas.assign(x.begin() + static_cast<std::ptrdiff_t>(p), x.end());
    return params;
  };
  auto objective = [&](std::span<const double> x) {
    prepare(state, energies, unpack(x));
    return expectation(state, energies);
  };

  NelderMeadOptions options;
  options.max_evaluations = config.budget();
  options.initial_step = 0.25;

  bool have_best = false;
  for (std::size_t restart = 0; restart < config.restarts; ++restart) {
    std::mt19937_64 rng(mix_seed(config.seed, restart));
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::vector<double> x0(2 * p);
    for (auto& v : x0) v = angle(rng);

    NelderMeadResult nm = nelder_mead(objective, x0, options);
    QaoaParams params = unpack(nm.x);
    double value = nm.value;
    if (value > result.uniform_expectation) {
      // gamma = 0 leaves the uniform superposition untouched.
      std::fill(params.gammas.begin(), params.gammas.end(), 0.0);
      value = result.uniform_expectation;
    }
    prepare(state, energies, params);
    Histogram hist = sample(state, config.shots, mix_seed(config.seed, 0x5A5A0000ULL + restart));

    // Most frequent outcome; ties prefer lower energy, then the smaller bit string.
    BitVector chosen;
    double chosen_energy = 0.0;
    std::uint64_t chosen_count = 0;
    if (hist.empty()) {
      // No shots: fall back to the most probable basis state.
      std::size_t best_index = 0;
      for (std::size_t i = 1; i < state.amplitudes.size(); ++i) {
        if (std::norm(state.amplitudes[i]) > std::norm(state.amplitudes[best_index])) best_index = i;
      }
      chosen = bits_from_index(best_index, n);
      chosen_energy = qubo::energy(q, chosen);
    } else {
      for (const auto& [key, count] : hist) {
        BitVector bits = parse_bit_string(key);
        const double e = qubo::energy(q, bits);
        if (chosen.empty() || count > chosen_count || (count == chosen_count && e < chosen_energy)) {
          chosen = std::move(bits);
          chosen_energy = e;
          chosen_count = count;
        }
      }
    }

    if (!have_best || chosen_energy < result.best_energy) {
      have_best = true;
      result.best_bits = std::move(chosen);
      result.best_energy = chosen_energy;
      result.params = std::move(params);
      result.optimized_expectation = value;
      result.expectation_trace = std::move(nm.trace);
      result.shots_histogram = std::move(hist);
      result.restart = restart;
      result.optimum_probability = std::norm(state.amplitudes[index_from_bits(optimum.bits)]);
    }
    result.evaluations += nm.evaluations;
  }
  result.accuracy = qubo::accuracy(result.best_energy, result.optimum_energy);
  result.elapsed_s = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

nlohmann::json to_json(const DepthReport& report) {
  nlohmann::json out = {{"qubits", report.qubits},
                        {"layers", report.layers},
                        {"depth", report.depth},
                        {"two_qubit_gates", report.two_qubit_gates},
                        {"single_qubit_gates", report.single_qubit_gates},
                        {"linear_fit_depth", report.linear_fit_depth}};
  out["published_depth"] = report.published_depth ? nlohmann::json(*report.published_depth) : nlohmann::json();
  return out;
}

nlohmann::json to_json(const QaoaResult& result) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [bits, count] : result.shots_histogram) hist[bits] = count;
  return {{"bits", to_bit_string(result.best_bits)},
          {"energy", result.best_energy},
          {"optimum_energy", result.optimum_energy},
          {"optimum_bits", to_bit_string(result.optimum_bits)},
          {"accuracy", result.accuracy.value},
          {"accuracy_mode", qubo::to_string(result.accuracy.mode)},
          {"reference", result.reference},
          {"solver", "qaoa"},
          {"elapsed_s", result.elapsed_s},
          {"evaluations", result.evaluations},
          {"restart", result.restart},
          {"gammas", result.params.gammas},
          {"betas", result.params.betas},
          {"optimized_expectation", result.optimized_expectation},
          {"uniform_expectation", result.uniform_expectation},
          {"optimum_probability", result.optimum_probability},
          {"expectation_trace", result.expectation_trace},
          {"shots", result.shots},
          {"shots_histogram", hist},
          {"depth_report", to_json(result.depth_report)}};
}

}  // namespace metaopt::qaoa

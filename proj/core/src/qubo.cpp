#include "metaopt/qubo.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "metaopt/errors.hpp"
#include "metaopt/parallel.hpp"

namespace metaopt::qubo {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// f_i = Q_ii + sum_{j != i} c_ij x_j, so flipping x_i changes the energy by (1 - 2 x_i) f_i.
std::vector<double> local_fields(const QuboMatrix& q, std::span<const std::uint8_t> x) {
  const std::size_t n = q.n();
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = q.at(i, i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && x[j] != 0) sum += q.coupling(i, j);
    }
    f[i] = sum;
  }
  return f;
}

void flip(const QuboMatrix& q, BitVector& x, std::vector<double>& fields, std::size_t i) {
  const double direction = x[i] != 0 ? -1.0 : 1.0;
  x[i] ^= 1U;
  for (std::size_t j = 0; j < q.n(); ++j) {
    if (j != i) fields[j] += direction * q.coupling(i, j);
  }
}

struct Candidate {
  BitVector bits;
  double energy = 0.0;
};

// Exact comparison on (energy, bits).
bool better(const Candidate& a, const Candidate& b) {
  if (a.energy != b.energy) return a.energy < b.energy;
  return std::lexicographical_compare(a.bits.begin(), a.bits.end(), b.bits.begin(), b.bits.end());
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

QuboMatrix::QuboMatrix(std::size_t n, double offset) : n_(n), offset_(offset), q_(n * n, 0.0) {
  if (n == 0) throw DimensionError("QUBO needs at least one variable");
}

void QuboMatrix::set(std::size_t i, std::size_t j, double value) {
  if (i >= n_ || j >= n_) throw DimensionError("QUBO index out of range");
  if (i > j) throw DimensionError("QUBO entries live on or above the diagonal (i <= j)");
  if (!std::isfinite(value)) throw DimensionError("QUBO entries must be finite");
  q_[i * n_ + j] = value;
}

double QuboMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double x : q_) m = std::max(m, std::abs(x));
  return m;
}

QuboMatrix from_fm(const fm::FMModel& model) {
  model.validate();
  QuboMatrix q(model.n, model.w0);
  for (std::size_t i = 0; i < model.n; ++i) {
    q.set(i, i, model.w[i]);
    for (std::size_t j = i + 1; j < model.n; ++j) {
      double dot = 0.0;
      for (std::size_t f = 0; f < model.k; ++f) dot += model.v_at(i, f) * model.v_at(j, f);
      q.set(i, j, dot);
    }
  }
  return q;
}

double energy(const QuboMatrix& q, std::span<const std::uint8_t> x) {
  if (x.size() != q.n()) {
    throw DimensionError("bit vector has length " + std::to_string(x.size()) + ", QUBO has " +
                         std::to_string(q.n()) + " variables");
  }
  double e = 0.0;
  for (std::size_t i = 0; i < q.n(); ++i) {
    if (x[i] == 0) continue;
    for (std::size_t j = i; j < q.n(); ++j) {
      if (x[j] != 0) e += q.at(i, j);
    }
  }
  return e;
}

Solution brute_force(const QuboMatrix& q, std::size_t workers) {
  const std::size_t n = q.n();
  if (n > kBruteForceMaxVariables) {
    throw CapacityError("exhaustive search is capped at " + std::to_string(kBruteForceMaxVariables) +
                        " variables, got " + std::to_string(n));
  }
  if (workers == 0) throw ConfigError("brute force needs at least one worker");
  const auto start = Clock::now();

  // The top `prefix_bits` variables are fixed per chunk; the rest are walked
  // in Gray-code order with incremental energies that restart exactly per chunk.
  constexpr std::size_t kInnerBits = 16;
  const std::size_t inner = std::min(n, kInnerBits);
  const std::size_t prefix_bits = n - inner;
  const std::size_t chunks = std::size_t{1} << prefix_bits;
  const double tolerance = 1e-9 * std::max(1.0, q.max_abs() * static_cast<double>(n));

  std::vector<Candidate> chunk_best(chunks);
  auto solve_chunk = [&](std::size_t chunk) {
    BitVector x(n, 0);
    for (std::size_t b = 0; b < prefix_bits; ++b) x[inner + b] = static_cast<std::uint8_t>((chunk >> b) & 1U);
    auto fields = local_fields(q, x);
    double e = energy(q, x);
    Candidate best{x, e};
    double best_approx = e;
    const std::uint64_t steps = std::uint64_t{1} << inner;
    for (std::uint64_t step = 1; step < steps; ++step) {
      const auto bit = static_cast<std::size_t>(std::countr_zero(step));
      e += (x[bit] != 0 ? -1.0 : 1.0) * fields[bit];
      flip(q, x, fields, bit);
      if (e < best_approx - tolerance) {
        best = {x, energy(q, x)};
        best_approx = e;
      } else if (e <= best_approx + tolerance) {
        Candidate c{x, energy(q, x)};
        if (better(c, best)) {
          best = std::move(c);
          best_approx = e;
        }
      }
    }
    chunk_best[chunk] = std::move(best);
  };

  if (workers == 1 || chunks == 1) {
    for (std::size_t c = 0; c < chunks; ++c) solve_chunk(c);
  } else {
    WorkerPool pool(std::min(workers, chunks));
    const std::size_t used = pool.size();
    pool.run([&](std::size_t w) {
      for (std::size_t c = w; c < chunks; c += used) solve_chunk(c);
    });
  }

  Candidate best = chunk_best.front();
  for (std::size_t c = 1; c < chunks; ++c) {
    if (better(chunk_best[c], best)) best = chunk_best[c];
  }
  return {std::move(best.bits), best.energy, "exhaustive", seconds_since(start),
          std::uint64_t{1} << n};
}

AnnealingConfig AnnealingConfig::scaled_for(const QuboMatrix& q, std::size_t sweeps,
                                            std::size_t restarts, std::uint64_t seed) {
  AnnealingConfig c;
  c.sweeps = sweeps;
  c.restarts = restarts;
  c.seed = seed;
  const double scale = q.max_abs();
  if (scale > 0.0) {
    c.t_hot = scale * std::max(1.0, std::sqrt(static_cast<double>(q.n())));
    c.t_cold = 0.005 * scale;
  }
  return c;
}

Solution simulated_annealing(const QuboMatrix& q, const AnnealingConfig& config) {
  return simulated_annealing(q, config, nullptr);
}

Solution simulated_annealing(const QuboMatrix& q, const AnnealingConfig& config,
                             std::vector<double>* best_trace) {
  if (!(config.t_cold > 0.0)) throw ConfigError("t_cold must be > 0");
  if (config.t_cold > config.t_hot) throw ConfigError("t_cold must not exceed t_hot");
  if (config.sweeps == 0) throw ConfigError("annealing needs at least one sweep");
  if (config.restarts == 0) throw ConfigError("annealing needs at least one restart");
  const auto start = Clock::now();
  const std::size_t n = q.n();
  if (best_trace) best_trace->clear();

  Candidate overall;
  bool have_overall = false;
  std::uint64_t evaluations = 0;
  const double ratio = config.t_cold / config.t_hot;
  double trace_floor = std::numeric_limits<double>::infinity();

  for (std::size_t restart = 0; restart < config.restarts; ++restart) {
    std::mt19937_64 rng(mix_seed(config.seed, restart));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    BitVector x(n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
    auto fields = local_fields(q, x);
    double e = energy(q, x);
    Candidate best{x, e};
    double best_running = e;

    for (std::size_t sweep = 0; sweep < config.sweeps; ++sweep) {
      const double frac = config.sweeps == 1 ? 1.0 : static_cast<double>(sweep) / static_cast<double>(config.sweeps - 1);
      const double temperature = config.t_hot * std::pow(ratio, frac);
      for (std::size_t i = 0; i < n; ++i) {
        const double delta = (x[i] != 0 ? -1.0 : 1.0) * fields[i];
        ++evaluations;
        if (delta <= 0.0 || unit(rng) < std::exp(-delta / temperature)) {
          flip(q, x, fields, i);
          e += delta;
          if (e < best_running) {
            best_running = e;
            best.bits = x;
          }
        }
      }
      if (best_trace) best_trace->push_back(std::min(trace_floor, best_running));
    }
    trace_floor = std::min(trace_floor, best_running);
    best.energy = energy(q, best.bits);
    if (!have_overall || best.energy < overall.energy) {
      overall = std::move(best);
      have_overall = true;
    }
  }
  return {std::move(overall.bits), overall.energy, "annealing", seconds_since(start), evaluations};
}

const char* to_string(AccuracyMode mode) noexcept {
  return mode == AccuracyMode::ratio ? "ratio" : "gap";
}

Accuracy accuracy(double found, double optimum) {
  const bool same_sign = (found > 0.0 && optimum > 0.0) || (found < 0.0 && optimum < 0.0);
  if (optimum != 0.0 && same_sign) return {found / optimum, AccuracyMode::ratio};
  return {1.0 / (1.0 + std::abs(found - optimum)), AccuracyMode::gap};
}

QuboMatrix random_qubo(std::size_t n, std::uint64_t seed) {
  if (n < 4 || n > 32) throw ConfigError("random QUBO size must lie in 4..32");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  QuboMatrix q(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) q.set(i, j, dist(rng));
  }
  return q;
}

nlohmann::json to_json(const QuboMatrix& q) {
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t i = 0; i < q.n(); ++i) {
    for (std::size_t j = i; j < q.n(); ++j) {
      if (q.at(i, j) != 0.0) entries.push_back({i, j, q.at(i, j)});
    }
  }
  return {{"n", q.n()}, {"offset", q.offset()}, {"entries", entries}};
}

QuboMatrix qubo_from_json(const nlohmann::json& doc) {
  try {
    for (const auto& [key, _] : doc.items()) {
      if (key != "n" && key != "offset" && key != "entries") {
        throw SchemaError("unknown key '" + key + "' in QUBO document");
      }
    }
    QuboMatrix q(doc.at("n").get<std::size_t>(), doc.value("offset", 0.0));
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (const auto& e : doc.at("entries")) {
      if (!e.is_array() || e.size() != 3) throw SchemaError("QUBO entries are [i, j, value] triples");
      const auto i = e[0].get<std::size_t>();
      const auto j = e[1].get<std::size_t>();
      if (!seen.emplace(i, j).second) {
        throw SchemaError("duplicate QUBO entry (" + std::to_string(i) + ", " + std::to_string(j) + ")");
      }
      if (i > j || j >= q.n()) {
        throw SchemaError("QUBO entry (" + std::to_string(i) + ", " + std::to_string(j) +
                          ") must satisfy i <= j < n");
      }
      q.set(i, j, e[2].get<double>());
    }
    return q;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid QUBO document: ") + e.what());
  }
}

nlohmann::json solution_report(const Solution& s, const Accuracy* acc) {
  nlohmann::json out = {{"bits", to_bit_string(s.bits)},
                        {"energy", s.energy},
                        {"solver", s.solver},
                        {"elapsed_s", s.elapsed_s},
                        {"evaluations", s.evaluations}};
  if (acc) {
    out["accuracy"] = acc->value;
    out["accuracy_mode"] = to_string(acc->mode);
  } else {
    out["accuracy"] = nullptr;
  }
  return out;
}

}  // namespace metaopt::qubo

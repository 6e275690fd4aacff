#include "metaopt/bench.hpp"

#include <chrono>
#include <optional>
#include <cstdio>
#include <random>

#include "metaopt/errors.hpp"
#include "metaopt/qubo.hpp"
#include "metaopt/tmm.hpp"

namespace metaopt::bench {
namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v, const char* spec = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string fmt(std::size_t v) { return std::to_string(v); }

template <typename F>
double time_it(F&& f) {
  const auto start = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string Table::to_csv() const {
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += '\n';
  }
  return out;
}

std::vector<IncidenceCondition> angle_sweep(std::size_t count) {
  std::vector<IncidenceCondition> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double angle = count == 1 ? 0.0 : 89.0 * static_cast<double>(i) / static_cast<double>(count - 1);
    out.emplace_back(angle, Polarization::s);
  }
  return out;
}

LayerStack random_binary_stack(std::size_t layers, double thickness_nm, std::uint64_t seed) {
  auto low = std::make_shared<const Material>(Material::constant("low", 1.45));
  auto high = std::make_shared<const Material>(Material::constant("high", 2.3));
  auto air = std::make_shared<const Material>(Material::constant("air", 1.0));
  auto glass = std::make_shared<const Material>(Material::constant("glass", 1.52));
  std::mt19937_64 rng(seed);
  std::vector<Layer> stack;
  stack.reserve(layers);
  for (std::size_t i = 0; i < layers; ++i) stack.push_back({(rng() & 1U) ? high : low, thickness_nm});
  return LayerStack(air, std::move(stack), glass);
}

Table bench_tmm(const LayerStack& stack, const SpectralGrid& grid, const std::vector<std::size_t>& condition_counts,
                const std::vector<std::size_t>& workers) {
  Table table{{"conditions", "workers", "seconds", "serial_seconds", "speedup", "system_matrices"}, {}};
  for (std::size_t count : condition_counts) {
    const auto conditions = angle_sweep(count);
    const double serial = time_it([&] { tmm::sweep(stack, grid, conditions, 1); });
    for (std::size_t w : workers) {
      tmm::reset_op_counts();
      const double seconds = time_it([&] { tmm::sweep(stack, grid, conditions, w); });
      table.rows.push_back({fmt(count), fmt(w), fmt(seconds), fmt(serial), fmt(serial / seconds),
                            std::to_string(tmm::op_counts().system_matrices)});
    }
  }
  return table;
}

std::vector<FmSize> default_fm_sizes() {
  std::vector<FmSize> sizes;
  for (std::size_t bits : {120, 240}) {
    for (std::size_t rows = 1000; rows <= 10000; rows += 1000) sizes.push_back({bits, rows});
  }
  return sizes;
}

Table bench_fm(const std::vector<FmSize>& sizes, const std::vector<std::size_t>& workers, const fm::TrainConfig& base) {
  Table table{{"n_d", "n_t", "workers", "seconds", "serial_seconds", "speedup", "final_loss"}, {}};
  for (const auto& size : sizes) {
    // Targets from a random planted FM so the work resembles a real fit.
    std::mt19937_64 rng(base.seed + size.bits * 100003 + size.rows);
    fm::FMModel planted(size.bits, base.latent_dim);
    std::normal_distribution<double> normal(0.0, 0.1);
    for (auto& w : planted.w) w = normal(rng);
    for (auto& v : planted.v) v = normal(rng);
    fm::Dataset data(size.bits);
    while (data.size() < size.rows) {
      BitVector x(size.bits);
      for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
      if (data.contains(x)) continue;
      const double y = fm::predict(planted, x);
      data.append(std::move(x), y);
    }
    fm::TrainConfig serial_config = base;
    serial_config.workers = 1;
    const double serial = time_it([&] { fm::train(data, serial_config); });
    for (std::size_t w : workers) {
      fm::TrainConfig config = base;
      config.workers = w;
      fm::TrainReport report;
      const double seconds = time_it([&] { report = fm::train_with_report(data, config); });
      table.rows.push_back({fmt(size.bits), fmt(size.rows), fmt(w), fmt(seconds), fmt(serial),
                            fmt(serial / seconds), fmt(report.loss_history.back())});
    }
  }
  return table;
}

Table bench_qaoa(const std::vector<std::size_t>& sizes, const QaoaBenchSettings& settings) {
  Table table{{"n", "solver", "energy", "optimum", "accuracy", "accuracy_mode", "elapsed_s", "evaluations", "depth"},
              {}};
  for (std::size_t n : sizes) {
    const auto q = qubo::random_qubo(n, settings.seed + n);
    const bool exact = n <= qubo::kBruteForceMaxVariables;
    const auto depth = qaoa::circuit_metrics(n, settings.qaoa.p).depth;
    std::optional<qubo::Solution> optimum;
    if (exact) optimum = qubo::brute_force(q);

    auto sa_config = qubo::AnnealingConfig::scaled_for(q, settings.sa_sweeps, settings.sa_restarts, settings.seed + n);
    const auto sa = qubo::simulated_annealing(q, sa_config);
    // Beyond the exhaustive cap the annealing result is the reference.
    const double reference = optimum ? optimum->energy : sa.energy;
    auto add = [&](const std::string& solver, double energy, double elapsed, std::uint64_t evaluations) {
      const auto acc = qubo::accuracy(energy, reference);
      table.rows.push_back({fmt(n), solver, fmt(energy, "%.12g"), fmt(reference, "%.12g"), fmt(acc.value, "%.9g"),
                            qubo::to_string(acc.mode), fmt(elapsed), std::to_string(evaluations), fmt(depth)});
    };
    if (optimum) add("exhaustive", optimum->energy, optimum->elapsed_s, optimum->evaluations);
    add("annealing", sa.energy, sa.elapsed_s, sa.evaluations);
    if (n <= qaoa::kMaxQubits) {
      auto config = settings.qaoa;
      config.seed = settings.seed + n;
      const auto result = qaoa::run_qaoa(q, config);
      add("qaoa", result.best_energy, result.elapsed_s, result.evaluations);
    }
  }
  return table;
}

}  // namespace metaopt::bench

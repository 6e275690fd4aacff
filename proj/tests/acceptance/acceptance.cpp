// Acceptance suite: one line per criterion, nonzero exit if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "metaopt/active_learning.hpp"
#include "metaopt/bench.hpp"
#include "metaopt/errors.hpp"
#include "metaopt/fm.hpp"
#include "metaopt/qaoa.hpp"
#include "metaopt/qubo.hpp"
#include "metaopt/tmm.hpp"
#include "support/oracles.hpp"

using namespace metaopt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

MaterialPtr constant(double n) { return std::make_shared<const Material>(Material::constant("c", n)); }

// ---------------------------------------------------------------- optics

Outcome fresnel_oracle() {
  double worst = 0.0;
  int cases = 0;
  for (auto [n1, n2] : {std::pair{1.0, 1.5}, std::pair{1.0, 3.5}, std::pair{1.5, 1.0}}) {
    for (double angle : {0.0, 30.0, 60.0, 89.0}) {
      for (auto pol : {Polarization::s, Polarization::p}) {
        LayerStack stack(constant(n1), {}, constant(n2));
        const auto got = tmm::spectrum(stack, SpectralGrid({0.55}), IncidenceCondition(angle, pol));
        const auto want = oracle::fresnel_power(n1, n2, angle, pol == Polarization::s);
        worst = std::max({worst, std::abs(got.R[0] - want.R), std::abs(got.T[0] - want.T)});
        ++cases;
      }
    }
  }
  return {worst <= 1e-12, fmt("%d cases, max |error| %.2e (tol 1e-12)", cases, worst)};
}

Outcome airy_oracle() {
  const double n = 2.4;
  const double d_nm = 1200.0;
  LayerStack stack(constant(1.0), {{constant(n), d_nm}}, constant(1.0));
  const auto grid = SpectralGrid::linspace(0.4, 2.5, 500);
  const auto got = tmm::spectrum(stack, grid, IncidenceCondition(0.0, Polarization::s));
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    worst = std::max(worst, std::abs(got.T[i] - oracle::airy_transmittance(n, d_nm * 1e-3, grid.wavelengths()[i])));
  }
  return {worst <= 1e-9, fmt("500 wavelengths, max |T - T_airy| %.2e (tol 1e-9)", worst)};
}

Outcome energy_conservation() {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> idx(1.0, 4.0);
  std::uniform_real_distribution<double> thick(1.0, 500.0);
  std::uniform_real_distribution<double> wl(0.3, 5.0);
  std::uniform_real_distribution<double> ang(0.0, 89.0);
  std::uniform_int_distribution<int> count(0, 50);
  double worst = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<Layer> layers(static_cast<std::size_t>(count(rng)));
    for (auto& l : layers) l = {constant(idx(rng)), thick(rng)};
    LayerStack stack(constant(1.0), std::move(layers), constant(idx(rng)));
    const auto pol = trial % 3 == 0 ? Polarization::s : trial % 3 == 1 ? Polarization::p : Polarization::unpolarized;
    const auto r = tmm::spectrum(stack, SpectralGrid({wl(rng)}), IncidenceCondition(ang(rng), pol));
    worst = std::max(worst, std::abs(r.R[0] + r.T[0] - 1.0));
  }
  return {worst <= 1e-9, fmt("10^4 stacks, max |R+T-1| %.2e (tol 1e-9)", worst)};
}

Outcome parallel_sweep() {
  const auto stack = bench::random_binary_stack(1000, 100.0, 7);
  const auto grid = SpectralGrid::linspace(0.4, 2.5, 64);
  std::vector<IncidenceCondition> conds;
  for (std::size_t i = 0; i < 350; ++i) {
    conds.emplace_back(89.0 * static_cast<double>(i) / 349.0, i % 2 ? Polarization::p : Polarization::s);
  }
  const auto one = tmm::sweep(stack, grid, conds, 1);
  const auto eight = tmm::sweep(stack, grid, conds, 8);
  const bool identical = one.responses == eight.responses && one.to_csv() == eight.to_csv();
  const double speedup = one.elapsed_s / eight.elapsed_s;
  const unsigned cores = std::thread::hardware_concurrency();
  std::string detail = fmt("bit-identical: %s; speedup(8) %.2f (1w %.2f s, 8w %.2f s) on %u hardware threads",
                           identical ? "yes" : "no", speedup, one.elapsed_s, eight.elapsed_s, cores);
  if (cores >= 8) return {identical && speedup >= 4.0, detail + " (need >= 4.0)"};
  return {identical, detail + "; speedup bound applies to >= 8 cores only, not checked here"};
}

// ---------------------------------------------------------------- surrogate

Outcome fm_gradient_check() {
  std::mt19937_64 rng(31);
  double worst = 0.0;
  for (int pair = 0; pair < 100; ++pair) {
    const std::size_t n = 4 + rng() % 20;
    auto model = oracle::random_model(n, 1 + rng() % 8, rng);
    fm::Dataset batch(n);
    std::normal_distribution<double> y(0.0, 1.0);
    const std::size_t rows = 1 + rng() % 32;
    while (batch.size() < rows) {
      BitVector x(n);
      for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
      if (!batch.contains(x)) batch.append(std::move(x), y(rng));
    }
    const auto g = fm::gradients(model, batch);
    std::vector<double*> params{&model.w0};
    std::vector<double> analytic{g.w0};
    for (std::size_t i = 0; i < n; ++i) {
      params.push_back(&model.w[i]);
      analytic.push_back(g.w[i]);
    }
    for (std::size_t i = 0; i < model.v.size(); ++i) {
      params.push_back(&model.v[i]);
      analytic.push_back(g.v[i]);
    }
    double diff2 = 0.0;
    double norm_a = 0.0;
    double norm_n = 0.0;
    const double h = 1e-6;
    for (std::size_t p = 0; p < params.size(); ++p) {
      const double keep = *params[p];
      *params[p] = keep + h;
      const double up = fm::loss(model, batch);
      *params[p] = keep - h;
      const double down = fm::loss(model, batch);
      *params[p] = keep;
      const double numeric = (up - down) / (2.0 * h);
      diff2 += (numeric - analytic[p]) * (numeric - analytic[p]);
      norm_a += analytic[p] * analytic[p];
      norm_n += numeric * numeric;
    }
    const double rel = std::sqrt(diff2) / std::max({std::sqrt(norm_a), std::sqrt(norm_n), 1e-300});
    worst = std::max(worst, rel);
  }
  return {worst <= 1e-5, fmt("100 pairs, max relative error %.2e (tol 1e-5)", worst)};
}

Outcome planted_recovery() {
  std::mt19937_64 rng(2024);
  fm::FMModel hidden(30, 4);
  std::normal_distribution<double> wd(0.0, 0.5);
  std::normal_distribution<double> vd(0.0, 0.3);
  hidden.w0 = wd(rng);
  for (auto& w : hidden.w) w = wd(rng);
  for (auto& v : hidden.v) v = vd(rng);
  const auto data = oracle::planted_dataset(hidden, 2000, rng);
  std::vector<std::size_t> train_rows(1600);
  std::vector<std::size_t> test_rows(400);
  std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
  std::iota(test_rows.begin(), test_rows.end(), std::size_t{1600});
  fm::TrainConfig cfg;
  cfg.latent_dim = 4;
  cfg.learning_rate = 0.01;
  cfg.epochs = 200;
  cfg.batch_size = 32;
  cfg.init_scale = 0.1;
  cfg.seed = 1;
  const auto model = fm::train(data.subset(train_rows), cfg);
  const double mse = fm::loss(model, data.subset(test_rows));
  return {mse <= 1e-3, fmt("held-out MSE %.2e on 400 rows (tol 1e-3)", mse)};
}

// ---------------------------------------------------------------- QUBO / Ising

Outcome fm_qubo_equivalence() {
  std::mt19937_64 rng(77);
  double worst = 0.0;
  std::uint64_t checked = 0;
  for (int m = 0; m < 100; ++m) {
    const std::size_t n = 1 + static_cast<std::size_t>(m % 12);
    const auto model = oracle::random_model(n, 1 + rng() % 8, rng);
    const auto q = qubo::from_fm(model);
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
      const auto x = oracle::bits_of(s, n);
      worst = std::max(worst, std::abs(fm::predict(model, x) - model.w0 - qubo::energy(q, x)));
      ++checked;
    }
  }
  return {worst <= 1e-9, fmt("100 models, %llu assignments, max |diff| %.2e (tol 1e-9)",
                             static_cast<unsigned long long>(checked), worst)};
}

Outcome qubo_ising_equivalence() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto q = qubo::random_qubo(4 + seed % 7, 500 + seed);
    q.set_offset(std::sin(static_cast<double>(seed)));
    const auto energies = qaoa::basis_energies(qaoa::qubo_to_ising(q));
    for (std::uint64_t s = 0; s < energies.size(); ++s) {
      const double want = oracle::qubo_energy_naive(q, oracle::bits_of(s, q.n())) + q.offset();
      worst = std::max(worst, std::abs(energies[s] - want));
    }
  }
  return {worst <= 1e-9, fmt("100 instances n=4..10, max |diff| %.2e (tol 1e-9)", worst)};
}

Outcome unitarity() {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> angle(-2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
  const auto energies = qaoa::basis_energies(qaoa::qubo_to_ising(qubo::random_qubo(12, 9)));
  auto state = qaoa::uniform_state(12);
  double worst = 0.0;
  for (int layer = 0; layer < 50; ++layer) {
    qaoa::apply_cost_layer(state, energies, angle(rng));
    worst = std::max(worst, std::abs(state.norm() - 1.0));
    qaoa::apply_mixer_layer(state, angle(rng));
    worst = std::max(worst, std::abs(state.norm() - 1.0));
  }
  return {worst <= 1e-10, fmt("50 layer pairs at n=12, max norm drift %.2e (tol 1e-10)", worst)};
}

Outcome uniform_expectation() {
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto q = qubo::random_qubo(4 + seed % 13, 900 + seed);
    q.set_offset(0.25 * static_cast<double>(seed % 7) - 0.5);
    double want = q.offset();
    for (std::size_t i = 0; i < q.n(); ++i) {
      want += q.at(i, i) / 2.0;
      for (std::size_t j = i + 1; j < q.n(); ++j) want += q.at(i, j) / 4.0;
    }
    const double got = qaoa::expectation(qaoa::uniform_state(q.n()), qaoa::qubo_to_ising(q));
    worst = std::max(worst, std::abs(got - want));
  }
  return {worst <= 1e-9, fmt("100 instances n=4..16, max |diff| %.2e (tol 1e-9)", worst)};
}

Outcome qaoa_amplification() {
  int amplified = 0;
  int improved = 0;
  const double baseline = 1.0 / 256.0;
  double min_freq = 1.0;
  for (std::uint64_t inst = 0; inst < 20; ++inst) {
    const auto q = qubo::random_qubo(8, 3000 + inst);
    qaoa::QaoaConfig cfg;
    cfg.p = 3;
    cfg.shots = 4096;
    cfg.seed = inst;
    const auto r = qaoa::run_qaoa(q, cfg);
    const auto it = r.shots_histogram.find(to_bit_string(r.optimum_bits));
    const double freq = it == r.shots_histogram.end() ? 0.0 : static_cast<double>(it->second) / 4096.0;
    min_freq = std::min(min_freq, freq);
    if (freq > baseline) ++amplified;
    if (r.optimized_expectation <= r.uniform_expectation) ++improved;
  }
  return {amplified >= 18 && improved == 20,
          fmt("optimum frequency > 2^-8 in %d/20 (need 18), lowest %.4f; expectation improved in %d/20 (need 20)",
              amplified, min_freq, improved)};
}

Outcome annealing_agreement() {
  int agree = 0;
  for (std::uint64_t inst = 0; inst < 100; ++inst) {
    const auto q = qubo::random_qubo(12, inst);
    const auto exact = qubo::brute_force(q);
    const auto sa = qubo::simulated_annealing(q, qubo::AnnealingConfig::scaled_for(q, 200, 10, inst));
    if (std::abs(sa.energy - exact.energy) <= 1e-9) ++agree;
  }
  return {agree >= 95, fmt("annealing equals exhaustive on %d/100 (need 95)", agree)};
}

// ---------------------------------------------------------------- loop

nlohmann::json landscape_config() {
  return nlohmann::json::parse(R"({
    "materials": {"lo": {"n": 1.45}, "hi": {"n": 2.3}, "glass": {"n": 1.52}},
    "substrate": "glass",
    "encoding": {"bits_per_layer": 1, "layer_count": 16, "palette": ["lo", "hi"], "thickness_nm": 70},
    "fom": {"bands": [{"lo_um": 0.45, "hi_um": 0.65, "quantity": "R", "weight": 1},
                      {"lo_um": 0.75, "hi_um": 0.95, "quantity": "T", "weight": 1}]},
    "grid": {"start_um": 0.45, "stop_um": 0.95, "count": 26},
    "conditions": [{"angle_deg": 0, "polarization": "s"}],
    "solver": {"kind": "annealing"},
    "initial_points": 20,
    "max_iterations": 150
  })");
}

std::vector<std::filesystem::path> g_run_logs;

Outcome active_beats_random() {
  std::vector<double> active;
  std::vector<double> random;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto doc = landscape_config();
    doc["seed"] = seed;
    const auto cfg = parse_run_config(doc);
    const auto path = std::filesystem::temp_directory_path() / fmt("metaopt_acceptance_run_%llu.jsonl",
                                                                   static_cast<unsigned long long>(seed));
    std::filesystem::remove(path);
    RunLogWriter writer(path);
    const auto log = run(cfg, &writer);
    g_run_logs.push_back(path);
    if (log.iterations.size() != 150) return {false, "run stopped early"};
    active.push_back(log.best_fom);
    random.push_back(random_search(cfg, cfg.initial_points + cfg.max_iterations, 1000 + seed).best_fom);
  }
  std::sort(active.begin(), active.end());
  std::sort(random.begin(), random.end());
  return {active[2] > random[2],
          fmt("median best FOM: active learning %.5f vs random search %.5f (170 evaluations each, 5 seeds)",
              active[2], random[2])};
}

Outcome replayability() {
  if (g_run_logs.size() != 5) return {false, "needs the five run logs of the previous criterion"};
  double worst = 0.0;
  std::size_t records = 0;
  for (const auto& path : g_run_logs) {
    std::ifstream in(path);
    const auto log = read_run_log(in);
    const auto cfg = parse_run_config(log.config);
    for (const auto& r : log.iterations) {
      worst = std::max(worst, std::abs(evaluate_design(cfg, r.bits) - r.fom));
      ++records;
    }
    std::filesystem::remove(path);
  }
  return {records == 750 && worst <= 1e-9,
          fmt("%zu logged iterations recomputed, max |diff| %.2e (tol 1e-9)", records, worst)};
}

Outcome accuracy_fidelity() {
  struct Case {
    double found;
    double optimum;
    double expected;
  };
  const std::vector<Case> cases{{-5.0, -5.0, 1.0},  {-7.4, -10.0, 0.74}, {-7.9, -10.0, 0.79},
                                {-9.9, -10.0, 0.99}, {-0.74, -1.0, 0.74}, {-39.6, -40.0, 0.99},
                                {2.0, 2.0, 1.0},     {0.0, 0.0, 1.0},     {0.5, 0.0, 1.0 / 1.5}};
  double worst = 0.0;
  for (const auto& c : cases) worst = std::max(worst, std::abs(qubo::accuracy(c.found, c.optimum).value - c.expected));
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  int violations = 0;
  for (int i = 0; i < 100000; ++i) {
    const double a = u(rng);
    const double b = i % 4 == 0 ? a : u(rng);
    if ((qubo::accuracy(a, b).value == 1.0) != (a == b)) ++violations;
  }
  return {worst <= 1e-12 && violations == 0,
          fmt("%zu hand cases max |diff| %.1e; 'equals 1 iff energies equal' violated %d times in 10^5 draws",
              cases.size(), worst, violations)};
}

struct Criterion {
  int id;
  const char* name;
  double limit_s;
  std::function<Outcome()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "TMM Fresnel oracle", 1.0, fresnel_oracle},
      {2, "TMM Airy oracle", 1.0, airy_oracle},
      {3, "Energy conservation fuzz", 30.0, energy_conservation},
      {4, "Parallel determinism and scaling", 300.0, parallel_sweep},
      {5, "FM gradient check", 10.0, fm_gradient_check},
      {6, "Planted FM recovery", 60.0, planted_recovery},
      {7, "FM to QUBO equivalence", 60.0, fm_qubo_equivalence},
      {8, "QUBO to Ising equivalence", 10.0, qubo_ising_equivalence},
      {9, "Statevector unitarity", 10.0, unitarity},
      {10, "Uniform-state expectation", 5.0, uniform_expectation},
      {11, "QAOA amplification", 300.0, qaoa_amplification},
      {12, "Annealing oracle agreement", 120.0, annealing_agreement},
      {13, "Active learning beats random search", 600.0, active_beats_random},
      {14, "Run log replayability", 600.0, replayability},
      {15, "Accuracy metric fidelity", 5.0, accuracy_fidelity},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.check();
    } catch (const std::exception& e) {
      out = {false, "error: " + describe(e)};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = elapsed < c.limit_s;
    const bool pass = out.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s  %2d  %-38s %s [%.2f s, limit %.0f s%s]\n", pass ? "PASS" : "FAIL", c.id, c.name,
                out.detail.c_str(), elapsed, c.limit_s, in_time ? "" : ", too slow");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}

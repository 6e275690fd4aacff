#include "metaopt/fm.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <numeric>
#include <random>

#include "metaopt/errors.hpp"
#include "metaopt/parallel.hpp"

namespace metaopt::fm {
namespace {

std::atomic<std::uint64_t> g_predict_ops{0};

// Rows per gradient partial. Fixed so the summation tree ignores `workers`.
constexpr std::size_t kChunkRows = 16;

void check_length(const FMModel& model, std::size_t len) {
  if (len != model.n) {
    throw DimensionError("input has length " + std::to_string(len) + ", model expects " +
                         std::to_string(model.n));
  }
}

// Adds residual-weighted derivatives of one sample to `g`; `sums` is scratch of size k.
void accumulate_sample(const FMModel& model, std::span<const std::uint8_t> x, double target,
                       Gradients& g, std::vector<double>& sums) {
  const std::size_t n = model.n;
  const std::size_t k = model.k;
  std::fill(sums.begin(), sums.end(), 0.0);
  double linear = model.w0;
  double squares = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] == 0) continue;
    linear += model.w[i];
    const double* vi = &model.v[i * k];
    for (std::size_t f = 0; f < k; ++f) {
      sums[f] += vi[f];
      squares += vi[f] * vi[f];
    }
  }
  double pairwise = 0.0;
  for (std::size_t f = 0; f < k; ++f) pairwise += sums[f] * sums[f];
  const double prediction = linear + 0.5 * (pairwise - squares);
  const double scale = 2.0 * (prediction - target);

  g.w0 += scale;
  for (std::size_t i = 0; i < n; ++i) {
    if (x[i] == 0) continue;
    g.w[i] += scale;
    const double* vi = &model.v[i * k];
    double* gi = &g.v[i * k];
    // d/dv_if = x_i * sum_j v_jf x_j - v_if x_i^2, with x_i = 1 here.
    for (std::size_t f = 0; f < k; ++f) gi[f] += scale * (sums[f] - vi[f]);
  }
}

void apply_step(FMModel& model, const Gradients& g, double rate) {
  model.w0 -= rate * g.w0;
  for (std::size_t i = 0; i < model.w.size(); ++i) model.w[i] -= rate * g.w[i];
  for (std::size_t i = 0; i < model.v.size(); ++i) model.v[i] -= rate * g.v[i];
}

}  // namespace

FMModel::FMModel(std::size_t n_, std::size_t k_) : n(n_), k(k_), w(n_, 0.0), v(n_ * k_, 0.0) {}

void FMModel::validate() const {
  if (n == 0 || k == 0) throw DimensionError("FM model needs n >= 1 and k >= 1");
  if (w.size() != n || v.size() != n * k) throw DimensionError("FM parameter sizes disagree with n, k");
  auto finite = [](double x) { return std::isfinite(x); };
  if (!std::isfinite(w0) || !std::all_of(w.begin(), w.end(), finite) ||
      !std::all_of(v.begin(), v.end(), finite)) {
    throw DimensionError("FM model has non-finite parameters");
  }
}

bool Dataset::contains(std::span<const std::uint8_t> bits) const {
  return keys_.count(to_bit_string(bits)) != 0;
}

void Dataset::append(BitVector bits, double target, std::string tag) {
  if (bits.size() != n_) {
    throw DimensionError("row has length " + std::to_string(bits.size()) + ", dataset expects " +
                         std::to_string(n_));
  }
  if (std::any_of(bits.begin(), bits.end(), [](std::uint8_t b) { return b > 1; })) {
    throw DimensionError("row entries must be 0 or 1");
  }
  auto key = to_bit_string(bits);
  if (!keys_.insert(key).second) throw SchemaError("duplicate row " + key);
  x_.push_back(std::move(bits));
  y_.push_back(target);
  tags_.push_back(std::move(tag));
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out(n_);
  for (std::size_t r : rows) out.append(x_.at(r), y_.at(r), tags_.at(r));
  return out;
}

void TrainConfig::validate() const {
  if (latent_dim == 0) throw ConfigError("latent_dim must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be finite and non-negative");
  }
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(init_scale > 0.0)) throw ConfigError("init_scale must be positive");
  if (workers == 0) throw ConfigError("workers must be positive");
}

double predict(const FMModel& model, std::span<const std::uint8_t> x) {
  check_length(model, x.size());
  const std::size_t k = model.k;
  double result = model.w0;
  double pairwise = 0.0;
  std::uint64_t ops = model.n;
  // One pass per latent factor keeps memory traffic to the active rows.
  thread_local std::vector<double> sums;
  sums.assign(k, 0.0);
  double squares = 0.0;
  for (std::size_t i = 0; i < model.n; ++i) {
    if (x[i] == 0) continue;
    result += model.w[i];
    const double* vi = &model.v[i * k];
    for (std::size_t f = 0; f < k; ++f) {
      sums[f] += vi[f];
      squares += vi[f] * vi[f];
    }
    ops += k;
  }
  for (std::size_t f = 0; f < k; ++f) pairwise += sums[f] * sums[f];
  g_predict_ops.fetch_add(ops, std::memory_order_relaxed);
  return result + 0.5 * (pairwise - squares);
}

double loss(const FMModel& model, const Dataset& data) {
  if (data.empty()) throw DimensionError("loss of an empty dataset is undefined");
  double total = 0.0;
  for (std::size_t r = 0; r < data.size(); ++r) {
    const double e = predict(model, data.x(r)) - data.y(r);
    total += e * e;
  }
  return total / static_cast<double>(data.size());
}

Gradients& Gradients::operator+=(const Gradients& other) {
  w0 += other.w0;
  for (std::size_t i = 0; i < w.size(); ++i) w[i] += other.w[i];
  for (std::size_t i = 0; i < v.size(); ++i) v[i] += other.v[i];
  return *this;
}

Gradients& Gradients::operator*=(double s) {
  w0 *= s;
  for (auto& x : w) x *= s;
  for (auto& x : v) x *= s;
  return *this;
}

Gradients gradients(const FMModel& model, const Dataset& data, std::span<const std::size_t> rows) {
  if (rows.empty()) throw DimensionError("gradient of an empty batch is undefined");
  check_length(model, data.n());
  Gradients g(model.n, model.k);
  std::vector<double> sums(model.k);
  for (std::size_t r : rows) accumulate_sample(model, data.x(r), data.y(r), g, sums);
  g *= 1.0 / static_cast<double>(rows.size());
  return g;
}

Gradients gradients(const FMModel& model, const Dataset& batch) {
  std::vector<std::size_t> rows(batch.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return gradients(model, batch, rows);
}

TrainReport train_with_report(const Dataset& data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw DimensionError("cannot train on an empty dataset");
  const std::size_t n = data.n();
  const std::size_t k = config.latent_dim;

  std::mt19937_64 rng(config.seed);
  FMModel model(n, k);
  std::normal_distribution<double> init(0.0, config.init_scale);
  for (auto& x : model.v) x = init(rng);

  TrainReport report;
  report.model = model;
  double best = loss(model, data);
  if (!std::isfinite(best)) throw DivergenceError("non-finite loss before the first epoch");
  report.loss_history.push_back(best);

  const std::size_t batch_size = std::min(config.batch_size, data.size());
  const std::size_t workers = config.workers;
  std::unique_ptr<WorkerPool> pool;
  if (workers > 1) pool = std::make_unique<WorkerPool>(workers);

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<Gradients> partials;
  std::vector<std::vector<double>> scratch(workers, std::vector<double>(k));

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
      const std::size_t stop = std::min(order.size(), start + batch_size);
      const std::size_t chunks = (stop - start + kChunkRows - 1) / kChunkRows;
      partials.assign(chunks, Gradients(n, k));
      auto work = [&](std::size_t w) {
        for (std::size_t c = w; c < chunks; c += workers) {
          const std::size_t lo = start + c * kChunkRows;
          const std::size_t hi = std::min(stop, lo + kChunkRows);
          for (std::size_t i = lo; i < hi; ++i) {
            const std::size_t r = order[i];
            accumulate_sample(model, data.x(r), data.y(r), partials[c], scratch[w]);
          }
        }
      };
      if (pool) {
        pool->run(work);
      } else {
        work(0);
      }
      Gradients total = std::move(partials[0]);
      for (std::size_t c = 1; c < chunks; ++c) total += partials[c];
      total *= 1.0 / static_cast<double>(stop - start);
      apply_step(model, total, config.learning_rate);
    }
    const double current = loss(model, data);
    if (!std::isfinite(current)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(epoch) +
                            " (non-finite loss); lower the learning rate");
    }
    report.loss_history.push_back(current);
    if (current < best) {
      best = current;
      report.model = model;
      report.best_epoch = epoch;
    }
  }
  return report;
}

FMModel train(const Dataset& data, const TrainConfig& config) {
  return train_with_report(data, config).model;
}

std::uint64_t predict_op_count() noexcept { return g_predict_ops.load(); }
void reset_predict_op_count() noexcept { g_predict_ops.store(0); }

nlohmann::json to_json(const FMModel& model) {
  nlohmann::json v = nlohmann::json::array();
  for (std::size_t i = 0; i < model.n; ++i) {
    v.push_back(std::vector<double>(model.v.begin() + static_cast<std::ptrdiff_t>(i * model.k),
                                    model.v.begin() + static_cast<std::ptrdiff_t>((i + 1) * model.k)));
  }
  return {{"n", model.n}, {"k", model.k}, {"w0", model.w0}, {"w", model.w}, {"V", v}};
}

FMModel model_from_json(const nlohmann::json& doc) {
  try {
    FMModel model(doc.at("n").get<std::size_t>(), doc.at("k").get<std::size_t>());
    model.w0 = doc.at("w0").get<double>();
    model.w = doc.at("w").get<std::vector<double>>();
    const auto& rows = doc.at("V");
    if (!rows.is_array() || rows.size() != model.n) throw DimensionError("V must have n rows");
    for (std::size_t i = 0; i < model.n; ++i) {
      const auto row = rows[i].get<std::vector<double>>();
      if (row.size() != model.k) throw DimensionError("V row " + std::to_string(i) + " must have k entries");
      std::copy(row.begin(), row.end(), model.v.begin() + static_cast<std::ptrdiff_t>(i * model.k));
    }
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid FM model document: ") + e.what());
  }
}

Dataset load_dataset_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  std::vector<std::pair<BitVector, double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "bits,fom") throw SchemaError("expected header 'bits,fom', got '" + line + "'");
      header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected 'bits,fom'");
    }
    double fom = 0.0;
    const char* first = line.data() + comma + 1;
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, fom);
    if (ec != std::errc() || ptr != last) {
      throw SchemaError("line " + std::to_string(line_no) + ": bad fom value");
    }
    rows.emplace_back(parse_bit_string(std::string_view(line).substr(0, comma)), fom);
  }
  if (rows.empty()) throw SchemaError("dataset CSV has no rows");
  Dataset data(rows.front().first.size());
  for (auto& [bits, fom] : rows) data.append(std::move(bits), -fom, "file");
  return data;
}

std::string to_dataset_csv(const Dataset& data) {
  std::string out = "bits,fom\n";
  char buf[40];
  for (std::size_t r = 0; r < data.size(); ++r) {
    std::snprintf(buf, sizeof buf, "%.17g", -data.y(r));
    out += to_bit_string(data.x(r)) + ',' + buf + '\n';
  }
  return out;
}

}  // namespace metaopt::fm

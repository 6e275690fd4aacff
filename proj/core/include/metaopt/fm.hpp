#pragma once

#include <cstdint>
#include <istream>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "metaopt/bits.hpp"

namespace metaopt::fm {

/// Second-order factorization machine over binary inputs:
///   y(x) = w0 + sum_i w_i x_i + 1/2 sum_f [(sum_i v_if x_i)^2 - sum_i v_if^2 x_i^2]
/// V is stored row-major, row i is the latent vector of variable i.
struct FMModel {
  std::size_t n = 0;
  std::size_t k = 0;
  double w0 = 0.0;
  std::vector<double> w;
  std::vector<double> v;

  FMModel() = default;
  FMModel(std::size_t n, std::size_t k);

  double& v_at(std::size_t i, std::size_t f) { return v[i * k + f]; }
  double v_at(std::size_t i, std::size_t f) const { return v[i * k + f]; }

  /// Throws DimensionError on inconsistent sizes or non-finite entries.
  void validate() const;

  friend bool operator==(const FMModel&, const FMModel&) = default;
};

/// Binary design vectors with real targets. Rows are unique.
class Dataset {
 public:
  explicit Dataset(std::size_t n) : n_(n) {}

  std::size_t n() const noexcept { return n_; }
  std::size_t size() const noexcept { return y_.size(); }
  bool empty() const noexcept { return y_.empty(); }

  const BitVector& x(std::size_t row) const { return x_[row]; }
  double y(std::size_t row) const { return y_[row]; }
  const std::string& tag(std::size_t row) const { return tags_[row]; }
  const std::vector<double>& targets() const noexcept { return y_; }

  bool contains(std::span<const std::uint8_t> bits) const;

  /// Throws DimensionError on a length mismatch or non-binary entry,
  /// SchemaError if the row is already present.
  void append(BitVector bits, double target, std::string tag = {});

  /// Rows selected by index, in the given order.
  Dataset subset(std::span<const std::size_t> rows) const;

 private:
  std::size_t n_;
  std::vector<BitVector> x_;
  std::vector<double> y_;
  std::vector<std::string> tags_;
  std::unordered_set<std::string> keys_;
};

struct TrainConfig {
  std::size_t latent_dim = 8;
  double learning_rate = 0.01;
  std::size_t epochs = 300;
  std::size_t batch_size = 64;
  double init_scale = 0.01;
  std::uint64_t seed = 0;
  std::size_t workers = 1;

  void validate() const;
};

/// O(n k) evaluation. Throws DimensionError if x has the wrong length.
double predict(const FMModel& model, std::span<const std::uint8_t> x);

/// Mean squared error over the dataset. Throws DimensionError when empty.
double loss(const FMModel& model, const Dataset& data);

struct Gradients {
  double w0 = 0.0;
  std::vector<double> w;
  std::vector<double> v;

  explicit Gradients(std::size_t n = 0, std::size_t k = 0) : w(n, 0.0), v(n * k, 0.0) {}
  Gradients& operator+=(const Gradients& other);
  Gradients& operator*=(double s);
};

/// Batch-averaged gradient of the squared error with respect to every parameter.
Gradients gradients(const FMModel& model, const Dataset& data, std::span<const std::size_t> rows);
Gradients gradients(const FMModel& model, const Dataset& batch);

struct TrainReport {
  FMModel model;                     // lowest full-dataset loss seen
  std::vector<double> loss_history;  // [0] = initial model, then one per epoch
  std::size_t best_epoch = 0;        // 0 means the initial model
};

/// Mini-batch gradient descent. Each batch is split into fixed row chunks that
/// the workers evaluate; chunk partials are summed left to right, so the
/// result does not depend on the worker count.
TrainReport train_with_report(const Dataset& data, const TrainConfig& config);
FMModel train(const Dataset& data, const TrainConfig& config);

/// Number of inner multiply-add steps executed by predict since the last reset.
std::uint64_t predict_op_count() noexcept;
void reset_predict_op_count() noexcept;

nlohmann::json to_json(const FMModel& model);
FMModel model_from_json(const nlohmann::json& doc);

/// `bits,fom` CSV. The dataset stores targets as -fom.
Dataset load_dataset_csv(std::istream& in);
std::string to_dataset_csv(const Dataset& data);

}  // namespace metaopt::fm

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "metaopt/errors.hpp"
#include "metaopt/fm.hpp"
#include "support/oracles.hpp"

using namespace metaopt;
using namespace metaopt::fm;

namespace {

BitVector unit(std::size_t n, std::initializer_list<std::size_t> on) {
  BitVector x(n, 0);
  for (auto i : on) x[i] = 1;
  return x;
}

double dot(const FMModel& m, std::size_t i, std::size_t j) {
  double s = 0.0;
  for (std::size_t f = 0; f < m.k; ++f) s += m.v_at(i, f) * m.v_at(j, f);
  return s;
}

Dataset random_rows(std::size_t n, std::size_t rows, std::mt19937_64& rng) {
  Dataset d(n);
  std::normal_distribution<double> y(0.0, 1.0);
  while (d.size() < rows) {
    BitVector x(n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
    if (!d.contains(x)) d.append(std::move(x), y(rng));
  }
  return d;
}

}  // namespace

TEST(Predict, AllZerosGivesBias) {
  std::mt19937_64 rng(1);
  const auto m = oracle::random_model(6, 3, rng);
  EXPECT_EQ(predict(m, BitVector(6, 0)), m.w0);
}

TEST(Predict, SingleBitCancelsSelfInteraction) {
  std::mt19937_64 rng(2);
  const auto m = oracle::random_model(6, 3, rng);
  for (std::size_t i = 0; i < 6; ++i) EXPECT_NEAR(predict(m, unit(6, {i})), m.w0 + m.w[i], 1e-14);
}

TEST(Predict, TwoBitsAddPairwiseDot) {
  std::mt19937_64 rng(3);
  const auto m = oracle::random_model(6, 3, rng);
  for (std::size_t i = 0; i < 6; ++i) {
    for (std::size_t j = i + 1; j < 6; ++j) {
      EXPECT_NEAR(predict(m, unit(6, {i, j})), m.w0 + m.w[i] + m.w[j] + dot(m, i, j), 1e-14);
    }
  }
}

TEST(Predict, MatchesNaiveExpansion) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto m = oracle::random_model(1 + rng() % 20, 1 + rng() % 6, rng);
    BitVector x(m.n);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
    EXPECT_NEAR(predict(m, x), oracle::fm_naive(m, x), 1e-12);
  }
}

TEST(Predict, LengthMismatch) {
  FMModel m(4, 2);
  EXPECT_THROW(predict(m, BitVector(5, 0)), DimensionError);
}

TEST(Predict, OperationCountIsLinearInN) {
  std::mt19937_64 rng(5);
  for (std::size_t n : {16u, 64u, 256u}) {
    const auto small = oracle::random_model(n, 8, rng);
    const auto large = oracle::random_model(2 * n, 8, rng);
    reset_predict_op_count();
    predict(small, BitVector(n, 1));
    const auto a = predict_op_count();
    reset_predict_op_count();
    predict(large, BitVector(2 * n, 1));
    const auto b = predict_op_count();
    EXPECT_GT(a, 0u);
    EXPECT_LE(static_cast<double>(b) / static_cast<double>(a), 2.5);
  }
}

TEST(Model, ValidateRejectsNonFinite) {
  FMModel m(3, 2);
  m.v[1] = std::nan("");
  EXPECT_THROW(m.validate(), DimensionError);
}

TEST(Loss, PerfectModelIsZero) {
  std::mt19937_64 rng(6);
  const auto hidden = oracle::random_model(10, 3, rng);
  const auto data = oracle::planted_dataset(hidden, 50, rng);
  EXPECT_LT(loss(hidden, data), 1e-24);
}

TEST(Loss, MeanPredictorGivesVariance) {
  std::mt19937_64 rng(7);
  const auto data = random_rows(8, 60, rng);
  const auto& y = data.targets();
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  var /= static_cast<double>(y.size());
  FMModel m(8, 2);
  m.w0 = mean;
  EXPECT_NEAR(loss(m, data), var, 1e-12);
}

TEST(Loss, EmptyDataset) {
  EXPECT_THROW(loss(FMModel(3, 2), Dataset(3)), DimensionError);
}

TEST(Gradient, ZeroResidualGivesZero) {
  std::mt19937_64 rng(8);
  const auto hidden = oracle::random_model(7, 3, rng);
  const auto data = oracle::planted_dataset(hidden, 20, rng);
  const auto g = gradients(hidden, data);
  EXPECT_NEAR(g.w0, 0.0, 1e-12);
  for (double v : g.w) EXPECT_NEAR(v, 0.0, 1e-12);
  for (double v : g.v) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Gradient, AllZeroInputOnlyBias) {
  std::mt19937_64 rng(9);
  const auto m = oracle::random_model(5, 2, rng);
  Dataset d(5);
  d.append(BitVector(5, 0), 0.3);
  const auto g = gradients(m, d);
  EXPECT_NEAR(g.w0, 2.0 * (m.w0 - 0.3), 1e-14);
  for (double v : g.w) EXPECT_EQ(v, 0.0);
  for (double v : g.v) EXPECT_EQ(v, 0.0);
}

TEST(Gradient, EmptyBatch) {
  EXPECT_THROW(gradients(FMModel(3, 2), Dataset(3)), DimensionError);
}

TEST(Gradient, MatchesCentralDifferences) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 30; ++trial) {
    auto m = oracle::random_model(5 + rng() % 8, 1 + rng() % 4, rng);
    const auto data = random_rows(m.n, 4 + rng() % 12, rng);
    const auto g = gradients(m, data);
    const double h = 1e-5;
    auto check = [&](double& param, double analytic) {
      const double keep = param;
      param = keep + h;
      const double up = loss(m, data);
      param = keep - h;
      const double down = loss(m, data);
      param = keep;
      const double numeric = (up - down) / (2.0 * h);
      EXPECT_LE(std::abs(numeric - analytic), 1e-5 * std::max(1.0, std::abs(numeric)));
    };
    check(m.w0, g.w0);
    for (std::size_t i = 0; i < m.n; ++i) check(m.w[i], g.w[i]);
    for (std::size_t i = 0; i < m.v.size(); ++i) check(m.v[i], g.v[i]);
  }
}

TEST(Dataset, RejectsDuplicatesAndBadRows) {
  Dataset d(3);
  d.append(parse_bit_string("010"), 1.0, "seed");
  EXPECT_TRUE(d.contains(parse_bit_string("010")));
  EXPECT_THROW(d.append(parse_bit_string("010"), 2.0), SchemaError);
  EXPECT_THROW(d.append(parse_bit_string("01"), 2.0), DimensionError);
  EXPECT_THROW(d.append(BitVector{0, 2, 1}, 2.0), DimensionError);
  EXPECT_EQ(d.size(), 1u);
  EXPECT_EQ(d.tag(0), "seed");
}

TEST(Train, LearningRateZeroKeepsInitialization) {
  std::mt19937_64 rng(11);
  const auto data = random_rows(6, 30, rng);
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 5;
  cfg.seed = 42;
  cfg.latent_dim = 3;
  const auto report = train_with_report(data, cfg);
  EXPECT_EQ(report.best_epoch, 0u);
  EXPECT_EQ(report.model.w0, 0.0);
  for (double w : report.model.w) EXPECT_EQ(w, 0.0);
  EXPECT_EQ(report.loss_history.size(), 6u);
  for (double l : report.loss_history) EXPECT_EQ(l, report.loss_history.front());
  cfg.epochs = 1;
  EXPECT_EQ(train(data, cfg).v, report.model.v);
  EXPECT_TRUE(std::any_of(report.model.v.begin(), report.model.v.end(), [](double v) { return v != 0.0; }));
}

TEST(Train, SeededDeterminismAcrossWorkers) {
  std::mt19937_64 rng(12);
  const auto hidden = oracle::random_model(12, 3, rng, 0.3);
  const auto data = oracle::planted_dataset(hidden, 300, rng);
  TrainConfig cfg;
  cfg.latent_dim = 4;
  cfg.epochs = 20;
  cfg.seed = 99;
  cfg.workers = 1;
  const auto a = train(data, cfg);
  cfg.workers = 8;
  const auto b = train(data, cfg);
  EXPECT_EQ(a, b);
  cfg.workers = 3;
  EXPECT_EQ(train(data, cfg), a);
}

TEST(Train, LossMostlyDecreasesOnPlantedData) {
  std::mt19937_64 rng(13);
  const auto hidden = oracle::random_model(20, 4, rng, 0.3);
  const auto data = oracle::planted_dataset(hidden, 500, rng);
  TrainConfig cfg;
  cfg.latent_dim = 4;
  cfg.epochs = 100;
  cfg.learning_rate = 0.01;
  cfg.init_scale = 0.1;
  cfg.seed = 1;
  const auto report = train_with_report(data, cfg);
  ASSERT_EQ(report.loss_history.size(), 101u);
  std::size_t non_increasing = 0;
  for (std::size_t e = 1; e < report.loss_history.size(); ++e) {
    if (report.loss_history[e] <= report.loss_history[e - 1]) ++non_increasing;
  }
  EXPECT_GE(non_increasing, 90u);
  EXPECT_LT(report.loss_history.back(), report.loss_history.front());
}

TEST(Train, ReturnsBestModelSeen) {
  std::mt19937_64 rng(14);
  const auto data = random_rows(10, 80, rng);
  TrainConfig cfg;
  cfg.epochs = 30;
  cfg.seed = 5;
  const auto report = train_with_report(data, cfg);
  const double best = *std::min_element(report.loss_history.begin(), report.loss_history.end());
  EXPECT_DOUBLE_EQ(loss(report.model, data), best);
  EXPECT_DOUBLE_EQ(report.loss_history[report.best_epoch], best);
}

TEST(Train, DivergenceNamesEpoch) {
  std::mt19937_64 rng(15);
  Dataset data(12);
  std::normal_distribution<double> y(0.0, 1e3);
  while (data.size() < 50) {
    BitVector x(12);
    for (auto& b : x) b = static_cast<std::uint8_t>(rng() & 1U);
    if (!data.contains(x)) data.append(std::move(x), y(rng));
  }
  TrainConfig cfg;
  cfg.learning_rate = 50.0;
  cfg.epochs = 200;
  cfg.init_scale = 1.0;
  try {
    train(data, cfg);
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Train, RejectsEmptyDatasetAndBadConfig) {
  EXPECT_ANY_THROW(train(Dataset(3), TrainConfig{}));
  std::mt19937_64 rng(16);
  const auto data = random_rows(4, 10, rng);
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_ANY_THROW(train(data, cfg));
}

TEST(Serialization, ModelJsonRoundTrip) {
  std::mt19937_64 rng(17);
  const auto m = oracle::random_model(9, 4, rng);
  const auto doc = to_json(m);
  EXPECT_EQ(doc.at("V").size(), 9u);
  EXPECT_EQ(doc.at("V")[0].size(), 4u);
  EXPECT_EQ(model_from_json(nlohmann::json::parse(doc.dump())), m);
}

TEST(Serialization, DatasetCsvStoresNegatedFom) {
  std::istringstream in("bits,fom\n0101,0.75\n1100,0.25\n");
  const auto d = load_dataset_csv(in);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.y(0), -0.75);
  EXPECT_EQ(to_bit_string(d.x(1)), "1100");
  std::istringstream again(to_dataset_csv(d));
  const auto e = load_dataset_csv(again);
  EXPECT_EQ(e.targets(), d.targets());
}

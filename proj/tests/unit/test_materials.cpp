#include <gtest/gtest.h>

#include <random>
#include <set>
#include <sstream>

#include "metaopt/errors.hpp"
#include "metaopt/materials.hpp"

using namespace metaopt;

namespace {

Material from_csv(const std::string& text) {
  std::istringstream in(text);
  return load_dispersion(in, "m");
}

BinaryEncoding two_material_encoding(std::size_t layers) {
  auto a = std::make_shared<const Material>(Material::constant("A", 1.45));
  auto b = std::make_shared<const Material>(Material::constant("B", 2.3));
  return BinaryEncoding(1, layers, {a, b}, std::vector<double>(layers, 100.0),
                        std::make_shared<const Material>(Material::constant("air", 1.0)),
                        std::make_shared<const Material>(Material::constant("glass", 1.52)));
}

}  // namespace

TEST(Dispersion, LoadsRows) {
  const auto m = from_csv("wavelength_um,n,k\n0.5,1.5,0.0\n1.0,1.45,0.0\n");
  ASSERT_EQ(m.table().size(), 2u);
  EXPECT_DOUBLE_EQ(m.table()[1].n, 1.45);
}

TEST(Dispersion, RejectsDecreasingWavelengths) {
  EXPECT_THROW(from_csv("wavelength_um,n,k\n1.0,1.5,0.0\n0.5,1.45,0.0\n"), SchemaError);
}

TEST(Dispersion, RejectsEmptyBody) {
  EXPECT_THROW(from_csv("wavelength_um,n,k\n"), SchemaError);
}

TEST(Dispersion, RejectsUnphysicalRows) {
  EXPECT_THROW(from_csv("wavelength_um,n,k\n0.5,1.5,-0.1\n"), PhysicsError);
  EXPECT_THROW(from_csv("wavelength_um,n,k\n0.5,0.0,0.0\n"), PhysicsError);
}

TEST(Dispersion, SingleRowIsConstant) {
  const auto m = from_csv("wavelength_um,n,k\n0.5,2.0,0.1\n");
  for (double wl : {0.1, 0.5, 12.0}) {
    EXPECT_EQ(refractive_index_at(m, wl), Complex(2.0, 0.1));
  }
}

TEST(Dispersion, LinearInterpolation) {
  const auto m = from_csv("wavelength_um,n,k\n0.5,1.5,0.0\n1.0,1.45,0.0\n");
  EXPECT_NEAR(refractive_index_at(m, 0.75).real(), 1.475, 1e-15);
  EXPECT_EQ(refractive_index_at(m, 0.75).imag(), 0.0);
  EXPECT_EQ(refractive_index_at(m, 0.5), Complex(1.5, 0.0));
  EXPECT_THROW(refractive_index_at(m, 1.2), RangeError);
  EXPECT_THROW(refractive_index_at(m, 0.4), RangeError);
}

TEST(Dispersion, GridPointsExactAndPiecewiseLinear) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DispersionPoint> rows;
    double wl = 0.3;
    for (int i = 0; i < 8; ++i) {
      wl += 0.05 + u(rng);
      rows.push_back({wl, 1.0 + 2.0 * u(rng), u(rng)});
    }
    Material m("t", rows);
    for (const auto& r : rows) EXPECT_EQ(refractive_index_at(m, r.wavelength_um), Complex(r.n, r.k));
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
      const double f = u(rng);
      const double x = rows[i].wavelength_um + f * (rows[i + 1].wavelength_um - rows[i].wavelength_um);
      const double t = (x - rows[i].wavelength_um) / (rows[i + 1].wavelength_um - rows[i].wavelength_um);
      const Complex got = refractive_index_at(m, x);
      EXPECT_NEAR(got.real(), rows[i].n + t * (rows[i + 1].n - rows[i].n), 1e-12);
      EXPECT_NEAR(got.imag(), rows[i].k + t * (rows[i + 1].k - rows[i].k), 1e-12);
    }
  }
}

TEST(Dispersion, CsvRoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<DispersionPoint> rows;
    double wl = 0.2;
    for (int i = 0; i < 10; ++i) {
      wl += 1e-3 + u(rng) / 3.0;
      rows.push_back({wl, 1.0 + u(rng) / 7.0, u(rng) / 3.0});
    }
    Material m("t", rows);
    std::istringstream in(to_dispersion_csv(m));
    EXPECT_EQ(load_dispersion(in, "t").table(), m.table());
  }
}

TEST(Decode, AllZeroSelectsFirstPaletteEntry) {
  const auto enc = two_material_encoding(120);
  const auto stack = decode(BitVector(120, 0), enc);
  ASSERT_EQ(stack.size(), 120u);
  for (const auto& layer : stack.layers()) EXPECT_EQ(layer.material->name(), "A");
}

TEST(Decode, AlternatingBitsGiveAlternatingStack) {
  const auto enc = two_material_encoding(120);
  BitVector bits(120);
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = static_cast<std::uint8_t>(i % 2);
  const auto stack = decode(bits, enc);
  for (std::size_t i = 0; i < stack.size(); ++i) {
    EXPECT_EQ(stack.layers()[i].material->name(), i % 2 ? "B" : "A");
  }
}

TEST(Decode, LengthMismatch) {
  const auto enc = two_material_encoding(120);
  EXPECT_THROW(decode(BitVector(121, 0), enc), EncodingError);
}

TEST(Decode, MultiBitGroups) {
  std::vector<MaterialPtr> palette;
  for (int i = 0; i < 4; ++i) {
    palette.push_back(std::make_shared<const Material>(Material::constant("m" + std::to_string(i), 1.1 + i)));
  }
  auto air = std::make_shared<const Material>(Material::constant("air", 1.0));
  BinaryEncoding enc(2, 3, palette, {10.0, 20.0, 30.0}, air, air);
  const auto stack = decode(parse_bit_string("011011"), enc);
  EXPECT_EQ(stack.layers()[0].material->name(), "m1");
  EXPECT_EQ(stack.layers()[1].material->name(), "m2");
  EXPECT_EQ(stack.layers()[2].material->name(), "m3");
  EXPECT_EQ(stack.layers()[2].thickness_nm, 30.0);
}

TEST(Decode, PaletteSizeMustMatchBits) {
  auto air = std::make_shared<const Material>(Material::constant("air", 1.0));
  EXPECT_ANY_THROW(BinaryEncoding(2, 3, {air, air, air}, {1.0, 1.0, 1.0}, air, air));
}

TEST(Decode, InjectiveOnRandomPairs) {
  const auto enc = two_material_encoding(40);
  std::mt19937_64 rng(3);
  auto signature = [](const LayerStack& s) {
    std::string key;
    for (const auto& l : s.layers()) key += l.material->name() + ";";
    return key;
  };
  for (int trial = 0; trial < 500; ++trial) {
    BitVector a(40), b(40);
    for (auto& v : a) v = static_cast<std::uint8_t>(rng() & 1U);
    for (auto& v : b) v = static_cast<std::uint8_t>(rng() & 1U);
    if (a == b) continue;
    EXPECT_NE(signature(decode(a, enc)), signature(decode(b, enc)));
  }
}

TEST(Stack, RejectsLossyAmbientAndBadThickness) {
  auto lossy = std::make_shared<const Material>(Material::constant("lossy", 1.0, 0.1));
  auto air = std::make_shared<const Material>(Material::constant("air", 1.0));
  EXPECT_THROW(LayerStack(lossy, {}, air), PhysicsError);
  EXPECT_THROW(LayerStack(air, {{air, 0.0}}, air), PhysicsError);
}

TEST(Grid, Validation) {
  EXPECT_ANY_THROW(SpectralGrid({}));
  EXPECT_ANY_THROW(SpectralGrid({1.0, 1.0}));
  const auto g = SpectralGrid::linspace(0.4, 0.8, 5);
  ASSERT_EQ(g.size(), 5u);
  EXPECT_DOUBLE_EQ(g.wavelengths()[2], 0.6);
  EXPECT_EQ(g.back(), 0.8);
}

TEST(Incidence, AngleBounds) {
  EXPECT_NO_THROW(IncidenceCondition(89.0, Polarization::s));
  EXPECT_ANY_THROW(IncidenceCondition(89.5, Polarization::s));
  EXPECT_ANY_THROW(IncidenceCondition(-1.0, Polarization::p));
  EXPECT_EQ(parse_polarization("unpolarized"), Polarization::unpolarized);
}

TEST(Bits, StringRoundTrip) {
  EXPECT_EQ(to_bit_string(parse_bit_string("0110")), "0110");
  EXPECT_THROW(parse_bit_string("01x"), SchemaError);
  EXPECT_EQ(index_from_bits(bits_from_index(37, 8)), 37u);
}

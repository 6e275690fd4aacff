#pragma once

#include <complex>
#include <cstddef>
#include <istream>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "metaopt/bits.hpp"

namespace metaopt {

using Complex = std::complex<double>;

/// One row of a dispersion table.
struct DispersionPoint {
  double wavelength_um = 0.0;
  double n = 1.0;
  double k = 0.0;

  friend bool operator==(const DispersionPoint&, const DispersionPoint&) = default;
};

/// Optical constants of a material as a function of wavelength.
///
/// A table with a single row is a constant-index material and answers every
/// wavelength with that row. Otherwise n and k are interpolated linearly
/// between bracketing rows and queries outside the table raise RangeError.
class Material {
 public:
  /// Validates and takes ownership of the table. Throws SchemaError for an
  /// empty or non-increasing table, PhysicsError for n <= 0 or k < 0.
  Material(std::string name, std::vector<DispersionPoint> table);

  static Material constant(std::string name, double n, double k = 0.0);

  const std::string& name() const noexcept { return name_; }
  const std::vector<DispersionPoint>& table() const noexcept { return table_; }
  bool is_constant() const noexcept { return table_.size() == 1; }
  bool is_lossless() const noexcept;
  bool covers(double wavelength_um) const noexcept;

  double min_wavelength() const noexcept { return table_.front().wavelength_um; }
  double max_wavelength() const noexcept { return table_.back().wavelength_um; }

 private:
  std::string name_;
  std::vector<DispersionPoint> table_;
};

using MaterialPtr = std::shared_ptr<const Material>;

/// Parses a `wavelength_um,n,k` CSV (one header line) into a material.
Material load_dispersion(std::istream& source, std::string name = "material");
Material load_dispersion_file(const std::string& path);

/// CSV text that load_dispersion reads back into an identical table.
std::string to_dispersion_csv(const Material& material);

/// n + i k at the given wavelength.
Complex refractive_index_at(const Material& material, double wavelength_um);

struct Layer {
  MaterialPtr material;
  double thickness_nm = 0.0;
};

/// Semi-infinite ambient, N finite layers front-to-back, semi-infinite substrate.
class LayerStack {
 public:
  /// Throws PhysicsError if the ambient absorbs or a thickness is not positive.
  LayerStack(MaterialPtr ambient, std::vector<Layer> layers, MaterialPtr substrate);

  const Material& ambient() const noexcept { return *ambient_; }
  const Material& substrate() const noexcept { return *substrate_; }
  const MaterialPtr& ambient_ptr() const noexcept { return ambient_; }
  const MaterialPtr& substrate_ptr() const noexcept { return substrate_; }
  const std::vector<Layer>& layers() const noexcept { return layers_; }
  std::size_t size() const noexcept { return layers_.size(); }

  /// Same ambient/substrate with the layer order reversed.
  LayerStack reversed() const;

  /// True when every material in the stack covers the wavelength.
  bool covers(double wavelength_um) const noexcept;

 private:
  MaterialPtr ambient_;
  std::vector<Layer> layers_;
  MaterialPtr substrate_;
};

/// Maps solver bit strings onto layer stacks: each consecutive group of
/// `bits_per_layer` bits selects one palette entry for one layer.
class BinaryEncoding {
 public:
  BinaryEncoding(std::size_t bits_per_layer, std::size_t layer_count,
                 std::vector<MaterialPtr> palette, std::vector<double> thickness_nm,
                 MaterialPtr ambient, MaterialPtr substrate);

  std::size_t bits_per_layer() const noexcept { return bits_per_layer_; }
  std::size_t layer_count() const noexcept { return layer_count_; }
  std::size_t total_bits() const noexcept { return bits_per_layer_ * layer_count_; }
  const std::vector<MaterialPtr>& palette() const noexcept { return palette_; }
  const std::vector<double>& thickness_nm() const noexcept { return thickness_nm_; }
  const MaterialPtr& ambient() const noexcept { return ambient_; }
  const MaterialPtr& substrate() const noexcept { return substrate_; }

 private:
  std::size_t bits_per_layer_;
  std::size_t layer_count_;
  std::vector<MaterialPtr> palette_;
  std::vector<double> thickness_nm_;
  MaterialPtr ambient_;
  MaterialPtr substrate_;
};

/// Builds the stack selected by `bits`. Throws EncodingError on a length mismatch.
LayerStack decode(std::span<const std::uint8_t> bits, const BinaryEncoding& encoding);

/// Strictly increasing, non-empty list of wavelengths in micrometers.
class SpectralGrid {
 public:
  explicit SpectralGrid(std::vector<double> wavelengths_um);

  /// `count` evenly spaced points over [start, stop] inclusive.
  static SpectralGrid linspace(double start_um, double stop_um, std::size_t count);

  const std::vector<double>& wavelengths() const noexcept { return wavelengths_; }
  std::size_t size() const noexcept { return wavelengths_.size(); }
  double front() const noexcept { return wavelengths_.front(); }
  double back() const noexcept { return wavelengths_.back(); }

 private:
  std::vector<double> wavelengths_;
};

enum class Polarization { s, p, unpolarized };

const char* to_string(Polarization pol) noexcept;
Polarization parse_polarization(std::string_view text);

/// Angle of incidence in degrees (0..89) and polarization.
class IncidenceCondition {
 public:
  IncidenceCondition(double angle_deg, Polarization pol);

  double angle_deg() const noexcept { return angle_deg_; }
  Polarization polarization() const noexcept { return pol_; }

  friend bool operator==(const IncidenceCondition&, const IncidenceCondition&) = default;

 private:
  double angle_deg_;
  Polarization pol_;
};

}  // namespace metaopt

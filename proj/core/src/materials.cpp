#include "metaopt/materials.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "metaopt/errors.hpp"

namespace metaopt {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view field, std::size_t line) {
  field = trim(field);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw SchemaError("line " + std::to_string(line) + ": '" + std::string(field) +
                      "' is not a number");
  }
  return value;
}

std::string format_exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Material::Material(std::string name, std::vector<DispersionPoint> table)
    : name_(std::move(name)), table_(std::move(table)) {
  if (table_.empty()) throw SchemaError("material '" + name_ + "': empty dispersion table");
  for (std::size_t i = 0; i < table_.size(); ++i) {
    const auto& row = table_[i];
    if (!std::isfinite(row.wavelength_um) || !std::isfinite(row.n) || !std::isfinite(row.k)) {
      throw SchemaError("material '" + name_ + "': non-finite value in row " + std::to_string(i));
    }
    if (row.wavelength_um <= 0.0) {
      throw SchemaError("material '" + name_ + "': wavelength must be positive");
    }
    if (row.n <= 0.0) throw PhysicsError("material '" + name_ + "': n must be > 0");
    if (row.k < 0.0) throw PhysicsError("material '" + name_ + "': k must be >= 0");
    if (i > 0 && !(row.wavelength_um > table_[i - 1].wavelength_um)) {
      throw SchemaError("material '" + name_ + "': wavelengths must be strictly increasing (row " +
                        std::to_string(i) + ")");
    }
  }
}

Material Material::constant(std::string name, double n, double k) {
  return Material(std::move(name), {{1.0, n, k}});
}

bool Material::is_lossless() const noexcept {
  return std::all_of(table_.begin(), table_.end(), [](const auto& r) { return r.k == 0.0; });
}

bool Material::covers(double wavelength_um) const noexcept {
  return is_constant() || (wavelength_um >= min_wavelength() && wavelength_um <= max_wavelength());
}

Material load_dispersion(std::istream& source, std::string name) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<DispersionPoint> rows;
  while (std::getline(source, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      if (text != "wavelength_um,n,k") {
        throw SchemaError("expected header 'wavelength_um,n,k', got '" + std::string(text) + "'");
      }
      header_seen = true;
      continue;
    }
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = text.find(',', start);
      fields.push_back(text.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 3) {
      throw SchemaError("line " + std::to_string(line_no) + ": expected 3 fields, got " +
                        std::to_string(fields.size()));
    }
    rows.push_back({parse_number(fields[0], line_no), parse_number(fields[1], line_no),
                    parse_number(fields[2], line_no)});
  }
  if (!header_seen) throw SchemaError("dispersion CSV is empty");
  if (rows.empty()) throw SchemaError("dispersion CSV has no data rows");
  return Material(std::move(name), std::move(rows));
}

Material load_dispersion_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open dispersion file '" + path + "'");
  auto stem = path;
  if (const auto slash = stem.find_last_of('/'); slash != std::string::npos) stem.erase(0, slash + 1);
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos) stem.erase(dot);
  return load_dispersion(in, stem);
}

std::string to_dispersion_csv(const Material& material) {
  std::string out = "wavelength_um,n,k\n";
  for (const auto& row : material.table()) {
    out += format_exact(row.wavelength_um) + ',' + format_exact(row.n) + ',' + format_exact(row.k) + '\n';
  }
  return out;
}

Complex refractive_index_at(const Material& material, double wavelength_um) {
  const auto& table = material.table();
  if (material.is_constant()) return {table.front().n, table.front().k};
  if (!(wavelength_um >= table.front().wavelength_um && wavelength_um <= table.back().wavelength_um)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "material '%s': wavelength %.6g um outside table [%.6g, %.6g]",
                  material.name().c_str(), wavelength_um, table.front().wavelength_um,
                  table.back().wavelength_um);
    throw RangeError(buf);
  }
  const auto upper = std::lower_bound(
      table.begin(), table.end(), wavelength_um,
      [](const DispersionPoint& row, double wl) { return row.wavelength_um < wl; });
  if (upper->wavelength_um == wavelength_um) return {upper->n, upper->k};
  const auto lower = upper - 1;
  const double t = (wavelength_um - lower->wavelength_um) / (upper->wavelength_um - lower->wavelength_um);
  return {lower->n + t * (upper->n - lower->n), lower->k + t * (upper->k - lower->k)};
}

LayerStack::LayerStack(MaterialPtr ambient, std::vector<Layer> layers, MaterialPtr substrate)
    : ambient_(std::move(ambient)), layers_(std::move(layers)), substrate_(std::move(substrate)) {
  if (!ambient_ || !substrate_) throw ConfigError("stack needs an ambient and a substrate");
  if (!ambient_->is_lossless()) {
    throw PhysicsError("ambient '" + ambient_->name() + "' must be lossless (k = 0)");
  }
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (!layers_[i].material) throw ConfigError("layer " + std::to_string(i) + " has no material");
    if (!(layers_[i].thickness_nm > 0.0) || !std::isfinite(layers_[i].thickness_nm)) {
      throw PhysicsError("layer " + std::to_string(i) + ": thickness must be > 0");
    }
  }
}

LayerStack LayerStack::reversed() const {
  return LayerStack(ambient_, {layers_.rbegin(), layers_.rend()}, substrate_);
}

bool LayerStack::covers(double wavelength_um) const noexcept {
  if (!ambient_->covers(wavelength_um) || !substrate_->covers(wavelength_um)) return false;
  return std::all_of(layers_.begin(), layers_.end(),
                     [&](const Layer& l) { return l.material->covers(wavelength_um); });
}

BinaryEncoding::BinaryEncoding(std::size_t bits_per_layer, std::size_t layer_count,
                               std::vector<MaterialPtr> palette, std::vector<double> thickness_nm,
                               MaterialPtr ambient, MaterialPtr substrate)
    : bits_per_layer_(bits_per_layer),
      layer_count_(layer_count),
      palette_(std::move(palette)),
      thickness_nm_(std::move(thickness_nm)),
      ambient_(std::move(ambient)),
      substrate_(std::move(substrate)) {
  if (bits_per_layer_ == 0 || bits_per_layer_ > 16) {
    throw EncodingError("bits_per_layer must be in 1..16");
  }
  if (layer_count_ == 0) throw EncodingError("layer_count must be positive");
  if (palette_.size() != (std::size_t{1} << bits_per_layer_)) {
    throw EncodingError("palette must hold exactly 2^bits_per_layer = " +
                        std::to_string(std::size_t{1} << bits_per_layer_) + " materials, got " +
                        std::to_string(palette_.size()));
  }
  if (thickness_nm_.size() == 1 && layer_count_ > 1) thickness_nm_.assign(layer_count_, thickness_nm_[0]);
  if (thickness_nm_.size() != layer_count_) {
    throw EncodingError("thickness list must have one entry or one per layer");
  }
  for (const auto& m : palette_) {
    if (!m) throw EncodingError("palette entry is empty");
  }
  for (double t : thickness_nm_) {
    if (!(t > 0.0)) throw PhysicsError("layer thickness must be > 0");
  }
  if (!ambient_ || !substrate_) throw EncodingError("encoding needs an ambient and a substrate");
}

LayerStack decode(std::span<const std::uint8_t> bits, const BinaryEncoding& encoding) {
  if (bits.size() != encoding.total_bits()) {
    throw EncodingError("bit vector has length " + std::to_string(bits.size()) + ", encoding expects " +
                        std::to_string(encoding.total_bits()));
  }
  const std::size_t width = encoding.bits_per_layer();
  std::vector<Layer> layers;
  layers.reserve(encoding.layer_count());
  for (std::size_t j = 0; j < encoding.layer_count(); ++j) {
    // Most significant bit first within a group.
    std::size_t index = 0;
    for (std::size_t b = 0; b < width; ++b) index = (index << 1) | (bits[j * width + b] != 0 ? 1U : 0U);
    layers.push_back({encoding.palette()[index], encoding.thickness_nm()[j]});
  }
  return LayerStack(encoding.ambient(), std::move(layers), encoding.substrate());
}

SpectralGrid::SpectralGrid(std::vector<double> wavelengths_um) : wavelengths_(std::move(wavelengths_um)) {
  if (wavelengths_.empty()) throw ConfigError("spectral grid is empty");
  for (std::size_t i = 0; i < wavelengths_.size(); ++i) {
    if (!(wavelengths_[i] > 0.0) || !std::isfinite(wavelengths_[i])) {
      throw ConfigError("spectral grid wavelengths must be positive and finite");
    }
    if (i > 0 && !(wavelengths_[i] > wavelengths_[i - 1])) {
      throw ConfigError("spectral grid must be strictly increasing");
    }
  }
}

SpectralGrid SpectralGrid::linspace(double start_um, double stop_um, std::size_t count) {
  if (count == 0) throw ConfigError("spectral grid needs at least one point");
  if (count == 1) return SpectralGrid({start_um});
  std::vector<double> w(count);
  const double step = (stop_um - start_um) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) w[i] = start_um + step * static_cast<double>(i);
  w.back() = stop_um;
  return SpectralGrid(std::move(w));
}

const char* to_string(Polarization pol) noexcept {
  switch (pol) {
    case Polarization::s: return "s";
    case Polarization::p: return "p";
    case Polarization::unpolarized: return "unpolarized";
  }
  return "?";
}

Polarization parse_polarization(std::string_view text) {
  if (text == "s" || text == "TE") return Polarization::s;
  if (text == "p" || text == "TM") return Polarization::p;
  if (text == "unpolarized" || text == "u") return Polarization::unpolarized;
  throw ConfigError("unknown polarization '" + std::string(text) + "'");
}

IncidenceCondition::IncidenceCondition(double angle_deg, Polarization pol)
    : angle_deg_(angle_deg), pol_(pol) {
  if (!(angle_deg >= 0.0 && angle_deg <= 89.0)) {
    throw RangeError("incidence angle " + std::to_string(angle_deg) + " outside [0, 89] degrees");
  }
}

}  // namespace metaopt

#include "metaopt/tmm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "metaopt/errors.hpp"
#include "metaopt/parallel.hpp"

namespace metaopt::tmm {
namespace {

std::atomic<std::uint64_t> g_interfaces{0};
std::atomic<std::uint64_t> g_propagations{0};
std::atomic<std::uint64_t> g_system_matrices{0};

constexpr double kPi = std::numbers::pi;

double tangential_index(double ambient_index, double angle_deg) {
  return ambient_index * std::sin(angle_deg * kPi / 180.0);
}

// n cos(theta) inside a medium of index n, on the branch with Im >= 0.
Complex normal_admittance(Complex n, double beta) {
  Complex q = std::sqrt(n * n - beta * beta);
  if (q.imag() < 0.0 || (q.imag() == 0.0 && q.real() < 0.0)) q = -q;
  return q;
}

Fresnel fresnel_from_admittance(Complex n_from, Complex q_from, Complex n_to, Complex q_to,
                                Polarization pol) {
  if (pol == Polarization::s) {
    const Complex denom = q_from + q_to;
    if (denom == Complex{}) throw SingularInterfaceError("s-polarized interface has zero denominator");
    return {(q_from - q_to) / denom, 2.0 * q_from / denom};
  }
  const Complex a = n_to * n_to * q_from;
  const Complex b = n_from * n_from * q_to;
  const Complex denom = a + b;
  if (denom == Complex{}) throw SingularInterfaceError("p-polarized interface has zero denominator");
  return {(a - b) / denom, 2.0 * n_from * n_to * q_from / denom};
}

Matrix2c interface_from_admittance(Complex n_left, Complex q_left, Complex n_right, Complex q_right,
                                   Polarization pol) {
  // Coefficients for a wave arriving from the right-hand medium.
  const Fresnel f = fresnel_from_admittance(n_right, q_right, n_left, q_left, pol);
  if (f.t == Complex{}) {
    throw SingularInterfaceError("interface transmission amplitude is zero");
  }
  const Complex inv_t = 1.0 / f.t;
  return {inv_t, f.r * inv_t, f.r * inv_t, inv_t};
}

Matrix2c propagation_from_admittance(Complex q, double thickness_nm, double wavelength_um) {
  const Complex phase = (2.0 * kPi / wavelength_um) * q * (thickness_nm * 1e-3);
  const Complex i{0.0, 1.0};
  return {std::exp(i * phase), Complex{}, Complex{}, std::exp(-i * phase)};
}

// Left-multiplies `m` by diag(a, b).
void scale_rows(Matrix2c& m, Complex a, Complex b) noexcept {
  m.m11 *= a;
  m.m12 *= a;
  m.m21 *= b;
  m.m22 *= b;
}

void check_pol(Polarization pol) {
  if (pol == Polarization::unpolarized) {
    throw ConfigError("matrix-level calls need s or p polarization; average at the spectrum level");
  }
}

struct MediumEntry {
  const Material* material;
  Complex n;
  Complex q;
};

struct PropagationEntry {
  std::size_t medium;
  double thickness_nm;
  Complex forward;
  Complex backward;
};

}  // namespace

bool Matrix2c::is_finite() const noexcept {
  for (const Complex& c : {m11, m12, m21, m22}) {
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
  }
  return true;
}

Matrix2c propagation_matrix(Complex index, double thickness_nm, double wavelength_um,
                            double angle_deg, double ambient_index) {
  g_propagations.fetch_add(1, std::memory_order_relaxed);
  const Complex q = normal_admittance(index, tangential_index(ambient_index, angle_deg));
  return propagation_from_admittance(q, thickness_nm, wavelength_um);
}

Matrix2c propagation_matrix(const Layer& layer, double wavelength_um, double angle_deg,
                            double ambient_index) {
  if (!(layer.thickness_nm > 0.0)) throw PhysicsError("layer thickness must be > 0");
  return propagation_matrix(refractive_index_at(*layer.material, wavelength_um), layer.thickness_nm,
                            wavelength_um, angle_deg, ambient_index);
}

Fresnel fresnel(Complex n_from, Complex n_to, double angle_deg, Polarization pol, double ambient_index) {
  check_pol(pol);
  const double beta = tangential_index(ambient_index, angle_deg);
  return fresnel_from_admittance(n_from, normal_admittance(n_from, beta), n_to,
                                 normal_admittance(n_to, beta), pol);
}

Matrix2c interface_matrix(Complex n_left, Complex n_right, double angle_deg, Polarization pol,
                          double ambient_index) {
  check_pol(pol);
  g_interfaces.fetch_add(1, std::memory_order_relaxed);
  const double beta = tangential_index(ambient_index, angle_deg);
  return interface_from_admittance(n_left, normal_admittance(n_left, beta), n_right,
                                   normal_admittance(n_right, beta), pol);
}

Matrix2c system_matrix(const LayerStack& stack, double wavelength_um, double angle_deg,
                       Polarization pol) {
  check_pol(pol);
  const double n_amb = refractive_index_at(stack.ambient(), wavelength_um).real();
  const double beta = tangential_index(n_amb, angle_deg);

  // Stacks decoded from a palette reuse a handful of materials; evaluate each once.
  std::vector<MediumEntry> media;
  auto medium_of = [&](const Material& m) -> std::size_t {
    for (std::size_t i = 0; i < media.size(); ++i) {
      if (media[i].material == &m) return i;
    }
    const Complex n = refractive_index_at(m, wavelength_um);
    media.push_back({&m, n, normal_admittance(n, beta)});
    return media.size() - 1;
  };
  std::vector<std::size_t> path;  // ambient, layers..., substrate
  path.reserve(stack.size() + 2);
  path.push_back(medium_of(stack.ambient()));
  for (const Layer& layer : stack.layers()) path.push_back(medium_of(*layer.material));
  path.push_back(medium_of(stack.substrate()));

  const std::size_t k = media.size();
  std::vector<Matrix2c> interfaces(k * k);
  std::vector<std::uint8_t> have_interface(k * k, 0);
  auto interface_between = [&](std::size_t left, std::size_t right) -> const Matrix2c& {
    const std::size_t slot = left * k + right;
    if (!have_interface[slot]) {
      interfaces[slot] = interface_from_admittance(media[left].n, media[left].q, media[right].n,
                                                   media[right].q, pol);
      have_interface[slot] = 1;
    }
    return interfaces[slot];
  };
  // Small cache: palette stacks repeat (material, thickness) pairs, random stacks do not.
  constexpr std::size_t kPropagationCache = 16;
  std::vector<PropagationEntry> propagations;
  auto propagation_of = [&](std::size_t medium, double thickness_nm) -> PropagationEntry {
    for (const auto& p : propagations) {
      if (p.medium == medium && p.thickness_nm == thickness_nm) return p;
    }
    const Matrix2c P = propagation_from_admittance(media[medium].q, thickness_nm, wavelength_um);
    PropagationEntry entry{medium, thickness_nm, P.m11, P.m22};
    if (propagations.size() < kPropagationCache) propagations.push_back(entry);
    return entry;
  };

  Matrix2c m = Matrix2c::identity();
  for (std::size_t j = 1; j + 1 < path.size(); ++j) {
    m = interface_between(path[j - 1], path[j]) * m;
    const PropagationEntry p = propagation_of(path[j], stack.layers()[j - 1].thickness_nm);
    scale_rows(m, p.forward, p.backward);
  }
  m = interface_between(path[path.size() - 2], path.back()) * m;

  const std::uint64_t n_layers = stack.size();
  g_interfaces.fetch_add(n_layers + 1, std::memory_order_relaxed);
  g_propagations.fetch_add(n_layers, std::memory_order_relaxed);
  g_system_matrices.fetch_add(1, std::memory_order_relaxed);
  return m;
}

ReflectTransmit rt_from_matrix(const Matrix2c& m, double n_amb, Complex n_sub, double angle_deg,
                               Polarization pol) {
  check_pol(pol);
  if (m.m22 == Complex{}) throw SingularSystemError("system matrix has m22 = 0");
  const Complex r = -m.m21 / m.m22;
  const Complex t = m.det() / m.m22;

  const double theta = angle_deg * kPi / 180.0;
  const double beta = n_amb * std::sin(theta);
  const double amb_q = n_amb * std::cos(theta);
  const Complex sub_q = normal_admittance(n_sub, beta);

  double ratio = 0.0;
  if (pol == Polarization::s) {
    ratio = sub_q.real() / amb_q;
  } else {
    // Re(n_sub * conj(cos theta_sub)) / Re(n_amb * cos theta_amb)
    const Complex cos_sub = sub_q / n_sub;
    ratio = (n_sub * std::conj(cos_sub)).real() / amb_q;
  }
  return {std::norm(r), std::norm(t) * ratio};
}

SpectralResponse spectrum(const LayerStack& stack, const SpectralGrid& grid,
                          const IncidenceCondition& cond) {
  SpectralResponse out;
  const std::size_t count = grid.size();
  out.R.resize(count);
  out.T.resize(count);
  out.A.resize(count);
  const double angle = cond.angle_deg();
  auto one = [&](double wl, Polarization pol) {
    const Matrix2c m = system_matrix(stack, wl, angle, pol);
    return rt_from_matrix(m, refractive_index_at(stack.ambient(), wl).real(),
                          refractive_index_at(stack.substrate(), wl), angle, pol);
  };
  for (std::size_t i = 0; i < count; ++i) {
    const double wl = grid.wavelengths()[i];
    ReflectTransmit rt;
    if (cond.polarization() == Polarization::unpolarized) {
      const auto s = one(wl, Polarization::s);
      const auto p = one(wl, Polarization::p);
      rt = {0.5 * (s.R + p.R), 0.5 * (s.T + p.T)};
    } else {
      rt = one(wl, cond.polarization());
    }
    out.R[i] = rt.R;
    out.T[i] = rt.T;
    out.A[i] = 1.0 - rt.R - rt.T;
  }
  return out;
}

std::string SweepResult::to_csv() const {
  std::string out = "angle_deg,polarization,wavelength_um,R,T,A\n";
  char buf[256];
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    const auto& resp = responses[c];
    for (std::size_t i = 0; i < wavelengths.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.12g,%s,%.12g,%.12g,%.12g,%.12g\n", conditions[c].angle_deg(),
                    to_string(conditions[c].polarization()), wavelengths[i], resp.R[i], resp.T[i],
                    resp.A[i]);
      out += buf;
    }
  }
  return out;
}

SweepResult sweep(const LayerStack& stack, const SpectralGrid& grid,
                  const std::vector<IncidenceCondition>& conditions, std::size_t workers) {
  if (workers == 0) throw ConfigError("sweep needs at least one worker");
  const auto start = std::chrono::steady_clock::now();

  struct WorkItem {
    std::size_t condition;
    IndexRange range;
  };
  const auto blocks = contiguous_blocks(grid.size(), workers);
  std::vector<WorkItem> items;
  items.reserve(conditions.size() * blocks.size());
  for (std::size_t c = 0; c < conditions.size(); ++c) {
    for (const auto& b : blocks) items.push_back({c, b});
  }

  struct Partial {
    std::size_t item;
    SpectralResponse response;
  };
  std::vector<std::vector<Partial>> buffers(workers);
  std::atomic<bool> abort{false};

  auto run_worker = [&](std::size_t w) {
    for (std::size_t i = w; i < items.size(); i += workers) {
      if (abort.load(std::memory_order_relaxed)) return;
      const auto& item = items[i];
      const auto first = grid.wavelengths().begin() + static_cast<std::ptrdiff_t>(item.range.begin);
      const SpectralGrid sub({first, first + static_cast<std::ptrdiff_t>(item.range.size())});
      try {
        buffers[w].push_back({i, spectrum(stack, sub, conditions[item.condition])});
      } catch (...) {
        abort.store(true, std::memory_order_relaxed);
        throw;
      }
    }
  };
  if (workers == 1) {
    run_worker(0);
  } else {
    WorkerPool pool(workers);
    pool.run(run_worker);
  }

  SweepResult result;
  result.conditions = conditions;
  result.wavelengths = grid.wavelengths();
  result.workers = workers;
  result.responses.resize(conditions.size());
  for (auto& r : result.responses) {
    r.R.resize(grid.size());
    r.T.resize(grid.size());
    r.A.resize(grid.size());
  }
  for (const auto& buffer : buffers) {
    for (const auto& part : buffer) {
      const auto& item = items[part.item];
      auto& dst = result.responses[item.condition];
      std::copy(part.response.R.begin(), part.response.R.end(), dst.R.begin() + item.range.begin);
      std::copy(part.response.T.begin(), part.response.T.end(), dst.T.begin() + item.range.begin);
      std::copy(part.response.A.begin(), part.response.A.end(), dst.A.begin() + item.range.begin);
    }
  }
  result.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

const char* to_string(Quantity q) noexcept {
  switch (q) {
    case Quantity::R: return "R";
    case Quantity::T: return "T";
    case Quantity::A: return "A";
  }
  return "?";
}

Quantity parse_quantity(std::string_view text) {
  if (text == "R") return Quantity::R;
  if (text == "T") return Quantity::T;
  if (text == "A" || text == "E") return Quantity::A;
  throw ConfigError("unknown FOM quantity '" + std::string(text) + "' (expected R, T or A)");
}

FomSpec::FomSpec(std::vector<FomBand> bands) : bands_(std::move(bands)) {
  if (bands_.empty()) throw ConfigError("FOM spec needs at least one band");
  double total = 0.0;
  for (const auto& b : bands_) {
    if (!(b.lo_um < b.hi_um)) throw ConfigError("FOM band needs lo < hi");
    if (!(b.weight >= 0.0) || !std::isfinite(b.weight)) throw ConfigError("FOM band weight must be >= 0");
    total += b.weight;
  }
  if (!(total > 0.0)) throw ConfigError("FOM band weights must sum to a positive value");
}

FomSpec FomSpec::transparent_radiative_cooler() {
  return FomSpec({{0.4, 0.8, Quantity::T, 1.0},
                  {0.3, 0.4, Quantity::R, 1.0},
                  {0.8, 2.5, Quantity::R, 1.0},
                  {8.0, 13.0, Quantity::A, 1.0}});
}

double evaluate_fom(const SweepResult& result, const FomSpec& spec) {
  const auto& wl = result.wavelengths;
  if (wl.empty() || result.conditions.empty()) throw RangeError("sweep result is empty");
  double weighted = 0.0;
  double total_weight = 0.0;
  for (const auto& band : spec.bands()) {
    if (band.lo_um < wl.front() || band.hi_um > wl.back()) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "FOM band [%g, %g] um outside grid [%g, %g] um", band.lo_um,
                    band.hi_um, wl.front(), wl.back());
      throw RangeError(buf);
    }
    std::vector<std::size_t> in_band;
    for (std::size_t i = 0; i < wl.size(); ++i) {
      if (wl[i] >= band.lo_um && wl[i] <= band.hi_um) in_band.push_back(i);
    }
    if (in_band.empty()) throw RangeError("FOM band contains no grid wavelength");

    double over_conditions = 0.0;
    for (const auto& resp : result.responses) {
      const auto& values = band.quantity == Quantity::R ? resp.R : band.quantity == Quantity::T ? resp.T : resp.A;
      double sum = 0.0;
      for (std::size_t i : in_band) sum += values[i];
      over_conditions += sum / static_cast<double>(in_band.size());
    }
    weighted += band.weight * over_conditions / static_cast<double>(result.responses.size());
    total_weight += band.weight;
  }
  return weighted / total_weight;
}

OpCounts op_counts() noexcept {
  return {g_interfaces.load(), g_propagations.load(), g_system_matrices.load()};
}

void reset_op_counts() noexcept {
  g_interfaces.store(0);
  g_propagations.store(0);
  g_system_matrices.store(0);
}

}  // namespace metaopt::tmm

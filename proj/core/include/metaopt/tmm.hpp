#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <string>
#include <vector>

#include "metaopt/materials.hpp"

namespace metaopt::tmm {

/// 2x2 complex matrix [[m11, m12], [m21, m22]].
struct Matrix2c {
  Complex m11{1.0, 0.0};
  Complex m12{0.0, 0.0};
  Complex m21{0.0, 0.0};
  Complex m22{1.0, 0.0};

  static Matrix2c identity() noexcept { return {}; }
  Complex det() const noexcept { return m11 * m22 - m12 * m21; }
  bool is_finite() const noexcept;

  friend Matrix2c operator*(const Matrix2c& a, const Matrix2c& b) noexcept {
    return {a.m11 * b.m11 + a.m12 * b.m21, a.m11 * b.m12 + a.m12 * b.m22,
            a.m21 * b.m11 + a.m22 * b.m21, a.m21 * b.m12 + a.m22 * b.m22};
  }
};

/// Amplitude convention: every matrix maps (forward, backward) amplitudes on
/// the ambient side of an element to those on its substrate side.

/// Layer propagation diag(e^{i kz d}, e^{-i kz d}), kz = 2pi/lambda sqrt(n^2 - (n_amb sin theta)^2),
/// square-root branch with Im >= 0.
Matrix2c propagation_matrix(const Layer& layer, double wavelength_um, double angle_deg,
                            double ambient_index);

/// Same, for a precomputed complex index.
Matrix2c propagation_matrix(Complex index, double thickness_nm, double wavelength_um,
                            double angle_deg, double ambient_index);

/// Fresnel amplitude coefficients for a wave going from `n_from` into `n_to`.
struct Fresnel {
  Complex r;
  Complex t;
};
Fresnel fresnel(Complex n_from, Complex n_to, double angle_deg, Polarization pol, double ambient_index);

/// Interface crossing from n_left to n_right. Equals (1/t)[[1, r], [r, 1]]
/// built from the coefficients of a wave arriving from the right, which is the
/// inverse of the matrix built from the left-incidence coefficients.
/// Throws SingularInterfaceError when that t vanishes.
Matrix2c interface_matrix(Complex n_left, Complex n_right, double angle_deg, Polarization pol,
                          double ambient_index);

/// Full cascade T_{N,N+1} P_N ... T_{1,2} P_1 T_{0,1} for one wavelength.
/// `pol` must be s or p.
Matrix2c system_matrix(const LayerStack& stack, double wavelength_um, double angle_deg,
                       Polarization pol);

struct ReflectTransmit {
  double R = 0.0;
  double T = 0.0;
};

/// r = -m21/m22, t = det(M)/m22; T is the power ratio including the admittance factor.
ReflectTransmit rt_from_matrix(const Matrix2c& m, double n_amb, Complex n_sub, double angle_deg,
                               Polarization pol);

struct SpectralResponse {
  std::vector<double> R;
  std::vector<double> T;
  std::vector<double> A;

  std::size_t size() const noexcept { return R.size(); }
  friend bool operator==(const SpectralResponse&, const SpectralResponse&) = default;
};

/// R/T/A at every grid wavelength; unpolarized averages the s and p responses.
SpectralResponse spectrum(const LayerStack& stack, const SpectralGrid& grid,
                          const IncidenceCondition& cond);

struct SweepResult {
  std::vector<IncidenceCondition> conditions;
  std::vector<double> wavelengths;
  std::vector<SpectralResponse> responses;  // parallel to `conditions`
  double elapsed_s = 0.0;
  std::size_t workers = 1;

  /// `angle_deg,polarization,wavelength_um,R,T,A` with 12 significant digits.
  std::string to_csv() const;
};

/// Evaluates every (condition, wavelength) cell. The wavelength axis of each
/// condition is cut into contiguous blocks of ceil(|grid|/workers) points;
/// blocks are dealt round-robin to `workers` threads and merged by the caller.
/// Output is identical for every worker count.
SweepResult sweep(const LayerStack& stack, const SpectralGrid& grid,
                  const std::vector<IncidenceCondition>& conditions, std::size_t workers);

enum class Quantity { R, T, A };
const char* to_string(Quantity q) noexcept;
Quantity parse_quantity(std::string_view text);

struct FomBand {
  double lo_um = 0.0;
  double hi_um = 0.0;
  Quantity quantity = Quantity::T;
  double weight = 1.0;
};

class FomSpec {
 public:
  explicit FomSpec(std::vector<FomBand> bands);

  /// Transparent radiative cooler: transmit 0.4-0.8 um, reflect 0.3-0.4 and
  /// 0.8-2.5 um, emit 8-13 um, equal weights.
  static FomSpec transparent_radiative_cooler();

  const std::vector<FomBand>& bands() const noexcept { return bands_; }

 private:
  std::vector<FomBand> bands_;
};

/// Weighted mean of band-averaged quantities (wavelengths in band, then
/// conditions). Throws RangeError if a band leaves the grid or holds no point.
double evaluate_fom(const SweepResult& result, const FomSpec& spec);

/// Work counters, summed over all threads since the last reset.
struct OpCounts {
  std::uint64_t interfaces = 0;
  std::uint64_t propagations = 0;
  std::uint64_t system_matrices = 0;
};
OpCounts op_counts() noexcept;
void reset_op_counts() noexcept;

}  // namespace metaopt::tmm

#pragma once

// Complex amplitude response of a two-mirror optical cavity.
//
// All detunings are carrier-minus-resonance offsets measured in units of the
// cavity bandwidth (FWHM). In these units the round-trip phase is 2*pi*D/F,
// so the exact (Airy) response repeats every F bandwidths.

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "cavnoise/errors.hpp"

namespace cavnoise {

using complex = std::complex<double>;

/// Intensity reflectivities of the coupling mirror (R1) and the output mirror
/// (R2). Spurious losses are lumped into T2 = 1 - R2.
class MirrorPair {
 public:
  MirrorPair(double coupling_reflectivity, double output_reflectivity)
      : R1_(coupling_reflectivity), R2_(output_reflectivity) {
    if (!(R1_ >= 0.0 && R1_ <= 1.0) || !(R2_ >= 0.0 && R2_ <= 1.0)) {
      throw InvalidParameter("mirror reflectivities must lie in [0, 1], got R1=" +
                             std::to_string(R1_) + " R2=" + std::to_string(R2_));
    }
  }

  /// Builds the pair from R1 and the output-mirror loss T2 = 1 - R2.
  static MirrorPair from_loss(double coupling_reflectivity, double output_loss) {
    if (!(output_loss >= 0.0 && output_loss <= 1.0)) {
      throw InvalidParameter("output mirror loss T2 must lie in [0, 1], got " +
                             std::to_string(output_loss));
    }
    return MirrorPair(coupling_reflectivity, 1.0 - output_loss);
  }

  double R1() const { return R1_; }
  double R2() const { return R2_; }
  double T1() const { return 1.0 - R1_; }
  double T2() const { return 1.0 - R2_; }
  double r1() const { return std::sqrt(R1_); }
  double r2() const { return std::sqrt(R2_); }
  double t1() const { return std::sqrt(1.0 - R1_); }
  double t2() const { return std::sqrt(1.0 - R2_); }

  bool lossless() const { return R2_ == 1.0; }

  friend bool operator==(const MirrorPair&, const MirrorPair&) = default;

 private:
  double R1_;
  double R2_;
};

/// Finesse F = pi (R1 R2)^(1/4) / (1 - sqrt(R1 R2)).
inline double finesse(const MirrorPair& mirrors) {
  const double product = mirrors.R1() * mirrors.R2();
  if (product >= 1.0 - std::numeric_limits<double>::epsilon()) {
    throw DegenerateCavity("finesse diverges: R1*R2 = " + std::to_string(product) +
                           " is not below 1");
  }
  return std::numbers::pi * std::pow(product, 0.25) / (1.0 - std::sqrt(product));
}

enum class ResponseModel {
  exact_airy,  ///< full multiple-round-trip sum, periodic in D with period F
  lorentzian,  ///< single-resonance, high-finesse limit
};

inline std::string_view to_string(ResponseModel model) {
  return model == ResponseModel::exact_airy ? "exact-airy" : "lorentzian";
}

inline ResponseModel parse_response_model(std::string_view text) {
  if (text == "exact-airy" || text == "exact" || text == "airy") return ResponseModel::exact_airy;
  if (text == "lorentzian" || text == "lorentz") return ResponseModel::lorentzian;
  throw InvalidParameter("unknown response model '" + std::string(text) + "'");
}

/// Round-trip length and speed of light, used only to convert normalized
/// quantities to hertz.
struct PhysicalScale {
  double round_trip_length_m;
  double speed_of_light_m_per_s = 299792458.0;
};

class CavityParams {
 public:
  explicit CavityParams(MirrorPair mirrors,
                        ResponseModel model = ResponseModel::exact_airy,
                        std::optional<PhysicalScale> physical = std::nullopt)
      : mirrors_(mirrors), model_(model), physical_(physical), finesse_(cavnoise::finesse(mirrors)) {
    if (physical_ && !(physical_->round_trip_length_m > 0.0 &&
                       physical_->speed_of_light_m_per_s > 0.0)) {
      throw InvalidParameter("round-trip length and speed of light must be positive");
    }
  }

  const MirrorPair& mirrors() const { return mirrors_; }
  ResponseModel model() const { return model_; }
  const std::optional<PhysicalScale>& physical() const { return physical_; }
  double finesse() const { return finesse_; }

  /// Largest |D| for which exactly one resonance is in view.
  double half_range() const { return 0.5 * finesse_; }

  bool in_domain(double detuning) const {
    return std::isfinite(detuning) && std::abs(detuning) <= half_range();
  }

  std::optional<double> free_spectral_range_hz() const {
    if (!physical_) return std::nullopt;
    return physical_->speed_of_light_m_per_s / physical_->round_trip_length_m;
  }

  std::optional<double> bandwidth_hz() const {
    auto fsr = free_spectral_range_hz();
    if (!fsr || finesse_ == 0.0) return std::nullopt;
    return *fsr / finesse_;
  }

 private:
  MirrorPair mirrors_;
  ResponseModel model_;
  std::optional<PhysicalScale> physical_;
  double finesse_;
};

/// A complex amplitude coefficient with its modulus squared and argument.
struct ComplexResponse {
  complex value;
  double magnitude_sq;
  double phase;  ///< principal argument in (-pi, pi]

  explicit ComplexResponse(complex v) : value(v), magnitude_sq(std::norm(v)), phase(std::arg(v)) {}
};

/// Below this |r(D)| the reflected carrier is treated as extinguished.
inline constexpr double kCarrierFloor = 1e-12;

namespace detail {

inline constexpr double kDenominatorFloor = 1e-14;

// Round-trip phase 2*pi*D/F. A cavity with R1*R2 = 0 has no return path and
// no resonance structure, so the phase is taken as zero.
inline double round_trip_phase(double detuning, double finesse) {
  return finesse == 0.0 ? 0.0 : 2.0 * std::numbers::pi * detuning / finesse;
}

inline complex airy_denominator(double phase, double r1r2) {
  const complex d = 1.0 - r1r2 * std::polar(1.0, phase);
  if (std::abs(d) < kDenominatorFloor) {
    throw DegenerateCavity("round-trip denominator vanishes");
  }
  return d;
}

inline double lorentzian_contrast(const MirrorPair& m) {
  return (m.r1() - m.r2()) / (1.0 - m.r1() * m.r2());
}

inline void require_finite(double detuning) {
  if (!std::isfinite(detuning)) throw InvalidParameter("detuning must be finite");
}

}  // namespace detail

/// Amplitude reflection coefficient r(D).
inline ComplexResponse amplitude_reflectance(double detuning, const CavityParams& cavity) {
  detail::require_finite(detuning);
  const MirrorPair& m = cavity.mirrors();
  if (cavity.model() == ResponseModel::lorentzian) {
    const complex num(detail::lorentzian_contrast(m), -2.0 * detuning);
    const complex den(1.0, -2.0 * detuning);
    return ComplexResponse(num / den);
  }
  const double phase = detail::round_trip_phase(detuning, cavity.finesse());
  const complex den = detail::airy_denominator(phase, m.r1() * m.r2());
  return ComplexResponse((m.r1() - m.r2() * std::polar(1.0, phase)) / den);
}

/// Amplitude transmission coefficient t(D) coupling the vacuum port to the
/// reflected beam.
inline ComplexResponse amplitude_transmittance(double detuning, const CavityParams& cavity) {
  detail::require_finite(detuning);
  const MirrorPair& m = cavity.mirrors();
  const double t1t2 = m.t1() * m.t2();
  if (cavity.model() == ResponseModel::lorentzian) {
    const double scale = t1t2 / (1.0 - m.r1() * m.r2());
    return ComplexResponse(scale / complex(1.0, -2.0 * detuning));
  }
  const double phase = detail::round_trip_phase(detuning, cavity.finesse());
  const complex den = detail::airy_denominator(phase, m.r1() * m.r2());
  return ComplexResponse(t1t2 * std::polar(1.0, 0.5 * phase) / den);
}

/// Continuous-branch argument of r(D).
///
/// The branch is 0 at D = -F/2. For an overcoupled or impedance-matched cavity
/// (R1 <= R2) it rises through pi at resonance to 2*pi at D = +F/2 and keeps
/// climbing by 2*pi per free spectral range beyond it; for an undercoupled
/// cavity it is periodic and returns to 0. Evaluated in closed form, so no
/// grid-based unwrapping is involved.
inline double reflection_phase(double detuning, const CavityParams& cavity) {
  const ComplexResponse r = amplitude_reflectance(detuning, cavity);
  if (std::sqrt(r.magnitude_sq) <= kCarrierFloor) {
    throw CarrierExtinguished("reflected carrier vanishes at D=" + std::to_string(detuning) +
                              "; its phase is undefined");
  }
  const MirrorPair& m = cavity.mirrors();
  const double r1 = m.r1();
  const double r2 = m.r2();
  constexpr double pi = std::numbers::pi;

  if (cavity.model() == ResponseModel::lorentzian) {
    const double a0 = detail::lorentzian_contrast(m);
    const double x = 2.0 * detuning;
    if (a0 <= 0.0) return pi + std::atan2(x, -a0) + std::atan(x);
    return std::atan(x) - std::atan2(x, a0);
  }

  const double phase = detail::round_trip_phase(detuning, cavity.finesse());
  const double den_arg = std::arg(1.0 - r1 * r2 * std::polar(1.0, phase));
  if (r1 <= r2) {
    // r1 - r2 e^{i phi} = -r2 e^{i phi} (1 - (r1/r2) e^{-i phi})
    const double num_arg = pi + phase + std::arg(1.0 - (r1 / r2) * std::polar(1.0, -phase));
    return num_arg - den_arg;
  }
  const double num_arg = std::arg(1.0 - (r2 / r1) * std::polar(1.0, phase));
  return num_arg - den_arg;
}

}  // namespace cavnoise

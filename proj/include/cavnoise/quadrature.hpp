#pragma once

// Transfer of amplitude/phase quadrature fluctuations through cavity reflection.
//
// The incident carrier is the phase reference. The reflected amplitude
// quadrature at analysis frequency v' (in bandwidth units) is
//
//   dp_R = g_p dp_in + i g_q dq_in + g_vp dv_p + i g_vq dv_q
//
// with the coefficients built from r, t at the carrier and at both sidebands.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>

#include "cavnoise/cavity.hpp"
#include "cavnoise/errors.hpp"

namespace cavnoise {

/// Second-order statistics of the incident sidebands at one analysis frequency.
/// Noise powers are in shot-noise units.
struct SidebandState {
  double amplitude_noise = 1.0;     ///< S_p
  double phase_noise = 1.0;         ///< S_q
  double orientation = 0.0;         ///< ellipse angle beta relative to the mean field
  double analysis_frequency = 1.0;  ///< v' = v / cavity bandwidth

  SidebandState with_frequency(double nu) const {
    SidebandState s = *this;
    s.analysis_frequency = nu;
    return s;
  }
};

inline void validate(const SidebandState& s) {
  if (!(s.amplitude_noise > 0.0) || !(s.phase_noise > 0.0) || !std::isfinite(s.amplitude_noise) ||
      !std::isfinite(s.phase_noise)) {
    throw InvalidParameter("quadrature noise powers must be positive and finite");
  }
  // 1e-12 slack absorbs rounding in minimum-uncertainty inputs such as 0.3 * (1/0.3).
  if (s.amplitude_noise * s.phase_noise < 1.0 - 1e-12) {
    throw InvalidParameter("S_p*S_q = " + std::to_string(s.amplitude_noise * s.phase_noise) +
                           " violates the uncertainty bound S_p*S_q >= 1");
  }
  if (!(s.analysis_frequency > 0.0) || !std::isfinite(s.analysis_frequency)) {
    throw InvalidParameter("analysis frequency must be positive and finite");
  }
  if (!std::isfinite(s.orientation)) throw InvalidParameter("ellipse orientation must be finite");
}

/// Principal axes of the noise ellipse (S_x <= S_y).
struct NoiseEllipse {
  double squeezed;       ///< S_x
  double antisqueezed;   ///< S_y
  double orientation;    ///< angle of the S_x axis relative to the mean field
};

inline NoiseEllipse noise_ellipse(const SidebandState& s) {
  validate(s);
  if (s.orientation != 0.0) {
    throw InvalidParameter("only ellipses aligned with the carrier (beta = 0) are supported");
  }
  if (s.amplitude_noise <= s.phase_noise) return {s.amplitude_noise, s.phase_noise, 0.0};
  return {s.phase_noise, s.amplitude_noise, std::numbers::pi / 2};
}

struct TransferCoefficients {
  complex amplitude;          ///< g_p
  complex phase;              ///< g_q
  complex vacuum_amplitude;   ///< g_vp
  complex vacuum_phase;       ///< g_vq

  /// Sum of squared moduli; equals 1 whenever |r|^2 + |t|^2 = 1.
  double total_weight() const {
    return std::norm(amplitude) + std::norm(phase) + std::norm(vacuum_amplitude) +
           std::norm(vacuum_phase);
  }
};

/// Everything the cavity does at one (D, v') point, evaluated once so that the
/// carrier phase branch is shared by all four coefficients.
struct PointResponse {
  ComplexResponse carrier;
  double carrier_phase;  ///< theta_R(D), continuous branch
  ComplexResponse upper_reflection;  ///< r(D + v')
  ComplexResponse lower_reflection;  ///< r(D - v')
  ComplexResponse upper_transmission;
  ComplexResponse lower_transmission;
  TransferCoefficients coefficients;
};

namespace detail {

inline void require_carrier_domain(double detuning, const CavityParams& cavity) {
  if (!cavity.in_domain(detuning)) {
    throw InvalidParameter("detuning " + std::to_string(detuning) +
                           " outside the single-resonance range |D| <= F/2 = " +
                           std::to_string(cavity.half_range()));
  }
}

inline void require_frequency(double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu)) {
    throw InvalidParameter("analysis frequency must be positive and finite");
  }
}

}  // namespace detail

inline PointResponse evaluate_point(double detuning, double nu, const CavityParams& cavity) {
  detail::require_carrier_domain(detuning, cavity);
  detail::require_frequency(nu);
  const ComplexResponse carrier = amplitude_reflectance(detuning, cavity);
  const double theta = reflection_phase(detuning, cavity);
  const ComplexResponse r_up = amplitude_reflectance(detuning + nu, cavity);
  const ComplexResponse r_lo = amplitude_reflectance(detuning - nu, cavity);
  const ComplexResponse t_up = amplitude_transmittance(detuning + nu, cavity);
  const ComplexResponse t_lo = amplitude_transmittance(detuning - nu, cavity);

  const complex lo = std::polar(1.0, -theta);  // e^{-i theta_R}
  const complex a = lo * r_up.value;
  const complex b = std::conj(lo) * std::conj(r_lo.value);
  const complex c = lo * t_up.value;
  const complex d = std::conj(lo) * std::conj(t_lo.value);
  return PointResponse{carrier, theta, r_up, r_lo, t_up, t_lo,
                       TransferCoefficients{0.5 * (a + b), 0.5 * (a - b), 0.5 * (c + d),
                                            0.5 * (c - d)}};
}

inline TransferCoefficients transfer_coefficients(double detuning, double nu,
                                                  const CavityParams& cavity) {
  return evaluate_point(detuning, nu, cavity).coefficients;
}

/// S_R = |g_p|^2 S_p + |g_q|^2 S_q + |g_vp|^2 + |g_vq|^2, for a carrier-aligned ellipse.
inline double reflected_noise(const TransferCoefficients& g, const SidebandState& state) {
  return std::norm(g.amplitude) * state.amplitude_noise + std::norm(g.phase) * state.phase_noise +
         std::norm(g.vacuum_amplitude) + std::norm(g.vacuum_phase);
}

inline double reflected_noise(double detuning, const SidebandState& state,
                              const CavityParams& cavity) {
  validate(state);
  if (state.orientation != 0.0) {
    throw InvalidParameter("reflected spectrum requires a carrier-aligned ellipse (beta = 0)");
  }
  return reflected_noise(transfer_coefficients(detuning, state.analysis_frequency, cavity), state);
}

struct RotationAngle {
  double magnitude;  ///< atan2(|g_q|, |g_p|), in [0, pi/2]
  double signed_angle;  ///< carrier phase minus mean sideband phase
};

inline RotationAngle rotation_angle(const PointResponse& p, double detuning, double nu,
                                    const CavityParams& cavity) {
  const double upper = reflection_phase(detuning + nu, cavity);
  const double lower = reflection_phase(detuning - nu, cavity);
  return RotationAngle{
      std::atan2(std::abs(p.coefficients.phase), std::abs(p.coefficients.amplitude)),
      p.carrier_phase - 0.5 * (upper + lower)};
}

/// Noise-ellipse rotation angle. The signed value vanishes far from resonance
/// and is odd in D; for a lossless cavity |g_p| = |cos| and |g_q| = |sin| of it.
inline RotationAngle rotation_angle(double detuning, double nu, const CavityParams& cavity) {
  return rotation_angle(evaluate_point(detuning, nu, cavity), detuning, nu, cavity);
}

/// Ideal balanced-homodyne spectrum at local-oscillator phase theta_lo.
inline double homodyne_reference(double theta_lo, const SidebandState& state) {
  validate(state);
  const double c = std::cos(theta_lo);
  const double s = std::sin(theta_lo);
  return c * c * state.amplitude_noise + s * s * state.phase_noise;
}

/// (dp, dq) at one analysis frequency.
struct QuadraturePair {
  complex amplitude;
  complex phase;
};

/// Sideband amplitudes da(v) and da*(-v) with the carrier at zero phase.
struct SidebandPair {
  complex upper;  ///< da(v)   = (dp + i dq) / 2
  complex lower;  ///< da*(-v) = (dp - i dq) / 2
};

inline SidebandPair to_sidebands(const QuadraturePair& q) {
  const complex i(0.0, 1.0);
  return {0.5 * (q.amplitude + i * q.phase), 0.5 * (q.amplitude - i * q.phase)};
}

inline QuadraturePair to_quadratures(const SidebandPair& s) {
  const complex i(0.0, 1.0);
  return {s.upper + s.lower, -i * (s.upper - s.lower)};
}

/// Adds phase theta to the upper sideband only. At theta = pi the amplitude
/// quadrature carries the former phase quadrature, up to a leading phase.
inline QuadraturePair apply_sideband_phase(double theta, const QuadraturePair& q) {
  SidebandPair s = to_sidebands(q);
  s.upper *= std::polar(1.0, theta);
  return to_quadratures(s);
}

/// Rotates the carrier by theta, as a local oscillator phase would.
inline QuadraturePair apply_carrier_phase(double theta, const QuadraturePair& q) {
  SidebandPair s = to_sidebands(q);
  s.upper *= std::polar(1.0, -theta);
  s.lower *= std::polar(1.0, theta);
  return to_quadratures(s);
}

}  // namespace cavnoise

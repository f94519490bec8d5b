#pragma once

// Detuning sweeps, zero-derivative detunings of the reflected spectrum, the
// full-conversion threshold in analysis frequency, and impedance-matching scans.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cavnoise/cavity.hpp"
#include "cavnoise/errors.hpp"
#include "cavnoise/quadrature.hpp"

namespace cavnoise {

/// Uniform grid with both end points included exactly.
inline std::vector<double> uniform_grid(double first, double last, std::size_t points) {
  if (points < 2) throw InvalidParameter("a grid needs at least 2 points");
  if (!(first < last) || !std::isfinite(first) || !std::isfinite(last)) {
    throw InvalidParameter("grid range must be finite with min < max");
  }
  std::vector<double> grid(points);
  const double span = last - first;
  const auto n = static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) grid[i] = first + span * (static_cast<double>(i) / n);
  grid.back() = last;
  return grid;
}

struct ExcludedPoint {
  double detuning;
  std::string reason;
};

namespace detail {

inline void require_sweep_range(double lo, double hi, const CavityParams& cavity) {
  if (!(lo < hi)) throw InvalidParameter("sweep range must satisfy min < max");
  if (!cavity.in_domain(lo) || !cavity.in_domain(hi)) {
    throw InvalidParameter("sweep range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                           "] leaves the single-resonance range |D| <= F/2 = " +
                           std::to_string(cavity.half_range()));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Reflectance curve

struct ReflectanceRow {
  double detuning;
  double reflectance;    ///< |r|^2
  double phase;          ///< theta_R, continuous branch
  double transmittance;  ///< |t|^2
};

struct ReflectanceCurve {
  std::vector<ReflectanceRow> rows;
  std::vector<ExcludedPoint> excluded;
};

inline ReflectanceCurve reflectance_curve(double lo, double hi, std::size_t points,
                                          const CavityParams& cavity) {
  detail::require_sweep_range(lo, hi, cavity);
  ReflectanceCurve curve;
  for (double d : uniform_grid(lo, hi, points)) {
    try {
      const auto r = amplitude_reflectance(d, cavity);
      const auto t = amplitude_transmittance(d, cavity);
      curve.rows.push_back({d, r.magnitude_sq, reflection_phase(d, cavity), t.magnitude_sq});
    } catch (const NumericalFailure& e) {
      curve.excluded.push_back({d, e.what()});
    }
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Noise sweep

struct SweepRow {
  double detuning;
  double noise;             ///< S_R
  double signed_angle;
  double angle_magnitude;
  double amplitude_gain;    ///< |g_p|
  double phase_gain;        ///< |g_q|
  double vacuum_amplitude_gain;
  double vacuum_phase_gain;
  double carrier_reflectance;  ///< |r(D)|^2
  double carrier_phase;        ///< theta_R(D)
};

struct NoiseSweep {
  CavityParams cavity;
  SidebandState state;
  std::vector<double> grid;
  std::vector<SweepRow> rows;
  std::vector<ExcludedPoint> excluded;
};

inline SweepRow evaluate_row(double detuning, const SidebandState& state,
                             const CavityParams& cavity) {
  const double nu = state.analysis_frequency;
  const PointResponse p = evaluate_point(detuning, nu, cavity);
  const RotationAngle angle = rotation_angle(p, detuning, nu, cavity);
  const TransferCoefficients& g = p.coefficients;
  return SweepRow{detuning,
                  reflected_noise(g, state),
                  angle.signed_angle,
                  angle.magnitude,
                  std::abs(g.amplitude),
                  std::abs(g.phase),
                  std::abs(g.vacuum_amplitude),
                  std::abs(g.vacuum_phase),
                  p.carrier.magnitude_sq,
                  p.carrier_phase};
}

/// Evaluates the reflected spectrum on a uniform detuning grid. Points where
/// the carrier is extinguished are dropped from `rows` and listed in `excluded`.
inline NoiseSweep detuning_sweep(double lo, double hi, std::size_t points,
                                 const SidebandState& state, const CavityParams& cavity) {
  validate(state);
  if (state.orientation != 0.0) {
    throw InvalidParameter("sweeps require a carrier-aligned ellipse (beta = 0)");
  }
  detail::require_sweep_range(lo, hi, cavity);
  NoiseSweep sweep{cavity, state, uniform_grid(lo, hi, points), {}, {}};
  sweep.rows.reserve(points);
  for (double d : sweep.grid) {
    try {
      sweep.rows.push_back(evaluate_row(d, state, cavity));
    } catch (const NumericalFailure& e) {
      sweep.excluded.push_back({d, e.what()});
    }
  }
  return sweep;
}

/// Indices of rows whose S_R strictly exceeds both neighbours.
inline std::vector<std::size_t> local_maxima(const NoiseSweep& sweep) {
  std::vector<std::size_t> out;
  const auto& rows = sweep.rows;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    if (rows[i].noise > rows[i - 1].noise && rows[i].noise > rows[i + 1].noise) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Zero-derivative detunings

enum class CriticalKind { full_conversion_max, partial_extremum, inflection };

inline std::string_view to_string(CriticalKind kind) {
  switch (kind) {
    case CriticalKind::full_conversion_max: return "full-conversion-max";
    case CriticalKind::inflection: return "inflection";
    case CriticalKind::partial_extremum: break;
  }
  return "partial-extremum";
}

struct CriticalPoint {
  double detuning;
  CriticalKind kind;
  double noise;  ///< S_R at the point
};

struct CriticalSet {
  double analysis_frequency;
  std::vector<CriticalPoint> points;  ///< sorted by detuning
};

struct CriticalSearchOptions {
  double tolerance = 1e-9;        ///< bisection width in D
  std::size_t grid_points = 10000;
  double derivative_step = 1e-6;
  std::optional<double> search_max;  ///< default max(3 v', 5)
  /// Largest |g_p|^2 / (|g_p|^2 + |g_q|^2) still counted as complete conversion.
  double conversion_tolerance = 1e-6;
  /// Roots closer than this are one degenerate root (the coalescence at threshold).
  double coalescence_distance = 1e-3;
};

inline double default_search_max(double nu) { return std::max(3.0 * nu, 5.0); }

inline double noise_derivative(double detuning, const SidebandState& state,
                               const CavityParams& cavity, double step) {
  const double up = reflected_noise(transfer_coefficients(detuning + step, state.analysis_frequency, cavity), state);
  const double dn = reflected_noise(transfer_coefficients(detuning - step, state.analysis_frequency, cavity), state);
  return (up - dn) / (2.0 * step);
}

namespace detail {

struct Root {
  double detuning;
  bool rising_before;  // derivative positive on the left: a maximum
};

// Bisection on the sign of f over [a, b], where f(a) and f(b) differ in sign.
inline double bisect(const std::function<double(double)>& f, double a, double b, double fa,
                     double tol) {
  while (b - a > tol) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

inline bool converts_fully(double detuning, const SidebandState& state, const CavityParams& cavity,
                           const CriticalSearchOptions& opt, bool is_maximum) {
  const bool wants_maximum = state.phase_noise > state.amplitude_noise;
  if (is_maximum != wants_maximum) return false;
  const auto g = transfer_coefficients(detuning, state.analysis_frequency, cavity);
  const double direct = std::norm(g.amplitude);
  const double total = direct + std::norm(g.phase);
  if (!(direct <= opt.conversion_tolerance * total)) return false;
  // Complete conversion means the carrier-to-sideband angle passes through an odd
  // multiple of pi/2 here; a tangential touch is the degenerate threshold case.
  const double w = opt.coalescence_distance;
  const double nu = state.analysis_frequency;
  const double left = std::cos(rotation_angle(detuning - w, nu, cavity).signed_angle);
  const double right = std::cos(rotation_angle(detuning + w, nu, cavity).signed_angle);
  return (left > 0.0) != (right > 0.0);
}

}  // namespace detail

/// All D > 0 where dS_R/dD = 0, found by sign-change bracketing of a central
/// difference on a uniform grid and refined by bisection.
inline CriticalSet find_critical_detunings(const SidebandState& state, const CavityParams& cavity,
                                           const CriticalSearchOptions& opt = {}) {
  validate(state);
  if (state.orientation != 0.0) {
    throw InvalidParameter("critical detunings require a carrier-aligned ellipse (beta = 0)");
  }
  if (state.amplitude_noise == state.phase_noise) {
    throw InvalidParameter("S_p == S_q gives a flat spectrum with no isolated critical points");
  }
  if (!(opt.tolerance > 0.0) || !(opt.derivative_step > 0.0) || opt.grid_points < 2) {
    throw InvalidParameter("critical search needs tolerance > 0, step > 0 and >= 2 grid points");
  }
  const double nu = state.analysis_frequency;
  double upper = opt.search_max.value_or(default_search_max(nu));
  upper = std::min(upper, cavity.half_range() - opt.derivative_step);
  if (!(upper > 0.0)) throw InvalidParameter("critical search range is empty");

  const auto deriv = [&](double d) { return noise_derivative(d, state, cavity, opt.derivative_step); };

  std::vector<detail::Root> roots;
  const auto n = static_cast<double>(opt.grid_points);
  double prev_x = upper / n;
  double prev_f = deriv(prev_x);
  for (std::size_t k = 2; k <= opt.grid_points; ++k) {
    const double x = upper * (static_cast<double>(k) / n);
    const double f = deriv(x);
    if (prev_f == 0.0) {
      roots.push_back({prev_x, f < 0.0});
    } else if ((prev_f > 0.0) != (f > 0.0) && f != 0.0) {
      roots.push_back({detail::bisect(deriv, prev_x, x, prev_f, opt.tolerance), prev_f > 0.0});
    }
    prev_x = x;
    prev_f = f;
  }
  if (roots.empty()) {
    throw NumericalFailure("no zero-derivative detuning found in (0, " + std::to_string(upper) + "]");
  }

  // Collapse clusters of numerically indistinguishable roots.
  struct Cluster {
    double first, last;
    std::size_t count;
    bool rising_before;
    double sum;
  };
  std::vector<Cluster> clusters;
  for (const auto& r : roots) {
    if (!clusters.empty() && r.detuning - clusters.back().last < opt.coalescence_distance) {
      auto& c = clusters.back();
      c.last = r.detuning;
      c.sum += r.detuning;
      ++c.count;
    } else {
      clusters.push_back({r.detuning, r.detuning, 1, r.rising_before, r.detuning});
    }
  }

  CriticalSet set{nu, {}};
  for (const auto& c : clusters) {
    const double d = c.sum / static_cast<double>(c.count);
    CriticalKind kind = CriticalKind::partial_extremum;
    if (c.count == 1 && detail::converts_fully(d, state, cavity, opt, c.rising_before)) {
      kind = CriticalKind::full_conversion_max;
    }
    set.points.push_back({d, kind, reflected_noise(d, state, cavity)});
  }
  // A non-converting extremum flanked by two complete conversions is the
  // turning point between them.
  auto& pts = set.points;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (pts[i].kind == CriticalKind::full_conversion_max) continue;
    const bool left = std::any_of(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(i), [](const CriticalPoint& p) {
      return p.kind == CriticalKind::full_conversion_max;
    });
    const bool right = std::any_of(pts.begin() + static_cast<std::ptrdiff_t>(i) + 1, pts.end(), [](const CriticalPoint& p) {
      return p.kind == CriticalKind::full_conversion_max;
    });
    if (left && right) pts[i].kind = CriticalKind::inflection;
  }
  return set;
}

// ---------------------------------------------------------------------------
// Threshold for complete conversion

struct ThresholdOptions {
  double lower = 0.5;
  double upper = 3.0;
  double frequency_tolerance = 1e-10;
  double angle_tolerance = 1e-8;
  std::size_t coarse_points = 400;
};

/// Largest signed rotation angle over D > 0 at analysis frequency nu, located
/// on a coarse grid and polished by golden-section search.
inline double max_signed_angle(double nu, const CavityParams& cavity, std::size_t coarse_points = 400) {
  const double upper = std::min(default_search_max(nu), cavity.half_range());
  const auto angle = [&](double d) { return rotation_angle(d, nu, cavity).signed_angle; };
  const auto grid = uniform_grid(upper / static_cast<double>(coarse_points), upper, coarse_points);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = angle(grid[i]);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  double a = grid[best == 0 ? 0 : best - 1];
  double b = grid[std::min(best + 1, grid.size() - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = angle(c);
  double fd = angle(d);
  while (b - a > 1e-12) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = angle(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = angle(d);
    }
  }
  return std::max({best_value, fc, fd});
}

/// Smallest analysis frequency at which the rotation reaches pi/2 somewhere in
/// detuning. About sqrt(2) for a lossless high-finesse cavity.
inline double conversion_threshold(const CavityParams& cavity, const ThresholdOptions& opt = {}) {
  const double target = std::numbers::pi / 2 - opt.angle_tolerance;
  const auto reaches = [&](double nu) { return max_signed_angle(nu, cavity, opt.coarse_points) >= target; };
  double lo = opt.lower;
  double hi = opt.upper;
  if (!reaches(hi)) {
    throw NumericalFailure("rotation never reaches pi/2 for v' <= " + std::to_string(hi) +
                           "; threshold bracket is invalid");
  }
  if (reaches(lo)) {
    throw NumericalFailure("rotation already reaches pi/2 at v' = " + std::to_string(lo) +
                           "; threshold bracket is invalid");
  }
  while (hi - lo > opt.frequency_tolerance) {
    const double mid = 0.5 * (lo + hi);
    (reaches(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

// ---------------------------------------------------------------------------
// Scans

struct BifurcationSample {
  double analysis_frequency;
  std::optional<CriticalSet> critical;
  std::string error;  ///< set when the search failed at this frequency

  double carrier_asymptote() const { return 0.5; }
  double sideband_asymptote() const { return analysis_frequency; }
};

/// Critical detunings across a range of analysis frequencies. Failures at
/// individual frequencies are recorded and the scan continues.
inline std::vector<BifurcationSample> bifurcation_scan(double nu_min, double nu_max, std::size_t steps,
                                                       const SidebandState& state,
                                                       const CavityParams& cavity,
                                                       const CriticalSearchOptions& opt = {}) {
  if (!(nu_min > 0.0) || !(nu_max <= 20.0) || !(nu_min <= nu_max)) {
    throw InvalidParameter("analysis frequency range must lie within (0, 20] with min <= max");
  }
  if (steps < 1) throw InvalidParameter("bifurcation scan needs at least one step");
  std::vector<double> nus;
  if (steps == 1 || nu_min == nu_max) {
    nus.push_back(nu_min);
  } else {
    nus = uniform_grid(nu_min, nu_max, steps);
  }
  std::vector<BifurcationSample> out;
  out.reserve(nus.size());
  for (double nu : nus) {
    BifurcationSample sample{nu, std::nullopt, {}};
    try {
      sample.critical = find_critical_detunings(state.with_frequency(nu), cavity, opt);
    } catch (const NumericalFailure& e) {
      sample.error = e.what();
    }
    out.push_back(std::move(sample));
  }
  return out;
}

struct MatchingRow {
  double output_loss;  ///< T2
  std::optional<double> smallest_conversion;
  std::string status;  ///< "ok", "no-full-conversion" or the failure message
};

/// For fixed R1 and v', the smallest fully converting detuning as the output
/// mirror loss T2 varies. Rows are sorted by T2.
inline std::vector<MatchingRow> matching_study(const SidebandState& state, double coupling_reflectivity,
                                               std::vector<double> losses,
                                               ResponseModel model = ResponseModel::exact_airy,
                                               const CriticalSearchOptions& opt = {}) {
  std::sort(losses.begin(), losses.end());
  std::vector<MatchingRow> rows;
  rows.reserve(losses.size());
  for (double t2 : losses) {
    MatchingRow row{t2, std::nullopt, "ok"};
    try {
      const CavityParams cavity(MirrorPair::from_loss(coupling_reflectivity, t2), model);
      const CriticalSet set = find_critical_detunings(state, cavity, opt);
      for (const auto& p : set.points) {
        if (p.kind == CriticalKind::full_conversion_max) {
          row.smallest_conversion = p.detuning;
          break;
        }
      }
      if (!row.smallest_conversion) row.status = "no-full-conversion";
    } catch (const NumericalFailure& e) {
      row.status = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace cavnoise

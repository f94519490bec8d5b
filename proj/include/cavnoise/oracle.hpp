#pragma once

// Monte Carlo estimate of the reflected amplitude-quadrature spectrum.
//
// Each draw is one analysis-frequency bin: Gaussian sideband amplitudes for the
// incident beam and for the vacuum port are pushed through the four-term
// reflection sum (carrier-referenced r and t at both sidebands), and the
// spectrum is the sample mean of |dp_R|^2. The transfer coefficients
// g_p ... g_vq are never formed here, so agreement with reflected_noise() is a
// genuine cross-check.
//
// Draws are grouped in fixed blocks of kOracleBlockSize. Block b is generated
// from its own engine seeded by (seed, stream, b) and blocks are merged in
// index order, so the estimate does not depend on how blocks are spread over
// threads.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <thread>
#include <vector>

#include "cavnoise/cavity.hpp"
#include "cavnoise/errors.hpp"
#include "cavnoise/quadrature.hpp"

namespace cavnoise {

inline constexpr std::size_t kOracleBlockSize = 1024;

struct SamplerConfig {
  std::uint64_t seed = 42;
  std::uint64_t stream = 0;  ///< independent sub-sequence, e.g. one per detuning
  std::size_t samples = 100000;
  SidebandState state;
  double detuning = 0.0;
  CavityParams cavity;
  unsigned partitions = 1;  ///< worker threads; does not change the result
};

struct SpectrumEstimate {
  double mean;
  double standard_error;
  std::size_t samples;
};

/// Draws one bin of sideband amplitudes: dp and dq are complex Gaussians whose
/// real and imaginary parts have variance S_p/2 and S_q/2, so <|dp|^2> = S_p
/// and <|dq|^2> = S_q, uncorrelated (beta = 0).
template <class Engine>
SidebandPair sample_sideband_pair(const SidebandState& state, Engine& rng) {
  std::normal_distribution<double> amp(0.0, std::sqrt(0.5 * state.amplitude_noise));
  std::normal_distribution<double> pha(0.0, std::sqrt(0.5 * state.phase_noise));
  const double pr = amp(rng);
  const double pi = amp(rng);
  const double qr = pha(rng);
  const double qi = pha(rng);
  return to_sidebands(QuadraturePair{{pr, pi}, {qr, qi}});
}

/// Carrier-referenced reflection and vacuum weights for the four sideband terms.
struct ReflectionKernel {
  complex upper_reflection;   ///< e^{-i theta_R(D)} r(D + v')
  complex lower_reflection;   ///< e^{+i theta_R(D)} r*(D - v')
  complex upper_vacuum;       ///< e^{-i theta_R(D)} t(D + v')
  complex lower_vacuum;       ///< e^{+i theta_R(D)} t*(D - v')

  complex apply(const SidebandPair& input, const SidebandPair& vacuum) const {
    return upper_reflection * input.upper + lower_reflection * input.lower +
           upper_vacuum * vacuum.upper + lower_vacuum * vacuum.lower;
  }
};

inline ReflectionKernel reflection_kernel(double detuning, double nu, const CavityParams& cavity) {
  if (!cavity.in_domain(detuning)) {
    throw InvalidParameter("detuning outside the single-resonance range |D| <= F/2");
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) throw InvalidParameter("analysis frequency must be positive");
  const ComplexResponse carrier = amplitude_reflectance(detuning, cavity);
  if (std::sqrt(carrier.magnitude_sq) <= kCarrierFloor) {
    throw CarrierExtinguished("reflected carrier vanishes; no local oscillator");
  }
  const complex lo = std::conj(carrier.value) / std::abs(carrier.value);  // e^{-i theta_R}
  return ReflectionKernel{
      lo * amplitude_reflectance(detuning + nu, cavity).value,
      std::conj(lo) * std::conj(amplitude_reflectance(detuning - nu, cavity).value),
      lo * amplitude_transmittance(detuning + nu, cavity).value,
      std::conj(lo) * std::conj(amplitude_transmittance(detuning - nu, cavity).value)};
}

/// Reflected amplitude-quadrature fluctuation for one draw.
inline complex propagate_sample(const SidebandPair& input, const SidebandPair& vacuum,
                                double detuning, double nu, const CavityParams& cavity) {
  return reflection_kernel(detuning, nu, cavity).apply(input, vacuum);
}

namespace detail {

struct RunningMoments {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const RunningMoments& o) {
    if (o.count == 0) return;
    const auto n = static_cast<double>(count + o.count);
    const double delta = o.mean - mean;
    mean += delta * static_cast<double>(o.count) / n;
    m2 += o.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(o.count) / n;
    count += o.count;
  }
};

inline std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t stream, std::uint64_t block) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(block), hi(block)};
  return std::mt19937_64(seq);
}

inline RunningMoments run_block(const ReflectionKernel& kernel, const SidebandState& state,
                                std::uint64_t seed, std::uint64_t stream, std::uint64_t block,
                                std::size_t count) {
  static const SidebandState vacuum_state{1.0, 1.0, 0.0, 1.0};
  auto rng = block_engine(seed, stream, block);
  RunningMoments m;
  for (std::size_t i = 0; i < count; ++i) {
    const SidebandPair input = sample_sideband_pair(state, rng);
    const SidebandPair vacuum = sample_sideband_pair(vacuum_state, rng);
    m.add(std::norm(kernel.apply(input, vacuum)));
  }
  return m;
}

}  // namespace detail

inline SpectrumEstimate estimate_noise(const SamplerConfig& config) {
  validate(config.state);
  if (config.state.orientation != 0.0) {
    throw InvalidParameter("the oracle samples carrier-aligned ellipses only (beta = 0)");
  }
  if (config.samples < 100) throw InvalidParameter("the oracle needs at least 100 samples");
  if (config.partitions == 0) throw InvalidParameter("partitions must be at least 1");

  const ReflectionKernel kernel =
      reflection_kernel(config.detuning, config.state.analysis_frequency, config.cavity);
  const std::size_t blocks = (config.samples + kOracleBlockSize - 1) / kOracleBlockSize;
  std::vector<detail::RunningMoments> per_block(blocks);

  const auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t b = first; b < blocks; b += stride) {
      const std::size_t count = std::min(kOracleBlockSize, config.samples - b * kOracleBlockSize);
      per_block[b] = detail::run_block(kernel, config.state, config.seed, config.stream, b, count);
    }
  };
  const std::size_t workers = std::min<std::size_t>(config.partitions, blocks);
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work, w, workers);
  }

  detail::RunningMoments total;
  for (const auto& m : per_block) total.merge(m);
  const auto n = static_cast<double>(total.count);
  const double variance = total.m2 / (n - 1.0);
  return SpectrumEstimate{total.mean, std::sqrt(variance / n), total.count};
}

}  // namespace cavnoise

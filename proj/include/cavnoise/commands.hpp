#pragma once

// Dataset-producing commands behind the cavnoise tool. Each takes a validated
// RunConfig and returns the dataset plus the process exit code it implies.

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "cavnoise/analysis.hpp"
#include "cavnoise/cavity.hpp"
#include "cavnoise/dataset.hpp"
#include "cavnoise/errors.hpp"
#include "cavnoise/oracle.hpp"
#include "cavnoise/quadrature.hpp"
#include "cavnoise/run_config.hpp"

namespace cavnoise {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int invalid_parameters = 2;
inline constexpr int numerical_failure = 3;
inline constexpr int oracle_mismatch = 4;
}  // namespace exit_code

struct CommandResult {
  Dataset data;
  int exit_code = exit_code::ok;
  std::vector<std::string> warnings;  ///< also echoed to stderr by the tool
};

namespace detail {

inline Dataset start_dataset(const RunConfig& cfg, std::vector<std::string> columns) {
  return Dataset{cfg.command, cfg.metadata(), {}, std::move(columns), {}};
}

inline void note_excluded(Dataset& data, const std::vector<ExcludedPoint>& excluded) {
  for (const auto& e : excluded) {
    data.notes.push_back("excluded: delta " + format_value(e.detuning) + " (" + e.reason + ")");
  }
}

}  // namespace detail

inline CommandResult cmd_reflectance(const RunConfig& cfg) {
  const CavityParams cavity = cfg.cavity();
  const ReflectanceCurve curve = reflectance_curve(cfg.delta_min, cfg.delta_max, cfg.points, cavity);
  CommandResult res{detail::start_dataset(cfg, {"delta", "r_abs2", "theta_r", "t_abs2"}), exit_code::ok, {}};
  for (const auto& r : curve.rows) {
    res.data.rows.push_back({r.detuning, r.reflectance, r.phase, r.transmittance});
  }
  detail::note_excluded(res.data, curve.excluded);
  return res;
}

inline CommandResult cmd_sweep(const RunConfig& cfg) {
  const NoiseSweep sweep =
      detuning_sweep(cfg.delta_min, cfg.delta_max, cfg.points, cfg.state(), cfg.cavity());
  CommandResult res{detail::start_dataset(
      cfg, {"delta", "s_r", "theta_signed", "g_p_abs", "g_q_abs", "g_vp_abs", "g_vq_abs"}), exit_code::ok, {}};
  for (const auto& r : sweep.rows) {
    res.data.rows.push_back({r.detuning, r.noise, r.signed_angle, r.amplitude_gain, r.phase_gain,
                             r.vacuum_amplitude_gain, r.vacuum_phase_gain});
  }
  detail::note_excluded(res.data, sweep.excluded);
  return res;
}

inline CommandResult cmd_rotation(const RunConfig& cfg) {
  const NoiseSweep sweep =
      detuning_sweep(cfg.delta_min, cfg.delta_max, cfg.points, cfg.state(), cfg.cavity());
  CommandResult res{detail::start_dataset(cfg, {"delta", "theta_signed", "theta_magnitude"}), exit_code::ok, {}};
  for (const auto& r : sweep.rows) {
    res.data.rows.push_back({r.detuning, r.signed_angle, r.angle_magnitude});
  }
  detail::note_excluded(res.data, sweep.excluded);
  return res;
}

inline CommandResult cmd_critical(const RunConfig& cfg) {
  const CriticalSet set = find_critical_detunings(cfg.state(), cfg.cavity());
  CommandResult res{detail::start_dataset(cfg, {"nu", "delta", "kind", "s_r"}), exit_code::ok, {}};
  for (const auto& p : set.points) {
    res.data.rows.push_back({set.analysis_frequency, p.detuning, std::string(to_string(p.kind)), p.noise});
  }
  return res;
}

inline CommandResult cmd_bifurcation(const RunConfig& cfg) {
  const auto scan = bifurcation_scan(cfg.nu_min, cfg.nu_max, cfg.steps, cfg.state(), cfg.cavity());
  CommandResult res{detail::start_dataset(
      cfg, {"nu", "delta", "kind", "branches", "asymptote_carrier", "asymptote_sideband"}), exit_code::ok, {}};
  for (const auto& sample : scan) {
    if (!sample.critical) {
      res.data.notes.push_back("failed: nu " + format_value(sample.analysis_frequency) + " (" +
                               sample.error + ")");
      continue;
    }
    const auto branches = static_cast<double>(sample.critical->points.size());
    for (const auto& p : sample.critical->points) {
      res.data.rows.push_back({sample.analysis_frequency, p.detuning, std::string(to_string(p.kind)),
                               branches, sample.carrier_asymptote(), sample.sideband_asymptote()});
    }
  }
  return res;
}

inline CommandResult cmd_matching(const RunConfig& cfg) {
  const auto rows = matching_study(cfg.state(), cfg.r1, cfg.t2_list, cfg.model);
  CommandResult res{detail::start_dataset(cfg, {"t2", "delta_conversion", "status"}), exit_code::ok, {}};
  for (const auto& r : rows) {
    res.data.rows.push_back({r.output_loss,
                             r.smallest_conversion ? Cell{*r.smallest_conversion} : Cell{std::string("none")},
                             r.status});
  }
  return res;
}

/// Monte Carlo estimate against the analytic spectrum at each grid detuning.
/// |z| > 5 anywhere is a hard mismatch; 3 < |z| <= 5 is reported as a warning.
inline CommandResult cmd_oracle(const RunConfig& cfg, unsigned partitions = 1) {
  const CavityParams cavity = cfg.cavity();
  const SidebandState state = cfg.state();
  validate(state);
  if (cfg.samples < 100) throw InvalidParameter("the oracle needs at least 100 samples");
  if (cfg.points < 2) throw InvalidParameter("a grid needs at least 2 points");
  if (!cavity.in_domain(cfg.delta_min) || !cavity.in_domain(cfg.delta_max)) {
    throw InvalidParameter("oracle detunings leave the single-resonance range |D| <= F/2");
  }
  const auto grid = uniform_grid(cfg.delta_min, cfg.delta_max, cfg.points);

  CommandResult res{detail::start_dataset(cfg, {"delta", "s_r_analytic", "s_r_mc", "stderr", "z_score"}), exit_code::ok, {}};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double d = grid[i];
    try {
      const double analytic = reflected_noise(d, state, cavity);
      const SpectrumEstimate est = estimate_noise(
          SamplerConfig{cfg.seed, i, cfg.samples, state, d, cavity, partitions});
      const double z = (est.mean - analytic) / est.standard_error;
      res.data.rows.push_back({d, analytic, est.mean, est.standard_error, z});
      if (std::abs(z) > 5.0) {
        res.exit_code = exit_code::oracle_mismatch;
        res.warnings.push_back("mismatch: delta " + format_value(d) + " z " + format_value(z));
      } else if (std::abs(z) > 3.0) {
        res.warnings.push_back("warning: delta " + format_value(d) + " z " + format_value(z));
      }
    } catch (const CarrierExtinguished& e) {
      res.data.notes.push_back("excluded: delta " + format_value(d) + " (" + e.what() + ")");
    }
  }
  for (const auto& w : res.warnings) res.data.notes.push_back(w);
  return res;
}

inline const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"reflectance", "sweep",  "rotation", "critical",
                                              "bifurcation", "oracle", "matching"};
  return names;
}

inline CommandResult run_command(const RunConfig& cfg, unsigned partitions = 1) {
  const std::string_view c = cfg.command;
  if (c == "reflectance") return cmd_reflectance(cfg);
  if (c == "sweep") return cmd_sweep(cfg);
  if (c == "rotation") return cmd_rotation(cfg);
  if (c == "critical") return cmd_critical(cfg);
  if (c == "bifurcation") return cmd_bifurcation(cfg);
  if (c == "oracle") return cmd_oracle(cfg, partitions);
  if (c == "matching") return cmd_matching(cfg);
  throw InvalidParameter("unknown command '" + cfg.command + "'");
}

}  // namespace cavnoise

// cavnoise: datasets for phase-to-amplitude noise conversion by an optical cavity.
//
//   cavnoise sweep --fig7 --out fig7.csv
//   cavnoise oracle --sp 1 --sq 1 --samples 100000 --format json
//   cavnoise sweep --config fig7.csv      # regenerate from an embedded header

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "cavnoise/commands.hpp"
#include "cavnoise/run_config.hpp"

namespace {

struct CommandLine {
  std::map<std::string, std::string> values;
  std::string config_path;
  bool fig3 = false, fig6 = false, fig7 = false, fig8 = false;
  unsigned partitions = 0;
};

void add_run_options(CLI::App* sub, CommandLine& cl) {
  const std::pair<const char*, const char*> opts[] = {
      {"r1", "coupling mirror intensity reflectivity R1"},
      {"t2", "output mirror transmission (loss) T2 = 1 - R2"},
      {"r2", "output mirror intensity reflectivity (alternative to --t2)"},
      {"model", "cavity response model: exact-airy | lorentzian"},
      {"sp", "amplitude quadrature noise S_p (shot noise = 1)"},
      {"sq", "phase quadrature noise S_q (shot noise = 1)"},
      {"nu", "analysis frequency in cavity bandwidths"},
      {"delta-min", "first detuning of the grid (bandwidths)"},
      {"delta-max", "last detuning of the grid (bandwidths)"},
      {"points", "number of grid points"},
      {"nu-min", "first analysis frequency of a scan"},
      {"nu-max", "last analysis frequency of a scan"},
      {"steps", "number of analysis frequencies in a scan"},
      {"t2-list", "comma-separated T2 values for the matching study"},
      {"seed", "oracle random seed"},
      {"samples", "oracle samples per detuning"},
      {"format", "csv | json"},
      {"out", "output path (default: standard output)"},
  };
  for (const auto& [name, help] : opts) {
    sub->add_option(std::string("--") + name, cl.values[name], help);
  }
  sub->add_option("--config", cl.config_path, "flat key=value file or a dataset written by cavnoise");
  sub->add_option("--partitions", cl.partitions, "oracle worker threads (result does not depend on it)");
  sub->add_flag("--fig3", cl.fig3, "reflectance of R1=0.95, T2=0.003");
  sub->add_flag("--fig6", cl.fig6, "rotation angle, lossless, v'=6");
  sub->add_flag("--fig7", cl.fig7, "noise sweep, R1=0.95, T2=0.003, v'=6, S_p=0.5, S_q=2");
  sub->add_flag("--fig8", cl.fig8, "zero-derivative detunings, lossless R1=0.999, v' in [0.2, 10]");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase-to-amplitude noise conversion by an optical cavity"};
  app.require_subcommand(1);
  CommandLine cl;
  for (const auto& name : cavnoise::command_names()) {
    add_run_options(app.add_subcommand(name, "write the " + name + " dataset"), cl);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cavnoise::exit_code::invalid_parameters;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  cavnoise::RunConfig cfg;
  try {
    cavnoise::apply_command_defaults(cfg, command);
    if (cl.fig3) cavnoise::apply_preset(cfg, "fig3");
    if (cl.fig6) cavnoise::apply_preset(cfg, "fig6");
    if (cl.fig7) cavnoise::apply_preset(cfg, "fig7");
    if (cl.fig8) cavnoise::apply_preset(cfg, "fig8");
    if (!cl.config_path.empty()) cavnoise::apply_config_file(cfg, cl.config_path);
    for (const auto& [key, value] : cl.values) {
      if (sub->count("--" + key) > 0) cfg.set(key, value);
    }
    // Validate everything the command will touch before computing anything.
    cavnoise::validate(cfg.state());
    (void)cfg.cavity();
  } catch (const cavnoise::InvalidParameter& e) {
    std::cerr << "cavnoise: invalid parameters: " << e.what() << '\n';
    return cavnoise::exit_code::invalid_parameters;
  } catch (const cavnoise::NumericalFailure& e) {
    std::cerr << "cavnoise: " << e.what() << '\n';
    return cavnoise::exit_code::invalid_parameters;
  }

  const unsigned partitions =
      cl.partitions > 0 ? cl.partitions : std::max(1u, std::thread::hardware_concurrency());
  cavnoise::CommandResult result;
  try {
    result = cavnoise::run_command(cfg, partitions);
  } catch (const cavnoise::InvalidParameter& e) {
    std::cerr << "cavnoise: invalid parameters: " << e.what() << '\n';
    return cavnoise::exit_code::invalid_parameters;
  } catch (const cavnoise::NumericalFailure& e) {
    std::cerr << "cavnoise: numerical failure: " << e.what() << '\n';
    return cavnoise::exit_code::numerical_failure;
  }

  const auto write = [&](std::ostream& os) {
    if (cfg.format == cavnoise::OutputFormat::json) cavnoise::write_json(os, result.data);
    else cavnoise::write_csv(os, result.data);
  };
  if (cfg.out.empty()) {
    write(std::cout);
  } else {
    std::ofstream file(cfg.out, std::ios::binary);
    if (!file) {
      std::cerr << "cavnoise: cannot write '" << cfg.out << "'\n";
      return cavnoise::exit_code::invalid_parameters;
    }
    write(file);
  }
  for (const auto& w : result.warnings) std::cerr << "cavnoise: " << w << '\n';
  return result.exit_code;
}

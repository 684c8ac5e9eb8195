// sicspin command-line front end.
//
// Subcommands:
//   simulate     run an experiment from a key=value config, write a CSV trace
//   fit          fit a named model to a trace, emit a report (and SVG)
//   thermometry  invert a Debye D(T) calibration to a temperature
//   report       fit all applicable temperature models to a series
//
// Exit codes: 0 success, 2 validation error, 3 fit failure (non-convergence,
// degenerate fit, unusable heuristic), 4 I/O error.

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "sicspin/sicspin.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitFitFailure = 3;
constexpr int kExitIo = 4;

std::pair<double, double> parse_window(const std::string& text, const std::string& flag) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos)
    throw sicspin::ValidationError(flag + ": expected LO:HI, got '" + text + "'");
  try {
    return {std::stod(text.substr(0, colon)), std::stod(text.substr(colon + 1))};
  } catch (const std::exception&) {
    throw sicspin::ValidationError(flag + ": malformed number in '" + text + "'");
  }
}

sicspin::DebyeDParams parse_coeffs(const std::string& text) {
  if (text == "sample-a") return sicspin::calib::debye_sample_a;
  if (text == "sample-b") return sicspin::calib::debye_sample_b;
  std::vector<double> v;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    try {
      v.push_back(std::stod(text.substr(start, comma - start)));
    } catch (const std::exception&) {
      throw sicspin::ValidationError("--coeffs: malformed number in '" + text + "'");
    }
    start = comma + 1;
    if (comma == text.size()) break;
  }
  if (v.size() != 3)
    throw sicspin::ValidationError(
        "--coeffs: expected 'd_floor_mhz,amplitude_mhz,curvature_per_k2' or a sample preset "
        "(sample-a, sample-b)");
  return {v[0], v[1], v[2]};
}

std::map<std::string, double> parse_guesses(const std::vector<std::string>& entries) {
  std::map<std::string, double> out;
  for (const auto& e : entries) {
    const std::size_t eq = e.find('=');
    if (eq == std::string::npos)
      throw sicspin::ValidationError("--guess: expected name=value, got '" + e + "'");
    try {
      out[e.substr(0, eq)] = std::stod(e.substr(eq + 1));
    } catch (const std::exception&) {
      throw sicspin::ValidationError("--guess: malformed number in '" + e + "'");
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sicspin: spin-1 divacancy ODMR/pulse-sequence simulator, fitter and thermometer"};
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand("simulate", "simulate an experiment from a config file");
  std::string sim_config;
  std::optional<std::uint64_t> sim_seed;
  std::optional<std::string> sim_out;
  sim->add_option("--config", sim_config, "key=value config file")->required();
  sim->add_option("--seed", sim_seed, "override the config seed");
  sim->add_option("--out", sim_out, "override the config output path");

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a trace file");
  sicspin::FitCommandOptions fit_options;
  std::vector<std::string> fit_guesses;
  std::optional<std::string> fit_out;
  fit_cmd->add_option("trace", fit_options.trace_path, "input trace CSV")->required();
  fit_cmd
      ->add_option("--model", fit_options.model,
                   "lorentzian2|ramsey|eseem|t1|debye|varshni|poly5|t1-linear|t1-raman")
      ->required();
  fit_cmd->add_option("--guess", fit_guesses, "initial-guess override name=value (repeatable)");
  fit_cmd->add_option("--b-tesla", fit_options.b_tesla,
                      "static field used to pin the eseem Larmor frequencies");
  fit_cmd->add_flag("--free-larmor", fit_options.free_larmor,
                    "fit the eseem f1/f2 instead of pinning them");
  fit_cmd->add_option("--raman-d", fit_options.raman_dimension,
                      "sample dimension for t1-raman (1..3, default 2)");
  fit_cmd->add_option("--out", fit_out, "write the fit report to this path");
  fit_cmd->add_flag("--svg", fit_options.svg, "also write an overlay plot next to --out");

  // thermometry
  auto* thermo = app.add_subcommand("thermometry", "temperature from a measured D value");
  std::string thermo_coeffs = "sample-a";
  double thermo_d = 0.0;
  std::string thermo_window = "5:300";
  thermo->add_option("--coeffs", thermo_coeffs,
                     "Debye coefficients 'd_floor,amplitude,curvature' or sample-a/sample-b");
  thermo->add_option("--d-mhz", thermo_d, "measured zero-field splitting in MHz")->required();
  thermo->add_option("--t-window", thermo_window, "search window LO:HI in kelvin");

  // report
  auto* rep = app.add_subcommand("report", "temperature-series model comparison report");
  sicspin::ReportOptions rep_options;
  std::string rep_linear = "5:200";
  std::string rep_raman = "250:300";
  rep->add_option("series", rep_options.series_path, "temperature series CSV")->required();
  rep->add_option("--out", rep_options.out_prefix, "output path prefix")->required();
  rep->add_option("--t-window", rep_linear, "linear-regime window LO:HI (default 5:200)");
  rep->add_option("--t-window-raman", rep_raman, "Raman-regime window LO:HI (default 250:300)");
  rep->add_option("--raman-d", rep_options.raman_dimension, "sample dimension (1..3, default 2)");
  rep->add_flag("--svg", rep_options.svg, "also write SVG plots");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success) ? kExitOk
                                                                          : kExitValidation;
  }

  try {
    if (sim->parsed()) {
      const auto cfg = sicspin::Config::from_file(sim_config);
      const auto outcome = sicspin::cmd_simulate(cfg, sim_seed, sim_out);
      std::cout << "wrote " << outcome.out_path << " (" << outcome.trace.size() << " points)\n";
      return kExitOk;
    }
    if (fit_cmd->parsed()) {
      fit_options.guess_overrides = parse_guesses(fit_guesses);
      fit_options.out_path = fit_out;
      const auto report = sicspin::cmd_fit(fit_options);
      std::cout << report.to_text();
      if (!report.result.converged) {
        std::cerr << "fit did not converge within the iteration budget\n";
        return kExitFitFailure;
      }
      return kExitOk;
    }
    if (thermo->parsed()) {
      sicspin::ThermometryOptions options;
      options.coefficients = parse_coeffs(thermo_coeffs);
      options.d_value_mhz = thermo_d;
      std::tie(options.t_lo_k, options.t_hi_k) = parse_window(thermo_window, "--t-window");
      const auto result = sicspin::cmd_thermometry(options);
      std::cout << "temperature_k = " << sicspin::format_g17(result.temperature_k) << "\n";
      std::cout << "residual_mhz = " << sicspin::format_g17(result.residual_mhz) << "\n";
      return kExitOk;
    }
    if (rep->parsed()) {
      std::tie(rep_options.linear_window_lo_k, rep_options.linear_window_hi_k) =
          parse_window(rep_linear, "--t-window");
      std::tie(rep_options.raman_window_lo_k, rep_options.raman_window_hi_k) =
          parse_window(rep_raman, "--t-window-raman");
      const auto outcome = sicspin::cmd_report(rep_options);
      std::cout << outcome.text;
      std::cout << "wrote " << outcome.report_path << "\n";
      return kExitOk;
    }
  } catch (const sicspin::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const sicspin::DegenerateFitError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return kExitFitFailure;
  } catch (const sicspin::HeuristicError& e) {
    std::cerr << "fit error: " << e.what() << "\n";
    return kExitFitFailure;
  } catch (const sicspin::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}

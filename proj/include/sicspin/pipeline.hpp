#pragma once

#include <cmath>
#include <cstdint>
#include <ctime>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sicspin/config.hpp"
#include "sicspin/constants.hpp"
#include "sicspin/dynamics.hpp"
#include "sicspin/errors.hpp"
#include "sicspin/fit_models.hpp"
#include "sicspin/fitting.hpp"
#include "sicspin/svg_plot.hpp"
#include "sicspin/temperature_models.hpp"
#include "sicspin/trace_io.hpp"

namespace sicspin {

// Command back ends for the CLI: experiment simulation from a config file,
// single-trace fitting with report/plot emission, thermometry inversion, and
// temperature-series reports.
//
// Report files put volatile metadata (timestamps) in '#' comment lines only;
// the data section is deterministic for identical inputs and seeds.

namespace detail {

inline std::string utc_timestamp() {
  std::time_t t = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&t, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

inline std::vector<double> linspace(double start, double stop, std::int64_t points,
                                    const std::string& what) {
  if (points < 2) throw ValidationError(what + ": needs at least 2 grid points");
  if (!(stop > start)) throw ValidationError(what + ": stop must exceed start");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (std::int64_t i = 0; i < points; ++i)
    out[static_cast<std::size_t>(i)] =
        start + (stop - start) * static_cast<double>(i) / static_cast<double>(points - 1);
  return out;
}

inline void add_readout_noise(SignalTrace& trace, double sigma, std::uint64_t seed) {
  if (sigma <= 0.0) return;
  constexpr std::uint64_t kReadoutStream = 0xbead0u;
  for (std::size_t i = 0; i < trace.y.size(); ++i)
    trace.y[i] += sigma * rng::gaussian(seed, kReadoutStream, i);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// simulate

struct SimulateOutcome {
  std::string out_path;
  SignalTrace trace;
};

// Runs the experiment described by the config and writes the trace with a
// provenance header. Identical configs and seeds produce byte-identical
// files.
inline SimulateOutcome cmd_simulate(const Config& cfg,
                                    std::optional<std::uint64_t> seed_override = std::nullopt,
                                    std::optional<std::string> out_override = std::nullopt) {
  const std::string experiment = cfg.get_string("experiment");
  // read both keys even when overridden so require_all_consumed stays quiet
  const std::string cfg_out = cfg.get_string("out", "");
  const std::uint64_t cfg_seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const std::string out_path = out_override ? *out_override : cfg_out;
  if (out_path.empty())
    throw ValidationError(cfg.source() + ": missing required key 'out' (or pass --out)");
  const std::uint64_t seed = seed_override ? *seed_override : cfg_seed;

  const double d_mhz = cfg.get_double("d_mhz");
  const double e_mhz = cfg.get_double("e_mhz", 0.0);
  const double g_factor = cfg.get_double("g_factor", 2.0);
  const double b_tesla = cfg.get_double("b_tesla", 0.0);
  const SpinSystemParams spin(d_mhz, e_mhz, g_factor, b_tesla);

  std::vector<std::string> prov;
  prov.push_back("sicspin trace v1");
  prov.push_back("experiment = " + experiment);
  prov.push_back("d_mhz = " + format_g17(d_mhz));
  prov.push_back("e_mhz = " + format_g17(e_mhz));
  prov.push_back("g_factor = " + format_g17(g_factor));
  prov.push_back("b_tesla = " + format_g17(b_tesla));
  prov.push_back("seed = " + std::to_string(seed));
  for (const auto& note : spin.regime_notes()) prov.push_back("note = " + note);

  const double readout_noise = cfg.get_double("readout_noise_sigma", 0.0);
  SignalTrace trace;

  if (experiment == "odmr") {
    const auto freqs = detail::linspace(cfg.get_double("freq_start_mhz"),
                                        cfg.get_double("freq_stop_mhz"),
                                        cfg.get_int("freq_points"), "config key freq_points");
    const double linewidth = cfg.get_double("linewidth_mhz", 10.0);
    const double c1 = cfg.get_double("contrast1", -1.0);
    const double c2 = cfg.get_double("contrast2", -0.8);
    trace = simulate_odmr(freqs, spin, linewidth, {c1, c2});
    const auto [w1, w2] = transition_frequencies(spin);
    prov.push_back("linewidth_mhz = " + format_g17(linewidth));
    prov.push_back("contrast1 = " + format_g17(c1));
    prov.push_back("contrast2 = " + format_g17(c2));
    prov.push_back("omega1_mhz = " + format_g17(w1));
    prov.push_back("omega2_mhz = " + format_g17(w2));
  } else if (experiment == "ramsey" || experiment == "echo") {
    const auto taus = detail::linspace(cfg.get_double("tau_start_us", 0.0),
                                       cfg.get_double("tau_stop_us"), cfg.get_int("tau_points"),
                                       "config key tau_points");
    const double omega_r = cfg.get_double("omega_r_rad_per_us", 1000.0);
    NoiseChannels noise;
    noise.rng_seed = seed;
    noise.mc_shots = cfg.get_int("mc_shots", 10000);
    noise.t1_us = cfg.get_double("t1_us", std::numeric_limits<double>::infinity());
    noise.t2_pure_us = cfg.get_double("t2_us", std::numeric_limits<double>::infinity());
    if (cfg.has("t2_star_us") && cfg.has("sigma_mhz"))
      throw ValidationError(cfg.source() +
                            ": keys t2_star_us and sigma_mhz are mutually exclusive");
    if (cfg.has("t2_star_us"))
      noise.quasi_static_sigma_mhz = NoiseChannels::sigma_for_t2_star(cfg.get_double("t2_star_us"));
    else
      noise.quasi_static_sigma_mhz = cfg.get_double("sigma_mhz", 0.0);
    prov.push_back("omega_r_rad_per_us = " + format_g17(omega_r));
    prov.push_back("mc_shots = " + std::to_string(noise.mc_shots));
    prov.push_back("sigma_mhz = " + format_g17(noise.quasi_static_sigma_mhz));
    prov.push_back("t1_us = " + format_g17(noise.t1_us));
    prov.push_back("t2_us = " + format_g17(noise.t2_pure_us));

    if (experiment == "ramsey") {
      const double delta = cfg.get_double("delta_mhz", 10.0);
      prov.push_back("delta_mhz = " + format_g17(delta));
      trace = simulate_ramsey(taus, spin, noise, delta, omega_r);
    } else {
      std::optional<EseemParams> eseem;
      if (cfg.get_bool("eseem", false)) {
        const double f1 = larmor_frequency(constants.gyro_c13_mhz_per_t, b_tesla);
        const double f2 = larmor_frequency(constants.gyro_si29_mhz_per_t, b_tesla);
        if (f1 <= 0.0)
          throw ValidationError(cfg.source() + ": eseem modulation requires b_tesla > 0");
        eseem.emplace(1.0, 1.0, cfg.get_double("eseem_b_depth", 0.5),
                      cfg.get_double("eseem_c_depth", 0.4), f1, f2, 0.0);
        prov.push_back("eseem = on");
        prov.push_back("eseem_b_depth = " + format_g17(eseem->b_depth));
        prov.push_back("eseem_c_depth = " + format_g17(eseem->c_depth));
        prov.push_back("f1_mhz = " + format_g17(f1));
        prov.push_back("f2_mhz = " + format_g17(f2));
      }
      trace = simulate_echo(taus, spin, noise, omega_r, eseem);
    }
    const double contrast = cfg.get_double("contrast", 1.0);
    const double offset = cfg.get_double("offset", 0.0);
    for (auto& v : trace.y) v = contrast * v + offset;
    trace.y_unit = "delta_pl";
    prov.push_back("contrast = " + format_g17(contrast));
    prov.push_back("offset = " + format_g17(offset));
  } else if (experiment == "t1") {
    const auto taus = detail::linspace(cfg.get_double("tau_start_us", 0.0),
                                       cfg.get_double("tau_stop_us"), cfg.get_int("tau_points"),
                                       "config key tau_points");
    const double t1_decay = cfg.get_double("t1_decay_us");
    const double contrast = cfg.get_double("contrast", 1.0);
    const double offset = cfg.get_double("offset", 0.0);
    trace = simulate_t1(taus, t1_decay, contrast, offset);
    prov.push_back("t1_decay_us = " + format_g17(t1_decay));
    prov.push_back("contrast = " + format_g17(contrast));
    prov.push_back("offset = " + format_g17(offset));
  } else {
    throw ValidationError(cfg.source() + ": key 'experiment': unknown experiment '" + experiment +
                          "' (expected odmr, ramsey, echo or t1)");
  }

  if (readout_noise > 0.0) {
    detail::add_readout_noise(trace, readout_noise, seed);
    prov.push_back("readout_noise_sigma = " + format_g17(readout_noise));
  }
  cfg.require_all_consumed();
  write_signal_trace(out_path, trace, prov);
  return {out_path, std::move(trace)};
}

// ---------------------------------------------------------------------------
// fit

struct FitReport {
  std::string model_name;
  std::string input_path;
  std::string input_digest;
  std::string timestamp;
  std::string x_unit;
  std::string y_unit;
  std::size_t n_points = 0;
  std::vector<std::string> param_names;
  FitResult result;
  std::vector<std::pair<std::string, double>> derived;

  std::string to_text() const {
    std::ostringstream out;
    out << "# sicspin fit report\n";
    out << "# generated_at = " << timestamp << "\n";
    out << "model = " << model_name << "\n";
    out << "input = " << input_path << "\n";
    out << "input_digest = " << input_digest << "\n";
    out << "x_unit = " << x_unit << "\n";
    out << "y_unit = " << y_unit << "\n";
    out << "n_points = " << n_points << "\n";
    out << "converged = " << (result.converged ? "true" : "false") << "\n";
    out << "iterations = " << result.iterations << "\n";
    out << "accepted_steps = " << result.accepted_steps << "\n";
    out << "chi_squared = " << format_g17(result.chi_squared) << "\n";
    out << "r_squared = " << format_g17(result.r_squared) << "\n";
    for (std::size_t j = 0; j < param_names.size(); ++j)
      out << "param " << param_names[j] << " = " << format_g17(result.parameters[j]) << " +/- "
          << format_g17(result.standard_errors[j]) << "\n";
    for (std::size_t j = 0; j < param_names.size(); ++j) {
      out << "covariance_row " << param_names[j] << " =";
      for (std::size_t k = 0; k < param_names.size(); ++k)
        out << " " << format_g17(result.covariance(static_cast<int>(j), static_cast<int>(k)));
      out << "\n";
    }
    for (const auto& [key, value] : derived)
      out << "derived " << key << " = " << format_g17(value) << "\n";
    return out.str();
  }
};

struct FitCommandOptions {
  std::string trace_path;
  std::string model;
  std::map<std::string, double> guess_overrides;
  bool free_larmor = false;            // eseem: let f1, f2 float
  std::optional<double> b_tesla;       // eseem: field for the fixed Larmor frequencies
  int raman_dimension = 2;
  std::optional<std::string> out_path;
  bool svg = false;
};

inline TraceSchema schema_for_x_unit(const std::string& x_unit) {
  if (x_unit == "mhz") return TraceSchema::Spectrum;
  if (x_unit == "us") return TraceSchema::Timetrace;
  if (x_unit == "k") return TraceSchema::TemperatureTrace;
  throw ValidationError("no trace schema for unit tag '" + x_unit + "'");
}

inline FitReport cmd_fit(const FitCommandOptions& options) {
  FitModel raman_model;
  const FitModel* model = nullptr;
  if (options.model == "t1-raman" && options.raman_dimension != 2) {
    raman_model = make_raman_fit_model(options.raman_dimension);
    model = &raman_model;
  } else {
    model = &fit_model(options.model);
  }

  const SignalTrace data = ingest_signal_trace(options.trace_path, schema_for_x_unit(model->x_unit));

  std::vector<double> guess;
  try {
    guess = initial_guess(*model, data);
  } catch (const HeuristicError&) {
    if (options.guess_overrides.size() < model->n_params()) throw;
    guess.assign(model->n_params(), 0.0);
  }
  for (const auto& [name, value] : options.guess_overrides) {
    const auto it = std::find(model->param_names.begin(), model->param_names.end(), name);
    if (it == model->param_names.end())
      throw ValidationError("guess override: model '" + model->name + "' has no parameter '" +
                            name + "'");
    guess[static_cast<std::size_t>(it - model->param_names.begin())] = value;
  }

  FitProblem problem;
  problem.model = model;
  problem.initial_guess = guess;

  if (model->name == "eseem" && !options.free_larmor) {
    // B is known in the lab, so the nuclear Larmor frequencies are fixed at
    // gyro * B by default.
    double f1, f2;
    const bool overridden = options.guess_overrides.count("f1_mhz") ||
                            options.guess_overrides.count("f2_mhz");
    if (overridden) {
      f1 = guess[4];
      f2 = guess[5];
    } else {
      if (!options.b_tesla)
        throw ValidationError(
            "eseem fit: supply --b-tesla to pin f1/f2 at the nuclear Larmor frequencies, or "
            "--free-larmor to fit them");
      f1 = larmor_frequency(constants.gyro_c13_mhz_per_t, *options.b_tesla);
      f2 = larmor_frequency(constants.gyro_si29_mhz_per_t, *options.b_tesla);
    }
    problem.bounds.assign(model->n_params(), ParamBounds{});
    problem.bounds[4] = {f1, f1};
    problem.bounds[5] = {f2, f2};
    problem.initial_guess[4] = f1;
    problem.initial_guess[5] = f2;
  }

  FitReport report;
  report.model_name = model->name;
  report.input_path = options.trace_path;
  report.input_digest = file_digest(options.trace_path);
  report.timestamp = detail::utc_timestamp();
  report.x_unit = data.x_unit;
  report.y_unit = data.y_unit;
  report.n_points = data.size();
  report.param_names = model->param_names;
  report.result = fit(problem, data);

  if (model->name == "lorentzian2") {
    const auto& q = report.result.parameters;
    const bool ordered = q[1] <= q[4];
    const double w1 = ordered ? q[1] : q[4];
    const double w2 = ordered ? q[4] : q[1];
    report.derived.emplace_back("omega1_mhz", w1);
    report.derived.emplace_back("omega2_mhz", w2);
    report.derived.emplace_back("d_mhz", zfs_from_resonances(w1, w2));
    const auto& cov = report.result.covariance;
    report.derived.emplace_back("d_stderr_mhz",
                                0.5 * std::sqrt(std::max(cov(1, 1) + cov(4, 4) + 2.0 * cov(1, 4),
                                                         0.0)));
  }

  if (options.out_path) {
    std::ofstream out(*options.out_path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + *options.out_path + "' for writing");
    out << report.to_text();
    if (!out) throw IoError("write failure on '" + *options.out_path + "'");
  }
  if (options.svg) {
    if (!options.out_path)
      throw ValidationError("--svg requires --out (the plot is written next to the report)");
    std::string svg_path = *options.out_path;
    const std::size_t dot = svg_path.find_last_of('.');
    svg_path = (dot == std::string::npos ? svg_path : svg_path.substr(0, dot)) + ".svg";
    PlotSeries points;
    points.x = data.x;
    points.y = data.y;
    points.label = "data";
    points.line = false;
    PlotSeries curve;
    curve.label = model->name + " fit";
    curve.color = "#d62728";
    const int n_dense = 400;
    for (int i = 0; i < n_dense; ++i) {
      const double x = data.x.front() +
                       (data.x.back() - data.x.front()) * static_cast<double>(i) / (n_dense - 1);
      curve.x.push_back(x);
      curve.y.push_back(model->eval(x, report.result.parameters));
    }
    write_svg_plot(svg_path, "sicspin fit: " + model->name, data.x_unit, data.y_unit,
                   {points, curve});
  }
  return report;
}

// ---------------------------------------------------------------------------
// thermometry

struct ThermometryOptions {
  DebyeDParams coefficients{1304.1, 60.6, 2.7e-6};
  double d_value_mhz = 0.0;
  double t_lo_k = 5.0;
  double t_hi_k = 300.0;
};

struct ThermometryResult {
  double temperature_k;
  double residual_mhz;
};

inline ThermometryResult cmd_thermometry(const ThermometryOptions& options) {
  const double t = invert_d_to_temperature(options.coefficients, options.d_value_mhz,
                                           options.t_lo_k, options.t_hi_k);
  const double residual = std::abs(evaluate_d(options.coefficients, t) - options.d_value_mhz);
  return {t, residual};
}

// ---------------------------------------------------------------------------
// report

struct ReportOptions {
  std::string series_path;
  double linear_window_lo_k = 5.0;    // one-phonon regime default
  double linear_window_hi_k = 200.0;
  double raman_window_lo_k = 250.0;   // two-phonon regime default
  double raman_window_hi_k = 300.0;
  int raman_dimension = 2;
  std::string out_prefix;
  bool svg = false;
};

namespace detail {

struct ModelFitRecord {
  std::string model;
  bool fitted = false;
  std::string skip_reason;
  std::vector<std::string> param_names;
  FitResult result;
};

inline ModelFitRecord fit_series_model(const FitModel& model, const SignalTrace& data) {
  ModelFitRecord rec;
  rec.model = model.name;
  rec.param_names = model.param_names;
  if (data.size() < model.n_params() + 1) {
    rec.skip_reason = "skipped: " + std::to_string(data.size()) + " points cannot constrain " +
                      std::to_string(model.n_params()) + " parameters";
    return rec;
  }
  try {
    FitProblem problem;
    problem.model = &model;
    problem.initial_guess = initial_guess(model, data);
    rec.result = fit(problem, data);
    rec.fitted = true;
  } catch (const HeuristicError& e) {
    rec.skip_reason = std::string("skipped: ") + e.what();
  } catch (const DegenerateFitError& e) {
    rec.skip_reason = std::string("failed: ") + e.what();
  }
  return rec;
}

inline void append_record(std::ostringstream& out, const ModelFitRecord& rec) {
  if (!rec.fitted) {
    out << "model " << rec.model << ": " << rec.skip_reason << "\n";
    return;
  }
  out << "model " << rec.model << ": converged = " << (rec.result.converged ? "true" : "false")
      << ", r_squared = " << format_g17(rec.result.r_squared) << "\n";
  for (std::size_t j = 0; j < rec.param_names.size(); ++j)
    out << "param " << rec.model << "." << rec.param_names[j] << " = "
        << format_g17(rec.result.parameters[j]) << " +/- "
        << format_g17(rec.result.standard_errors[j]) << "\n";
}

inline SignalTrace trace_from_rows(const std::vector<TemperatureSeriesRow>& rows,
                                   const std::string& y_unit, bool to_rate_per_ms) {
  SignalTrace trace;
  trace.x_unit = "k";
  trace.y_unit = y_unit;
  bool all_sigma = !rows.empty();
  for (const auto& r : rows) all_sigma = all_sigma && r.uncertainty > 0.0;
  for (const auto& r : rows) {
    trace.x.push_back(r.temperature_k);
    // times are given in us; the rate models work in 1/ms
    trace.y.push_back(to_rate_per_ms ? 1000.0 / r.value : r.value);
    if (all_sigma && !to_rate_per_ms) trace.sigma_y.push_back(r.uncertainty);
  }
  trace.validate();
  return trace;
}

inline SignalTrace window(const SignalTrace& t, double lo, double hi) {
  SignalTrace out;
  out.x_unit = t.x_unit;
  out.y_unit = t.y_unit;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.x[i] < lo || t.x[i] > hi) continue;
    out.x.push_back(t.x[i]);
    out.y.push_back(t.y[i]);
    if (!t.sigma_y.empty()) out.sigma_y.push_back(t.sigma_y[i]);
  }
  return out;
}

inline void summary_lines(std::ostringstream& out, const char* tag,
                          const std::vector<TemperatureSeriesRow>& rows) {
  out << "[" << tag << "]\n";
  out << "count = " << rows.size() << "\n";
  if (rows.empty()) return;
  double mn = rows.front().value, mx = rows.front().value, mean = 0.0;
  for (const auto& r : rows) {
    mn = std::min(mn, r.value);
    mx = std::max(mx, r.value);
    mean += r.value;
  }
  mean /= static_cast<double>(rows.size());
  out << "mean_us = " << format_g17(mean) << "\n";
  out << "min_us = " << format_g17(mn) << "\n";
  out << "max_us = " << format_g17(mx) << "\n";
}

}  // namespace detail

struct ReportOutcome {
  std::string report_path;
  std::string text;
};

// Fits every applicable temperature model to the series and writes a summary
// report (plus SVG plots on request): Debye/Varshni/poly5 on D(T) rows,
// linear and Raman forms on 1/T1(T) over their temperature windows,
// descriptive summaries for T2* and T2.
inline ReportOutcome cmd_report(const ReportOptions& options) {
  if (options.out_prefix.empty()) throw ValidationError("report: out prefix must not be empty");
  if (!(options.linear_window_lo_k < options.linear_window_hi_k) ||
      !(options.raman_window_lo_k < options.raman_window_hi_k))
    throw ValidationError("report: temperature windows must satisfy lo < hi");
  const TemperatureSeries series = ingest_temperature_series(options.series_path);
  const auto d_rows = series.select(SeriesQuantity::D);
  const auto t1_rows = series.select(SeriesQuantity::T1);
  const auto t2_rows = series.select(SeriesQuantity::T2);
  const auto t2s_rows = series.select(SeriesQuantity::T2Star);

  std::ostringstream out;
  out << "# sicspin temperature-series report\n";
  out << "# generated_at = " << detail::utc_timestamp() << "\n";
  out << "input = " << options.series_path << "\n";
  out << "input_digest = " << file_digest(options.series_path) << "\n";
  out << "rows_total = " << series.rows.size() << "\n";
  out << "rows_d = " << d_rows.size() << "\n";
  out << "rows_t1 = " << t1_rows.size() << "\n";
  out << "rows_t2 = " << t2_rows.size() << "\n";
  out << "rows_t2star = " << t2s_rows.size() << "\n";

  std::vector<PlotSeries> d_plot, rate_plot;

  out << "[d_models]\n";
  if (d_rows.empty()) {
    out << "model debye: skipped: no D rows\n";
    out << "model varshni: skipped: no D rows\n";
    out << "model poly5: skipped: no D rows\n";
  } else {
    const SignalTrace d_trace = detail::trace_from_rows(d_rows, "mhz", false);
    PlotSeries pts;
    pts.x = d_trace.x;
    pts.y = d_trace.y;
    pts.label = "data";
    pts.line = false;
    d_plot.push_back(pts);
    const char* colors[] = {"#d62728", "#2ca02c", "#9467bd"};
    int color_i = 0;
    for (const char* name : {"debye", "varshni", "poly5"}) {
      const FitModel& model = fit_model(name);
      const auto rec = detail::fit_series_model(model, d_trace);
      detail::append_record(out, rec);
      if (rec.fitted) {
        PlotSeries curve;
        curve.label = rec.model;
        curve.color = colors[color_i];
        for (int i = 0; i < 300; ++i) {
          const double t = d_trace.x.front() +
                           (d_trace.x.back() - d_trace.x.front()) * i / 299.0;
          curve.x.push_back(t);
          curve.y.push_back(model.eval(t, rec.result.parameters));
        }
        d_plot.push_back(std::move(curve));
      }
      ++color_i;
    }
  }

  out << "[t1_models]\n";
  out << "window_linear_k = " << format_g17(options.linear_window_lo_k) << ":"
      << format_g17(options.linear_window_hi_k) << "\n";
  out << "window_raman_k = " << format_g17(options.raman_window_lo_k) << ":"
      << format_g17(options.raman_window_hi_k) << "\n";
  out << "raman_dimension = " << options.raman_dimension << "\n";
  if (t1_rows.empty()) {
    out << "model t1-linear: skipped: no T1 rows\n";
    out << "model t1-raman: skipped: no T1 rows\n";
  } else {
    const SignalTrace rate_trace = detail::trace_from_rows(t1_rows, "per_ms", true);
    PlotSeries pts;
    pts.x = rate_trace.x;
    pts.y = rate_trace.y;
    pts.label = "1/T1 data";
    pts.line = false;
    rate_plot.push_back(pts);

    const SignalTrace linear_window =
        detail::window(rate_trace, options.linear_window_lo_k, options.linear_window_hi_k);
    const auto linear_rec = detail::fit_series_model(fit_model("t1-linear"), linear_window);
    detail::append_record(out, linear_rec);
    if (linear_rec.fitted) {
      PlotSeries curve;
      curve.label = "linear";
      curve.color = "#d62728";
      for (int i = 0; i < 100; ++i) {
        const double t = options.linear_window_lo_k +
                         (options.linear_window_hi_k - options.linear_window_lo_k) * i / 99.0;
        curve.x.push_back(t);
        curve.y.push_back(fit_model("t1-linear").eval(t, linear_rec.result.parameters));
      }
      rate_plot.push_back(std::move(curve));
    }

    const FitModel raman = make_raman_fit_model(options.raman_dimension);
    const SignalTrace raman_window =
        detail::window(rate_trace, options.raman_window_lo_k, options.raman_window_hi_k);
    const auto raman_rec = detail::fit_series_model(raman, raman_window);
    detail::append_record(out, raman_rec);
    if (raman_rec.fitted) {
      const double rate_hi = raman.eval(options.raman_window_hi_k, raman_rec.result.parameters);
      const double rate_lo = raman.eval(options.raman_window_lo_k, raman_rec.result.parameters);
      if (rate_lo > 0.0)
        out << "raman_rate_ratio = " << format_g17(rate_hi / rate_lo) << " (fitted 1/T1 at "
            << format_g17(options.raman_window_hi_k) << " K over "
            << format_g17(options.raman_window_lo_k) << " K)\n";
      PlotSeries curve;
      curve.label = "raman";
      curve.color = "#2ca02c";
      for (int i = 0; i < 100; ++i) {
        const double t = options.raman_window_lo_k +
                         (options.raman_window_hi_k - options.raman_window_lo_k) * i / 99.0;
        curve.x.push_back(t);
        curve.y.push_back(raman.eval(t, raman_rec.result.parameters));
      }
      rate_plot.push_back(std::move(curve));
    }
  }

  detail::summary_lines(out, "t2star_summary", t2s_rows);
  detail::summary_lines(out, "t2_summary", t2_rows);

  const std::string report_path = options.out_prefix + "_report.txt";
  {
    std::ofstream file(report_path, std::ios::binary);
    if (!file) throw IoError("cannot open '" + report_path + "' for writing");
    file << out.str();
    if (!file) throw IoError("write failure on '" + report_path + "'");
  }
  if (options.svg) {
    if (!d_plot.empty())
      write_svg_plot(options.out_prefix + "_d.svg", "zero-field splitting vs temperature", "k",
                     "mhz", d_plot);
    if (!rate_plot.empty())
      write_svg_plot(options.out_prefix + "_t1_rate.svg", "1/T1 vs temperature", "k", "per_ms",
                     rate_plot);
    if (!t2s_rows.empty()) {
      PlotSeries p;
      for (const auto& r : t2s_rows) {
        p.x.push_back(r.temperature_k);
        p.y.push_back(r.value);
      }
      p.label = "T2* data";
      p.line = false;
      write_svg_plot(options.out_prefix + "_t2star.svg", "T2* vs temperature", "k", "us", {p});
    }
    if (!t2_rows.empty()) {
      PlotSeries p;
      for (const auto& r : t2_rows) {
        p.x.push_back(r.temperature_k);
        p.y.push_back(r.value);
      }
      p.label = "T2 data";
      p.line = false;
      write_svg_plot(options.out_prefix + "_t2.svg", "T2 vs temperature", "k", "us", {p});
    }
  }
  return {report_path, out.str()};
}

}  // namespace sicspin

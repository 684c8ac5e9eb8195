#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "sicspin/errors.hpp"
#include "sicspin/trace.hpp"

namespace sicspin {

// CSV trace files. One mandatory header row with unit-suffixed column names;
// '#' lines carry provenance and are ignored by the parser; numeric fields
// are written with 17 significant digits so a write/ingest round trip is
// exact.

enum class TraceSchema { Spectrum, Timetrace, TemperatureTrace, TemperatureSeries };

inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.emplace_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

inline double parse_double(std::string_view field, const std::string& path, int line_no) {
  const std::string_view t = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw ValidationError(path + ":" + std::to_string(line_no) + ": malformed numeric field '" +
                          std::string(t) + "'");
  return v;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return ss.str();
}

struct ParsedCsv {
  std::vector<std::string> provenance;  // '#' lines, prefix stripped
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> row_lines;
};

inline ParsedCsv parse_csv_file(const std::string& path) {
  const std::string text = read_file(path);
  ParsedCsv parsed;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line(text.data() + pos, end - pos);
    ++line_no;
    pos = end + 1;
    const std::string_view t = trim(line);
    if (t.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (t.front() == '#') {
      std::string_view body = t.substr(1);
      if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      parsed.provenance.emplace_back(body);
      continue;
    }
    auto fields = split_csv(t);
    if (parsed.header.empty()) {
      parsed.header = std::move(fields);
    } else {
      parsed.rows.push_back(std::move(fields));
      parsed.row_lines.push_back(line_no);
    }
    if (end == text.size()) break;
  }
  if (parsed.header.empty()) throw ValidationError(path + ": no header row found");
  return parsed;
}

inline const char* x_column_for(TraceSchema schema) {
  switch (schema) {
    case TraceSchema::Spectrum: return "frequency_mhz";
    case TraceSchema::Timetrace: return "tau_us";
    case TraceSchema::TemperatureTrace: return "temperature_k";
    case TraceSchema::TemperatureSeries: return "temperature_k";
  }
  return "";
}

inline const char* x_unit_for(TraceSchema schema) {
  switch (schema) {
    case TraceSchema::Spectrum: return "mhz";
    case TraceSchema::Timetrace: return "us";
    default: return "k";
  }
}

}  // namespace detail

// 64-bit FNV-1a over the file bytes, used as the input digest in reports.
inline std::string file_digest(const std::string& path) {
  const std::string text = detail::read_file(path);
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[24];
  std::snprintf(buf, sizeof(buf), "fnv1a:%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Parse a 2- or 3-column trace (x, y[, uncertainty]) under the given schema.
// Rows are sorted by abscissa; duplicate abscissa values are an error.
inline SignalTrace ingest_signal_trace(const std::string& path, TraceSchema schema) {
  if (schema == TraceSchema::TemperatureSeries)
    throw ValidationError("ingest_signal_trace: use ingest_temperature_series for the "
                          "temperature_series schema");
  const auto parsed = detail::parse_csv_file(path);
  const std::string expected_x = detail::x_column_for(schema);
  if (parsed.header.size() < 2 || parsed.header.size() > 3)
    throw ValidationError(path + ": expected 2 or 3 columns, got " +
                          std::to_string(parsed.header.size()));
  if (parsed.header[0] != expected_x)
    throw ValidationError(path + ": unit-tag mismatch: abscissa column is '" + parsed.header[0] +
                          "', schema requires '" + expected_x + "'");
  const std::string& ycol = parsed.header[1];
  if (ycol != "delta_pl" && ycol != "value")
    throw ValidationError(path + ": ordinate column must be 'delta_pl' or 'value', got '" +
                          ycol + "'");
  const bool have_sigma = parsed.header.size() == 3;
  if (have_sigma && parsed.header[2] != "uncertainty")
    throw ValidationError(path + ": third column must be 'uncertainty', got '" +
                          parsed.header[2] + "'");

  struct Row {
    double x, y, s;
    int line;
  };
  std::vector<Row> rows;
  rows.reserve(parsed.rows.size());
  for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
    const auto& f = parsed.rows[i];
    const int line = parsed.row_lines[i];
    if (f.size() != parsed.header.size())
      throw ValidationError(path + ":" + std::to_string(line) + ": malformed row: expected " +
                            std::to_string(parsed.header.size()) + " fields, got " +
                            std::to_string(f.size()));
    Row r{detail::parse_double(f[0], path, line), detail::parse_double(f[1], path, line), 0.0,
          line};
    if (have_sigma) r.s = detail::parse_double(f[2], path, line);
    rows.push_back(r);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.x < b.x; });
  std::string dups;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i].x == rows[i + 1].x)
      dups += (dups.empty() ? "" : ", ") + format_g17(rows[i].x) + " (lines " +
              std::to_string(rows[i].line) + " and " + std::to_string(rows[i + 1].line) + ")";
  if (!dups.empty())
    throw ValidationError(path + ": duplicate abscissa values: " + dups);

  SignalTrace trace;
  trace.x_unit = detail::x_unit_for(schema);
  trace.y_unit = ycol;
  for (const auto& r : rows) {
    trace.x.push_back(r.x);
    trace.y.push_back(r.y);
    if (have_sigma) trace.sigma_y.push_back(r.s);
  }
  trace.validate();
  return trace;
}

// Parse a temperature series: temperature_k, quantity, value[, uncertainty].
inline TemperatureSeries ingest_temperature_series(const std::string& path) {
  const auto parsed = detail::parse_csv_file(path);
  if (parsed.header.size() < 3 || parsed.header.size() > 4 ||
      parsed.header[0] != "temperature_k" || parsed.header[1] != "quantity" ||
      parsed.header[2] != "value" || (parsed.header.size() == 4 && parsed.header[3] != "uncertainty"))
    throw ValidationError(path +
                          ": temperature series requires header "
                          "'temperature_k,quantity,value[,uncertainty]'");
  TemperatureSeries series;
  for (std::size_t i = 0; i < parsed.rows.size(); ++i) {
    const auto& f = parsed.rows[i];
    const int line = parsed.row_lines[i];
    if (f.size() < 3 || f.size() > parsed.header.size())
      throw ValidationError(path + ":" + std::to_string(line) + ": malformed row");
    TemperatureSeriesRow row;
    row.temperature_k = detail::parse_double(f[0], path, line);
    try {
      row.quantity = series_quantity_from_string(f[1]);
    } catch (const ValidationError& e) {
      throw ValidationError(path + ":" + std::to_string(line) + ": " + e.what());
    }
    row.value = detail::parse_double(f[2], path, line);
    if (f.size() == 4 && !f[3].empty()) row.uncertainty = detail::parse_double(f[3], path, line);
    series.rows.push_back(row);
  }
  std::stable_sort(series.rows.begin(), series.rows.end(),
                   [](const TemperatureSeriesRow& a, const TemperatureSeriesRow& b) {
                     return a.temperature_k < b.temperature_k;
                   });
  series.validate();
  return series;
}

inline std::variant<SignalTrace, TemperatureSeries> ingest_trace(const std::string& path,
                                                                 TraceSchema schema) {
  if (schema == TraceSchema::TemperatureSeries) return ingest_temperature_series(path);
  return ingest_signal_trace(path, schema);
}

inline void write_signal_trace(const std::string& path, const SignalTrace& trace,
                               const std::vector<std::string>& provenance) {
  trace.validate();
  std::string x_col;
  if (trace.x_unit == "mhz") x_col = "frequency_mhz";
  else if (trace.x_unit == "us") x_col = "tau_us";
  else if (trace.x_unit == "k") x_col = "temperature_k";
  else throw ValidationError("write_signal_trace: unknown x unit tag '" + trace.x_unit + "'");
  const std::string y_col = (trace.y_unit == "delta_pl" || trace.y_unit == "population")
                                ? "delta_pl"
                                : "value";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& p : provenance) out << "# " << p << "\n";
  out << x_col << "," << y_col;
  if (!trace.sigma_y.empty()) out << ",uncertainty";
  out << "\n";
  for (std::size_t i = 0; i < trace.size(); ++i) {
    out << format_g17(trace.x[i]) << "," << format_g17(trace.y[i]);
    if (!trace.sigma_y.empty()) out << "," << format_g17(trace.sigma_y[i]);
    out << "\n";
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

inline void write_temperature_series(const std::string& path, const TemperatureSeries& series,
                                     const std::vector<std::string>& provenance) {
  series.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  for (const auto& p : provenance) out << "# " << p << "\n";
  out << "temperature_k,quantity,value,uncertainty\n";
  for (const auto& r : series.rows) {
    out << format_g17(r.temperature_k) << "," << to_string(r.quantity) << ","
        << format_g17(r.value) << ",";
    if (r.uncertainty > 0.0) out << format_g17(r.uncertainty);
    out << "\n";
  }
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace sicspin

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sicspin/errors.hpp"

namespace sicspin {

// A sampled 1-D curve: experimental or synthetic. The abscissa must be
// strictly increasing; per-point uncertainties are optional (empty vector).
// Unit tags: x_unit in {"mhz", "us", "k"}, y_unit in {"delta_pl", "mhz",
// "per_ms", "population"}.
struct SignalTrace {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> sigma_y;  // empty = no uncertainties
  std::string x_unit;
  std::string y_unit;

  std::size_t size() const { return x.size(); }

  void validate() const {
    if (x.size() != y.size())
      throw ValidationError("trace: x and y lengths differ (" + std::to_string(x.size()) +
                            " vs " + std::to_string(y.size()) + ")");
    if (!sigma_y.empty() && sigma_y.size() != x.size())
      throw ValidationError("trace: sigma_y length differs from x");
    for (std::size_t i = 0; i + 1 < x.size(); ++i)
      if (!(x[i] < x[i + 1]))
        throw ValidationError("trace: abscissa not strictly increasing at index " +
                              std::to_string(i + 1) + " (x=" + std::to_string(x[i + 1]) + ")");
    for (double s : sigma_y)
      if (!(s > 0.0)) throw ValidationError("trace: non-positive uncertainty");
    for (double v : x)
      if (!std::isfinite(v)) throw ValidationError("trace: non-finite abscissa value");
    for (double v : y)
      if (!std::isfinite(v)) throw ValidationError("trace: non-finite ordinate value");
  }
};

enum class SeriesQuantity { D, T2Star, T2, T1 };

inline const char* to_string(SeriesQuantity q) {
  switch (q) {
    case SeriesQuantity::D: return "D";
    case SeriesQuantity::T2Star: return "T2star";
    case SeriesQuantity::T2: return "T2";
    case SeriesQuantity::T1: return "T1";
  }
  return "?";
}

inline SeriesQuantity series_quantity_from_string(const std::string& s) {
  if (s == "D") return SeriesQuantity::D;
  if (s == "T2star") return SeriesQuantity::T2Star;
  if (s == "T2") return SeriesQuantity::T2;
  if (s == "T1") return SeriesQuantity::T1;
  throw ValidationError("unknown series quantity '" + s + "' (expected D, T2star, T2 or T1)");
}

// One measured quantity versus temperature. D values are in MHz, T2*/T2/T1
// in microseconds. uncertainty = 0 means "not given".
struct TemperatureSeriesRow {
  double temperature_k = 0.0;
  SeriesQuantity quantity = SeriesQuantity::D;
  double value = 0.0;
  double uncertainty = 0.0;
};

struct TemperatureSeries {
  std::vector<TemperatureSeriesRow> rows;

  void validate() const {
    for (const auto& r : rows) {
      if (!(r.temperature_k >= 1.0 && r.temperature_k <= 400.0))
        throw ValidationError("temperature series: temperature " +
                              std::to_string(r.temperature_k) + " K outside [1, 400]");
      if (!(r.value > 0.0))
        throw ValidationError("temperature series: non-positive value for quantity " +
                              std::string(to_string(r.quantity)));
      if (r.uncertainty < 0.0)
        throw ValidationError("temperature series: negative uncertainty");
    }
  }

  std::vector<TemperatureSeriesRow> select(SeriesQuantity q) const {
    std::vector<TemperatureSeriesRow> out;
    for (const auto& r : rows)
      if (r.quantity == q) out.push_back(r);
    return out;
  }
};

}  // namespace sicspin

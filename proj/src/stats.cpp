#include "qgen/stats.hpp"

#include <array>
#include <charconv>
#include <cmath>

#include "qgen/error.hpp"

namespace qgen::stats {

double quantile_linear(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorKind::EmptyInput, "quantile of empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidArgument, "quantile p outside [0,1]");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted[sorted.size() - 1];
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

TukeyFences tukey_fences(std::span<const double> sorted) {
  TukeyFences f;
  f.q1 = quantile_linear(sorted, 0.25);
  f.q3 = quantile_linear(sorted, 0.75);
  const double iqr = f.q3 - f.q1;
  f.lo = f.q1 - 1.5 * iqr;
  f.hi = f.q3 + 1.5 * iqr;
  return f;
}

std::string format_double(double value) {
  if (value == 0.0) return "0";  // folds -0
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

}  // namespace qgen::stats

#pragma once

#include <span>
#include <string>

namespace qgen::stats {

// Quantile of an ascending-sorted sample by linear interpolation between
// closest ranks: h = (n - 1) * p, x[floor(h)] + frac(h) * (x[floor(h)+1] - x[floor(h)]).
// This is the default method of numpy and matplotlib boxplots.
double quantile_linear(std::span<const double> sorted, double p);

struct TukeyFences {
  double q1 = 0.0;
  double q3 = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Fences at q1 - 1.5 IQR and q3 + 1.5 IQR; `sorted` must be non-empty.
TukeyFences tukey_fences(std::span<const double> sorted);

// Shortest round-trip decimal representation; used for every number written
// to CSV or JSON so outputs are byte-stable.
std::string format_double(double value);

}  // namespace qgen::stats

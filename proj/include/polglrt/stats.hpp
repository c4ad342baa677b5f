#pragma once

// Small statistics helpers for the Monte-Carlo harness.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "polglrt/errors.hpp"

namespace polglrt {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Wilson score interval for k successes in n trials.
inline Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054) {
  if (n == 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {k == 0 ? 0.0 : std::max(0.0, center - half), k == n ? 1.0 : std::min(1.0, center + half)};
}

/**
 * Empirical (1 - cfar) quantile used as a CFAR threshold: the
 * ceil((1 - cfar) n)-th smallest value (the minimum when cfar = 1).
 * Exactly floor(cfar n) samples exceed it when values are distinct.
 */
inline double cfar_quantile(std::vector<double> values, double cfar) {
  if (values.empty()) throw ConfigError("cfar_quantile: no samples");
  if (!(cfar > 0.0 && cfar <= 1.0)) throw ConfigError("cfar must lie in (0, 1]");
  const double n = static_cast<double>(values.size());
  auto k = static_cast<std::ptrdiff_t>(std::ceil((1.0 - cfar) * n - 1e-9));
  k = std::clamp<std::ptrdiff_t>(k - 1, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
  std::nth_element(values.begin(), values.begin() + k, values.end());
  return values[static_cast<std::size_t>(k)];
}

/// Weighted pool-adjacent-violators fit; non-decreasing unless @p increasing is false.
inline std::vector<double> isotonic_fit(const std::vector<double>& y, std::vector<double> w = {},
                                        bool increasing = true) {
  const std::size_t n = y.size();
  if (w.empty()) w.assign(n, 1.0);
  std::vector<double> vals, wts;
  std::vector<std::size_t> counts;
  for (std::size_t i = 0; i < n; ++i) {
    vals.push_back(increasing ? y[i] : -y[i]);
    wts.push_back(w[i]);
    counts.push_back(1);
    while (vals.size() > 1 && vals[vals.size() - 2] > vals.back()) {
      const double wsum = wts[wts.size() - 2] + wts.back();
      const double v = (vals[vals.size() - 2] * wts[wts.size() - 2] + vals.back() * wts.back()) / wsum;
      const std::size_t c = counts[counts.size() - 2] + counts.back();
      vals.pop_back(); wts.pop_back(); counts.pop_back();
      vals.back() = v; wts.back() = wsum; counts.back() = c;
    }
  }
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t b = 0; b < vals.size(); ++b)
    for (std::size_t c = 0; c < counts[b]; ++c) out.push_back(increasing ? vals[b] : -vals[b]);
  return out;
}

/**
 * Abscissa where a non-decreasing curve first reaches @p level, by linear
 * interpolation between grid points. Empty if it never gets there or starts
 * above it.
 */
inline std::optional<double> crossing(const std::vector<double>& x, const std::vector<double>& y, double level) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] >= level) {
      if (i == 0) return std::nullopt;
      const double t = (level - y[i - 1]) / (y[i] - y[i - 1]);
      return x[i - 1] + t * (x[i] - x[i - 1]);
    }
  }
  return std::nullopt;
}

inline double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double standard_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace polglrt

#pragma once

#include <cmath>
#include <numeric>
#include <vector>

namespace testing_support {

inline double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double stddev(const std::vector<double>& x) { return std::sqrt(variance(x)); }

// standard error of the sample mean
inline double sem(const std::vector<double>& x) { return stddev(x) / std::sqrt(static_cast<double>(x.size())); }

// standard error of the sample variance, from the fourth central moment
inline double variance_se(const std::vector<double>& x) {
  const double m = mean(x);
  const double n = static_cast<double>(x.size());
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  return std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
}

// least-squares slope of y on x
inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

}  // namespace testing_support

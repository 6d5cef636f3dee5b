#pragma once

#include <boost/math/distributions/chi_squared.hpp>

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace qmux {

// Welford accumulator for streaming mean / variance.
class RunningStats {
 public:
  void add(double x) {
    ++n_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
  }
  long count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stddev() const { return std::sqrt(variance()); }
  double standard_error() const {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
  }

 private:
  long n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct ValueWithError {
  double value = 0.0;
  double standard_error = 0.0;
};

// V = (a - b) / (a + b) with the delta-method standard error from independent
// estimates of a and b.
inline ValueWithError contrast_from_means(double a, double se_a, double b, double se_b) {
  const double sum = a + b;
  if (sum <= 0.0) return {0.0, 0.0};
  const double v = (a - b) / sum;
  const double se =
      2.0 * std::sqrt(b * b * se_a * se_a + a * a * se_b * se_b) / (sum * sum);
  return {v, se};
}

inline double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("pearson_correlation: need two equal-length samples");
  RunningStats sx, sy;
  for (double v : x) sx.add(v);
  for (double v : y) sy.add(v);
  double cov = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    cov += (x[i] - sx.mean()) * (y[i] - sy.mean());
  cov /= static_cast<double>(x.size() - 1);
  const double denom = sx.stddev() * sy.stddev();
  return denom > 0.0 ? cov / denom : 0.0;
}

inline double chi_squared_survival(double statistic, double dof) {
  boost::math::chi_squared_distribution<double> dist(dof);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

// Two-sample homogeneity test over count categories. Categories with a pooled
// expectation under ~5 are merged into the last cell before the statistic is
// formed. Returns the p-value.
inline double chi_squared_homogeneity_pvalue(std::span<const long> counts_a,
                                             std::span<const long> counts_b) {
  if (counts_a.size() != counts_b.size() || counts_a.empty())
    throw std::invalid_argument("chi2: category counts must align");
  const std::size_t k = counts_a.size();
  double total_a = 0, total_b = 0;
  for (std::size_t i = 0; i < k; ++i) {
    total_a += static_cast<double>(counts_a[i]);
    total_b += static_cast<double>(counts_b[i]);
  }
  const double total = total_a + total_b;
  if (total_a == 0 || total_b == 0) throw std::invalid_argument("chi2: empty sample");

  std::vector<double> merged_a, merged_b;
  double hold_a = 0, hold_b = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double pooled = static_cast<double>(counts_a[i] + counts_b[i]);
    if (pooled * total_a / total >= 5.0 && pooled * total_b / total >= 5.0) {
      merged_a.push_back(static_cast<double>(counts_a[i]));
      merged_b.push_back(static_cast<double>(counts_b[i]));
    } else {
      hold_a += static_cast<double>(counts_a[i]);
      hold_b += static_cast<double>(counts_b[i]);
    }
  }
  if (hold_a + hold_b > 0.0) {
    merged_a.push_back(hold_a);
    merged_b.push_back(hold_b);
  }
  const std::size_t cells = merged_a.size();
  if (cells < 2) return 1.0;

  double statistic = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double pooled = merged_a[i] + merged_b[i];
    const double ea = pooled * total_a / total;
    const double eb = pooled * total_b / total;
    if (ea > 0) statistic += (merged_a[i] - ea) * (merged_a[i] - ea) / ea;
    if (eb > 0) statistic += (merged_b[i] - eb) * (merged_b[i] - eb) / eb;
  }
  return chi_squared_survival(statistic, static_cast<double>(cells - 1));
}

}  // namespace qmux

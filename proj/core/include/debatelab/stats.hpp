#pragma once

// Distribution summaries and the Levene variance-equality test.

#include <span>
#include <vector>

#include "debatelab/model.hpp"

namespace debatelab::stats {

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, n - 1 denominator
};

/// Arithmetic mean; TooFewValues when empty.
double mean(std::span<const double> values);

/// Mean and sample standard deviation; TooFewValues below two values.
MeanStd mean_std(std::span<const double> values);

double median(std::span<const double> values);

struct Histogram {
  std::vector<HistogramBin> bins;
  std::size_t out_of_range = 0;  // below lo, above hi, or not finite

  std::size_t in_range() const;
};

/// Equal-width bins over [lo, hi]. Bins are half-open except the last,
/// whose right edge is inclusive. BadRange unless bins >= 1 and hi > lo.
Histogram histogram(std::span<const double> values, int bins, double lo, double hi);

enum class LeveneCenter { mean, median };

struct LeveneResult {
  double w = 0.0;
  double p_value = 1.0;
  /// Set when no group has within-group spread: W is 0 (p = 1) when there
  /// is no between-group spread either, +inf (p = 0) otherwise.
  bool degenerate = false;
};

/// Levene's W on absolute deviations from each group's mean (classic) or
/// median (Brown-Forsythe); p is the upper tail of F(k-1, N-k).
/// TooFewValues when fewer than two groups or any group has < 2 values.
LeveneResult levene_test(std::span<const std::vector<double>> groups,
                         LeveneCenter center = LeveneCenter::mean);
LeveneResult levene_test(std::span<const double> group_a, std::span<const double> group_b,
                         LeveneCenter center = LeveneCenter::mean);

/// Regularized incomplete beta I_x(a, b) by continued fraction.
/// DomainError unless a > 0, b > 0 and 0 <= x <= 1.
double incomplete_beta(double a, double b, double x);

/// CDF and upper tail of the F(d1, d2) distribution.
double f_cdf(double x, double d1, double d2);
double f_sf(double x, double d1, double d2);

}  // namespace debatelab::stats

#include "debatelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "debatelab/error.hpp"

namespace debatelab::stats {

double mean(std::span<const double> values) {
  if (values.empty()) throw TooFewValues("mean of an empty list");
  double sum = 0.0;
  for (double x : values) sum += x;
  return sum / static_cast<double>(values.size());
}

MeanStd mean_std(std::span<const double> values) {
  if (values.size() < 2) throw TooFewValues("standard deviation needs at least two values");
  const double m = mean(values);
  double ss = 0.0;
  for (double x : values) ss += (x - m) * (x - m);
  return {m, std::sqrt(ss / static_cast<double>(values.size() - 1))};
}

double median(std::span<const double> values) {
  if (values.empty()) throw TooFewValues("median of an empty list");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::size_t Histogram::in_range() const {
  std::size_t n = 0;
  for (const HistogramBin& b : bins) n += b.count;
  return n;
}

Histogram histogram(std::span<const double> values, int bins, double lo, double hi) {
  if (bins < 1) throw BadRange("histogram needs at least one bin");
  if (!(std::isfinite(lo) && std::isfinite(hi) && hi > lo))
    throw BadRange("histogram range must satisfy lo < hi");
  Histogram h;
  const double width = (hi - lo) / bins;
  h.bins.reserve(static_cast<std::size_t>(bins));
  for (int i = 0; i < bins; ++i)
    h.bins.push_back({lo + i * width, i + 1 == bins ? hi : lo + (i + 1) * width, 0});
  for (double v : values) {
    if (!std::isfinite(v) || v < lo || v > hi) {
      ++h.out_of_range;
      continue;
    }
    auto index = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * bins));
    index = std::min(index, static_cast<std::size_t>(bins - 1));
    ++h.bins[index].count;
  }
  return h;
}

LeveneResult levene_test(std::span<const std::vector<double>> groups, LeveneCenter center) {
  const std::size_t k = groups.size();
  if (k < 2) throw TooFewValues("Levene's test needs at least two groups");
  std::size_t total = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw TooFewValues("each Levene group needs at least two values");
    total += g.size();
  }

  std::vector<std::vector<double>> dev(k);
  std::vector<double> group_mean(k);
  double grand = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double c = center == LeveneCenter::mean ? mean(groups[i]) : median(groups[i]);
    dev[i].reserve(groups[i].size());
    for (double y : groups[i]) dev[i].push_back(std::abs(y - c));
    group_mean[i] = mean(dev[i]);
    grand += group_mean[i] * static_cast<double>(dev[i].size());
  }
  grand /= static_cast<double>(total);

  double between = 0.0;
  double within = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = group_mean[i] - grand;
    between += static_cast<double>(dev[i].size()) * d * d;
    for (double z : dev[i]) within += (z - group_mean[i]) * (z - group_mean[i]);
  }

  const double df1 = static_cast<double>(k - 1);
  const double df2 = static_cast<double>(total - k);
  LeveneResult r;
  if (within == 0.0) {
    r.degenerate = true;
    if (between == 0.0) return r;
    r.w = std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
    return r;
  }
  r.w = (df2 / df1) * (between / within);
  r.p_value = f_sf(r.w, df1, df2);
  return r;
}

LeveneResult levene_test(std::span<const double> group_a, std::span<const double> group_b,
                         LeveneCenter center) {
  const std::vector<double> groups[] = {{group_a.begin(), group_a.end()},
                                        {group_b.begin(), group_b.end()}};
  return levene_test(groups, center);
}

namespace {

// Modified Lentz evaluation of the continued fraction for I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
  constexpr double kTiny = 1e-300;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 100000;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) return h;
  }
  throw DomainError("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b)))
    throw DomainError("incomplete beta needs a > 0 and b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta needs 0 <= x <= 1");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  double result;
  if (x < (a + 1.0) / (a + b + 2.0)) {
    result = front * beta_continued_fraction(a, b, x) / a;
  } else {
    result = 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
  }
  return std::clamp(result, 0.0, 1.0);
}

double f_cdf(double x, double d1, double d2) {
  if (!(d1 > 0.0 && d2 > 0.0)) throw DomainError("F distribution needs positive degrees of freedom");
  if (std::isnan(x)) throw DomainError("F distribution at NaN");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return incomplete_beta(d1 / 2.0, d2 / 2.0, d1 * x / (d1 * x + d2));
}

double f_sf(double x, double d1, double d2) {
  if (!(d1 > 0.0 && d2 > 0.0)) throw DomainError("F distribution needs positive degrees of freedom");
  if (std::isnan(x)) throw DomainError("F distribution at NaN");
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  return incomplete_beta(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * x));
}

}  // namespace debatelab::stats

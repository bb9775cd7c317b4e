#include "tcprio/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tcprio/rng.hpp"

namespace tcprio {

namespace {

double sorted_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw std::invalid_argument("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  return sorted_quantile(values, 0.5);
}

double resampled_median(std::span<const double> pool, std::size_t n, Rng& rng,
                        std::vector<double>& scratch) {
  scratch.clear();
  for (std::size_t i = 0; i < n; ++i) {
    scratch.push_back(pool[static_cast<std::size_t>(rng.below(pool.size()))]);
  }
  std::sort(scratch.begin(), scratch.end());
  return sorted_quantile(scratch, 0.5);
}

}  // namespace

double median(std::span<const double> values) {
  return median_of(std::vector<double>(values.begin(), values.end()));
}

double interquartile_range(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
}

double cliffs_delta(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("cliffs_delta on empty sample");
  long long greater = 0;
  long long lesser = 0;
  for (const double x : a) {
    for (const double y : b) {
      greater += x > y;
      lesser += x < y;
    }
  }
  return static_cast<double>(greater - lesser) /
         (static_cast<double>(a.size()) * static_cast<double>(b.size()));
}

bool bootstrap_significant(std::span<const double> a, std::span<const double> b,
                           std::size_t iterations, double confidence, std::uint64_t seed) {
  if (a.empty() || b.empty()) throw std::invalid_argument("bootstrap on empty sample");
  const double observed =
      std::abs(median_of({a.begin(), a.end()}) - median_of({b.begin(), b.end()}));

  std::vector<double> pool;
  pool.reserve(a.size() + b.size());
  pool.insert(pool.end(), a.begin(), a.end());
  pool.insert(pool.end(), b.begin(), b.end());

  Rng rng = derive_rng(seed, "bootstrap");
  std::vector<double> scratch;
  std::size_t at_least_as_extreme = 0;
  for (std::size_t i = 0; i < iterations; ++i) {
    const double ma = resampled_median(pool, a.size(), rng, scratch);
    const double mb = resampled_median(pool, b.size(), rng, scratch);
    if (std::abs(ma - mb) >= observed) ++at_least_as_extreme;
  }
  const double p = static_cast<double>(at_least_as_extreme) / static_cast<double>(iterations);
  return p < 1.0 - confidence;
}

namespace {

struct Treatment {
  const MetricSample* sample;
  double median;
};

// Split [lo, hi) at the boundary maximizing the between-group sum of squares
// of treatment medians; accept only if the pooled sides differ significantly
// with a non-negligible effect.
void rank_segment(std::vector<Treatment>& treatments, std::size_t lo, std::size_t hi,
                  const ScottKnottOptions& options, std::vector<std::size_t>& cluster_of,
                  std::size_t& next_cluster) {
  if (hi - lo <= 1) {
    if (hi > lo) cluster_of[lo] = next_cluster++;
    return;
  }

  double total = 0.0;
  for (std::size_t i = lo; i < hi; ++i) total += treatments[i].median;
  const double grand_mean = total / static_cast<double>(hi - lo);

  double best_bss = -1.0;
  std::size_t best_split = lo;
  double left_sum = 0.0;
  for (std::size_t split = lo + 1; split < hi; ++split) {
    left_sum += treatments[split - 1].median;
    const double n_left = static_cast<double>(split - lo);
    const double n_right = static_cast<double>(hi - split);
    const double mean_left = left_sum / n_left;
    const double mean_right = (total - left_sum) / n_right;
    const double bss = n_left * (mean_left - grand_mean) * (mean_left - grand_mean) +
                       n_right * (mean_right - grand_mean) * (mean_right - grand_mean);
    if (bss > best_bss) {
      best_bss = bss;
      best_split = split;
    }
  }

  std::vector<double> left_values, right_values;
  for (std::size_t i = lo; i < best_split; ++i) {
    left_values.insert(left_values.end(), treatments[i].sample->values.begin(),
                       treatments[i].sample->values.end());
  }
  for (std::size_t i = best_split; i < hi; ++i) {
    right_values.insert(right_values.end(), treatments[i].sample->values.begin(),
                        treatments[i].sample->values.end());
  }

  const bool distinct =
      std::abs(cliffs_delta(left_values, right_values)) >= options.min_effect_size &&
      bootstrap_significant(left_values, right_values, options.bootstrap_iterations,
                            options.confidence, options.seed);
  if (!distinct) {
    const std::size_t cluster = next_cluster++;
    for (std::size_t i = lo; i < hi; ++i) cluster_of[i] = cluster;
    return;
  }
  rank_segment(treatments, lo, best_split, options, cluster_of, next_cluster);
  rank_segment(treatments, best_split, hi, options, cluster_of, next_cluster);
}

}  // namespace

std::map<std::string, int> scott_knott(const std::vector<MetricSample>& samples,
                                       const ScottKnottOptions& options) {
  if (samples.empty()) return {};
  for (const MetricSample& s : samples) {
    if (s.values.empty()) throw std::invalid_argument("empty sample for " + s.algorithm);
  }

  std::vector<Treatment> treatments;
  treatments.reserve(samples.size());
  for (const MetricSample& s : samples) treatments.push_back({&s, median(s.values)});
  std::stable_sort(treatments.begin(), treatments.end(),
                   [](const Treatment& a, const Treatment& b) {
                     if (a.median != b.median) return a.median < b.median;
                     return a.sample->algorithm < b.sample->algorithm;
                   });

  std::vector<std::size_t> cluster_of(treatments.size(), 0);
  std::size_t next_cluster = 0;
  rank_segment(treatments, 0, treatments.size(), options, cluster_of, next_cluster);

  // Clusters were assigned left to right over the median-sorted treatments,
  // but recursion order is not monotone; renumber by position so rank 1 is
  // the lowest-median cluster.
  std::map<std::string, int> ranks;
  int rank = 0;
  std::size_t previous_cluster = treatments.empty() ? 0 : cluster_of[0] + 1;
  for (std::size_t i = 0; i < treatments.size(); ++i) {
    if (cluster_of[i] != previous_cluster) {
      ++rank;
      previous_cluster = cluster_of[i];
    }
    ranks[treatments[i].sample->algorithm] = rank;
  }
  return ranks;
}

}  // namespace tcprio

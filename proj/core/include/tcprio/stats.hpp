#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace tcprio {

struct MetricSample {
  std::string algorithm;
  std::vector<double> values;  // one per simulated session
};

// (#{x > y} - #{x < y}) / (|a| * |b|), in [-1, 1].
double cliffs_delta(std::span<const double> a, std::span<const double> b);

// Two-sided bootstrap test on the difference of medians: both resamples are
// drawn from the pooled values (null hypothesis), and the observed difference
// is compared against that null distribution. Seeded and deterministic.
bool bootstrap_significant(std::span<const double> a, std::span<const double> b,
                           std::size_t iterations = 1000, double confidence = 0.99,
                           std::uint64_t seed = 1);

struct ScottKnottOptions {
  std::size_t bootstrap_iterations = 1000;
  double confidence = 0.99;
  double min_effect_size = 0.147;  // Cliff's delta below this is negligible
  std::uint64_t seed = 1;
};

// Recursive binary clustering: treatments are ordered by median, the split
// maximizing the between-group sum of squares is accepted only when both the
// bootstrap test and Cliff's delta call the two sides different. Ranks start
// at 1 for the lowest-median cluster.
std::map<std::string, int> scott_knott(const std::vector<MetricSample>& samples,
                                       const ScottKnottOptions& options = {});

double median(std::span<const double> values);
double interquartile_range(std::span<const double> values);

}  // namespace tcprio

#include <doctest.h>

#include <algorithm>

#include "tcprio/rng.hpp"
#include "tcprio/stats.hpp"

using namespace tcprio;

namespace {

std::vector<double> normal_sample(Rng& rng, std::size_t n, double mean, double sigma) {
  std::vector<double> values(n);
  for (double& v : values) v = mean + sigma * rng.normal();
  return values;
}

}  // namespace

TEST_CASE("cliffs_delta basics") {
  const std::vector<double> a = {1, 2};
  const std::vector<double> b = {1, 3};
  CHECK(cliffs_delta(a, a) == 0.0);
  CHECK(cliffs_delta(std::vector<double>{5, 6}, std::vector<double>{1, 2}) == 1.0);
  CHECK(cliffs_delta(a, b) == doctest::Approx(-0.25));
}

TEST_CASE("cliffs_delta is antisymmetric") {
  Rng rng(61);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = normal_sample(rng, 1 + rng.below(20), rng.normal(), 1.0);
    const auto b = normal_sample(rng, 1 + rng.below(20), rng.normal(), 1.0);
    CHECK(cliffs_delta(a, b) == doctest::Approx(-cliffs_delta(b, a)).epsilon(1e-12));
  }
}

TEST_CASE("bootstrap: identical samples are never significant") {
  const std::vector<double> a = {0.5, 0.6, 0.7, 0.4, 0.55};
  CHECK_FALSE(bootstrap_significant(a, a));
}

TEST_CASE("bootstrap: ten-sigma separation is significant") {
  Rng rng(67);
  const auto a = normal_sample(rng, 30, 0.0, 1.0);
  const auto b = normal_sample(rng, 30, 10.0, 1.0);
  CHECK(bootstrap_significant(a, b));
}

TEST_CASE("bootstrap calibration: same distribution rarely flagged") {
  Rng rng(73);
  int significant = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = normal_sample(rng, 25, 0.0, 1.0);
    const auto b = normal_sample(rng, 25, 0.0, 1.0);
    significant += bootstrap_significant(a, b, 1000, 0.99, rng.next_u64());
  }
  CHECK(significant <= 5);  // >= 95% of trials must be non-significant
}

TEST_CASE("scott_knott separates the far cluster only") {
  Rng rng(79);
  std::vector<MetricSample> samples = {
      {"near_a", normal_sample(rng, 49, 0.5, 0.02)},
      {"near_b", normal_sample(rng, 49, 0.5 + 1e-4, 0.02)},
      {"far", normal_sample(rng, 49, 0.9, 0.02)},
  };
  const auto ranks = scott_knott(samples);
  CHECK(ranks.at("near_a") == 1);
  CHECK(ranks.at("near_b") == 1);
  CHECK(ranks.at("far") == 2);
}

TEST_CASE("scott_knott: identical samples share one rank") {
  const std::vector<double> values = {0.5, 0.52, 0.48};
  const std::vector<MetricSample> samples = {{"a", values}, {"b", values}, {"c", values}};
  const auto ranks = scott_knott(samples);
  CHECK(ranks.at("a") == 1);
  CHECK(ranks.at("b") == 1);
  CHECK(ranks.at("c") == 1);
}

TEST_CASE("scott_knott: a single treatment is rank 1") {
  const std::vector<MetricSample> samples = {{"only", {0.4, 0.6}}};
  CHECK(scott_knott(samples).at("only") == 1);
}

TEST_CASE("scott_knott ranks are contiguous from 1 and shuffle-invariant") {
  Rng rng(83);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<MetricSample> samples;
    const std::size_t k = 2 + rng.below(5);
    for (std::size_t i = 0; i < k; ++i) {
      samples.push_back({"algo" + std::to_string(i),
                         normal_sample(rng, 30, rng.next_double(), 0.01 + 0.05 * rng.next_double())});
    }
    const auto ranks = scott_knott(samples);

    std::vector<int> seen;
    for (const auto& [algo, rank] : ranks) seen.push_back(rank);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (std::size_t i = 0; i < seen.size(); ++i) CHECK(seen[i] == static_cast<int>(i) + 1);

    std::vector<MetricSample> shuffled = samples;
    Rng shuffle_rng(rng.next_u64());
    shuffle_rng.shuffle(shuffled);
    CHECK(scott_knott(shuffled) == ranks);
  }
}

TEST_CASE("scott_knott orders ranks by median, 1 = lowest") {
  Rng rng(89);
  std::vector<MetricSample> samples = {
      {"high", normal_sample(rng, 40, 0.9, 0.01)},
      {"low", normal_sample(rng, 40, 0.1, 0.01)},
      {"mid", normal_sample(rng, 40, 0.5, 0.01)},
  };
  const auto ranks = scott_knott(samples);
  CHECK(ranks.at("low") == 1);
  CHECK(ranks.at("mid") == 2);
  CHECK(ranks.at("high") == 3);
}

TEST_CASE("median and IQR helpers") {
  const std::vector<double> values = {4.0, 1.0, 3.0, 2.0};
  CHECK(median(values) == doctest::Approx(2.5));
  CHECK(interquartile_range(values) == doctest::Approx(1.5));
  CHECK(median(std::vector<double>{7.0}) == 7.0);
}

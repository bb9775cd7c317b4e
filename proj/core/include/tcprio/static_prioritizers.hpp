#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tcprio/feature.hpp"
#include "tcprio/history.hpp"

namespace tcprio {

enum class RankDirection { Ascending, Descending };

struct PriorityScore {
  std::string test_id;
  double score;
};

// Stable sort on score; ties keep input (dataset) order.
std::vector<std::string> order_by(std::vector<PriorityScore> scores, RankDirection direction);

// A1: uniform permutation, reproducible from seed.
std::vector<std::string> order_random(std::span<const std::string> universe, std::uint64_t seed);

// A2: failing tests first in ascending duration, then the rest in ascending
// duration. Maximizes APFDc with unit severities; simulation-only oracle.
std::vector<std::string> order_optimal(std::span<const std::string> universe,
                                       const std::unordered_set<std::string>& failures,
                                       const std::unordered_map<std::string, double>& durations);

// Per-record history metrics. `session` is the index of the session being
// prioritized; only outcomes[0..session) are inspected.
std::size_t metric_b1_time_since_last_failure(const TestRecord& record, std::size_t session);
double metric_b2_failure_rate(const TestRecord& record, std::size_t session);
double metric_b3_exponential_decay(const TestRecord& record, std::size_t session,
                                   double alpha = 0.9);
double metric_b4_rocket(const TestRecord& record, std::size_t session);

struct MahalanobisScores {
  std::vector<double> distances;      // squared distance to the origin, dataset order
  bool fell_back_to_failure_rate = false;  // singular covariance
};
// B5: squared Mahalanobis distance of (consecutive skips, failure rate) to the
// origin, sample covariance over all tests. Falls back to B2 on singular S.
MahalanobisScores metric_b5_mahalanobis(const SessionHistory& history, std::size_t session);

// C1 cost estimate: mean duration over prior executed (P/F) sessions.
double estimated_cost(const TestRecord& record, std::size_t session);

// Whole-universe orders for the history metrics, dataset-index tie-break.
std::vector<std::string> order_b1(const SessionHistory& history, std::size_t session);
std::vector<std::string> order_b2(const SessionHistory& history, std::size_t session);
std::vector<std::string> order_b3(const SessionHistory& history, std::size_t session,
                                  double alpha = 0.9);
std::vector<std::string> order_b4(const SessionHistory& history, std::size_t session);
std::vector<std::string> order_b5(const SessionHistory& history, std::size_t session);
std::vector<std::string> order_c1(const SessionHistory& history, std::size_t session);

// D1-D3: ridge regression from text features to history-derived labels,
// ordered by descending prediction.
enum class LabelScheme { SimpleHistory, AllHistory, WeightedHistory };

struct SupervisedOrder {
  std::vector<std::string> order;
  bool degenerate_labels = false;  // zero-variance labels; order fell back to dataset order
};

SupervisedOrder order_supervised(const SessionHistory& history, std::size_t session,
                                 LabelScheme scheme, const TextFeatures& features,
                                 double ridge_lambda = 1.0);

// Conjugate-gradient solve of (X^T X + lambda I) w = X^T y over sparse rows.
std::vector<double> ridge_regression(const std::vector<const FeatureVector*>& rows,
                                     std::span<const double> y, std::size_t dimensionality,
                                     double lambda, std::size_t max_iterations = 2000,
                                     double tolerance = 1e-12);

}  // namespace tcprio

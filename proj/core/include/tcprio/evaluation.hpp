#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tcprio {

// One prioritized session scored against ground truth.
struct SessionResult {
  std::vector<std::string> order;  // complete permutation of the universe
  std::unordered_set<std::string> failures;
  std::unordered_map<std::string, double> durations;  // seconds per test
  double algo_wall_seconds = 0.0;
};

// Average percentage of failures detected. Empty optional when the session
// had no failures (sentinel; aggregation skips those sessions).
std::optional<double> apfd(const SessionResult& result);

// Cost-weighted variant; unit severities unless a map is supplied. Throws on
// zero total duration.
std::optional<double> apfdc(const SessionResult& result);
std::optional<double> apfdc(const SessionResult& result,
                            const std::unordered_map<std::string, double>& severities);

struct CurvePoint {
  double cost_fraction;
  double recall;
};

// Recall vs. cumulative cost fraction, one point per executed test plus the
// (0,0) origin. Trapezoidal integration of this polyline equals apfdc with
// unit severities. Requires at least one failure.
std::vector<CurvePoint> recall_cost_curve(const SessionResult& result);

double trapezoid_area(const std::vector<CurvePoint>& curve);

// Prioritization compute time relative to suite runtime.
double overhead(const SessionResult& result);

}  // namespace tcprio

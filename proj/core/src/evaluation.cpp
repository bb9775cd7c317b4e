#include "tcprio/evaluation.hpp"

#include <stdexcept>

namespace tcprio {

namespace {

void validate(const SessionResult& result) {
  std::unordered_set<std::string> seen;
  seen.reserve(result.order.size());
  for (const std::string& id : result.order) {
    if (!seen.insert(id).second) throw std::invalid_argument("order contains duplicate: " + id);
    if (result.durations.find(id) == result.durations.end()) {
      throw std::invalid_argument("missing duration for " + id);
    }
  }
  for (const std::string& id : result.failures) {
    if (seen.find(id) == seen.end()) {
      throw std::invalid_argument("failure not present in order: " + id);
    }
  }
}

double total_duration(const SessionResult& result) {
  double total = 0.0;
  for (const std::string& id : result.order) total += result.durations.at(id);
  return total;
}

}  // namespace

std::optional<double> apfd(const SessionResult& result) {
  validate(result);
  const std::size_t n = result.order.size();
  const std::size_t m = result.failures.size();
  if (m == 0) return std::nullopt;

  // Each failing test is its own failure: TF_i is its 1-based position.
  double position_sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    if (result.failures.count(result.order[p])) position_sum += static_cast<double>(p + 1);
  }
  return 1.0 - position_sum / (static_cast<double>(n) * static_cast<double>(m)) +
         1.0 / (2.0 * static_cast<double>(n));
}

std::optional<double> apfdc(const SessionResult& result) {
  static const std::unordered_map<std::string, double> unit;
  return apfdc(result, unit);
}

std::optional<double> apfdc(const SessionResult& result,
                            const std::unordered_map<std::string, double>& severities) {
  validate(result);
  if (result.failures.empty()) return std::nullopt;

  const double total = total_duration(result);
  if (total <= 0.0) throw std::invalid_argument("total suite duration is zero");

  const auto severity = [&severities](const std::string& id) {
    const auto it = severities.find(id);
    return it == severities.end() ? 1.0 : it->second;
  };

  double numerator = 0.0;
  double severity_sum = 0.0;
  double cost_before = 0.0;
  for (const std::string& id : result.order) {
    const double duration = result.durations.at(id);
    if (result.failures.count(id)) {
      const double f = severity(id);
      numerator += f * (total - cost_before - 0.5 * duration);
      severity_sum += f;
    }
    cost_before += duration;
  }
  return numerator / (total * severity_sum);
}

std::vector<CurvePoint> recall_cost_curve(const SessionResult& result) {
  validate(result);
  if (result.failures.empty()) {
    throw std::invalid_argument("recall curve undefined without failures");
  }
  const double total = total_duration(result);
  if (total <= 0.0) throw std::invalid_argument("total suite duration is zero");

  const auto m = static_cast<double>(result.failures.size());
  std::vector<CurvePoint> curve;
  curve.reserve(result.order.size() + 1);
  curve.push_back({0.0, 0.0});
  double cost = 0.0;
  double found = 0.0;
  for (const std::string& id : result.order) {
    cost += result.durations.at(id);
    if (result.failures.count(id)) found += 1.0;
    curve.push_back({cost / total, found / m});
  }
  curve.back().cost_fraction = 1.0;  // clamp rounding
  return curve;
}

double trapezoid_area(const std::vector<CurvePoint>& curve) {
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    area += (curve[i].cost_fraction - curve[i - 1].cost_fraction) *
            (curve[i].recall + curve[i - 1].recall) * 0.5;
  }
  return area;
}

double overhead(const SessionResult& result) {
  validate(result);
  const double total = total_duration(result);
  if (total <= 0.0) throw std::invalid_argument("total suite duration is zero");
  return result.algo_wall_seconds / total;
}

}  // namespace tcprio

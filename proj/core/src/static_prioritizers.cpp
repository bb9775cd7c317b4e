#include "tcprio/static_prioritizers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tcprio/rng.hpp"

namespace tcprio {

namespace {

void check_session(const SessionHistory& history, std::size_t session) {
  if (session > history.session_count()) {
    throw std::out_of_range("session index exceeds history length");
  }
}

std::vector<std::string> order_by_metric(const SessionHistory& history, std::size_t session,
                                         RankDirection direction,
                                         double (*metric)(const TestRecord&, std::size_t)) {
  std::vector<PriorityScore> scores;
  scores.reserve(history.test_count());
  for (const TestRecord& rec : history.tests()) {
    scores.push_back({rec.test_id, metric(rec, session)});
  }
  return order_by(std::move(scores), direction);
}

}  // namespace

std::vector<std::string> order_by(std::vector<PriorityScore> scores, RankDirection direction) {
  std::stable_sort(scores.begin(), scores.end(),
                   [direction](const PriorityScore& a, const PriorityScore& b) {
                     return direction == RankDirection::Ascending ? a.score < b.score
                                                                  : a.score > b.score;
                   });
  std::vector<std::string> order;
  order.reserve(scores.size());
  for (PriorityScore& s : scores) order.push_back(std::move(s.test_id));
  return order;
}

std::vector<std::string> order_random(std::span<const std::string> universe, std::uint64_t seed) {
  std::vector<std::string> order(universe.begin(), universe.end());
  Rng rng = derive_rng(seed, "random-order");
  rng.shuffle(order);
  return order;
}

std::vector<std::string> order_optimal(std::span<const std::string> universe,
                                       const std::unordered_set<std::string>& failures,
                                       const std::unordered_map<std::string, double>& durations) {
  std::vector<std::size_t> indices(universe.size());
  std::iota(indices.begin(), indices.end(), 0);
  const auto duration_of = [&](std::size_t i) {
    const auto it = durations.find(universe[i]);
    return it == durations.end() ? 0.0 : it->second;
  };
  // Shortest failing tests first: by the exchange argument this maximizes
  // APFDc for unit severities.
  std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
    const bool fa = failures.count(universe[a]) > 0;
    const bool fb = failures.count(universe[b]) > 0;
    if (fa != fb) return fa;
    return duration_of(a) < duration_of(b);
  });
  std::vector<std::string> order;
  order.reserve(universe.size());
  for (const std::size_t i : indices) order.push_back(universe[i]);
  return order;
}

std::size_t metric_b1_time_since_last_failure(const TestRecord& record, std::size_t session) {
  std::size_t streak = 0;
  for (std::size_t s = session; s-- > 0;) {
    if (is_failure(record.outcomes[s])) break;
    ++streak;
  }
  return streak;
}

double metric_b2_failure_rate(const TestRecord& record, std::size_t session) {
  std::size_t executed = 0;
  std::size_t failed = 0;
  for (std::size_t s = 0; s < session; ++s) {
    if (is_executed(record.outcomes[s])) {
      ++executed;
      failed += is_failure(record.outcomes[s]);
    }
  }
  // New tests get a neutral 0 rather than a division error.
  if (executed == 0) return 0.0;
  return static_cast<double>(failed) / static_cast<double>(executed);
}

double metric_b3_exponential_decay(const TestRecord& record, std::size_t session, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0, 1]");
  double value = 0.0;
  for (std::size_t s = 0; s < session; ++s) {
    const double h = is_failure(record.outcomes[s]) ? 1.0 : 0.0;
    value = s == 0 ? h : alpha * h + (1.0 - alpha) * value;
  }
  return value;
}

double metric_b4_rocket(const TestRecord& record, std::size_t session) {
  double value = 0.0;
  for (std::size_t s = 0; s < session; ++s) {
    if (!is_failure(record.outcomes[s])) continue;
    const std::size_t age = session - s;  // 1 = immediately previous session
    value += age == 1 ? 0.7 : age == 2 ? 0.2 : 0.1;
  }
  return value;
}

MahalanobisScores metric_b5_mahalanobis(const SessionHistory& history, std::size_t session) {
  check_session(history, session);
  const std::size_t n = history.test_count();

  // Metric pair per test: consecutive skips before the session, failure rate.
  std::vector<double> xs(n), ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TestRecord& rec = history.test(i);
    std::size_t skips = 0;
    for (std::size_t s = session; s-- > 0;) {
      if (is_executed(rec.outcomes[s])) break;
      ++skips;
    }
    xs[i] = static_cast<double>(skips);
    ys[i] = metric_b2_failure_rate(rec, session);
  }

  MahalanobisScores result;
  const double nd = static_cast<double>(n);
  const double mean_x = std::accumulate(xs.begin(), xs.end(), 0.0) / nd;
  const double mean_y = std::accumulate(ys.begin(), ys.end(), 0.0) / nd;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    syy += (ys[i] - mean_y) * (ys[i] - mean_y);
    sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
  }
  if (n >= 2) {
    sxx /= nd - 1.0;
    syy /= nd - 1.0;
    sxy /= nd - 1.0;
  }

  const double det = sxx * syy - sxy * sxy;
  if (n < 2 || !(std::abs(det) > 1e-12)) {
    result.fell_back_to_failure_rate = true;
    result.distances = std::move(ys);
    return result;
  }

  // d(x) = x^T S^-1 x with x the raw metric point (distance to the origin).
  const double inv_xx = syy / det;
  const double inv_yy = sxx / det;
  const double inv_xy = -sxy / det;
  result.distances.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    result.distances[i] =
        xs[i] * xs[i] * inv_xx + 2.0 * xs[i] * ys[i] * inv_xy + ys[i] * ys[i] * inv_yy;
  }
  return result;
}

double estimated_cost(const TestRecord& record, std::size_t session) {
  double total = 0.0;
  std::size_t executed = 0;
  for (std::size_t s = 0; s < session; ++s) {
    if (is_executed(record.outcomes[s])) {
      total += record.durations[s];
      ++executed;
    }
  }
  return executed == 0 ? 0.0 : total / static_cast<double>(executed);
}

std::vector<std::string> order_b1(const SessionHistory& history, std::size_t session) {
  check_session(history, session);
  return order_by_metric(history, session, RankDirection::Ascending,
                         [](const TestRecord& r, std::size_t s) {
                           return static_cast<double>(metric_b1_time_since_last_failure(r, s));
                         });
}

std::vector<std::string> order_b2(const SessionHistory& history, std::size_t session) {
  check_session(history, session);
  return order_by_metric(history, session, RankDirection::Descending, [](const TestRecord& r, std::size_t s) {
    return metric_b2_failure_rate(r, s);
  });
}

std::vector<std::string> order_b3(const SessionHistory& history, std::size_t session,
                                  double alpha) {
  check_session(history, session);
  std::vector<PriorityScore> scores;
  scores.reserve(history.test_count());
  for (const TestRecord& rec : history.tests()) {
    scores.push_back({rec.test_id, metric_b3_exponential_decay(rec, session, alpha)});
  }
  return order_by(std::move(scores), RankDirection::Descending);
}

std::vector<std::string> order_b4(const SessionHistory& history, std::size_t session) {
  check_session(history, session);
  return order_by_metric(history, session, RankDirection::Descending, [](const TestRecord& r, std::size_t s) {
    return metric_b4_rocket(r, s);
  });
}

std::vector<std::string> order_b5(const SessionHistory& history, std::size_t session) {
  const MahalanobisScores scores = metric_b5_mahalanobis(history, session);
  std::vector<PriorityScore> ranked;
  ranked.reserve(history.test_count());
  for (std::size_t i = 0; i < history.test_count(); ++i) {
    ranked.push_back({history.test(i).test_id, scores.distances[i]});
  }
  return order_by(std::move(ranked), RankDirection::Descending);
}

std::vector<std::string> order_c1(const SessionHistory& history, std::size_t session) {
  check_session(history, session);
  return order_by_metric(history, session, RankDirection::Ascending, [](const TestRecord& r, std::size_t s) {
    return estimated_cost(r, s);
  });
}

std::vector<double> ridge_regression(const std::vector<const FeatureVector*>& rows,
                                     std::span<const double> y, std::size_t dimensionality,
                                     double lambda, std::size_t max_iterations,
                                     double tolerance) {
  if (rows.size() != y.size()) throw std::invalid_argument("rows/labels size mismatch");
  const std::size_t d = dimensionality;

  // A*v = X^T (X v) + lambda v, applied through two sparse passes.
  std::vector<double> row_cache(rows.size());
  const auto apply = [&](std::span<const double> v, std::span<double> out) {
    for (std::size_t i = 0; i < rows.size(); ++i) row_cache[i] = rows[i]->dot_dense(v);
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const auto& [index, value] : rows[i]->entries()) out[index] += value * row_cache[i];
    }
    for (std::size_t j = 0; j < d; ++j) out[j] += lambda * v[j];
  };

  std::vector<double> rhs(d, 0.0);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [index, value] : rows[i]->entries()) rhs[index] += value * y[i];
  }

  std::vector<double> w(d, 0.0), residual = rhs, direction = rhs, av(d);
  double res_sq = std::inner_product(residual.begin(), residual.end(), residual.begin(), 0.0);
  const double rhs_sq = res_sq;
  if (rhs_sq == 0.0) return w;

  for (std::size_t iter = 0; iter < std::min(max_iterations, d + 8); ++iter) {
    if (res_sq <= tolerance * tolerance * rhs_sq) break;
    apply(direction, av);
    const double d_av = std::inner_product(direction.begin(), direction.end(), av.begin(), 0.0);
    if (d_av <= 0.0) break;
    const double alpha = res_sq / d_av;
    for (std::size_t j = 0; j < d; ++j) {
      w[j] += alpha * direction[j];
      residual[j] -= alpha * av[j];
    }
    const double next_sq =
        std::inner_product(residual.begin(), residual.end(), residual.begin(), 0.0);
    const double beta = next_sq / res_sq;
    for (std::size_t j = 0; j < d; ++j) direction[j] = residual[j] + beta * direction[j];
    res_sq = next_sq;
  }
  return w;
}

SupervisedOrder order_supervised(const SessionHistory& history, std::size_t session,
                                 LabelScheme scheme, const TextFeatures& features,
                                 double ridge_lambda) {
  check_session(history, session);
  if (session == 0) throw std::invalid_argument("supervised ordering needs at least one prior session");

  std::vector<double> labels;
  labels.reserve(history.test_count());
  for (const TestRecord& rec : history.tests()) {
    switch (scheme) {
      case LabelScheme::SimpleHistory:
        labels.push_back(is_failure(rec.outcomes[session - 1]) ? 1.0 : 0.0);
        break;
      case LabelScheme::AllHistory:
        labels.push_back(metric_b2_failure_rate(rec, session));
        break;
      case LabelScheme::WeightedHistory:
        labels.push_back(metric_b4_rocket(rec, session));
        break;
    }
  }

  SupervisedOrder result;
  const double first = labels.empty() ? 0.0 : labels.front();
  const bool constant_labels =
      std::all_of(labels.begin(), labels.end(), [first](double v) { return v == first; });
  if (constant_labels) {
    result.degenerate_labels = true;
    result.order = history.test_ids();
    return result;
  }

  std::vector<const FeatureVector*> rows;
  rows.reserve(history.test_count());
  for (const TestRecord& rec : history.tests()) rows.push_back(&features.vectors.at(rec.test_id));
  const std::vector<double> w =
      ridge_regression(rows, labels, features.dimensionality, ridge_lambda);

  std::vector<PriorityScore> scores;
  scores.reserve(history.test_count());
  for (std::size_t i = 0; i < history.test_count(); ++i) {
    scores.push_back({history.test(i).test_id, rows[i]->dot_dense(w)});
  }
  result.order = order_by(std::move(scores), RankDirection::Descending);
  return result;
}

}  // namespace tcprio

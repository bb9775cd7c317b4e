#include "tcprio/dynamic_prioritizers.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

#include "tcprio/static_prioritizers.hpp"

namespace tcprio {

FixedOrderPrioritizer::FixedOrderPrioritizer(std::vector<std::string> order)
    : order_(std::move(order)) {}

std::vector<std::string> FixedOrderPrioritizer::next_batch(std::size_t k) {
  std::vector<std::string> batch;
  while (batch.size() < k && cursor_ < order_.size()) {
    pending_.insert(order_[cursor_]);
    batch.push_back(order_[cursor_++]);
  }
  return batch;
}

void FixedOrderPrioritizer::feedback(const std::string& test_id, bool) {
  if (pending_.erase(test_id) == 0) {
    throw std::logic_error("feedback for test that is not pending: " + test_id);
  }
}

std::size_t FixedOrderPrioritizer::remaining() const { return order_.size() - cursor_; }

namespace detail {

OutcomeMasks::OutcomeMasks(const SessionHistory& history, std::size_t sessions) {
  if (sessions > history.session_count()) throw std::out_of_range("session index out of range");
  words = (sessions + 63) / 64;
  executed.assign(history.test_count(), std::vector<std::uint64_t>(words, 0));
  failed.assign(history.test_count(), std::vector<std::uint64_t>(words, 0));
  for (std::size_t t = 0; t < history.test_count(); ++t) {
    const TestRecord& rec = history.test(t);
    for (std::size_t s = 0; s < sessions; ++s) {
      if (is_executed(rec.outcomes[s])) {
        executed[t][s / 64] |= std::uint64_t{1} << (s % 64);
        if (is_failure(rec.outcomes[s])) failed[t][s / 64] |= std::uint64_t{1} << (s % 64);
      }
    }
  }
}

std::size_t OutcomeMasks::count_and(const std::vector<std::uint64_t>& a,
                                    const std::vector<std::uint64_t>& b) const {
  std::size_t count = 0;
  for (std::size_t w = 0; w < words; ++w) count += std::popcount(a[w] & b[w]);
  return count;
}

std::size_t OutcomeMasks::count_and(const std::vector<std::uint64_t>& a,
                                    const std::vector<std::uint64_t>& b,
                                    const std::vector<std::uint64_t>& c) const {
  std::size_t count = 0;
  for (std::size_t w = 0; w < words; ++w) count += std::popcount(a[w] & b[w] & c[w]);
  return count;
}

std::vector<std::uint64_t> OutcomeMasks::executed_and_passed(std::size_t test) const {
  std::vector<std::uint64_t> mask(words);
  for (std::size_t w = 0; w < words; ++w) mask[w] = executed[test][w] & ~failed[test][w];
  return mask;
}

void PendingTracker::resolve(const std::string& id) {
  if (pending_.erase(id) == 0) {
    throw std::logic_error("feedback for test that is not pending: " + id);
  }
}

}  // namespace detail

namespace {

std::unordered_map<std::string, std::size_t> build_index(const std::vector<std::string>& ids) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
  return index;
}

}  // namespace

CoFailurePrioritizer::CoFailurePrioritizer(const SessionHistory& history, std::size_t session)
    : ids_(history.test_ids()),
      index_(build_index(ids_)),
      masks_(history, session),
      priorities_(ids_.size(), 0.0),
      alive_(ids_.size(), true),
      remaining_(ids_.size()) {}

std::vector<std::string> CoFailurePrioritizer::next_batch(std::size_t k) {
  std::vector<std::size_t> candidates;
  candidates.reserve(remaining_);
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (alive_[i]) candidates.push_back(i);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [this](std::size_t a, std::size_t b) {
    return priorities_[a] > priorities_[b];
  });
  std::vector<std::string> batch;
  for (std::size_t i = 0; i < k && i < candidates.size(); ++i) {
    alive_[candidates[i]] = false;
    --remaining_;
    pending_.mark_pending(ids_[candidates[i]]);
    batch.push_back(ids_[candidates[i]]);
  }
  return batch;
}

void CoFailurePrioritizer::feedback(const std::string& test_id, bool failed) {
  pending_.resolve(test_id);
  const std::size_t finished = index_.at(test_id);
  const std::vector<std::uint64_t> outcome_mask =
      failed ? masks_.failed[finished] : masks_.executed_and_passed(finished);
  for (std::size_t t = 0; t < ids_.size(); ++t) {
    if (!alive_[t]) continue;
    const std::size_t denom = masks_.count_and(masks_.executed[t], outcome_mask);
    if (denom == 0) continue;  // no co-execution history: neutral prior, zero shift
    const std::size_t hits = masks_.count_and(masks_.failed[t], masks_.executed[t], outcome_mask);
    const double p = static_cast<double>(hits) / static_cast<double>(denom);
    priorities_[t] += p - 0.5;
  }
}

std::size_t CoFailurePrioritizer::remaining() const { return remaining_; }

FlippingHistoryPrioritizer::FlippingHistoryPrioritizer(const SessionHistory& history,
                                                       std::size_t session)
    : ids_(history.test_ids()), index_(build_index(ids_)) {
  if (session > history.session_count()) throw std::out_of_range("session index out of range");
  const std::size_t transitions = session > 0 ? session - 1 : 0;
  flip_words_ = (transitions + 63) / 64;
  flips_.assign(ids_.size(), std::vector<std::uint64_t>(flip_words_, 0));
  for (std::size_t t = 0; t < ids_.size(); ++t) {
    const TestRecord& rec = history.test(t);
    for (std::size_t tr = 0; tr < transitions; ++tr) {
      const Outcome before = rec.outcomes[tr];
      const Outcome after = rec.outcomes[tr + 1];
      const bool flipped = (before == Outcome::Passed && after == Outcome::Failed) ||
                           (before == Outcome::Failed && after == Outcome::Passed);
      if (flipped) flips_[t][tr / 64] |= std::uint64_t{1} << (tr % 64);
    }
  }

  priorities_.resize(ids_.size());
  queue_.resize(ids_.size());
  for (std::size_t t = 0; t < ids_.size(); ++t) {
    priorities_[t] = metric_b4_rocket(history.test(t), session);
    queue_[t] = t;
  }
  std::stable_sort(queue_.begin(), queue_.end(), [this](std::size_t a, std::size_t b) {
    return priorities_[a] > priorities_[b];
  });
}

std::vector<std::string> FlippingHistoryPrioritizer::next_batch(std::size_t k) {
  std::vector<std::string> batch;
  while (batch.size() < k && !queue_.empty()) {
    const std::size_t t = queue_.front();
    queue_.erase(queue_.begin());
    pending_.mark_pending(ids_[t]);
    batch.push_back(ids_[t]);
  }
  return batch;
}

void FlippingHistoryPrioritizer::feedback(const std::string& test_id, bool failed) {
  pending_.resolve(test_id);
  if (!failed) return;
  const std::size_t finished = index_.at(test_id);
  for (const std::size_t t : queue_) {
    double count = 0.0;
    for (std::size_t w = 0; w < flip_words_; ++w) {
      count += std::popcount(flips_[finished][w] & flips_[t][w]);
    }
    priorities_[t] = std::max(priorities_[t], count);
  }
  // Stable: equal priorities keep their current relative order.
  std::stable_sort(queue_.begin(), queue_.end(), [this](std::size_t a, std::size_t b) {
    return priorities_[a] > priorities_[b];
  });
}

std::size_t FlippingHistoryPrioritizer::remaining() const { return queue_.size(); }

double FlippingHistoryPrioritizer::priority_of(const std::string& test_id) const {
  return priorities_[index_.at(test_id)];
}

std::size_t FlippingHistoryPrioritizer::flip_count(const std::string& a,
                                                   const std::string& b) const {
  const std::size_t ia = index_.at(a);
  const std::size_t ib = index_.at(b);
  std::size_t count = 0;
  for (std::size_t w = 0; w < flip_words_; ++w) count += std::popcount(flips_[ia][w] & flips_[ib][w]);
  return count;
}

std::size_t RuleSet::rules_with_antecedent(const std::string& test_id) const {
  std::size_t count = 0;
  for (const Rule& rule : rules) count += rule.antecedent == test_id;
  return count;
}

RuleSet e3_mine_rules(const SessionHistory& history, std::size_t session, std::size_t min_support,
                      double min_confidence) {
  const detail::OutcomeMasks masks(history, session);
  const std::size_t n = history.test_count();

  RuleSet set;
  for (std::size_t a = 0; a < n; ++a) {
    const std::vector<std::uint64_t> a_passed = masks.executed_and_passed(a);
    for (const bool a_failed : {true, false}) {
      const std::vector<std::uint64_t>& a_mask = a_failed ? masks.failed[a] : a_passed;
      for (std::size_t b = 0; b < n; ++b) {
        if (a == b) continue;
        const std::size_t denom = masks.count_and(a_mask, masks.executed[b]);
        if (denom == 0) continue;
        const std::vector<std::uint64_t> b_passed = masks.executed_and_passed(b);
        for (const bool b_failed : {true, false}) {
          const std::vector<std::uint64_t>& b_mask = b_failed ? masks.failed[b] : b_passed;
          const std::size_t support = masks.count_and(a_mask, b_mask);
          if (support < min_support) continue;
          const double confidence = static_cast<double>(support) / static_cast<double>(denom);
          if (confidence > min_confidence) {
            set.rules.push_back({history.test(a).test_id, a_failed, history.test(b).test_id,
                                 b_failed, support, confidence});
          }
        }
      }
    }
  }
  return set;
}

RuleBasedPrioritizer::RuleBasedPrioritizer(const SessionHistory& history, std::size_t session,
                                           std::size_t min_support, double min_confidence)
    : ids_(history.test_ids()),
      index_(build_index(ids_)),
      rules_(e3_mine_rules(history, session, min_support, min_confidence)),
      alive_(ids_.size(), true) {
  // Tests that trigger rules come first; failure rate breaks ties.
  std::vector<std::size_t> order(ids_.size());
  std::vector<double> rule_counts(ids_.size());
  std::vector<double> rates(ids_.size());
  for (std::size_t t = 0; t < ids_.size(); ++t) {
    order[t] = t;
    rule_counts[t] = static_cast<double>(rules_.rules_with_antecedent(ids_[t]));
    rates[t] = metric_b2_failure_rate(history.test(t), session);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (rule_counts[a] != rule_counts[b]) return rule_counts[a] > rule_counts[b];
    return rates[a] > rates[b];
  });
  queue_.assign(order.begin(), order.end());
}

std::vector<std::string> RuleBasedPrioritizer::next_batch(std::size_t k) {
  std::vector<std::string> batch;
  while (batch.size() < k && !queue_.empty()) {
    const std::size_t t = queue_.front();
    queue_.pop_front();
    alive_[t] = false;
    pending_.mark_pending(ids_[t]);
    batch.push_back(ids_[t]);
  }
  return batch;
}

void RuleBasedPrioritizer::feedback(const std::string& test_id, bool failed) {
  pending_.resolve(test_id);

  std::vector<std::size_t> to_front;
  std::vector<std::size_t> to_back;
  for (const Rule& rule : rules_.rules) {
    if (rule.antecedent != test_id || rule.antecedent_failed != failed) continue;
    const std::size_t consequent = index_.at(rule.consequent);
    if (!alive_[consequent]) continue;
    (rule.consequent_failed ? to_front : to_back).push_back(consequent);
  }

  const auto remove_from_queue = [this](std::size_t t) {
    const auto it = std::find(queue_.begin(), queue_.end(), t);
    if (it != queue_.end()) queue_.erase(it);
  };
  for (auto it = to_front.rbegin(); it != to_front.rend(); ++it) {
    remove_from_queue(*it);
    queue_.push_front(*it);
  }
  for (const std::size_t t : to_back) {
    remove_from_queue(t);
    queue_.push_back(t);
  }
}

std::size_t RuleBasedPrioritizer::remaining() const { return queue_.size(); }

std::vector<std::string> RuleBasedPrioritizer::queue_snapshot() const {
  std::vector<std::string> snapshot;
  snapshot.reserve(queue_.size());
  for (const std::size_t t : queue_) snapshot.push_back(ids_[t]);
  return snapshot;
}

}  // namespace tcprio

#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tcprio/history.hpp"

namespace tcprio {

// Contract shared by all feedback-driven prioritizers: test ids are emitted
// exactly once per session, in batches, and execution results flow back in
// through feedback(). next_batch after exhaustion returns an empty batch.
class FeedbackPrioritizer {
 public:
  virtual ~FeedbackPrioritizer() = default;

  virtual std::vector<std::string> next_batch(std::size_t k) = 0;
  virtual void feedback(const std::string& test_id, bool failed) = 0;
  virtual std::size_t remaining() const = 0;
};

// Wraps a precomputed order so static algorithms satisfy the same contract.
class FixedOrderPrioritizer final : public FeedbackPrioritizer {
 public:
  explicit FixedOrderPrioritizer(std::vector<std::string> order);

  std::vector<std::string> next_batch(std::size_t k) override;
  void feedback(const std::string& test_id, bool failed) override;
  std::size_t remaining() const override;

 private:
  std::vector<std::string> order_;
  std::size_t cursor_ = 0;
  std::unordered_set<std::string> pending_;
};

namespace detail {

// Per-test session bitmasks over the visible history; shared by E1-E3.
struct OutcomeMasks {
  OutcomeMasks(const SessionHistory& history, std::size_t sessions);

  std::size_t count_and(const std::vector<std::uint64_t>& a,
                        const std::vector<std::uint64_t>& b) const;
  std::size_t count_and(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b,
                        const std::vector<std::uint64_t>& c) const;
  std::vector<std::uint64_t> executed_and_passed(std::size_t test) const;

  std::size_t words = 0;
  std::vector<std::vector<std::uint64_t>> executed;  // pass or fail verdicts only
  std::vector<std::vector<std::uint64_t>> failed;
};

class PendingTracker {
 public:
  void mark_pending(const std::string& id) { pending_.insert(id); }
  void resolve(const std::string& id);
  bool any_pending() const { return !pending_.empty(); }

 private:
  std::unordered_set<std::string> pending_;
};

}  // namespace detail

// E1: co-failure priorities. Every finished result shifts each remaining
// test's priority by P(test fails | finished outcome) - 0.5, estimated over
// prior sessions where both tests ran; pairs with no shared history stay put.
class CoFailurePrioritizer final : public FeedbackPrioritizer {
 public:
  CoFailurePrioritizer(const SessionHistory& history, std::size_t session);

  std::vector<std::string> next_batch(std::size_t k) override;
  void feedback(const std::string& test_id, bool failed) override;
  std::size_t remaining() const override;

  const std::vector<double>& priorities() const { return priorities_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  detail::OutcomeMasks masks_;
  std::vector<double> priorities_;
  std::vector<bool> alive_;
  std::size_t remaining_ = 0;
  detail::PendingTracker pending_;
};

// E2: flipping history. Starts from the ROCKET (B4) order; a failure raises
// each remaining test's priority to its flip count with the failed test
// (max semantics), then the queue is stably re-sorted.
class FlippingHistoryPrioritizer final : public FeedbackPrioritizer {
 public:
  FlippingHistoryPrioritizer(const SessionHistory& history, std::size_t session);

  std::vector<std::string> next_batch(std::size_t k) override;
  void feedback(const std::string& test_id, bool failed) override;
  std::size_t remaining() const override;

  double priority_of(const std::string& test_id) const;
  std::size_t flip_count(const std::string& a, const std::string& b) const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::uint64_t>> flips_;  // per test, bit per transition
  std::size_t flip_words_ = 0;
  std::vector<double> priorities_;
  std::vector<std::size_t> queue_;  // remaining tests, current order
  detail::PendingTracker pending_;
};

// Single-antecedent association rule over pass/fail outcomes.
struct Rule {
  std::string antecedent;
  bool antecedent_failed;
  std::string consequent;
  bool consequent_failed;
  std::size_t support;    // sessions where antecedent and consequent both held
  double confidence;
};

struct RuleSet {
  std::vector<Rule> rules;
  std::size_t rules_with_antecedent(const std::string& test_id) const;
};

// Mines every rule (a=outcome1 => b=outcome2) over sessions where both tests
// ran, keeping those with support >= min_support and confidence > min_confidence.
RuleSet e3_mine_rules(const SessionHistory& history, std::size_t session,
                      std::size_t min_support = 2, double min_confidence = 0.9);

// E3: rule-based scheduling. Initial order by associated-rule count, failure
// rate breaking ties; fired fail rules pull their consequents to the front,
// fired pass rules push theirs to the back.
class RuleBasedPrioritizer final : public FeedbackPrioritizer {
 public:
  RuleBasedPrioritizer(const SessionHistory& history, std::size_t session,
                       std::size_t min_support = 2, double min_confidence = 0.9);

  std::vector<std::string> next_batch(std::size_t k) override;
  void feedback(const std::string& test_id, bool failed) override;
  std::size_t remaining() const override;

  const RuleSet& rules() const { return rules_; }
  std::vector<std::string> queue_snapshot() const;

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  RuleSet rules_;
  std::deque<std::size_t> queue_;
  std::vector<bool> alive_;
  detail::PendingTracker pending_;
};

}  // namespace tcprio

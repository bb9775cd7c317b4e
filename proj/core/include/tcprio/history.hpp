#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tcprio {

// Raised when a dataset violates a structural invariant (duplicate ids,
// ragged session lists, bad durations, ...).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Outcome : std::uint8_t { Passed, Failed, Skipped, Timeout };

// Timeouts are environmental noise, never failures.
inline bool is_failure(Outcome o) { return o == Outcome::Failed; }

// A test ran in a session if it produced a pass or fail verdict.
inline bool is_executed(Outcome o) { return o == Outcome::Passed || o == Outcome::Failed; }

char outcome_code(Outcome o);
Outcome outcome_from_code(char code);

// One test case: identity, per-session outcomes and durations, and either a
// raw description or a pre-featurized numeric vector (exactly one of the two).
struct TestRecord {
  std::string test_id;
  std::optional<std::string> description;
  std::optional<std::vector<double>> prefeaturized;
  std::vector<Outcome> outcomes;   // indexed by session
  std::vector<double> durations;   // seconds, indexed by session

  bool operator==(const TestRecord&) const = default;
};

// An immutable multi-session execution history over a fixed test universe.
// Validates all structural invariants on construction.
class SessionHistory {
 public:
  SessionHistory(std::vector<TestRecord> tests, std::vector<std::string> session_ids);

  std::size_t session_count() const { return session_ids_.size(); }
  const std::vector<std::string>& session_ids() const { return session_ids_; }
  const std::vector<TestRecord>& tests() const { return tests_; }
  std::size_t test_count() const { return tests_.size(); }
  const TestRecord& test(std::size_t index) const { return tests_.at(index); }

  bool contains(const std::string& test_id) const { return index_.count(test_id) > 0; }
  std::size_t index_of(const std::string& test_id) const;

  std::vector<std::string> test_ids() const;

  // Indices of tests that failed in `session` (Timeout excluded).
  std::vector<std::size_t> failing_tests(std::size_t session) const;

  bool operator==(const SessionHistory& other) const {
    return tests_ == other.tests_ && session_ids_ == other.session_ids_;
  }

 private:
  std::vector<TestRecord> tests_;
  std::vector<std::string> session_ids_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Information view: the same universe restricted to the first `sessions`
// sessions. Replay harnesses hand algorithms this truncated copy so outcomes
// of the session under simulation are physically unreachable.
SessionHistory truncated(const SessionHistory& history, std::size_t sessions);

}  // namespace tcprio

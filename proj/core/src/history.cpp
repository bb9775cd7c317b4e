#include "tcprio/history.hpp"

#include <cmath>

namespace tcprio {

char outcome_code(Outcome o) {
  switch (o) {
    case Outcome::Passed: return 'P';
    case Outcome::Failed: return 'F';
    case Outcome::Skipped: return 'S';
    case Outcome::Timeout: return 'T';
  }
  throw std::logic_error("unreachable outcome");
}

Outcome outcome_from_code(char code) {
  switch (code) {
    case 'P': return Outcome::Passed;
    case 'F': return Outcome::Failed;
    case 'S': return Outcome::Skipped;
    case 'T': return Outcome::Timeout;
    default: break;
  }
  throw ValidationError(std::string("unknown outcome code '") + code + "'");
}

SessionHistory::SessionHistory(std::vector<TestRecord> tests, std::vector<std::string> session_ids)
    : tests_(std::move(tests)), session_ids_(std::move(session_ids)) {
  index_.reserve(tests_.size());
  for (std::size_t i = 0; i < tests_.size(); ++i) {
    const TestRecord& rec = tests_[i];
    if (!index_.emplace(rec.test_id, i).second) {
      throw ValidationError("duplicate test_id: " + rec.test_id);
    }
    if (rec.outcomes.size() != session_ids_.size() || rec.durations.size() != session_ids_.size()) {
      throw ValidationError("test " + rec.test_id + " has " + std::to_string(rec.outcomes.size()) +
                            " outcomes / " + std::to_string(rec.durations.size()) +
                            " durations, expected " + std::to_string(session_ids_.size()) +
                            " sessions");
    }
    if (rec.description.has_value() == rec.prefeaturized.has_value()) {
      throw ValidationError("test " + rec.test_id +
                            " must carry exactly one of description or vector");
    }
    for (const double d : rec.durations) {
      if (!std::isfinite(d) || d < 0.0) {
        throw ValidationError("test " + rec.test_id + " has invalid duration");
      }
    }
  }
}

std::size_t SessionHistory::index_of(const std::string& test_id) const {
  const auto it = index_.find(test_id);
  if (it == index_.end()) throw std::out_of_range("unknown test_id: " + test_id);
  return it->second;
}

std::vector<std::string> SessionHistory::test_ids() const {
  std::vector<std::string> ids;
  ids.reserve(tests_.size());
  for (const TestRecord& rec : tests_) ids.push_back(rec.test_id);
  return ids;
}

std::vector<std::size_t> SessionHistory::failing_tests(std::size_t session) const {
  if (session >= session_count()) throw std::out_of_range("session index out of range");
  std::vector<std::size_t> failing;
  for (std::size_t i = 0; i < tests_.size(); ++i) {
    if (is_failure(tests_[i].outcomes[session])) failing.push_back(i);
  }
  return failing;
}

SessionHistory truncated(const SessionHistory& history, std::size_t sessions) {
  if (sessions > history.session_count()) {
    throw std::out_of_range("cannot truncate to more sessions than present");
  }
  std::vector<TestRecord> tests = history.tests();
  for (TestRecord& rec : tests) {
    rec.outcomes.resize(sessions);
    rec.durations.resize(sessions);
  }
  std::vector<std::string> ids(history.session_ids().begin(),
                               history.session_ids().begin() + static_cast<std::ptrdiff_t>(sessions));
  return SessionHistory(std::move(tests), std::move(ids));
}

}  // namespace tcprio

#pragma once

#include <string>
#include <vector>

#include "tcprio/history.hpp"

namespace tcprio::testing {

inline TestRecord make_record(std::string id, std::string description, const std::string& codes,
                              double duration) {
  TestRecord rec;
  rec.test_id = std::move(id);
  rec.description = std::move(description);
  for (const char c : codes) {
    rec.outcomes.push_back(outcome_from_code(c));
    rec.durations.push_back(duration);
  }
  return rec;
}

// The 4-test, 4-session worked example: constant per-test runtimes with
// t1 < t2 < t3 < t4.
inline SessionHistory table1() {
  std::vector<TestRecord> records = {
      make_record("t1", "Test Check Box in page A", "PFSF", 1.0),
      make_record("t2", "Test Radio Button in page A", "FFPF", 2.0),
      make_record("t3", "Test Check Box in page B", "PPFP", 3.0),
      make_record("t4", "Test Radio Button in page B", "FPFF", 4.0),
  };
  return SessionHistory(std::move(records), {"run1", "run2", "run3", "run4"});
}

inline std::vector<std::string> ids(const std::vector<std::string>& v) { return v; }

}  // namespace tcprio::testing

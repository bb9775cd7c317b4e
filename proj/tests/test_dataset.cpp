#include <doctest.h>

#include <sstream>

#include "tcprio/dataset_io.hpp"
#include "tcprio/rng.hpp"
#include "test_helpers.hpp"

using namespace tcprio;

namespace {

SessionHistory from_jsonl(const std::string& text, IngestOptions options = {}) {
  std::istringstream in(text);
  return ingest_jsonl(in, options);
}

const char* kTable1Jsonl = R"({"test_id":"t1","description":"Test Check Box in page A","vector":null,"sessions":[{"id":"run1","outcome":"P","duration_s":1.0,"message":null},{"id":"run2","outcome":"F","duration_s":1.0,"message":"assert mismatch"},{"id":"run3","outcome":"S","duration_s":1.0,"message":null},{"id":"run4","outcome":"F","duration_s":1.0,"message":null}]}
{"test_id":"t2","description":"Test Radio Button in page A","vector":null,"sessions":[{"id":"run1","outcome":"F","duration_s":2.0,"message":null},{"id":"run2","outcome":"F","duration_s":2.0,"message":null},{"id":"run3","outcome":"P","duration_s":2.0,"message":null},{"id":"run4","outcome":"F","duration_s":2.0,"message":null}]}
{"test_id":"t3","description":"Test Check Box in page B","vector":null,"sessions":[{"id":"run1","outcome":"P","duration_s":3.0,"message":null},{"id":"run2","outcome":"P","duration_s":3.0,"message":null},{"id":"run3","outcome":"F","duration_s":3.0,"message":null},{"id":"run4","outcome":"P","duration_s":3.0,"message":null}]}
{"test_id":"t4","description":"Test Radio Button in page B","vector":null,"sessions":[{"id":"run1","outcome":"F","duration_s":4.0,"message":null},{"id":"run2","outcome":"P","duration_s":4.0,"message":null},{"id":"run3","outcome":"F","duration_s":4.0,"message":null},{"id":"run4","outcome":"F","duration_s":4.0,"message":null}]}
)";

}  // namespace

TEST_CASE("jsonl ingest reads the worked example") {
  const SessionHistory history = from_jsonl(kTable1Jsonl);
  CHECK(history.session_count() == 4);
  CHECK(history.test_count() == 4);
  const TestRecord& t1 = history.test(history.index_of("t1"));
  CHECK(t1.outcomes == std::vector<Outcome>{Outcome::Passed, Outcome::Failed, Outcome::Skipped,
                                            Outcome::Failed});
  CHECK(history == tcprio::testing::table1());
}

TEST_CASE("empty file is rejected") {
  CHECK_THROWS_WITH_AS(from_jsonl(""), doctest::Contains("no records"), ParseError);
  CHECK_THROWS_AS(from_jsonl("\n   \n"), ParseError);
}

TEST_CASE("failure with a timeout message becomes Timeout") {
  const std::string line =
      R"({"test_id":"a","description":"d","sessions":[{"id":"r1","outcome":"F","duration_s":1.0,"message":"Step time out after 300s"}]})";
  const SessionHistory history = from_jsonl(line + "\n");
  CHECK(history.test(0).outcomes[0] == Outcome::Timeout);
  CHECK_FALSE(is_failure(history.test(0).outcomes[0]));
  CHECK(history.failing_tests(0).empty());

  SUBCASE("pattern matches with and without the space, case-insensitively") {
    for (const char* message : {"TIMEOUT", "Time Out waiting for page", "timeout"}) {
      const std::string l = std::string(R"({"test_id":"a","description":"d","sessions":[{"id":"r1","outcome":"F","duration_s":1.0,"message":")") +
                            message + R"("}]})";
      CHECK(from_jsonl(l + "\n").test(0).outcomes[0] == Outcome::Timeout);
    }
  }
  SUBCASE("a passing test with a timeout-looking message stays passed") {
    const std::string l =
        R"({"test_id":"a","description":"d","sessions":[{"id":"r1","outcome":"P","duration_s":1.0,"message":"time out"}]})";
    CHECK(from_jsonl(l + "\n").test(0).outcomes[0] == Outcome::Passed);
  }
  SUBCASE("custom pattern overrides the default") {
    IngestOptions options;
    options.timeout_pattern = "deadline exceeded";
    const std::string l =
        R"({"test_id":"a","description":"d","sessions":[{"id":"r1","outcome":"F","duration_s":1.0,"message":"time out"}]})";
    CHECK(from_jsonl(l + "\n", options).test(0).outcomes[0] == Outcome::Failed);
  }
}

TEST_CASE("explicit T outcome is stored as Timeout") {
  const std::string line =
      R"({"test_id":"a","description":"d","sessions":[{"id":"r1","outcome":"T","duration_s":1.0,"message":null}]})";
  CHECK(from_jsonl(line + "\n").test(0).outcomes[0] == Outcome::Timeout);
}

TEST_CASE("structural errors carry line numbers") {
  SUBCASE("parse error") {
    CHECK_THROWS_WITH_AS(from_jsonl("{not json\n"), doctest::Contains("line 1"), ParseError);
  }
  SUBCASE("second record with mismatched sessions") {
    const std::string text =
        R"({"test_id":"a","description":"d","sessions":[{"id":"r1","outcome":"P","duration_s":1.0,"message":null}]})"
        "\n"
        R"({"test_id":"b","description":"d","sessions":[{"id":"r1","outcome":"P","duration_s":1.0,"message":null},{"id":"r2","outcome":"P","duration_s":1.0,"message":null}]})"
        "\n";
    CHECK_THROWS_WITH_AS(from_jsonl(text), doctest::Contains("line 2"), ParseError);
  }
  SUBCASE("duplicate test_id") {
    const std::string rec =
        R"({"test_id":"a","description":"d","sessions":[{"id":"r1","outcome":"P","duration_s":1.0,"message":null}]})";
    CHECK_THROWS_WITH_AS(from_jsonl(rec + "\n" + rec + "\n"), doctest::Contains("duplicate"),
                         ParseError);
  }
  SUBCASE("unknown outcome code") {
    const std::string rec =
        R"({"test_id":"a","description":"d","sessions":[{"id":"r1","outcome":"X","duration_s":1.0,"message":null}]})";
    CHECK_THROWS_AS(from_jsonl(rec + "\n"), ParseError);
  }
  SUBCASE("both description and vector present") {
    const std::string rec =
        R"({"test_id":"a","description":"d","vector":[1.0],"sessions":[{"id":"r1","outcome":"P","duration_s":1.0,"message":null}]})";
    CHECK_THROWS_AS(from_jsonl(rec + "\n"), ParseError);
  }
  SUBCASE("negative duration") {
    const std::string rec =
        R"({"test_id":"a","description":"d","sessions":[{"id":"r1","outcome":"P","duration_s":-1.0,"message":null}]})";
    CHECK_THROWS_AS(from_jsonl(rec + "\n"), ParseError);
  }
}

TEST_CASE("csv ingest matches jsonl on the worked example") {
  std::istringstream in(
      "test_id,session_id,outcome,duration_s,message,description\n"
      "t1,run1,P,1.0,,Test Check Box in page A\n"
      "t1,run2,F,1.0,,Test Check Box in page A\n"
      "t1,run3,S,1.0,,Test Check Box in page A\n"
      "t1,run4,F,1.0,,Test Check Box in page A\n"
      "t2,run1,F,2.0,,Test Radio Button in page A\n"
      "t2,run2,F,2.0,,Test Radio Button in page A\n"
      "t2,run3,P,2.0,,Test Radio Button in page A\n"
      "t2,run4,F,2.0,,Test Radio Button in page A\n"
      "t3,run1,P,3.0,,Test Check Box in page B\n"
      "t3,run2,P,3.0,,Test Check Box in page B\n"
      "t3,run3,F,3.0,,Test Check Box in page B\n"
      "t3,run4,P,3.0,,Test Check Box in page B\n"
      "t4,run1,F,4.0,,Test Radio Button in page B\n"
      "t4,run2,P,4.0,,Test Radio Button in page B\n"
      "t4,run3,F,4.0,,Test Radio Button in page B\n"
      "t4,run4,F,4.0,,Test Radio Button in page B\n");
  CHECK(ingest_csv(in) == tcprio::testing::table1());
}

TEST_CASE("csv handles quoted messages and applies the timeout rule") {
  std::istringstream in(
      "test_id,session_id,outcome,duration_s,message,description\n"
      "a,r1,F,1.0,\"step 3, Time Out\",\"desc, with comma\"\n");
  const SessionHistory history = ingest_csv(in);
  CHECK(history.test(0).outcomes[0] == Outcome::Timeout);
  CHECK(history.test(0).description == "desc, with comma");
}

TEST_CASE("round trip: ingest(serialize(h)) == h") {
  SUBCASE("worked example") {
    const SessionHistory history = tcprio::testing::table1();
    CHECK(from_jsonl(serialize_jsonl(history)) == history);
  }
  SUBCASE("random histories") {
    Rng rng(99);
    for (int trial = 0; trial < 25; ++trial) {
      const std::size_t n_tests = 1 + rng.below(8);
      const std::size_t n_sessions = 1 + rng.below(6);
      std::vector<TestRecord> records;
      for (std::size_t t = 0; t < n_tests; ++t) {
        TestRecord rec;
        rec.test_id = "t" + std::to_string(t);
        if (rng.below(2) == 0) {
          rec.description = "check widget " + std::to_string(rng.below(5));
        } else {
          std::vector<double> vec(3);
          for (double& v : vec) v = rng.next_double();
          rec.prefeaturized = vec;
        }
        for (std::size_t s = 0; s < n_sessions; ++s) {
          rec.outcomes.push_back(static_cast<Outcome>(rng.below(4)));
          rec.durations.push_back(rng.next_double() * 10.0);
        }
        records.push_back(std::move(rec));
      }
      std::vector<std::string> session_ids;
      for (std::size_t s = 0; s < n_sessions; ++s) session_ids.push_back("r" + std::to_string(s));
      const SessionHistory history(std::move(records), std::move(session_ids));
      CHECK(from_jsonl(serialize_jsonl(history)) == history);
    }
  }
}

TEST_CASE("pre-featurized records are accepted") {
  const std::string line =
      R"({"test_id":"a","description":null,"vector":[3.0,4.0],"sessions":[{"id":"r1","outcome":"P","duration_s":1.0,"message":null}]})";
  const SessionHistory history = from_jsonl(line + "\n");
  REQUIRE(history.test(0).prefeaturized.has_value());
  CHECK((*history.test(0).prefeaturized)[1] == 4.0);
}

TEST_CASE("truncated view physically drops later sessions") {
  const SessionHistory history = tcprio::testing::table1();
  const SessionHistory view = truncated(history, 3);
  CHECK(view.session_count() == 3);
  CHECK(view.test(0).outcomes.size() == 3);
  CHECK(view.session_ids() == std::vector<std::string>{"run1", "run2", "run3"});
  CHECK_THROWS_AS(truncated(history, 5), std::out_of_range);
}

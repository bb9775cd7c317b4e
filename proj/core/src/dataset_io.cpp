#include "tcprio/dataset_io.hpp"

#include <algorithm>
#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

namespace tcprio {

namespace {

using nlohmann::json;

std::regex compile_timeout_pattern(const std::string& pattern) {
  return std::regex(pattern, std::regex::icase | std::regex::ECMAScript);
}

Outcome apply_timeout_rule(Outcome outcome, const std::string* message,
                           const std::regex& timeout_re) {
  if (outcome == Outcome::Failed && message != nullptr &&
      std::regex_search(*message, timeout_re)) {
    return Outcome::Timeout;
  }
  return outcome;
}

[[noreturn]] void fail_at(std::size_t line, const std::string& what) {
  throw ParseError("line " + std::to_string(line) + ": " + what);
}

// Session labels must appear in the same order for every record.
void check_session_ids(const std::vector<std::string>& expected,
                       const std::vector<std::string>& got, const std::string& test_id,
                       std::size_t line) {
  if (expected != got) {
    fail_at(line, "test " + test_id + " has inconsistent sessions with earlier records");
  }
}

// Minimal RFC 4180 row reader: quoted fields, doubled quotes, embedded commas.
bool read_csv_row(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line_no;
        field.push_back(static_cast<char>(c));
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      ++line_no;
      fields.push_back(std::move(field));
      return true;
    } else if (c != '\r') {
      field.push_back(static_cast<char>(c));
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

DatasetFormat dataset_format_from_string(const std::string& name) {
  if (name == "jsonl") return DatasetFormat::Jsonl;
  if (name == "csv") return DatasetFormat::Csv;
  throw ValidationError("unknown dataset format: " + name);
}

SessionHistory ingest(const std::filesystem::path& path, DatasetFormat format,
                      const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return format == DatasetFormat::Jsonl ? ingest_jsonl(in, options) : ingest_csv(in, options);
}

SessionHistory ingest_jsonl(std::istream& in, const IngestOptions& options) {
  const std::regex timeout_re = compile_timeout_pattern(options.timeout_pattern);
  std::vector<TestRecord> records;
  std::vector<std::string> session_ids;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_at(line_no, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) fail_at(line_no, "expected a JSON object");

    TestRecord rec;
    try {
      rec.test_id = obj.at("test_id").get<std::string>();
      if (obj.contains("description") && !obj["description"].is_null()) {
        rec.description = obj["description"].get<std::string>();
      }
      if (obj.contains("vector") && !obj["vector"].is_null()) {
        rec.prefeaturized = obj["vector"].get<std::vector<double>>();
      }
      std::vector<std::string> ids;
      for (const json& session : obj.at("sessions")) {
        ids.push_back(session.at("id").get<std::string>());
        const std::string code = session.at("outcome").get<std::string>();
        if (code.size() != 1) fail_at(line_no, "outcome must be one of P/F/S/T");
        Outcome outcome = outcome_from_code(code[0]);
        if (session.contains("message") && !session["message"].is_null()) {
          const std::string message = session["message"].get<std::string>();
          outcome = apply_timeout_rule(outcome, &message, timeout_re);
        }
        rec.outcomes.push_back(outcome);
        rec.durations.push_back(session.at("duration_s").get<double>());
      }
      if (records.empty()) {
        session_ids = std::move(ids);
      } else {
        check_session_ids(session_ids, ids, rec.test_id, line_no);
      }
    } catch (const json::exception& e) {
      fail_at(line_no, std::string("bad record: ") + e.what());
    } catch (const ValidationError& e) {
      fail_at(line_no, e.what());
    }
    records.push_back(std::move(rec));
  }

  if (records.empty()) throw ParseError("no records");
  try {
    return SessionHistory(std::move(records), std::move(session_ids));
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

SessionHistory ingest_csv(std::istream& in, const IngestOptions& options) {
  const std::regex timeout_re = compile_timeout_pattern(options.timeout_pattern);

  std::vector<std::string> header;
  std::size_t line_no = 1;
  if (!read_csv_row(in, header, line_no)) throw ParseError("no records");
  const std::vector<std::string> expected = {"test_id", "session_id", "outcome",
                                             "duration_s", "message", "description"};
  if (header != expected) {
    throw ParseError("line 1: expected header test_id,session_id,outcome,duration_s,message,description");
  }

  // Rows are grouped per test in file order; session order comes from the
  // first test's rows.
  std::vector<TestRecord> records;
  std::unordered_map<std::string, std::size_t> record_index;
  std::vector<std::vector<std::string>> per_test_session_ids;
  std::vector<std::string> fields;
  while (read_csv_row(in, fields, line_no)) {
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (fields.size() != expected.size()) {
      fail_at(line_no, "expected " + std::to_string(expected.size()) + " columns, got " +
                           std::to_string(fields.size()));
    }
    const std::string& test_id = fields[0];
    auto [it, inserted] = record_index.emplace(test_id, records.size());
    if (inserted) {
      TestRecord rec;
      rec.test_id = test_id;
      rec.description = fields[5];
      records.push_back(std::move(rec));
      per_test_session_ids.emplace_back();
    }
    TestRecord& rec = records[it->second];

    Outcome outcome{};
    try {
      if (fields[2].size() != 1) throw ValidationError("outcome must be one of P/F/S/T");
      outcome = outcome_from_code(fields[2][0]);
    } catch (const ValidationError& e) {
      fail_at(line_no, e.what());
    }
    outcome = apply_timeout_rule(outcome, &fields[4], timeout_re);

    double duration = 0.0;
    try {
      duration = std::stod(fields[3]);
    } catch (const std::exception&) {
      fail_at(line_no, "invalid duration_s: " + fields[3]);
    }

    per_test_session_ids[it->second].push_back(fields[1]);
    rec.outcomes.push_back(outcome);
    rec.durations.push_back(duration);
  }

  if (records.empty()) throw ParseError("no records");
  for (std::size_t i = 1; i < records.size(); ++i) {
    check_session_ids(per_test_session_ids[0], per_test_session_ids[i], records[i].test_id,
                      line_no);
  }
  try {
    return SessionHistory(std::move(records), std::move(per_test_session_ids[0]));
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
}

void serialize_jsonl(const SessionHistory& history, std::ostream& out) {
  for (const TestRecord& rec : history.tests()) {
    json obj;
    obj["test_id"] = rec.test_id;
    obj["description"] = rec.description ? json(*rec.description) : json(nullptr);
    obj["vector"] = rec.prefeaturized ? json(*rec.prefeaturized) : json(nullptr);
    json sessions = json::array();
    for (std::size_t s = 0; s < history.session_count(); ++s) {
      sessions.push_back({{"id", history.session_ids()[s]},
                          {"outcome", std::string(1, outcome_code(rec.outcomes[s]))},
                          {"duration_s", rec.durations[s]},
                          {"message", nullptr}});
    }
    obj["sessions"] = std::move(sessions);
    out << obj.dump() << '\n';
  }
}

std::string serialize_jsonl(const SessionHistory& history) {
  std::ostringstream out;
  serialize_jsonl(history, out);
  return out.str();
}

}  // namespace tcprio

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "tcprio/history.hpp"

namespace tcprio {

// Raised on malformed input files; message carries the 1-based line number.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DatasetFormat { Jsonl, Csv };

DatasetFormat dataset_format_from_string(const std::string& name);

struct IngestOptions {
  // Failures whose message matches this case-insensitive regex are stored as
  // Timeout and never counted as failures.
  std::string timeout_pattern = "time ?out";
};

SessionHistory ingest(const std::filesystem::path& path, DatasetFormat format,
                      const IngestOptions& options = {});
SessionHistory ingest_jsonl(std::istream& in, const IngestOptions& options = {});
SessionHistory ingest_csv(std::istream& in, const IngestOptions& options = {});

// Canonical JSON-lines form; ingest(serialize(h)) == h.
void serialize_jsonl(const SessionHistory& history, std::ostream& out);
std::string serialize_jsonl(const SessionHistory& history);

}  // namespace tcprio

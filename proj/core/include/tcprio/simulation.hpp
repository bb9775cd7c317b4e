#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tcprio/evaluation.hpp"
#include "tcprio/history.hpp"
#include "tcprio/stats.hpp"

namespace tcprio {

// Replay simulation over sessions start_session..K: when prioritizing run n,
// algorithms see history from runs 1..n-1 plus in-run feedback for tests they
// have already emitted.
struct SimulationConfig {
  std::vector<std::string> algorithms;   // empty = all 17
  std::size_t start_session = 6;         // 1-based run number, must be >= 2
  std::vector<std::uint64_t> seeds = {1};
  std::size_t n1 = 10;
  std::size_t n2 = 30;
  double alpha = 0.9;                    // exponential-decay learning rate (B3)
  std::size_t jobs = 0;                  // worker threads, 0 = hardware concurrency
};

struct CellResult {
  std::string algorithm;
  std::size_t session = 0;  // 1-based run number
  std::uint64_t seed = 0;
  std::optional<double> apfd_value;
  std::optional<double> apfdc_value;
  std::optional<double> overhead_value;
  double wall_seconds = 0.0;
  std::vector<std::string> order;
  std::vector<CurvePoint> curve;  // empty when the run had no failures
};

struct RankRow {
  int rank = 0;
  std::string treatment;
  double median_value = 0.0;
  double iqr = 0.0;
};

struct EvaluationReport {
  std::vector<CellResult> cells;
  std::vector<RankRow> apfdc_ranking;
  std::vector<RankRow> overhead_ranking;
  std::map<std::string, int> apfdc_ranks;
  std::map<std::string, int> overhead_ranks;
};

const std::vector<std::string>& all_algorithm_ids();
bool is_known_algorithm(const std::string& id);
bool is_feedback_algorithm(const std::string& id);  // E and F groups

EvaluationReport simulate(const SessionHistory& history, const SimulationConfig& config);

// Writers. Everything except the overhead file is a pure function of
// (dataset, config), so repeated runs produce byte-identical output; wall
// times live only in the overhead file.
void write_cells_csv(const EvaluationReport& report, std::ostream& out);
void write_overhead_csv(const EvaluationReport& report, std::ostream& out);
void write_orders_jsonl(const EvaluationReport& report, std::ostream& out);
void write_curves_csv(const EvaluationReport& report, std::ostream& out);

// Scott-Knott summary: "metric,rank,treatment,median,iqr" rows.
void write_rank_csv(const EvaluationReport& report, std::ostream& out);
std::string format_rank_tables(const EvaluationReport& report);

}  // namespace tcprio

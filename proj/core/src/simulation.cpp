#include "tcprio/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <memory>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "tcprio/dynamic_prioritizers.hpp"
#include "tcprio/feature.hpp"
#include "tcprio/rng.hpp"
#include "tcprio/static_prioritizers.hpp"
#include "tcprio/terminator.hpp"

namespace tcprio {

namespace {

using Clock = std::chrono::steady_clock;

class Stopwatch {
 public:
  void start() { begin_ = Clock::now(); }
  void stop() { total_ += std::chrono::duration<double>(Clock::now() - begin_).count(); }
  double seconds() const { return total_; }

 private:
  Clock::time_point begin_{};
  double total_ = 0.0;
};

std::vector<FeatureVector> collect_features(
    const std::vector<std::string>& universe,
    const std::unordered_map<std::string, FeatureVector>& by_id) {
  std::vector<FeatureVector> features;
  features.reserve(universe.size());
  for (const std::string& id : universe) features.push_back(by_id.at(id));
  return features;
}

struct CellTask {
  std::string algorithm;
  std::size_t session_index = 0;  // 0-based
  std::uint64_t seed = 0;
};

CellResult run_cell(const SessionHistory& history, const TextFeatures& text,
                    const SimulationConfig& config, const CellTask& task) {
  const std::size_t s = task.session_index;
  const std::vector<std::string> universe = history.test_ids();
  const std::uint64_t cell_seed =
      mix_stream(mix_stream(task.seed, task.algorithm), "session", s);

  // Current-session ground truth, reachable only through the feedback loop
  // (and handed whole to the A2 oracle).
  std::unordered_set<std::string> failures;
  std::unordered_map<std::string, double> durations;
  for (const TestRecord& rec : history.tests()) {
    if (is_failure(rec.outcomes[s])) failures.insert(rec.test_id);
    durations.emplace(rec.test_id, rec.durations[s]);
  }

  // Algorithms only ever see runs strictly before the one being prioritized.
  const SessionHistory view = truncated(history, s);

  Stopwatch watch;
  std::vector<std::string> order;
  order.reserve(universe.size());

  if (!is_feedback_algorithm(task.algorithm)) {
    watch.start();
    if (task.algorithm == "A1") {
      order = order_random(universe, cell_seed);
    } else if (task.algorithm == "A2") {
      order = order_optimal(universe, failures, durations);
    } else if (task.algorithm == "B1") {
      order = order_b1(view, s);
    } else if (task.algorithm == "B2") {
      order = order_b2(view, s);
    } else if (task.algorithm == "B3") {
      order = order_b3(view, s, config.alpha);
    } else if (task.algorithm == "B4") {
      order = order_b4(view, s);
    } else if (task.algorithm == "B5") {
      order = order_b5(view, s);
    } else if (task.algorithm == "C1") {
      order = order_c1(view, s);
    } else if (task.algorithm == "D1") {
      order = order_supervised(view, s, LabelScheme::SimpleHistory, text).order;
    } else if (task.algorithm == "D2") {
      order = order_supervised(view, s, LabelScheme::AllHistory, text).order;
    } else if (task.algorithm == "D3") {
      order = order_supervised(view, s, LabelScheme::WeightedHistory, text).order;
    } else {
      throw std::invalid_argument("unknown algorithm: " + task.algorithm);
    }
    watch.stop();
  } else {
    watch.start();
    std::unique_ptr<FeedbackPrioritizer> prioritizer;
    if (task.algorithm == "E1") {
      prioritizer = std::make_unique<CoFailurePrioritizer>(view, s);
    } else if (task.algorithm == "E2") {
      prioritizer = std::make_unique<FlippingHistoryPrioritizer>(view, s);
    } else if (task.algorithm == "E3") {
      prioritizer = std::make_unique<RuleBasedPrioritizer>(view, s);
    } else if (task.algorithm == "F1" || task.algorithm == "F2" || task.algorithm == "F3") {
      std::vector<FeatureVector> features;
      if (task.algorithm == "F1") {
        features = collect_features(universe, text.vectors);
      } else {
        const auto hist_features = history_features(view, s);
        if (task.algorithm == "F2") {
          features = collect_features(universe, hist_features);
        } else {
          features.reserve(universe.size());
          for (const std::string& id : universe) {
            features.push_back(hybrid_features(text.vectors.at(id), hist_features.at(id)));
          }
        }
      }
      TerminatorOptions options;
      options.n1 = config.n1;
      options.n2 = config.n2;
      options.seed = cell_seed;
      options.variant = task.algorithm;
      prioritizer = std::make_unique<Terminator>(universe, std::move(features), options);
    } else {
      throw std::invalid_argument("unknown algorithm: " + task.algorithm);
    }
    watch.stop();

    // Batched execution: results come back N1 at a time, as if the batch ran
    // in parallel on N1 nodes.
    while (true) {
      watch.start();
      const std::vector<std::string> batch = prioritizer->next_batch(config.n1);
      watch.stop();
      if (batch.empty()) break;
      for (const std::string& id : batch) {
        const bool failed = failures.count(id) > 0;
        watch.start();
        prioritizer->feedback(id, failed);
        watch.stop();
        order.push_back(id);
      }
    }
  }

  SessionResult result;
  result.order = order;
  result.failures = std::move(failures);
  result.durations = std::move(durations);
  result.algo_wall_seconds = watch.seconds();

  CellResult cell;
  cell.algorithm = task.algorithm;
  cell.session = s + 1;
  cell.seed = task.seed;
  cell.wall_seconds = watch.seconds();
  cell.order = std::move(order);
  cell.apfd_value = apfd(result);
  double total = 0.0;
  for (const auto& [id, d] : result.durations) total += d;
  if (total > 0.0) {
    cell.apfdc_value = apfdc(result);
    cell.overhead_value = overhead(result);
    if (!result.failures.empty()) cell.curve = recall_cost_curve(result);
  }
  return cell;
}

std::vector<RankRow> build_ranking(const std::vector<MetricSample>& samples,
                                   const std::map<std::string, int>& ranks) {
  std::vector<RankRow> rows;
  rows.reserve(samples.size());
  for (const MetricSample& sample : samples) {
    rows.push_back({ranks.at(sample.algorithm), sample.algorithm, median(sample.values),
                    interquartile_range(sample.values)});
  }
  std::sort(rows.begin(), rows.end(), [](const RankRow& a, const RankRow& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.median_value != b.median_value) return a.median_value < b.median_value;
    return a.treatment < b.treatment;
  });
  return rows;
}

std::string format_double(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string format_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

}  // namespace

const std::vector<std::string>& all_algorithm_ids() {
  static const std::vector<std::string> ids = {"A1", "A2", "B1", "B2", "B3", "B4",
                                               "B5", "C1", "D1", "D2", "D3", "E1",
                                               "E2", "E3", "F1", "F2", "F3"};
  return ids;
}

bool is_known_algorithm(const std::string& id) {
  const auto& ids = all_algorithm_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool is_feedback_algorithm(const std::string& id) {
  return !id.empty() && (id[0] == 'E' || id[0] == 'F');
}

EvaluationReport simulate(const SessionHistory& history, const SimulationConfig& config) {
  std::vector<std::string> algorithms =
      config.algorithms.empty() ? all_algorithm_ids() : config.algorithms;
  for (const std::string& id : algorithms) {
    if (!is_known_algorithm(id)) throw std::invalid_argument("unknown algorithm: " + id);
  }
  if (config.start_session < 2) {
    throw std::invalid_argument("start_session must be >= 2 (needs prior history)");
  }
  if (history.session_count() < config.start_session) {
    throw std::invalid_argument("dataset has fewer sessions than start_session");
  }
  if (config.seeds.empty()) throw std::invalid_argument("at least one seed required");

  const bool needs_text =
      std::any_of(algorithms.begin(), algorithms.end(), [](const std::string& id) {
        return id[0] == 'D' || id == "F1" || id == "F3";
      });
  TextFeatures text;
  if (needs_text) text = text_features(history);

  std::vector<CellTask> tasks;
  for (const std::uint64_t seed : config.seeds) {
    for (std::size_t s = config.start_session - 1; s < history.session_count(); ++s) {
      for (const std::string& algorithm : algorithms) {
        tasks.push_back({algorithm, s, seed});
      }
    }
  }

  EvaluationReport report;
  report.cells.resize(tasks.size());
  std::atomic<std::size_t> next_task{0};
  std::atomic<bool> failed{false};
  std::string failure_message;
  std::mutex failure_mutex;

  const std::size_t worker_count =
      std::max<std::size_t>(1, config.jobs ? config.jobs : std::thread::hardware_concurrency());
  const auto worker = [&]() {
    for (;;) {
      const std::size_t i = next_task.fetch_add(1);
      if (i >= tasks.size() || failed.load()) return;
      try {
        report.cells[i] = run_cell(history, text, config, tasks[i]);
      } catch (const std::exception& e) {
        failed.store(true);
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (failure_message.empty()) failure_message = e.what();
        return;
      }
    }
  };

  if (worker_count == 1 || tasks.size() <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < worker_count; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failed.load()) throw std::runtime_error("simulation failed: " + failure_message);

  // Aggregate per algorithm; sessions without failures contribute no sample.
  std::vector<MetricSample> apfdc_samples;
  std::vector<MetricSample> overhead_samples;
  for (const std::string& algorithm : algorithms) {
    MetricSample apfdc_sample{algorithm, {}};
    MetricSample overhead_sample{algorithm, {}};
    for (const CellResult& cell : report.cells) {
      if (cell.algorithm != algorithm) continue;
      if (cell.apfdc_value) apfdc_sample.values.push_back(*cell.apfdc_value);
      if (cell.overhead_value) overhead_sample.values.push_back(*cell.overhead_value);
    }
    if (!apfdc_sample.values.empty()) apfdc_samples.push_back(std::move(apfdc_sample));
    if (!overhead_sample.values.empty()) overhead_samples.push_back(std::move(overhead_sample));
  }
  if (!apfdc_samples.empty()) {
    report.apfdc_ranks = scott_knott(apfdc_samples);
    report.apfdc_ranking = build_ranking(apfdc_samples, report.apfdc_ranks);
  }
  if (!overhead_samples.empty()) {
    report.overhead_ranks = scott_knott(overhead_samples);
    report.overhead_ranking = build_ranking(overhead_samples, report.overhead_ranks);
  }
  return report;
}

void write_cells_csv(const EvaluationReport& report, std::ostream& out) {
  out << "algorithm,session,seed,apfd,apfdc\n";
  for (const CellResult& cell : report.cells) {
    out << cell.algorithm << ',' << cell.session << ',' << cell.seed << ','
        << format_optional(cell.apfd_value) << ',' << format_optional(cell.apfdc_value) << '\n';
  }
}

void write_overhead_csv(const EvaluationReport& report, std::ostream& out) {
  out << "algorithm,session,seed,overhead,wall_seconds\n";
  for (const CellResult& cell : report.cells) {
    out << cell.algorithm << ',' << cell.session << ',' << cell.seed << ','
        << format_optional(cell.overhead_value) << ',' << format_double(cell.wall_seconds)
        << '\n';
  }
}

void write_orders_jsonl(const EvaluationReport& report, std::ostream& out) {
  for (const CellResult& cell : report.cells) {
    nlohmann::json obj;
    obj["algorithm"] = cell.algorithm;
    obj["session"] = cell.session;
    obj["seed"] = cell.seed;
    obj["order"] = cell.order;
    out << obj.dump() << '\n';
  }
}

void write_curves_csv(const EvaluationReport& report, std::ostream& out) {
  out << "algorithm,session,seed,cost_fraction,recall\n";
  for (const CellResult& cell : report.cells) {
    for (const CurvePoint& point : cell.curve) {
      out << cell.algorithm << ',' << cell.session << ',' << cell.seed << ','
          << format_double(point.cost_fraction) << ',' << format_double(point.recall) << '\n';
    }
  }
}

void write_rank_csv(const EvaluationReport& report, std::ostream& out) {
  out << "metric,rank,treatment,median,iqr\n";
  for (const RankRow& row : report.apfdc_ranking) {
    out << "apfdc," << row.rank << ',' << row.treatment << ',' << format_double(row.median_value)
        << ',' << format_double(row.iqr) << '\n';
  }
  for (const RankRow& row : report.overhead_ranking) {
    out << "overhead," << row.rank << ',' << row.treatment << ','
        << format_double(row.median_value) << ',' << format_double(row.iqr) << '\n';
  }
}

std::string format_rank_tables(const EvaluationReport& report) {
  std::ostringstream out;
  const auto table = [&out](const char* title, const std::vector<RankRow>& rows,
                            bool as_percent) {
    out << title << "\n";
    out << "  rank  treatment  median    IQR\n";
    for (const RankRow& row : rows) {
      char line[128];
      const double scale = as_percent ? 100.0 : 1.0;
      std::snprintf(line, sizeof(line), "  %4d  %-9s  %6.2f%s  %5.2f%s\n", row.rank,
                    row.treatment.c_str(), row.median_value * scale, as_percent ? "%" : " ",
                    row.iqr * scale, as_percent ? "%" : " ");
      out << line;
    }
  };
  table("APFDc", report.apfdc_ranking, false);
  out << "\n";
  table("Overhead", report.overhead_ranking, true);
  return out.str();
}

}  // namespace tcprio

// tcprio: ingest multi-session test histories, replay-prioritize them with the
// A/B/C/D/E/F algorithm families, and report APFD/APFDc, overhead, and
// Scott-Knott rankings.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "tcprio/dataset_io.hpp"
#include "tcprio/simulation.hpp"
#include "tcprio/stats.hpp"
#include "tcprio/synthetic.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitValidation = 2;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto range_pos = text.find("..");
  if (range_pos != std::string::npos) {
    const std::uint64_t lo = std::stoull(text.substr(0, range_pos));
    const std::uint64_t hi = std::stoull(text.substr(range_pos + 2));
    if (hi < lo) throw tcprio::ValidationError("seed range is empty: " + text);
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (!item.empty()) seeds.push_back(std::stoull(item));
  }
  if (seeds.empty()) throw tcprio::ValidationError("no seeds in: " + text);
  return seeds;
}

std::vector<std::string> parse_algorithms(const std::string& text) {
  std::vector<std::string> algorithms;
  std::stringstream stream(text);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    if (item == "all") return {};
    if (!tcprio::is_known_algorithm(item)) {
      throw tcprio::ValidationError("unknown algorithm id: " + item);
    }
    algorithms.push_back(item);
  }
  return algorithms;
}

tcprio::DatasetFormat format_for(const std::string& flag, const fs::path& path) {
  if (!flag.empty()) return tcprio::dataset_format_from_string(flag);
  return path.extension() == ".csv" ? tcprio::DatasetFormat::Csv : tcprio::DatasetFormat::Jsonl;
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

int run_ingest(const std::string& file, const std::string& format_flag,
               const std::string& timeout_pattern, const std::string& out_file) {
  tcprio::IngestOptions options;
  if (!timeout_pattern.empty()) options.timeout_pattern = timeout_pattern;
  const tcprio::SessionHistory history =
      tcprio::ingest(file, format_for(format_flag, file), options);

  std::size_t failures = 0;
  std::size_t timeouts = 0;
  for (const tcprio::TestRecord& rec : history.tests()) {
    for (const tcprio::Outcome o : rec.outcomes) {
      failures += tcprio::is_failure(o);
      timeouts += o == tcprio::Outcome::Timeout;
    }
  }
  std::cout << "tests:    " << history.test_count() << "\n"
            << "sessions: " << history.session_count() << "\n"
            << "failures: " << failures << "\n"
            << "timeouts: " << timeouts << "\n";
  if (!out_file.empty()) {
    std::ofstream out(out_file);
    if (!out) throw std::runtime_error("cannot write " + out_file);
    tcprio::serialize_jsonl(history, out);
    std::cout << "wrote canonical jsonl to " << out_file << "\n";
  }
  return 0;
}

int run_simulate(const std::string& data, const std::string& format_flag,
                 const std::string& algos, std::size_t start, const std::string& seeds,
                 std::size_t n1, std::size_t n2, double alpha, std::size_t jobs,
                 const std::string& out_dir) {
  tcprio::SimulationConfig config;
  config.algorithms = parse_algorithms(algos);
  config.start_session = start;
  config.seeds = parse_seeds(seeds);
  config.n1 = n1;
  config.n2 = n2;
  config.alpha = alpha;
  config.jobs = jobs;

  const tcprio::SessionHistory history = tcprio::ingest(data, format_for(format_flag, data));
  const tcprio::EvaluationReport report = tcprio::simulate(history, config);

  fs::create_directories(out_dir);
  const auto write_with = [&out_dir, &report](const char* name, auto writer) {
    std::ofstream out(fs::path(out_dir) / name);
    if (!out) throw std::runtime_error(std::string("cannot write ") + name);
    writer(report, out);
  };
  write_with("cells.csv", tcprio::write_cells_csv);
  write_with("overhead.csv", tcprio::write_overhead_csv);
  write_with("orders.jsonl", tcprio::write_orders_jsonl);
  write_with("curves.csv", tcprio::write_curves_csv);
  write_with("ranks.csv", tcprio::write_rank_csv);

  std::cout << tcprio::format_rank_tables(report);
  std::cout << "\nwrote cells.csv, overhead.csv, orders.jsonl, curves.csv, ranks.csv to "
            << out_dir << "\n";
  return 0;
}

int run_synth(const tcprio::SyntheticSpec& spec, const std::string& out_file) {
  const tcprio::SessionHistory history = tcprio::generate_synthetic(spec);
  std::ofstream out(out_file);
  if (!out) throw std::runtime_error("cannot write " + out_file);
  tcprio::serialize_jsonl(history, out);
  std::cout << "wrote " << history.test_count() << " tests x " << history.session_count()
            << " sessions to " << out_file << "\n";
  return 0;
}

// Rebuilds rank tables from a simulate output directory.
struct StoredCells {
  std::vector<tcprio::MetricSample> apfdc;
  std::vector<tcprio::MetricSample> overhead;
};

StoredCells read_cells(const fs::path& dir) {
  std::map<std::string, std::vector<double>> apfdc_values;
  std::map<std::string, std::vector<double>> overhead_values;

  const auto each_row = [](const fs::path& file, auto&& callback) {
    std::ifstream in(file);
    if (!in) throw tcprio::ValidationError("cannot open " + file.string());
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> fields;
      std::stringstream stream(line);
      std::string field;
      while (std::getline(stream, field, ',')) fields.push_back(field);
      callback(fields);
    }
  };

  each_row(dir / "cells.csv", [&apfdc_values](const std::vector<std::string>& fields) {
    if (fields.size() >= 5 && !fields[4].empty()) {
      apfdc_values[fields[0]].push_back(std::stod(fields[4]));
    }
  });
  each_row(dir / "overhead.csv", [&overhead_values](const std::vector<std::string>& fields) {
    if (fields.size() >= 4 && !fields[3].empty()) {
      overhead_values[fields[0]].push_back(std::stod(fields[3]));
    }
  });

  StoredCells cells;
  for (auto& [algorithm, values] : apfdc_values) cells.apfdc.push_back({algorithm, std::move(values)});
  for (auto& [algorithm, values] : overhead_values) {
    cells.overhead.push_back({algorithm, std::move(values)});
  }
  return cells;
}

int run_report(const std::string& in_dir, const std::string& format, const std::string& out_dir) {
  if (format == "curve-csv") {
    // One cost_fraction,recall file per (algorithm, session, seed).
    std::ifstream in(fs::path(in_dir) / "curves.csv");
    if (!in) throw tcprio::ValidationError("cannot open curves.csv in " + in_dir);
    const fs::path target = out_dir.empty() ? fs::path(in_dir) / "curves" : fs::path(out_dir);
    fs::create_directories(target);
    std::string line;
    std::getline(in, line);
    std::map<std::string, std::ofstream> files;
    std::size_t count = 0;
    while (std::getline(in, line)) {
      std::stringstream stream(line);
      std::string algorithm, session, seed, cost, recall;
      std::getline(stream, algorithm, ',');
      std::getline(stream, session, ',');
      std::getline(stream, seed, ',');
      std::getline(stream, cost, ',');
      std::getline(stream, recall, ',');
      const std::string key = algorithm + "_s" + session + "_seed" + seed;
      auto it = files.find(key);
      if (it == files.end()) {
        it = files.emplace(key, std::ofstream(target / (key + ".csv"))).first;
        it->second << "cost_fraction,recall\n";
        ++count;
      }
      it->second << cost << ',' << recall << '\n';
    }
    std::cout << "wrote " << count << " curve files to " << target.string() << "\n";
    return 0;
  }

  const StoredCells cells = read_cells(in_dir);
  tcprio::EvaluationReport report;
  if (!cells.apfdc.empty()) {
    report.apfdc_ranks = tcprio::scott_knott(cells.apfdc);
    for (const tcprio::MetricSample& sample : cells.apfdc) {
      report.apfdc_ranking.push_back({report.apfdc_ranks.at(sample.algorithm), sample.algorithm,
                                      tcprio::median(sample.values),
                                      tcprio::interquartile_range(sample.values)});
    }
  }
  if (!cells.overhead.empty()) {
    report.overhead_ranks = tcprio::scott_knott(cells.overhead);
    for (const tcprio::MetricSample& sample : cells.overhead) {
      report.overhead_ranking.push_back({report.overhead_ranks.at(sample.algorithm),
                                         sample.algorithm, tcprio::median(sample.values),
                                         tcprio::interquartile_range(sample.values)});
    }
  }
  const auto by_rank = [](const tcprio::RankRow& a, const tcprio::RankRow& b) {
    if (a.rank != b.rank) return a.rank < b.rank;
    if (a.median_value != b.median_value) return a.median_value < b.median_value;
    return a.treatment < b.treatment;
  };
  std::sort(report.apfdc_ranking.begin(), report.apfdc_ranking.end(), by_rank);
  std::sort(report.overhead_ranking.begin(), report.overhead_ranking.end(), by_rank);

  if (format == "table") {
    std::cout << tcprio::format_rank_tables(report);
  } else if (format == "csv") {
    std::ostringstream out;
    tcprio::write_rank_csv(report, out);
    if (out_dir.empty()) {
      std::cout << out.str();
    } else {
      fs::create_directories(out_dir);
      write_file(fs::path(out_dir) / "ranks.csv", out.str());
    }
  } else {
    throw tcprio::ValidationError("unknown report format: " + format);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box test case prioritization toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Optional key=value config file; flags win over file values");

  // ingest
  std::string ingest_file, ingest_format, ingest_timeout_pattern, ingest_out;
  CLI::App* cmd_ingest = app.add_subcommand("ingest", "Validate and summarize a dataset");
  cmd_ingest->add_option("file", ingest_file, "Dataset file (.jsonl or .csv)")->required();
  cmd_ingest->add_option("--format", ingest_format, "jsonl|csv (default: by extension)");
  cmd_ingest->add_option("--timeout-pattern", ingest_timeout_pattern,
                         "Regex marking failure messages as timeouts (default 'time ?out')");
  cmd_ingest->add_option("--out", ingest_out, "Write canonical jsonl here");

  // simulate
  std::string sim_data, sim_format, sim_algos = "all", sim_seeds = "1", sim_out = "tcprio-out";
  std::size_t sim_start = 6, sim_n1 = 10, sim_n2 = 30, sim_jobs = 0;
  double sim_alpha = 0.9;
  CLI::App* cmd_simulate =
      app.add_subcommand("simulate", "Replay-simulate prioritization algorithms over a dataset");
  cmd_simulate->add_option("--data", sim_data, "Dataset file")->required();
  cmd_simulate->add_option("--format", sim_format, "jsonl|csv (default: by extension)");
  cmd_simulate->add_option("--algos", sim_algos, "Comma list of algorithm ids, or 'all'");
  cmd_simulate->add_option("--start", sim_start, "First session to simulate (1-based, default 6)");
  cmd_simulate->add_option("--seeds", sim_seeds, "Seeds: '1..20' or '1,2,7' (default 1)");
  cmd_simulate->add_option("--n1", sim_n1, "Feedback batch size (default 10)");
  cmd_simulate->add_option("--n2", sim_n2, "Certainty-sampling threshold (default 30)");
  cmd_simulate->add_option("--alpha", sim_alpha, "Exponential decay rate for B3 (default 0.9)");
  cmd_simulate->add_option("--jobs", sim_jobs, "Worker threads (default: hardware)");
  cmd_simulate->add_option("--out", sim_out, "Output directory");

  // synth
  tcprio::SyntheticSpec spec;
  std::string synth_out = "synthetic.jsonl";
  CLI::App* cmd_synth = app.add_subcommand("synth", "Generate a seeded synthetic history");
  cmd_synth->add_option("--tests", spec.n_tests, "Number of tests (default 500)");
  cmd_synth->add_option("--sessions", spec.n_sessions, "Number of sessions (default 30)");
  cmd_synth->add_option("--base-rate", spec.base_failure_rate, "Background failure rate");
  cmd_synth->add_option("--persistence", spec.failure_persistence,
                        "P(fail | failed in previous session)");
  cmd_synth->add_option("--clusters", spec.cluster_count, "Description cluster count");
  cmd_synth->add_option("--cluster-corr", spec.cluster_correlation,
                        "Cluster-correlated failure probability");
  cmd_synth->add_option("--duration-mean", spec.duration_mean_s, "Median duration seconds");
  cmd_synth->add_option("--duration-sigma", spec.duration_sigma, "Lognormal sigma");
  cmd_synth->add_option("--skip-rate", spec.skip_rate, "Per-(test,session) skip probability");
  cmd_synth->add_option("--seed", spec.seed, "Generator seed");
  cmd_synth->add_option("--out", synth_out, "Output jsonl file");

  // report
  std::string report_in, report_format = "table", report_out;
  CLI::App* cmd_report =
      app.add_subcommand("report", "Format results from a simulate output directory");
  cmd_report->add_option("--in", report_in, "simulate --out directory")->required();
  cmd_report->add_option("--format", report_format, "table|csv|curve-csv");
  cmd_report->add_option("--out", report_out, "Output directory (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (cmd_ingest->parsed()) {
      return run_ingest(ingest_file, ingest_format, ingest_timeout_pattern, ingest_out);
    }
    if (cmd_simulate->parsed()) {
      return run_simulate(sim_data, sim_format, sim_algos, sim_start, sim_seeds, sim_n1, sim_n2,
                          sim_alpha, sim_jobs, sim_out);
    }
    if (cmd_synth->parsed()) {
      return run_synth(spec, synth_out);
    }
    if (cmd_report->parsed()) {
      return run_report(report_in, report_format, report_out);
    }
  } catch (const tcprio::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const tcprio::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

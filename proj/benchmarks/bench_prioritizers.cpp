#include <benchmark/benchmark.h>

#include "tcprio/dynamic_prioritizers.hpp"
#include "tcprio/evaluation.hpp"
#include "tcprio/feature.hpp"
#include "tcprio/linear_classifier.hpp"
#include "tcprio/static_prioritizers.hpp"
#include "tcprio/synthetic.hpp"
#include "tcprio/terminator.hpp"

namespace {

tcprio::SessionHistory make_history(std::size_t tests, std::size_t sessions) {
  tcprio::SyntheticSpec spec;
  spec.n_tests = tests;
  spec.n_sessions = sessions;
  spec.seed = 7;
  return tcprio::generate_synthetic(spec);
}

void BM_HistoryMetricsOrder(benchmark::State& state) {
  const auto history = make_history(static_cast<std::size_t>(state.range(0)), 50);
  const std::size_t session = history.session_count();
  for (auto _ : state) {
    benchmark::DoNotOptimize(tcprio::order_b4(history, session));
  }
}
BENCHMARK(BM_HistoryMetricsOrder)->Arg(500)->Arg(2000);

void BM_MahalanobisOrder(benchmark::State& state) {
  const auto history = make_history(static_cast<std::size_t>(state.range(0)), 50);
  const std::size_t session = history.session_count();
  for (auto _ : state) {
    benchmark::DoNotOptimize(tcprio::order_b5(history, session));
  }
}
BENCHMARK(BM_MahalanobisOrder)->Arg(500)->Arg(2000);

void BM_RuleMining(benchmark::State& state) {
  const auto history = make_history(static_cast<std::size_t>(state.range(0)), 30);
  const std::size_t session = history.session_count();
  for (auto _ : state) {
    benchmark::DoNotOptimize(tcprio::e3_mine_rules(history, session));
  }
}
BENCHMARK(BM_RuleMining)->Arg(200)->Arg(500);

void BM_SvmFit(benchmark::State& state) {
  const auto history = make_history(static_cast<std::size_t>(state.range(0)), 30);
  const auto text = tcprio::text_features(history);
  std::vector<const tcprio::FeatureVector*> xs;
  std::vector<int> ys;
  const std::size_t session = history.session_count() - 1;
  for (const auto& rec : history.tests()) {
    xs.push_back(&text.vectors.at(rec.test_id));
    ys.push_back(tcprio::is_failure(rec.outcomes[session]) ? 1 : 0);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(tcprio::fit_linear_svm(xs, ys, tcprio::ClassWeighting::Balanced,
                                                    text.dimensionality));
  }
}
BENCHMARK(BM_SvmFit)->Arg(200)->Arg(500);

void BM_TerminatorSession(benchmark::State& state) {
  const auto history = make_history(static_cast<std::size_t>(state.range(0)), 20);
  const std::size_t session = history.session_count() - 1;
  const auto view = tcprio::truncated(history, session);
  const auto text = tcprio::text_features(history);
  const auto hist = tcprio::history_features(view, session);
  const auto universe = history.test_ids();
  std::vector<tcprio::FeatureVector> features;
  for (const auto& id : universe) {
    features.push_back(tcprio::hybrid_features(text.vectors.at(id), hist.at(id)));
  }
  for (auto _ : state) {
    tcprio::TerminatorOptions options;
    options.seed = 3;
    tcprio::Terminator terminator(universe, features, options);
    while (true) {
      const auto batch = terminator.next_batch(options.n1);
      if (batch.empty()) break;
      for (const auto& id : batch) {
        const auto& rec = history.test(history.index_of(id));
        terminator.feedback(id, tcprio::is_failure(rec.outcomes[session]));
      }
    }
  }
}
BENCHMARK(BM_TerminatorSession)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

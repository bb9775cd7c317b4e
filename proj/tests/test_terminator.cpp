#include <doctest.h>

#include <algorithm>
#include <set>

#include "tcprio/evaluation.hpp"
#include "tcprio/feature.hpp"
#include "tcprio/static_prioritizers.hpp"
#include "tcprio/terminator.hpp"
#include "test_helpers.hpp"

using namespace tcprio;
using terminator_detail::presume;
using terminator_detail::PresumedSet;
using terminator_detail::query;
using terminator_detail::train;
using terminator_detail::TrainDiagnostics;

namespace {

// Universe whose failing tests are linearly separable from the passing ones
// through their description tokens.
struct Scenario {
  std::vector<std::string> universe;
  std::vector<FeatureVector> features;
  std::unordered_set<std::string> failing;
  std::unordered_map<std::string, double> durations;
};

Scenario separable_scenario(std::size_t n_tests, std::size_t n_failing, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<TestRecord> records;
  std::unordered_set<std::string> failing;
  for (std::size_t i = 0; i < n_tests; ++i) {
    const std::string id = "t" + std::to_string(i);
    const bool fails = i < n_failing;
    if (fails) failing.insert(id);
    const std::string token = fails ? "red" : "green";
    records.push_back(tcprio::testing::make_record(
        id, token + " path" + std::to_string(rng.below(6)), "P", 1.0));
  }
  const SessionHistory history(std::move(records), {"r1"});
  const TextFeatures text = text_features(history);

  Scenario scenario;
  scenario.universe = history.test_ids();
  for (const auto& id : scenario.universe) {
    scenario.features.push_back(text.vectors.at(id));
    scenario.durations[id] = 1.0;
  }
  scenario.failing = std::move(failing);
  return scenario;
}

std::vector<std::string> drive(Terminator& terminator, const Scenario& scenario, std::size_t n1) {
  std::vector<std::string> emitted;
  while (true) {
    const auto batch = terminator.next_batch(n1);
    if (batch.empty()) break;
    for (const auto& id : batch) {
      terminator.feedback(id, scenario.failing.count(id) > 0);
      emitted.push_back(id);
    }
  }
  return emitted;
}

FeatureVector scalar_feature(double value) {
  return FeatureVector::from_dense(std::vector<double>{value});
}

}  // namespace

TEST_CASE("before any failure, batches are seeded random samples") {
  const Scenario scenario = separable_scenario(30, 0, 5);
  TerminatorOptions options;
  options.seed = 17;
  Terminator a(scenario.universe, scenario.features, options);
  Terminator b(scenario.universe, scenario.features, options);
  const auto batch_a = a.next_batch(10);
  const auto batch_b = b.next_batch(10);
  CHECK(batch_a == batch_b);
  CHECK(batch_a.size() == 10);
  CHECK(a.last_strategy() == Terminator::Strategy::Random);

  TerminatorOptions other = options;
  other.seed = 18;
  Terminator c(scenario.universe, scenario.features, other);
  CHECK(c.next_batch(10) != batch_a);
}

TEST_CASE("tail batches shrink to the remaining count") {
  const Scenario scenario = separable_scenario(3, 0, 5);
  TerminatorOptions options;
  Terminator t(scenario.universe, scenario.features, options);
  CHECK(t.next_batch(10).size() == 3);
  CHECK(t.remaining() == 0);
}

TEST_CASE("strategy switches random -> uncertainty -> certainty as failures accrue") {
  const Scenario scenario = separable_scenario(40, 12, 9);
  TerminatorOptions options;
  options.n1 = 1;
  options.n2 = 2;
  options.seed = 1;
  Terminator t(scenario.universe, scenario.features, options);

  std::size_t failures_seen = 0;
  std::vector<std::string> emitted;
  while (true) {
    const auto batch = t.next_batch(options.n1);
    if (batch.empty()) break;
    if (failures_seen == 0) {
      CHECK(t.last_strategy() == Terminator::Strategy::Random);
    } else if (failures_seen < options.n2) {
      CHECK(t.last_strategy() == Terminator::Strategy::Uncertainty);
    } else {
      CHECK(t.last_strategy() == Terminator::Strategy::Certainty);
    }
    for (const auto& id : batch) {
      const bool failed = scenario.failing.count(id) > 0;
      t.feedback(id, failed);
      failures_seen += failed;
      emitted.push_back(id);
    }
  }
  CHECK(emitted.size() == scenario.universe.size());
  CHECK(t.failed().size() == scenario.failing.size());
}

TEST_CASE("worked micro-trace with N1=1, N2=2 on the 4-test example") {
  // Feedback follows run 4 of the worked example: t1, t2, t4 fail; t3 passes.
  const SessionHistory history = tcprio::testing::table1();
  const TextFeatures text = text_features(history);
  const std::vector<std::string> universe = history.test_ids();
  std::vector<FeatureVector> features;
  for (const auto& id : universe) features.push_back(text.vectors.at(id));
  const std::unordered_set<std::string> failing = {"t1", "t2", "t4"};

  // Pick the first seed whose opening random draw selects t2, matching the
  // narrated trace; the continuation is then fully deterministic.
  std::uint64_t seed = 0;
  for (std::uint64_t candidate = 1; candidate < 200; ++candidate) {
    TerminatorOptions probe;
    probe.n1 = 1;
    probe.n2 = 2;
    probe.seed = candidate;
    Terminator t(universe, features, probe);
    if (t.next_batch(1) == std::vector<std::string>{"t2"}) {
      seed = candidate;
      break;
    }
  }
  REQUIRE(seed != 0);

  TerminatorOptions options;
  options.n1 = 1;
  options.n2 = 2;
  options.seed = seed;
  Terminator t(universe, features, options);
  CHECK(t.next_batch(1) == std::vector<std::string>{"t2"});
  CHECK(t.last_strategy() == Terminator::Strategy::Random);
  t.feedback("t2", true);

  // One failure known: presume + train + uncertainty sampling.
  const auto second = t.next_batch(1);
  CHECK(t.last_strategy() == Terminator::Strategy::Uncertainty);
  t.feedback(second[0], failing.count(second[0]) > 0);

  std::size_t failures = 1 + (failing.count(second[0]) > 0);
  std::vector<std::string> emitted = {"t2", second[0]};
  while (true) {
    const auto batch = t.next_batch(1);
    if (batch.empty()) break;
    if (failures >= 2) {
      CHECK(t.last_strategy() == Terminator::Strategy::Certainty);
    } else {
      CHECK(t.last_strategy() == Terminator::Strategy::Uncertainty);
    }
    t.feedback(batch[0], failing.count(batch[0]) > 0);
    failures += failing.count(batch[0]) > 0;
    emitted.push_back(batch[0]);
  }
  std::sort(emitted.begin(), emitted.end());
  CHECK(emitted == std::vector<std::string>{"t1", "t2", "t3", "t4"});
  CHECK(t.failed().size() == 3);
}

TEST_CASE("presume cardinalities") {
  Rng rng(4);
  SUBCASE("|L|=4 with plenty unexecuted gives a training set of 8") {
    std::vector<std::size_t> executed = {0, 1, 2, 3};
    std::vector<bool> executed_failed = {true, false, false, false};
    std::vector<std::size_t> unexecuted;
    for (std::size_t i = 4; i < 104; ++i) unexecuted.push_back(i);
    const PresumedSet set = presume(executed, executed_failed, unexecuted, rng);
    CHECK(set.indices.size() == 8);
    CHECK(set.presumed_count == 4);
  }
  SUBCASE("|L|=10 with only 3 unexecuted clips to 13") {
    std::vector<std::size_t> executed;
    std::vector<bool> executed_failed;
    for (std::size_t i = 0; i < 10; ++i) {
      executed.push_back(i);
      executed_failed.push_back(i == 0);
    }
    const std::vector<std::size_t> unexecuted = {10, 11, 12};
    const PresumedSet set = presume(executed, executed_failed, unexecuted, rng);
    CHECK(set.indices.size() == 13);
    CHECK(set.presumed_count == 3);
  }
}

TEST_CASE("presumed tests are drawn without replacement and never overlap L") {
  Rng seed_rng(41);
  const std::vector<std::size_t> executed = {0, 1, 2, 3, 4};
  const std::vector<bool> executed_failed = {true, false, true, false, false};
  std::vector<std::size_t> unexecuted;
  for (std::size_t i = 5; i < 17; ++i) unexecuted.push_back(i);
  for (int draw = 0; draw < 1000; ++draw) {
    Rng rng(seed_rng.next_u64());
    const PresumedSet set = presume(executed, executed_failed, unexecuted, rng);
    std::set<std::size_t> seen;
    for (std::size_t i = 0; i < set.indices.size(); ++i) {
      CHECK(seen.insert(set.indices[i]).second);  // no duplicates anywhere
      if (i >= executed.size()) {
        CHECK(set.labels[i] == 0);
        CHECK(set.indices[i] >= 5);  // only unexecuted tests are presumed
      }
    }
  }
}

TEST_CASE("train: single balanced fit below N2, undersampled refit at N2") {
  // 1-D features: positives at +1, negatives spread below 0.
  std::vector<FeatureVector> features;
  PresumedSet presumed;
  const std::size_t n2 = 30;
  for (std::size_t i = 0; i < 30; ++i) {  // L_R = 30 failures
    features.push_back(scalar_feature(1.0));
    presumed.indices.push_back(features.size() - 1);
    presumed.labels.push_back(1);
  }
  for (std::size_t i = 0; i < 200; ++i) {  // 200 negatives
    features.push_back(scalar_feature(-0.01 * static_cast<double>(i + 1)));
    presumed.indices.push_back(features.size() - 1);
    presumed.labels.push_back(0);
  }

  SUBCASE("one failure: no undersampling") {
    TrainDiagnostics diagnostics;
    train(features, presumed, n2, 1, FitOptions{}, &diagnostics);
    CHECK_FALSE(diagnostics.undersampled);
  }
  SUBCASE("thirty failures: refit sees exactly 60 samples") {
    TrainDiagnostics diagnostics;
    train(features, presumed, n2, 30, FitOptions{}, &diagnostics);
    CHECK(diagnostics.undersampled);
    CHECK(diagnostics.refit_sample_count == 60);
    // Kept negatives are the most confidently negative ones.
    CHECK(diagnostics.kept_negative_max_decision <=
          diagnostics.discarded_negative_min_decision + 1e-12);
  }
  SUBCASE("training without any failure is a contract violation") {
    CHECK_THROWS_AS(train(features, presumed, n2, 0, FitOptions{}), std::logic_error);
  }
}

TEST_CASE("query ranks by certainty or uncertainty with index tie-break") {
  std::vector<FeatureVector> features = {scalar_feature(0.9), scalar_feature(0.1),
                                         scalar_feature(-0.8)};
  LinearModel model;
  model.weights = {1.0};
  const std::vector<std::size_t> unexecuted = {0, 1, 2};

  CHECK(query(model, features, unexecuted, 2, true) == std::vector<std::size_t>{0, 1});
  CHECK(query(model, features, unexecuted, 2, false) == std::vector<std::size_t>{1, 2});

  SUBCASE("all decisions equal: first N1 by index") {
    std::vector<FeatureVector> flat = {scalar_feature(0.5), scalar_feature(0.5),
                                       scalar_feature(0.5)};
    CHECK(query(model, flat, unexecuted, 2, true) == std::vector<std::size_t>{0, 1});
    CHECK(query(model, flat, unexecuted, 2, false) == std::vector<std::size_t>{0, 1});
  }
}

TEST_CASE("feedback contract") {
  const Scenario scenario = separable_scenario(10, 3, 3);
  TerminatorOptions options;
  Terminator t(scenario.universe, scenario.features, options);
  SUBCASE("feedback before any batch is rejected") {
    CHECK_THROWS_AS(t.feedback("t0", true), std::logic_error);
  }
  SUBCASE("feedback for an unknown id is rejected") {
    t.next_batch(4);
    CHECK_THROWS_AS(t.feedback("nope", true), std::logic_error);
  }
  SUBCASE("next_batch with outstanding feedback is rejected") {
    t.next_batch(4);
    CHECK_THROWS_AS(t.next_batch(4), std::logic_error);
  }
  SUBCASE("passing feedback never grows the failed list") {
    for (const auto& id : t.next_batch(10)) t.feedback(id, false);
    CHECK(t.failed().empty());
  }
}

TEST_CASE("emission is a permutation for every seed and feedback pattern") {
  Rng rng(71);
  for (int trial = 0; trial < 12; ++trial) {
    const Scenario scenario = separable_scenario(15 + rng.below(20), rng.below(8), rng.next_u64());
    TerminatorOptions options;
    options.n1 = 1 + rng.below(6);
    options.n2 = 1 + rng.below(5);
    options.seed = rng.next_u64();
    Terminator t(scenario.universe, scenario.features, options);

    std::vector<std::string> emitted;
    Rng flip(rng.next_u64());
    while (true) {
      const auto batch = t.next_batch(options.n1);
      if (batch.empty()) break;
      for (const auto& id : batch) {
        // Noisy feedback, not necessarily consistent with the features.
        t.feedback(id, flip.below(3) == 0);
        emitted.push_back(id);
      }
    }
    std::sort(emitted.begin(), emitted.end());
    std::vector<std::string> expected = scenario.universe;
    std::sort(expected.begin(), expected.end());
    CHECK(emitted == expected);
  }
}

TEST_CASE("checkpoint round-trips and the restored session continues identically") {
  const Scenario scenario = separable_scenario(40, 10, 23);
  TerminatorOptions options;
  options.n1 = 5;
  options.n2 = 3;
  options.seed = 91;
  options.variant = "F1";

  Terminator full(scenario.universe, scenario.features, options);
  Terminator prefix(scenario.universe, scenario.features, options);

  // Run both for two batches, then checkpoint/restore one of them.
  std::vector<std::string> trace_full;
  for (int step = 0; step < 2; ++step) {
    for (const auto& id : full.next_batch(options.n1)) {
      full.feedback(id, scenario.failing.count(id) > 0);
      trace_full.push_back(id);
    }
    for (const auto& id : prefix.next_batch(options.n1)) {
      prefix.feedback(id, scenario.failing.count(id) > 0);
    }
  }

  const std::string checkpoint = prefix.checkpoint();
  // Round trip: restoring and re-serializing is lossless.
  Terminator restored = Terminator::restore(checkpoint, scenario.universe, scenario.features);
  CHECK(restored.checkpoint() == checkpoint);
  CHECK(restored.executed() == prefix.executed());
  CHECK(restored.failed() == prefix.failed());
  CHECK(restored.options().n1 == options.n1);
  CHECK(restored.options().variant == "F1");

  // The restored session must continue exactly like the uninterrupted one.
  while (true) {
    const auto batch_full = full.next_batch(options.n1);
    const auto batch_restored = restored.next_batch(options.n1);
    CHECK(batch_full == batch_restored);
    if (batch_full.empty()) break;
    for (const auto& id : batch_full) full.feedback(id, scenario.failing.count(id) > 0);
    for (const auto& id : batch_restored) restored.feedback(id, scenario.failing.count(id) > 0);
  }
}

TEST_CASE("with separable features, the learner beats the random baseline") {
  for (std::uint64_t instance = 1; instance <= 20; ++instance) {
    const Scenario scenario = separable_scenario(60, 12, instance * 7);

    TerminatorOptions options;
    options.n1 = 5;
    options.n2 = 5;
    options.seed = instance;
    Terminator t(scenario.universe, scenario.features, options);
    const std::vector<std::string> order = drive(t, scenario, options.n1);

    SessionResult learner;
    learner.order = order;
    learner.failures = scenario.failing;
    learner.durations = scenario.durations;
    const double learner_apfdc = apfdc(learner).value();

    std::vector<double> random_scores;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SessionResult random_result;
      random_result.order = order_random(scenario.universe, seed * 31 + instance);
      random_result.failures = scenario.failing;
      random_result.durations = scenario.durations;
      random_scores.push_back(apfdc(random_result).value());
    }
    std::sort(random_scores.begin(), random_scores.end());
    const double random_median =
        0.5 * (random_scores[random_scores.size() / 2 - 1] + random_scores[random_scores.size() / 2]);
    CHECK(learner_apfdc >= random_median);
  }
}

#include "tcprio/synthetic.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tcprio/rng.hpp"

namespace tcprio {

namespace {

void check_probability(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

void SyntheticSpec::validate() const {
  if (n_tests < 1 || n_sessions < 1 || cluster_count < 1) {
    throw std::invalid_argument("counts must be >= 1");
  }
  check_probability(base_failure_rate, "base_failure_rate");
  check_probability(failure_persistence, "failure_persistence");
  check_probability(cluster_correlation, "cluster_correlation");
  check_probability(skip_rate, "skip_rate");
  if (!(duration_mean_s > 0.0) || !(duration_sigma >= 0.0)) {
    throw std::invalid_argument("duration parameters must be positive");
  }
}

SessionHistory generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();

  // Fraction of clusters afflicted per session, and the failure probability
  // inside an afflicted cluster when correlation is full.
  constexpr double kAfflictedShare = 0.15;
  constexpr double kAfflictedFailRate = 0.75;

  Rng structure_rng = derive_rng(spec.seed, "synthetic-structure");

  std::vector<std::size_t> cluster_of(spec.n_tests);
  std::vector<double> base_duration(spec.n_tests);
  std::vector<TestRecord> records(spec.n_tests);
  for (std::size_t t = 0; t < spec.n_tests; ++t) {
    cluster_of[t] = static_cast<std::size_t>(structure_rng.below(spec.cluster_count));
    base_duration[t] =
        spec.duration_mean_s * std::exp(spec.duration_sigma * structure_rng.normal());

    // Descriptions share tokens within a cluster so text features carry the
    // cluster signal; a couple of per-test tokens add vocabulary noise.
    const std::size_t cluster = cluster_of[t];
    std::string description = "scenario group" + std::to_string(cluster);
    for (int k = 0; k < 3; ++k) {
      description += " step" + std::to_string(cluster) + "x" +
                     std::to_string(structure_rng.below(8));
    }
    description += " widget" + std::to_string(structure_rng.below(spec.n_tests));

    records[t].test_id = "t" + std::to_string(t + 1);
    records[t].description = std::move(description);
  }

  Rng outcome_rng = derive_rng(spec.seed, "synthetic-outcomes");
  std::vector<bool> failed_before(spec.n_tests, false);
  std::vector<std::string> session_ids;
  session_ids.reserve(spec.n_sessions);

  for (std::size_t s = 0; s < spec.n_sessions; ++s) {
    session_ids.push_back("run" + std::to_string(s + 1));

    std::vector<bool> afflicted(spec.cluster_count);
    for (std::size_t c = 0; c < spec.cluster_count; ++c) {
      afflicted[c] = outcome_rng.next_double() < kAfflictedShare;
    }

    for (std::size_t t = 0; t < spec.n_tests; ++t) {
      const bool skipped = outcome_rng.next_double() < spec.skip_rate;
      // A skip consumes the failure draw too, so outcome streams stay aligned
      // across parameter changes.
      const double failure_draw = outcome_rng.next_double();

      double p_fail;
      if (failed_before[t]) {
        p_fail = spec.failure_persistence;
      } else {
        const double cluster_rate = afflicted[cluster_of[t]] ? kAfflictedFailRate : 0.0;
        p_fail = (1.0 - spec.cluster_correlation) * spec.base_failure_rate +
                 spec.cluster_correlation * cluster_rate;
      }
      const bool failed = failure_draw < p_fail;

      if (skipped) {
        records[t].outcomes.push_back(Outcome::Skipped);
        records[t].durations.push_back(0.0);
        // Skips leave the persistence chain where it was.
      } else {
        records[t].outcomes.push_back(failed ? Outcome::Failed : Outcome::Passed);
        const double jitter = 0.9 + 0.2 * outcome_rng.next_double();
        records[t].durations.push_back(base_duration[t] * jitter);
        failed_before[t] = failed;
      }
    }
  }

  return SessionHistory(std::move(records), std::move(session_ids));
}

}  // namespace tcprio

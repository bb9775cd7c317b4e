#pragma once

#include <cstdint>

#include "tcprio/history.hpp"

namespace tcprio {

// Knobs for desk-scale history generation. Failures carry two learnable
// signals: temporal persistence (a failing test tends to keep failing) and
// description-cluster correlation (tests in an afflicted cluster fail
// together, and share description tokens).
struct SyntheticSpec {
  std::size_t n_tests = 500;
  std::size_t n_sessions = 30;
  double base_failure_rate = 0.05;
  double failure_persistence = 0.6;    // P(fail | failed in previous session)
  std::size_t cluster_count = 20;
  double cluster_correlation = 0.9;    // 0 = failures ignore clusters entirely
  double duration_mean_s = 5.0;        // lognormal location (median seconds)
  double duration_sigma = 0.5;         // lognormal shape
  double skip_rate = 0.02;
  std::uint64_t seed = 1;

  void validate() const;
};

// Pure function of the spec: identical specs yield identical histories.
SessionHistory generate_synthetic(const SyntheticSpec& spec);

}  // namespace tcprio

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tcprio/dynamic_prioritizers.hpp"
#include "tcprio/feature.hpp"
#include "tcprio/linear_classifier.hpp"
#include "tcprio/rng.hpp"

namespace tcprio {

struct TerminatorOptions {
  std::size_t n1 = 10;  // batch size
  std::size_t n2 = 30;  // failures found before switching to certainty sampling
  std::uint64_t seed = 1;
  std::string variant = "F3";  // recorded in checkpoints
  FitOptions fit;
};

namespace terminator_detail {

struct PresumedSet {
  std::vector<std::size_t> indices;  // into the universe
  std::vector<int> labels;           // 1 = failed
  std::size_t presumed_count = 0;    // how many unexecuted tests were presumed passing
};

// Executed tests with their true labels plus |L| random unexecuted tests
// presumed passing (all of them when fewer remain), drawn without replacement.
PresumedSet presume(const std::vector<std::size_t>& executed,
                    const std::vector<bool>& executed_failed,
                    const std::vector<std::size_t>& unexecuted, Rng& rng);

struct TrainDiagnostics {
  bool undersampled = false;
  std::size_t refit_sample_count = 0;
  double kept_negative_max_decision = 0.0;
  double discarded_negative_min_decision = 0.0;
};

// Balanced fit on the presumed set; once failures_found >= n2, keeps only the
// most confidently-negative |L_R| samples and refits without class weighting.
LinearModel train(const std::vector<FeatureVector>& features, const PresumedSet& presumed,
                  std::size_t n2, std::size_t failures_found, const FitOptions& fit_options,
                  TrainDiagnostics* diagnostics = nullptr);

// Certainty: largest decision values first. Uncertainty: smallest |decision|
// first. Ties fall back to ascending universe index.
std::vector<std::size_t> query(const LinearModel& model,
                               const std::vector<FeatureVector>& features,
                               const std::vector<std::size_t>& unexecuted, std::size_t batch,
                               bool certainty);

}  // namespace terminator_detail

// Active-learning prioritizer: random sampling until the first failure, then
// presume/train/query cycles with uncertainty sampling, switching to certainty
// sampling after n2 failures. Variants differ only in the feature map.
class Terminator final : public FeedbackPrioritizer {
 public:
  enum class Strategy { None, Random, Uncertainty, Certainty };

  Terminator(std::vector<std::string> universe, std::vector<FeatureVector> features,
             TerminatorOptions options);

  std::vector<std::string> next_batch(std::size_t k) override;
  void feedback(const std::string& test_id, bool failed) override;
  std::size_t remaining() const override;

  const std::vector<std::size_t>& executed() const { return executed_; }
  const std::vector<std::size_t>& failed() const { return failed_; }
  Strategy last_strategy() const { return last_strategy_; }
  const TerminatorOptions& options() const { return options_; }

  // Mid-session checkpoint; features are not embedded and must be re-supplied
  // on restore.
  std::string checkpoint() const;
  static Terminator restore(const std::string& checkpoint_json, std::vector<std::string> universe,
                            std::vector<FeatureVector> features);

 private:
  std::vector<std::size_t> unexecuted_sorted() const;

  std::vector<std::string> ids_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<FeatureVector> features_;
  TerminatorOptions options_;

  std::vector<std::size_t> executed_;         // L, in execution order
  std::vector<std::size_t> failed_;           // L_R, in detection order
  std::vector<bool> executed_failed_;         // aligned with executed_
  std::vector<std::size_t> pending_;          // emitted, awaiting feedback
  std::vector<bool> candidate_;               // neither executed nor pending
  Strategy last_strategy_ = Strategy::None;
};

}  // namespace tcprio

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tcprio/history.hpp"

namespace tcprio {

// Sparse real-valued vector with an explicit dimensionality. Entries are kept
// sorted by index; zero values are dropped.
class FeatureVector {
 public:
  using Entry = std::pair<std::uint32_t, double>;

  FeatureVector() = default;
  explicit FeatureVector(std::size_t dimensionality) : dim_(dimensionality) {}
  FeatureVector(std::size_t dimensionality, std::vector<Entry> entries);

  static FeatureVector from_dense(std::span<const double> values);

  std::size_t dimensionality() const { return dim_; }
  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  double value_at(std::uint32_t index) const;
  double l2_norm() const;
  void l2_normalize();  // no-op on the zero vector
  double dot_dense(std::span<const double> dense) const;

  // Concatenation: head dimensions first, tail indices shifted. No
  // re-normalization is applied.
  static FeatureVector concat(const FeatureVector& head, const FeatureVector& tail);

  bool operator==(const FeatureVector&) const = default;

 private:
  std::vector<Entry> entries_;
  std::size_t dim_ = 0;
};

// Lowercases and splits on any non-alphanumeric character.
std::vector<std::string> tokenize(std::string_view text);

struct TextFeatures {
  std::size_t dimensionality = 0;
  std::vector<std::string> vocabulary;  // empty when input was pre-featurized
  std::unordered_map<std::string, FeatureVector> vectors;
};

// Term-frequency rows over a vocabulary built in first-appearance order, each
// row L2-normalized. No stop-word removal, no stemming. Records that carry a
// pre-featurized vector pass through after L2 normalization instead.
TextFeatures text_features(const SessionHistory& history);

// One dimension per prior session: Failed -> 1, Passed -> -1,
// Skipped/Timeout -> 0. `prior_sessions` must not exceed the session count.
std::unordered_map<std::string, FeatureVector> history_features(const SessionHistory& history,
                                                                std::size_t prior_sessions);

FeatureVector hybrid_features(const FeatureVector& text, const FeatureVector& hist);

}  // namespace tcprio

#include "tcprio/feature.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace tcprio {

FeatureVector::FeatureVector(std::size_t dimensionality, std::vector<Entry> entries)
    : entries_(std::move(entries)), dim_(dimensionality) {
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.first < b.first; });
  // Merge duplicate indices, drop zeros.
  std::vector<Entry> merged;
  merged.reserve(entries_.size());
  for (const Entry& e : entries_) {
    if (e.first >= dim_) throw std::out_of_range("feature index exceeds dimensionality");
    if (!merged.empty() && merged.back().first == e.first) {
      merged.back().second += e.second;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Entry& e) { return e.second == 0.0; });
  entries_ = std::move(merged);
}

FeatureVector FeatureVector::from_dense(std::span<const double> values) {
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] != 0.0) entries.emplace_back(static_cast<std::uint32_t>(i), values[i]);
  }
  return FeatureVector(values.size(), std::move(entries));
}

double FeatureVector::value_at(std::uint32_t index) const {
  const auto it = std::lower_bound(
      entries_.begin(), entries_.end(), index,
      [](const Entry& e, std::uint32_t i) { return e.first < i; });
  return (it != entries_.end() && it->first == index) ? it->second : 0.0;
}

double FeatureVector::l2_norm() const {
  double sq = 0.0;
  for (const Entry& e : entries_) sq += e.second * e.second;
  return std::sqrt(sq);
}

void FeatureVector::l2_normalize() {
  const double norm = l2_norm();
  if (norm == 0.0) return;
  for (Entry& e : entries_) e.second /= norm;
}

double FeatureVector::dot_dense(std::span<const double> dense) const {
  double sum = 0.0;
  for (const Entry& e : entries_) {
    if (e.first < dense.size()) sum += e.second * dense[e.first];
  }
  return sum;
}

FeatureVector FeatureVector::concat(const FeatureVector& head, const FeatureVector& tail) {
  std::vector<Entry> entries = head.entries_;
  entries.reserve(entries.size() + tail.entries_.size());
  const auto offset = static_cast<std::uint32_t>(head.dim_);
  for (const Entry& e : tail.entries_) entries.emplace_back(offset + e.first, e.second);
  return FeatureVector(head.dim_ + tail.dim_, std::move(entries));
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (const char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

TextFeatures text_features(const SessionHistory& history) {
  TextFeatures result;

  bool any_text = false;
  bool any_prefeaturized = false;
  for (const TestRecord& rec : history.tests()) {
    (rec.description ? any_text : any_prefeaturized) = true;
  }
  if (any_text && any_prefeaturized) {
    throw ValidationError("dataset mixes raw descriptions and pre-featurized vectors");
  }

  if (any_prefeaturized) {
    std::size_t dim = 0;
    for (const TestRecord& rec : history.tests()) dim = std::max(dim, rec.prefeaturized->size());
    result.dimensionality = dim;
    for (const TestRecord& rec : history.tests()) {
      std::vector<double> dense = *rec.prefeaturized;
      dense.resize(dim, 0.0);
      FeatureVector v = FeatureVector::from_dense(dense);
      v.l2_normalize();
      result.vectors.emplace(rec.test_id, std::move(v));
    }
    return result;
  }

  // Vocabulary in first-appearance order keeps the dimension layout a pure
  // function of the input file.
  std::unordered_map<std::string, std::uint32_t> vocab_index;
  std::vector<std::vector<std::string>> token_lists;
  token_lists.reserve(history.test_count());
  for (const TestRecord& rec : history.tests()) {
    token_lists.push_back(tokenize(rec.description.value_or("")));
    for (const std::string& tok : token_lists.back()) {
      if (vocab_index.emplace(tok, static_cast<std::uint32_t>(result.vocabulary.size())).second) {
        result.vocabulary.push_back(tok);
      }
    }
  }
  result.dimensionality = result.vocabulary.size();

  for (std::size_t i = 0; i < history.test_count(); ++i) {
    std::vector<FeatureVector::Entry> entries;
    entries.reserve(token_lists[i].size());
    for (const std::string& tok : token_lists[i]) entries.emplace_back(vocab_index.at(tok), 1.0);
    FeatureVector v(result.dimensionality, std::move(entries));  // merges duplicates into counts
    v.l2_normalize();
    result.vectors.emplace(history.test(i).test_id, std::move(v));
  }
  return result;
}

std::unordered_map<std::string, FeatureVector> history_features(const SessionHistory& history,
                                                                std::size_t prior_sessions) {
  if (prior_sessions > history.session_count()) {
    throw std::out_of_range("prior_sessions exceeds session count");
  }
  std::unordered_map<std::string, FeatureVector> result;
  result.reserve(history.test_count());
  for (const TestRecord& rec : history.tests()) {
    std::vector<FeatureVector::Entry> entries;
    for (std::size_t s = 0; s < prior_sessions; ++s) {
      switch (rec.outcomes[s]) {
        case Outcome::Failed:
          entries.emplace_back(static_cast<std::uint32_t>(s), 1.0);
          break;
        case Outcome::Passed:
          entries.emplace_back(static_cast<std::uint32_t>(s), -1.0);
          break;
        case Outcome::Skipped:
        case Outcome::Timeout:
          break;
      }
    }
    result.emplace(rec.test_id, FeatureVector(prior_sessions, std::move(entries)));
  }
  return result;
}

FeatureVector hybrid_features(const FeatureVector& text, const FeatureVector& hist) {
  return FeatureVector::concat(text, hist);
}

}  // namespace tcprio

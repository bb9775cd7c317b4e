#include "tcprio/terminator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace tcprio {

namespace terminator_detail {

PresumedSet presume(const std::vector<std::size_t>& executed,
                    const std::vector<bool>& executed_failed,
                    const std::vector<std::size_t>& unexecuted, Rng& rng) {
  PresumedSet set;
  set.indices = executed;
  set.labels.reserve(executed.size());
  for (const bool failed : executed_failed) set.labels.push_back(failed ? 1 : 0);

  const std::size_t want = std::min(executed.size(), unexecuted.size());
  const std::vector<std::size_t> picks = rng.sample_without_replacement(unexecuted.size(), want);
  for (const std::size_t p : picks) {
    set.indices.push_back(unexecuted[p]);
    set.labels.push_back(0);
    ++set.presumed_count;
  }
  return set;
}

LinearModel train(const std::vector<FeatureVector>& features, const PresumedSet& presumed,
                  std::size_t n2, std::size_t failures_found, const FitOptions& fit_options,
                  TrainDiagnostics* diagnostics) {
  if (failures_found == 0) {
    throw std::logic_error("training requires at least one observed failure");
  }
  const std::size_t dim = features.empty() ? 0 : features.front().dimensionality();

  std::vector<const FeatureVector*> xs;
  xs.reserve(presumed.indices.size());
  for (const std::size_t i : presumed.indices) xs.push_back(&features[i]);

  LinearModel model = fit_linear_svm(xs, presumed.labels, ClassWeighting::Balanced, dim, fit_options);
  if (failures_found < n2) return model;

  // Aggressive undersampling: keep the |L_R| negatives the balanced model is
  // most confident about, then refit unweighted.
  std::vector<std::size_t> negatives;  // positions into presumed.indices
  for (std::size_t i = 0; i < presumed.indices.size(); ++i) {
    if (presumed.labels[i] == 0) negatives.push_back(i);
  }
  std::vector<double> decision(negatives.size());
  for (std::size_t i = 0; i < negatives.size(); ++i) {
    decision[i] = model.decision(features[presumed.indices[negatives[i]]]);
  }
  std::vector<std::size_t> by_decision(negatives.size());
  for (std::size_t i = 0; i < by_decision.size(); ++i) by_decision[i] = i;
  std::stable_sort(by_decision.begin(), by_decision.end(),
                   [&decision](std::size_t a, std::size_t b) { return decision[a] < decision[b]; });

  const std::size_t keep = std::min(failures_found, by_decision.size());
  std::vector<const FeatureVector*> xs2;
  std::vector<int> ys2;
  for (std::size_t i = 0; i < presumed.indices.size(); ++i) {
    if (presumed.labels[i] == 1) {
      xs2.push_back(&features[presumed.indices[i]]);
      ys2.push_back(1);
    }
  }
  for (std::size_t r = 0; r < keep; ++r) {
    xs2.push_back(&features[presumed.indices[negatives[by_decision[r]]]]);
    ys2.push_back(0);
  }

  if (diagnostics) {
    diagnostics->undersampled = true;
    diagnostics->refit_sample_count = xs2.size();
    diagnostics->kept_negative_max_decision =
        keep > 0 ? decision[by_decision[keep - 1]] : 0.0;
    diagnostics->discarded_negative_min_decision =
        keep < by_decision.size() ? decision[by_decision[keep]] : 0.0;
  }
  return fit_linear_svm(xs2, ys2, ClassWeighting::None, dim, fit_options);
}

std::vector<std::size_t> query(const LinearModel& model,
                               const std::vector<FeatureVector>& features,
                               const std::vector<std::size_t>& unexecuted, std::size_t batch,
                               bool certainty) {
  std::vector<double> keys(unexecuted.size());
  for (std::size_t i = 0; i < unexecuted.size(); ++i) {
    const double d = model.decision(features[unexecuted[i]]);
    keys[i] = certainty ? -d : std::abs(d);  // both directions become "smallest first"
  }
  std::vector<std::size_t> positions(unexecuted.size());
  for (std::size_t i = 0; i < positions.size(); ++i) positions[i] = i;
  std::stable_sort(positions.begin(), positions.end(),
                   [&keys](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });

  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < batch && i < positions.size(); ++i) {
    picked.push_back(unexecuted[positions[i]]);
  }
  return picked;
}

}  // namespace terminator_detail

Terminator::Terminator(std::vector<std::string> universe, std::vector<FeatureVector> features,
                       TerminatorOptions options)
    : ids_(std::move(universe)), features_(std::move(features)), options_(std::move(options)) {
  if (ids_.size() != features_.size()) {
    throw std::invalid_argument("universe and feature map sizes differ");
  }
  if (options_.n1 < 1 || options_.n2 < 1) throw std::invalid_argument("N1 and N2 must be >= 1");
  index_.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) {
      throw std::invalid_argument("duplicate test id: " + ids_[i]);
    }
  }
  candidate_.assign(ids_.size(), true);
}

std::vector<std::size_t> Terminator::unexecuted_sorted() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (candidate_[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::string> Terminator::next_batch(std::size_t k) {
  if (!pending_.empty()) {
    throw std::logic_error("next_batch called with feedback still outstanding");
  }
  const std::vector<std::size_t> unexecuted = unexecuted_sorted();
  if (unexecuted.empty()) return {};
  const std::size_t batch = std::min(k, unexecuted.size());

  std::vector<std::size_t> picked;
  if (failed_.empty()) {
    // No failure seen yet: seeded random sampling. Streams are derived from
    // (seed, |L|) so a restored checkpoint continues identically.
    Rng rng = derive_rng(options_.seed, "random-batch", executed_.size());
    const std::vector<std::size_t> positions =
        rng.sample_without_replacement(unexecuted.size(), batch);
    for (const std::size_t p : positions) picked.push_back(unexecuted[p]);
    last_strategy_ = Strategy::Random;
  } else {
    Rng rng = derive_rng(options_.seed, "presume", executed_.size());
    const terminator_detail::PresumedSet presumed =
        terminator_detail::presume(executed_, executed_failed_, unexecuted, rng);
    const LinearModel model = terminator_detail::train(features_, presumed, options_.n2,
                                                       failed_.size(), options_.fit);
    const bool certainty = failed_.size() >= options_.n2;
    picked = terminator_detail::query(model, features_, unexecuted, batch, certainty);
    last_strategy_ = certainty ? Strategy::Certainty : Strategy::Uncertainty;
  }

  std::vector<std::string> batch_ids;
  batch_ids.reserve(picked.size());
  for (const std::size_t i : picked) {
    candidate_[i] = false;
    pending_.push_back(i);
    batch_ids.push_back(ids_[i]);
  }
  return batch_ids;
}

void Terminator::feedback(const std::string& test_id, bool failed) {
  const auto it = index_.find(test_id);
  if (it == index_.end()) throw std::logic_error("feedback for unknown test: " + test_id);
  const auto pending_it = std::find(pending_.begin(), pending_.end(), it->second);
  if (pending_it == pending_.end()) {
    throw std::logic_error("feedback for test that is not pending: " + test_id);
  }
  pending_.erase(pending_it);
  executed_.push_back(it->second);
  executed_failed_.push_back(failed);
  if (failed) failed_.push_back(it->second);
}

std::size_t Terminator::remaining() const {
  std::size_t count = 0;
  for (const bool alive : candidate_) count += alive;
  return count;
}

std::string Terminator::checkpoint() const {
  nlohmann::json doc;
  auto names = [this](const std::vector<std::size_t>& indices) {
    nlohmann::json arr = nlohmann::json::array();
    for (const std::size_t i : indices) arr.push_back(ids_[i]);
    return arr;
  };
  doc["L"] = names(executed_);
  doc["L_R"] = names(failed_);
  doc["pending"] = names(pending_);
  doc["seed"] = options_.seed;
  doc["n1"] = options_.n1;
  doc["n2"] = options_.n2;
  doc["variant"] = options_.variant;
  return doc.dump();
}

Terminator Terminator::restore(const std::string& checkpoint_json,
                               std::vector<std::string> universe,
                               std::vector<FeatureVector> features) {
  const nlohmann::json doc = nlohmann::json::parse(checkpoint_json);
  TerminatorOptions options;
  options.seed = doc.at("seed").get<std::uint64_t>();
  options.n1 = doc.at("n1").get<std::size_t>();
  options.n2 = doc.at("n2").get<std::size_t>();
  options.variant = doc.at("variant").get<std::string>();

  Terminator t(std::move(universe), std::move(features), options);
  std::unordered_set<std::string> failed_set;
  for (const auto& id : doc.at("L_R")) failed_set.insert(id.get<std::string>());
  for (const auto& id_json : doc.at("L")) {
    const std::string id = id_json.get<std::string>();
    const std::size_t i = t.index_.at(id);
    if (!t.candidate_[i]) throw std::invalid_argument("checkpoint repeats test " + id);
    t.candidate_[i] = false;
    t.executed_.push_back(i);
    const bool failed = failed_set.count(id) > 0;
    t.executed_failed_.push_back(failed);
    if (failed) t.failed_.push_back(i);
  }
  for (const auto& id_json : doc.at("pending")) {
    const std::string id = id_json.get<std::string>();
    const std::size_t i = t.index_.at(id);
    if (!t.candidate_[i]) throw std::invalid_argument("checkpoint repeats test " + id);
    t.candidate_[i] = false;
    t.pending_.push_back(i);
  }
  return t;
}

}  // namespace tcprio

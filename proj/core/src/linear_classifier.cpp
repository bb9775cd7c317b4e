#include "tcprio/linear_classifier.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcprio {

namespace {

// The optimizer descends a Huber-smoothed hinge (C1, equal to the hinge
// outside a kSmoothing-wide band below margin 1). Plain subgradient steps can
// stall exactly on hinge kinks; the smoothed surrogate keeps line-searched
// gradient descent monotone and convergent while moving optima by O(kSmoothing).
constexpr double kSmoothing = 1e-5;

double smoothed_loss(double margin) {
  const double gap = 1.0 - margin;
  if (gap <= 0.0) return 0.0;
  if (gap >= kSmoothing) return gap - 0.5 * kSmoothing;
  return 0.5 * gap * gap / kSmoothing;
}

// d(loss)/d(margin)
double smoothed_slope(double margin) {
  const double gap = 1.0 - margin;
  if (gap <= 0.0) return 0.0;
  if (gap >= kSmoothing) return -1.0;
  return -gap / kSmoothing;
}

double smoothed_objective(const WeightedHingeProblem& problem, std::span<const double> w,
                          double b) {
  double penalty = 0.0;
  for (const double v : w) penalty += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < problem.samples.size(); ++i) {
    const double margin = problem.targets[i] * (problem.samples[i]->dot_dense(w) + b);
    loss += problem.loss_weight[i] * smoothed_loss(margin);
  }
  return 0.5 * penalty + loss;
}

void smoothed_gradient(const WeightedHingeProblem& problem, std::span<const double> w, double b,
                       std::span<double> gw, double* gb) {
  std::copy(w.begin(), w.end(), gw.begin());
  double gbias = 0.0;
  for (std::size_t i = 0; i < problem.samples.size(); ++i) {
    const double margin = problem.targets[i] * (problem.samples[i]->dot_dense(w) + b);
    const double slope = smoothed_slope(margin);
    if (slope == 0.0) continue;
    const double coeff = problem.loss_weight[i] * problem.targets[i] * slope;
    for (const auto& [index, value] : problem.samples[i]->entries()) gw[index] += coeff * value;
    gbias += coeff;
  }
  *gb = gbias;
}

}  // namespace

double WeightedHingeProblem::objective(std::span<const double> w, double b) const {
  double penalty = 0.0;
  for (const double v : w) penalty += v * v;
  double loss = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double margin = targets[i] * (samples[i]->dot_dense(w) + b);
    if (margin < 1.0) loss += loss_weight[i] * (1.0 - margin);
  }
  return 0.5 * penalty + loss;
}

void WeightedHingeProblem::subgradient(std::span<const double> w, double b, std::span<double> gw,
                                       double* gb) const {
  std::copy(w.begin(), w.end(), gw.begin());
  double gbias = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double margin = targets[i] * (samples[i]->dot_dense(w) + b);
    if (margin < 1.0) {
      const double coeff = loss_weight[i] * targets[i];
      for (const auto& [index, value] : samples[i]->entries()) gw[index] -= coeff * value;
      gbias -= coeff;
    }
  }
  *gb = gbias;
}

WeightedHingeProblem make_hinge_problem(const std::vector<const FeatureVector*>& samples,
                                        const std::vector<int>& labels, ClassWeighting weighting,
                                        std::size_t dimensionality, double cost) {
  if (samples.size() != labels.size()) throw std::invalid_argument("samples/labels size mismatch");
  std::size_t n_pos = 0;
  for (const int y : labels) n_pos += (y != 0);
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw std::invalid_argument("degenerate training set");

  WeightedHingeProblem problem;
  problem.samples = samples;
  problem.dimensionality = dimensionality;
  problem.targets.reserve(labels.size());
  problem.loss_weight.reserve(labels.size());
  const double n = static_cast<double>(labels.size());
  for (const int y : labels) {
    problem.targets.push_back(y != 0 ? 1.0 : -1.0);
    if (weighting == ClassWeighting::Balanced) {
      problem.loss_weight.push_back(cost * n / (2.0 * static_cast<double>(y != 0 ? n_pos : n_neg)));
    } else {
      problem.loss_weight.push_back(cost);
    }
  }
  return problem;
}

LinearModel fit_linear_svm(const std::vector<const FeatureVector*>& samples,
                           const std::vector<int>& labels, ClassWeighting weighting,
                           std::size_t dimensionality, const FitOptions& options) {
  const WeightedHingeProblem problem =
      make_hinge_problem(samples, labels, weighting, dimensionality, options.cost);

  std::vector<double> w(dimensionality, 0.0);
  double b = 0.0;
  double f = smoothed_objective(problem, w, b);
  if (options.objective_trace) options.objective_trace->push_back(f);

  std::vector<double> gw(dimensionality);
  std::vector<double> trial_w(dimensionality);
  double step = 1.0;

  for (std::size_t epoch = 0; epoch < options.max_epochs; ++epoch) {
    double gb = 0.0;
    smoothed_gradient(problem, w, b, gw, &gb);
    double grad_sq = gb * gb;
    for (const double g : gw) grad_sq += g * g;
    if (grad_sq < 1e-24) break;

    // Backtracking line search; only strict decreases are accepted, so the
    // recorded objective is non-increasing.
    double trial_f = f;
    double trial_b = b;
    bool accepted = false;
    for (int halvings = 0; halvings < 60; ++halvings) {
      for (std::size_t d = 0; d < dimensionality; ++d) trial_w[d] = w[d] - step * gw[d];
      trial_b = b - step * gb;
      trial_f = smoothed_objective(problem, trial_w, trial_b);
      if (trial_f <= f - 1e-4 * step * grad_sq) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || trial_f >= f) break;

    const double improvement = f - trial_f;
    w.swap(trial_w);
    b = trial_b;
    f = trial_f;
    step *= 2.0;
    if (options.objective_trace) options.objective_trace->push_back(f);
    if (improvement <= options.tolerance * std::max(1.0, std::abs(f))) break;
  }

  LinearModel model;
  model.weights = std::move(w);
  model.bias = b;
  return model;
}

}  // namespace tcprio

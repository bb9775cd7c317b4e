#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "tcprio/feature.hpp"

namespace tcprio {

enum class ClassWeighting { Balanced, None };

struct LinearModel {
  std::vector<double> weights;
  double bias = 0.0;

  // Signed margin; positive means predicted failing class.
  double decision(const FeatureVector& x) const { return x.dot_dense(weights) + bias; }
};

struct FitOptions {
  double cost = 1.0;          // hinge weight relative to the L2 penalty
  std::size_t max_epochs = 200;
  double tolerance = 1e-10;   // relative objective improvement below which we stop
  // Per-epoch values of the optimizer's objective (the Huber-smoothed hinge it
  // descends), if wanted. Non-increasing by construction.
  std::vector<double>* objective_trace = nullptr;
};

// L2-regularized weighted hinge loss:
//   F(w, b) = 0.5*||w||^2 + sum_i q_i * max(0, 1 - y_i*(w.x_i + b))
// with q_i = cost * n/(2*n_class) under Balanced weighting and q_i = cost
// under None.
struct WeightedHingeProblem {
  std::vector<const FeatureVector*> samples;
  std::vector<double> targets;      // +1 / -1
  std::vector<double> loss_weight;  // q_i
  std::size_t dimensionality = 0;

  double objective(std::span<const double> w, double b) const;
  void subgradient(std::span<const double> w, double b, std::span<double> gw, double* gb) const;
};

WeightedHingeProblem make_hinge_problem(const std::vector<const FeatureVector*>& samples,
                                        const std::vector<int>& labels, ClassWeighting weighting,
                                        std::size_t dimensionality, double cost = 1.0);

// Deterministic full-batch gradient descent with a monotone line search on a
// Huber-smoothed hinge (width 1e-5, exact hinge elsewhere). Requires at least
// one sample of each class.
LinearModel fit_linear_svm(const std::vector<const FeatureVector*>& samples,
                           const std::vector<int>& labels, ClassWeighting weighting,
                           std::size_t dimensionality, const FitOptions& options = {});

}  // namespace tcprio

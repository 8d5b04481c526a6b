#pragma once

#include <span>
#include <string>
#include <vector>

#include "vmimo/rng.hpp"

namespace vmimo {

struct SmoConfig {
  double kkt_tolerance = 1e-3;
  int max_passes = 100;  // outer examine sweeps before giving up
  double numeric_eps = 1e-12;
  /// Hard cap on successful pair optimizations, as a multiple of the
  /// training-set size; keeps pathological (C, gamma) cells bounded.
  long max_steps_per_sample = 200;
  bool record_objective_trace = false;
};

/// Soft-margin RBF model. Only support vectors (alpha > 0) are stored;
/// sum(alpha_i * y_i) stays 0 within 1e-6 by construction of the solver.
struct SvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<int> sv_labels;
  std::vector<double> alphas;
  double bias = 0.0;
  double gamma = 1.0;
  double c = 1.0;
};

struct SvmProblem {
  std::vector<std::vector<double>> x;
  std::vector<int> y;  // +1 / -1

  int size() const { return static_cast<int>(y.size()); }
};

/// exp(-gamma * ||a-b||^2), gamma > 0. Always in (0, 1].
double rbf_kernel(std::span<const double> a, std::span<const double> b,
                  double gamma);

struct SmoResult {
  SvmModel model;
  bool converged = false;
  int passes = 0;
  std::vector<double> alphas_full;  // aligned with the input problem
  std::vector<double> objective_trace;  // per successful step, if recorded
};

/// Sequential minimal optimization for the soft-margin dual: pairwise
/// exact subproblems with Platt's first/second choice heuristics and an
/// incremental error cache. The kernel matrix is precomputed.
SmoResult smo_train(const SvmProblem& problem, double c, double gamma,
                    const SmoConfig& config, RngStream& rng);

/// Same solver over a caller-supplied row-major kernel matrix (size n*n);
/// lets a grid search reuse one distance matrix across gamma values.
SmoResult smo_train_prepared(const SvmProblem& problem, double c, double gamma,
                             const SmoConfig& config, RngStream& rng,
                             std::span<const double> kernel);

/// sum_i alpha_i y_i K(x, sv_i) + bias.
double decision_value(const SvmModel& model, std::span<const double> x);

/// +1 when the decision value is strictly positive, otherwise -1.
int classify(const SvmModel& model, std::span<const double> x);

/// Dual objective W(alpha) over the full problem; O(n^2).
double dual_objective(const SvmProblem& problem, std::span<const double> alphas,
                      double gamma);

/// Largest KKT residual of the soft-margin dual at (alphas, bias).
double kkt_max_violation(const SvmProblem& problem,
                         std::span<const double> alphas, double bias, double c,
                         double gamma);

struct GridSearchSpec {
  std::vector<double> c_grid{0.125, 0.5, 2.0, 8.0, 32.0, 128.0};
  std::vector<double> gamma_grid{0.0078125, 0.03125, 0.125, 0.5, 2.0, 8.0};
  int folds = 3;
};

struct CrossValResult {
  double best_c = 0.0;
  double best_gamma = 0.0;
  double best_accuracy = 0.0;
  std::vector<std::vector<double>> cell_accuracy;  // [c index][gamma index]
  std::vector<double> c_grid;      // ascending, as evaluated
  std::vector<double> gamma_grid;  // ascending, as evaluated
  std::vector<int> fold_of_sample;
  /// Held-out prediction of every sample under the winning cell.
  std::vector<int> best_cell_predictions;
};

/// Stratified k-fold grid search; returns the argmax of mean fold accuracy,
/// ties broken toward smaller C, then smaller gamma.
CrossValResult cross_validate(const SvmProblem& problem,
                              const GridSearchSpec& spec,
                              const SmoConfig& config, RngStream& rng);

std::string svm_to_json(const SvmModel& model);
SvmModel svm_from_json(const std::string& text);

namespace detail {
/// Row-major n*n matrix of squared Euclidean distances.
std::vector<double> squared_distance_matrix(
    const std::vector<std::vector<double>>& x);
void kernel_from_distances(std::span<const double> d2, double gamma,
                           std::vector<double>& kernel_out);
}  // namespace detail

}  // namespace vmimo

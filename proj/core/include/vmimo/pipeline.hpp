#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vmimo/behavior.hpp"
#include "vmimo/mlp.hpp"
#include "vmimo/rng.hpp"
#include "vmimo/svm.hpp"

namespace vmimo {

enum class ClassifierKind { Mlp, Svm };

std::string to_string(ClassifierKind kind);
ClassifierKind classifier_from_string(const std::string& name);

struct ClassifierSettings {
  int mlp_hidden = 10;
  RpropConfig rprop;
  GridSearchSpec grid;
  SmoConfig smo;
};

/// One user's trained willingness predictor: the train-fit scaler plus
/// either engine behind a common predict().
struct UserModel {
  ClassifierKind kind = ClassifierKind::Mlp;
  Scaler scaler;
  MlpNetwork mlp;
  SvmModel svm;

  int predict(const WillingnessContext& ctx) const;
  int predict_features(const FeatureVector& raw) const;
};

struct TrainingInfo {
  double final_mse = 0.0;
  int epochs = 0;
  bool converged = true;
  std::vector<double> mse_trace;  // MLP: full per-epoch trace
  double best_c = 0.0;
  double best_gamma = 0.0;
  double cv_accuracy = 0.0;
  std::vector<std::vector<double>> cv_cell_accuracy;  // SVM: grid scores
};

UserModel train_user_model(std::span<const Sample> train_data,
                           ClassifierKind kind,
                           const ClassifierSettings& settings, RngStream& rng,
                           TrainingInfo* info = nullptr);

/// Seeded stratified split; returns (train indices, test indices), each
/// ascending. Guarantees at least one sample per class in the train part
/// when the dataset has both.
std::pair<std::vector<int>, std::vector<int>> stratified_split(
    std::span<const Sample> dataset, double train_fraction, RngStream& rng);

std::vector<LabeledVector> to_labeled_vectors(std::span<const Sample> samples,
                                              const Scaler& scaler);
SvmProblem to_svm_problem(std::span<const Sample> samples, const Scaler& scaler);

/// Runs fn(0..n-1) on up to `threads` workers (0 = hardware concurrency).
/// Work per index must be independent; the first exception is rethrown.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

}  // namespace vmimo

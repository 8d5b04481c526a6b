#include "vmimo/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "vmimo/errors.hpp"

namespace vmimo {

std::string to_string(ClassifierKind kind) {
  return kind == ClassifierKind::Mlp ? "mlp" : "svm";
}

ClassifierKind classifier_from_string(const std::string& name) {
  if (name == "mlp") return ClassifierKind::Mlp;
  if (name == "svm") return ClassifierKind::Svm;
  throw ConfigError("unknown classifier '" + name + "' (expected mlp or svm)");
}

int UserModel::predict(const WillingnessContext& ctx) const {
  return predict_features(encode_features(ctx));
}

int UserModel::predict_features(const FeatureVector& raw) const {
  const FeatureVector scaled = scaler.apply(raw);
  if (kind == ClassifierKind::Mlp) return mlp.predict(scaled);
  return classify(svm, scaled);
}

UserModel train_user_model(std::span<const Sample> train_data,
                           ClassifierKind kind,
                           const ClassifierSettings& settings, RngStream& rng,
                           TrainingInfo* info) {
  if (train_data.empty())
    throw std::invalid_argument("train_user_model: empty training set");
  UserModel model;
  model.kind = kind;
  model.scaler = Scaler::fit(train_data);

  if (kind == ClassifierKind::Mlp) {
    const auto vectors = to_labeled_vectors(train_data, model.scaler);
    model.mlp = MlpNetwork::create({kFeatureDim, settings.mlp_hidden, 2},
                                   settings.rprop.delta_init);
    auto train_rng = rng.child(0);
    const auto result = train(model.mlp, vectors, settings.rprop, train_rng);
    if (info != nullptr) {
      info->final_mse = result.final_mse();
      info->epochs = result.epochs();
      info->converged = result.converged;
      info->mse_trace = result.mse_trace;
    }
  } else {
    const auto problem = to_svm_problem(train_data, model.scaler);
    auto cv_rng = rng.child(1);
    const auto cv = cross_validate(problem, settings.grid, settings.smo, cv_rng);
    auto fit_rng = rng.child(2);
    const auto solved =
        smo_train(problem, cv.best_c, cv.best_gamma, settings.smo, fit_rng);
    model.svm = solved.model;
    if (info != nullptr) {
      info->best_c = cv.best_c;
      info->best_gamma = cv.best_gamma;
      info->cv_accuracy = cv.best_accuracy;
      info->cv_cell_accuracy = cv.cell_accuracy;
      info->converged = solved.converged;
    }
  }
  return model;
}

std::pair<std::vector<int>, std::vector<int>> stratified_split(
    std::span<const Sample> dataset, double train_fraction, RngStream& rng) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw ConfigError("train_fraction must lie in (0, 1)");
  std::vector<int> pos, neg;
  for (std::size_t i = 0; i < dataset.size(); ++i)
    (dataset[i].label == 1 ? pos : neg).push_back(static_cast<int>(i));
  rng.shuffle(pos);
  rng.shuffle(neg);

  std::vector<int> train_idx, test_idx;
  auto deal = [&](std::vector<int>& cls) {
    // Round up so a non-empty class always contributes to training.
    const auto n_train = static_cast<std::size_t>(
        std::min<double>(cls.size(),
                         std::ceil(train_fraction * static_cast<double>(cls.size()))));
    for (std::size_t i = 0; i < cls.size(); ++i)
      (i < n_train ? train_idx : test_idx).push_back(cls[i]);
  };
  deal(pos);
  deal(neg);
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {train_idx, test_idx};
}

std::vector<LabeledVector> to_labeled_vectors(std::span<const Sample> samples,
                                              const Scaler& scaler) {
  std::vector<LabeledVector> out;
  out.reserve(samples.size());
  for (const auto& s : samples) {
    const auto scaled = scaler.apply(s.features);
    LabeledVector v;
    v.input.assign(scaled.begin(), scaled.end());
    v.target = target_for_label(s.label);
    out.push_back(std::move(v));
  }
  return out;
}

SvmProblem to_svm_problem(std::span<const Sample> samples, const Scaler& scaler) {
  SvmProblem problem;
  problem.x.reserve(samples.size());
  problem.y.reserve(samples.size());
  for (const auto& s : samples) {
    const auto scaled = scaler.apply(s.features);
    problem.x.emplace_back(scaled.begin(), scaled.end());
    problem.y.push_back(s.label);
  }
  return problem;
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, n);

  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }

  std::mutex error_mutex;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace vmimo

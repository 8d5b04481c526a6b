#include "vmimo/svm.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "json.hpp"

#include "vmimo/errors.hpp"

namespace vmimo {
namespace detail {

std::vector<double> squared_distance_matrix(
    const std::vector<std::vector<double>>& x) {
  const std::size_t n = x.size();
  std::vector<double> d2(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sum = 0.0;
      const auto& a = x[i];
      const auto& b = x[j];
      for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        sum += diff * diff;
      }
      d2[i * n + j] = sum;
      d2[j * n + i] = sum;
    }
  }
  return d2;
}

void kernel_from_distances(std::span<const double> d2, double gamma,
                           std::vector<double>& kernel_out) {
  kernel_out.resize(d2.size());
  for (std::size_t i = 0; i < d2.size(); ++i)
    kernel_out[i] = std::exp(-gamma * d2[i]);
}

}  // namespace detail

namespace {

void validate_problem(const SvmProblem& problem) {
  if (problem.x.size() != problem.y.size())
    throw std::invalid_argument("SvmProblem: x/y size mismatch");
  bool pos = false;
  bool neg = false;
  for (int label : problem.y) {
    if (label == 1) pos = true;
    else if (label == -1) neg = true;
    else throw std::invalid_argument("SvmProblem: labels must be +1/-1");
  }
  if (!pos || !neg)
    throw std::invalid_argument("smo_train: dataset must contain both classes");
}

/// Platt-style SMO over a precomputed kernel matrix. Decision convention
/// f(x) = sum_i alpha_i y_i K(x_i, x) + b; error cache holds E_i = f_i - y_i.
class SmoSolver {
 public:
  SmoSolver(const SvmProblem& problem, double c, double gamma,
            const SmoConfig& config, RngStream& rng,
            std::span<const double> kernel)
      : prob_(problem),
        c_(c),
        gamma_(gamma),
        cfg_(config),
        rng_(rng),
        kernel_(kernel),
        n_(problem.size()),
        alpha_(problem.size(), 0.0),
        error_(problem.size()),
        b_(0.0) {
    if (!(c > 0.0) || !(gamma > 0.0))
      throw std::invalid_argument("smo_train: C and gamma must be > 0");
    for (int i = 0; i < n_; ++i) error_[i] = -prob_.y[i];  // f == 0 initially
    step_cap_ = cfg_.max_steps_per_sample > 0
                    ? cfg_.max_steps_per_sample * static_cast<long>(n_)
                    : -1;
  }

  SmoResult run() {
    int passes = 0;
    int num_changed = 0;
    bool examine_all = true;
    bool budget_hit = false;
    while (num_changed > 0 || examine_all) {
      if (passes++ >= cfg_.max_passes || budget_exceeded()) {
        budget_hit = true;
        break;
      }
      num_changed = 0;
      for (int i = 0; i < n_ && !budget_exceeded(); ++i) {
        if (examine_all || (alpha_[i] > 0.0 && alpha_[i] < c_))
          num_changed += examine(i);
      }
      if (budget_exceeded()) {
        budget_hit = true;
        break;
      }
      if (examine_all) examine_all = false;
      else if (num_changed == 0) examine_all = true;
    }

    SmoResult result;
    result.converged = !budget_hit;
    result.passes = passes;
    result.objective_trace = std::move(trace_);
    finalize_bias();
    clip_alphas();
    result.alphas_full = alpha_;
    result.model = extract_model();
    return result;
  }

 private:
  double k(int i, int j) const {
    return kernel_[static_cast<std::size_t>(i) * n_ + j];
  }

  bool budget_exceeded() const { return step_cap_ >= 0 && steps_ >= step_cap_; }

  int examine(int i2) {
    const double y2 = prob_.y[i2];
    const double a2 = alpha_[i2];
    const double r2 = error_[i2] * y2;
    const double tol = cfg_.kkt_tolerance;
    if ((r2 < -tol && a2 < c_) || (r2 > tol && a2 > 0.0)) {
      // Second-choice heuristic: largest |E1 - E2| among non-bound points.
      int best = -1;
      double best_gap = -1.0;
      for (int i = 0; i < n_; ++i) {
        if (i == i2 || alpha_[i] <= 0.0 || alpha_[i] >= c_) continue;
        const double gap = std::abs(error_[i] - error_[i2]);
        if (gap > best_gap) {
          best_gap = gap;
          best = i;
        }
      }
      if (best >= 0 && take_step(best, i2)) return 1;

      const int start1 = rng_.uniform_int(0, n_ - 1);
      for (int offset = 0; offset < n_; ++offset) {
        const int i1 = (start1 + offset) % n_;
        if (alpha_[i1] > 0.0 && alpha_[i1] < c_ && take_step(i1, i2)) return 1;
      }
      const int start2 = rng_.uniform_int(0, n_ - 1);
      for (int offset = 0; offset < n_; ++offset) {
        const int i1 = (start2 + offset) % n_;
        if (take_step(i1, i2)) return 1;
      }
    }
    return 0;
  }

  bool take_step(int i1, int i2) {
    if (i1 == i2) return false;
    const double a1 = alpha_[i1];
    const double a2 = alpha_[i2];
    const double y1 = prob_.y[i1];
    const double y2 = prob_.y[i2];
    const double s = y1 * y2;
    const double e1 = error_[i1];
    const double e2 = error_[i2];

    double lo, hi;
    if (s < 0.0) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(c_, c_ + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - c_);
      hi = std::min(c_, a1 + a2);
    }
    if (lo >= hi) return false;

    const double k11 = k(i1, i1);
    const double k12 = k(i1, i2);
    const double k22 = k(i2, i2);
    const double eta = 2.0 * k12 - k11 - k22;  // curvature along the pair line

    double a2_new;
    if (eta < 0.0) {
      a2_new = a2 - y2 * (e1 - e2) / eta;
      a2_new = std::clamp(a2_new, lo, hi);
    } else {
      // Flat (or numerically flat) direction: W restricted to the segment is
      // W(t) = W(a2) + y2(e1-e2)(t-a2) + eta/2 (t-a2)^2; pick the better end.
      const double slope = y2 * (e1 - e2);
      auto w_delta = [&](double t) {
        const double d = t - a2;
        return slope * d + 0.5 * eta * d * d;
      };
      const double w_lo = w_delta(lo);
      const double w_hi = w_delta(hi);
      if (w_lo > w_hi + cfg_.numeric_eps) a2_new = lo;
      else if (w_hi > w_lo + cfg_.numeric_eps) a2_new = hi;
      else return false;
    }

    if (std::abs(a2_new - a2) < cfg_.numeric_eps * (a2_new + a2 + cfg_.numeric_eps))
      return false;

    // The pair update preserves sum(alpha*y) exactly.
    double a1_new = a1 + s * (a2 - a2_new);
    if (a1_new < 0.0) a1_new = 0.0;
    else if (a1_new > c_) a1_new = c_;

    const double d1 = a1_new - a1;
    const double d2 = a2_new - a2;
    const double b1 = b_ - e1 - y1 * d1 * k11 - y2 * d2 * k12;
    const double b2 = b_ - e2 - y1 * d1 * k12 - y2 * d2 * k22;
    double b_new;
    if (a1_new > 0.0 && a1_new < c_) b_new = b1;
    else if (a2_new > 0.0 && a2_new < c_) b_new = b2;
    else b_new = 0.5 * (b1 + b2);

    const double shift = b_new - b_;
    for (int i = 0; i < n_; ++i)
      error_[i] += y1 * d1 * k(i1, i) + y2 * d2 * k(i2, i) + shift;

    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;
    b_ = b_new;
    ++steps_;
    if (cfg_.record_objective_trace)
      trace_.push_back(dual_objective(prob_, alpha_, gamma_));
    return true;
  }

  void finalize_bias() {
    // Free support vectors satisfy f(x_i) = y_i, so each votes b - E_i.
    double sum = 0.0;
    int free_count = 0;
    for (int i = 0; i < n_; ++i) {
      if (alpha_[i] > 0.0 && alpha_[i] < c_) {
        sum += b_ - error_[i];
        ++free_count;
      }
    }
    if (free_count > 0) b_ = sum / free_count;
  }

  void clip_alphas() {
    const double eps = std::max(cfg_.numeric_eps, 1e-12);
    for (double& a : alpha_) {
      if (a < eps) a = 0.0;
      else if (a > c_ - eps) a = c_;
    }
  }

  SvmModel extract_model() const {
    SvmModel model;
    model.bias = b_;
    model.gamma = gamma_;
    model.c = c_;
    for (int i = 0; i < n_; ++i) {
      if (alpha_[i] > 0.0) {
        model.support_vectors.push_back(prob_.x[i]);
        model.sv_labels.push_back(prob_.y[i]);
        model.alphas.push_back(alpha_[i]);
      }
    }
    return model;
  }

  const SvmProblem& prob_;
  double c_;
  double gamma_;
  SmoConfig cfg_;
  RngStream& rng_;
  std::span<const double> kernel_;
  int n_;
  std::vector<double> alpha_;
  std::vector<double> error_;
  double b_;
  long steps_ = 0;
  long step_cap_ = -1;
  std::vector<double> trace_;
};

int label_sign(double decision) { return decision > 0.0 ? +1 : -1; }

}  // namespace

double rbf_kernel(std::span<const double> a, std::span<const double> b,
                  double gamma) {
  if (a.size() != b.size())
    throw std::invalid_argument("rbf_kernel: dimension mismatch");
  if (!(gamma > 0.0)) throw std::invalid_argument("rbf_kernel: gamma must be > 0");
  double sum = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = a[k] - b[k];
    sum += diff * diff;
  }
  return std::exp(-gamma * sum);
}

SmoResult smo_train(const SvmProblem& problem, double c, double gamma,
                    const SmoConfig& config, RngStream& rng) {
  validate_problem(problem);
  const auto d2 = detail::squared_distance_matrix(problem.x);
  std::vector<double> kernel;
  detail::kernel_from_distances(d2, gamma, kernel);
  return SmoSolver(problem, c, gamma, config, rng, kernel).run();
}

SmoResult smo_train_prepared(const SvmProblem& problem, double c, double gamma,
                             const SmoConfig& config, RngStream& rng,
                             std::span<const double> kernel) {
  validate_problem(problem);
  if (kernel.size() != static_cast<std::size_t>(problem.size()) * problem.size())
    throw std::invalid_argument("smo_train_prepared: kernel matrix size mismatch");
  return SmoSolver(problem, c, gamma, config, rng, kernel).run();
}

double decision_value(const SvmModel& model, std::span<const double> x) {
  double sum = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i)
    sum += model.alphas[i] * model.sv_labels[i] *
           rbf_kernel(model.support_vectors[i], x, model.gamma);
  return sum;
}

int classify(const SvmModel& model, std::span<const double> x) {
  return label_sign(decision_value(model, x));
}

double dual_objective(const SvmProblem& problem, std::span<const double> alphas,
                      double gamma) {
  const int n = problem.size();
  if (static_cast<int>(alphas.size()) != n)
    throw std::invalid_argument("dual_objective: alpha size mismatch");
  double linear = 0.0;
  double quad = 0.0;
  for (int i = 0; i < n; ++i) {
    linear += alphas[i];
    if (alphas[i] == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (alphas[j] == 0.0) continue;
      quad += alphas[i] * alphas[j] * problem.y[i] * problem.y[j] *
              rbf_kernel(problem.x[i], problem.x[j], gamma);
    }
  }
  return linear - 0.5 * quad;
}

double kkt_max_violation(const SvmProblem& problem,
                         std::span<const double> alphas, double bias, double c,
                         double gamma) {
  const int n = problem.size();
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    double f = bias;
    for (int j = 0; j < n; ++j)
      if (alphas[j] > 0.0)
        f += alphas[j] * problem.y[j] *
             rbf_kernel(problem.x[j], problem.x[i], gamma);
    const double margin = problem.y[i] * f;
    double violation = 0.0;
    if (alphas[i] <= 0.0) violation = std::max(0.0, 1.0 - margin);
    else if (alphas[i] >= c) violation = std::max(0.0, margin - 1.0);
    else violation = std::abs(margin - 1.0);
    worst = std::max(worst, violation);
  }
  return worst;
}

CrossValResult cross_validate(const SvmProblem& problem,
                              const GridSearchSpec& spec,
                              const SmoConfig& config, RngStream& rng) {
  validate_problem(problem);
  if (spec.folds < 2) throw ConfigError("cross_validate: folds must be >= 2");
  if (problem.size() < spec.folds)
    throw ConfigError("cross_validate: dataset smaller than fold count");
  if (spec.c_grid.empty() || spec.gamma_grid.empty())
    throw ConfigError("cross_validate: empty grid");

  const int n = problem.size();
  CrossValResult result;
  result.c_grid = spec.c_grid;
  result.gamma_grid = spec.gamma_grid;
  std::sort(result.c_grid.begin(), result.c_grid.end());
  std::sort(result.gamma_grid.begin(), result.gamma_grid.end());

  // Stratified fold assignment: shuffle each class, deal round-robin.
  result.fold_of_sample.assign(n, 0);
  std::vector<int> pos_idx, neg_idx;
  for (int i = 0; i < n; ++i)
    (problem.y[i] == 1 ? pos_idx : neg_idx).push_back(i);
  if (static_cast<int>(pos_idx.size()) < spec.folds ||
      static_cast<int>(neg_idx.size()) < spec.folds)
    throw ConfigError("cross_validate: too few samples of one class for stratified folds");
  auto fold_rng = rng.child(0);
  fold_rng.shuffle(pos_idx);
  fold_rng.shuffle(neg_idx);
  for (std::size_t i = 0; i < pos_idx.size(); ++i)
    result.fold_of_sample[pos_idx[i]] = static_cast<int>(i % spec.folds);
  for (std::size_t i = 0; i < neg_idx.size(); ++i)
    result.fold_of_sample[neg_idx[i]] = static_cast<int>(i % spec.folds);

  const std::size_t cells = result.c_grid.size() * result.gamma_grid.size();
  std::vector<std::vector<int>> predictions(cells, std::vector<int>(n, 0));
  result.cell_accuracy.assign(result.c_grid.size(),
                              std::vector<double>(result.gamma_grid.size(), 0.0));

  for (int fold = 0; fold < spec.folds; ++fold) {
    SvmProblem train;
    std::vector<int> test_indices;
    for (int i = 0; i < n; ++i) {
      if (result.fold_of_sample[i] == fold) test_indices.push_back(i);
      else {
        train.x.push_back(problem.x[i]);
        train.y.push_back(problem.y[i]);
      }
    }
    // One distance matrix per fold, shared by every (C, gamma) cell.
    const auto d2 = detail::squared_distance_matrix(train.x);
    std::vector<double> kernel;
    for (std::size_t ci = 0; ci < result.c_grid.size(); ++ci) {
      for (std::size_t gi = 0; gi < result.gamma_grid.size(); ++gi) {
        detail::kernel_from_distances(d2, result.gamma_grid[gi], kernel);
        auto cell_rng = rng.child(1 + fold * 10000 + static_cast<int>(
                                          ci * result.gamma_grid.size() + gi));
        const auto solved =
            smo_train_prepared(train, result.c_grid[ci], result.gamma_grid[gi],
                               config, cell_rng, kernel);
        auto& cell_pred = predictions[ci * result.gamma_grid.size() + gi];
        for (int idx : test_indices)
          cell_pred[idx] = classify(solved.model, problem.x[idx]);
      }
    }
  }

  // Mean of per-fold accuracies (not pooled), matching how the winner is
  // recomputed from the stored fold predictions.
  for (std::size_t ci = 0; ci < result.c_grid.size(); ++ci)
    for (std::size_t gi = 0; gi < result.gamma_grid.size(); ++gi) {
      const auto& cell_pred = predictions[ci * result.gamma_grid.size() + gi];
      double acc_sum = 0.0;
      for (int fold = 0; fold < spec.folds; ++fold) {
        int correct = 0;
        int count = 0;
        for (int i = 0; i < n; ++i) {
          if (result.fold_of_sample[i] != fold) continue;
          ++count;
          if (cell_pred[i] == problem.y[i]) ++correct;
        }
        acc_sum += static_cast<double>(correct) / count;
      }
      result.cell_accuracy[ci][gi] = acc_sum / spec.folds;
    }

  // Ascending scan with strict improvement implements the tie-break:
  // smaller C first, then smaller gamma.
  std::size_t best_ci = 0;
  std::size_t best_gi = 0;
  for (std::size_t ci = 0; ci < result.c_grid.size(); ++ci)
    for (std::size_t gi = 0; gi < result.gamma_grid.size(); ++gi)
      if (result.cell_accuracy[ci][gi] >
          result.cell_accuracy[best_ci][best_gi]) {
        best_ci = ci;
        best_gi = gi;
      }
  result.best_c = result.c_grid[best_ci];
  result.best_gamma = result.gamma_grid[best_gi];
  result.best_accuracy = result.cell_accuracy[best_ci][best_gi];
  result.best_cell_predictions =
      predictions[best_ci * result.gamma_grid.size() + best_gi];
  return result;
}

std::string svm_to_json(const SvmModel& model) {
  nlohmann::json j;
  j["c"] = model.c;
  j["gamma"] = model.gamma;
  j["bias"] = model.bias;
  j["support_vectors"] = model.support_vectors;
  j["labels"] = model.sv_labels;
  j["alphas"] = model.alphas;
  return j.dump(2);
}

SvmModel svm_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  SvmModel model;
  model.c = j.at("c").get<double>();
  model.gamma = j.at("gamma").get<double>();
  model.bias = j.at("bias").get<double>();
  model.support_vectors =
      j.at("support_vectors").get<std::vector<std::vector<double>>>();
  model.sv_labels = j.at("labels").get<std::vector<int>>();
  model.alphas = j.at("alphas").get<std::vector<double>>();
  if (model.support_vectors.size() != model.sv_labels.size() ||
      model.sv_labels.size() != model.alphas.size())
    throw std::invalid_argument("svm_from_json: inconsistent SV arrays");
  return model;
}

}  // namespace vmimo

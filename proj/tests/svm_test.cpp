#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"

#include "qp_oracle.hpp"
#include "vmimo/behavior.hpp"
#include "vmimo/pipeline.hpp"
#include "vmimo/svm.hpp"

using namespace vmimo;

namespace {

SvmProblem random_problem(int n, int dim, RngStream& rng) {
  SvmProblem problem;
  for (int i = 0; i < n; ++i) {
    std::vector<double> x;
    for (int k = 0; k < dim; ++k) x.push_back(rng.uniform(-1.0, 1.0));
    problem.x.push_back(std::move(x));
    problem.y.push_back(rng.bernoulli(0.5) ? 1 : -1);
  }
  // force both classes
  problem.y[0] = 1;
  problem.y[n - 1] = -1;
  return problem;
}

}  // namespace

TEST_CASE("rbf kernel basics") {
  const std::vector<double> a{0.3, -0.2, 0.9};
  CHECK(rbf_kernel(a, a, 2.0) == 1.0);

  const std::vector<double> p{0.0, 0.0};
  const std::vector<double> q{1.0, 0.0};  // squared distance 1
  CHECK(rbf_kernel(p, q, 1.0) == doctest::Approx(0.36787944117144233).epsilon(1e-12));

  RngStream rng(3);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> u{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    std::vector<double> v{rng.uniform(-2, 2), rng.uniform(-2, 2)};
    const double k = rbf_kernel(u, v, 0.7);
    CHECK(k == rbf_kernel(v, u, 0.7));
    CHECK(k > 0.0);
    CHECK(k <= 1.0);
  }
  CHECK_THROWS(rbf_kernel(a, p, 1.0));
  CHECK_THROWS(rbf_kernel(p, q, 0.0));
}

TEST_CASE("two distant opposite points become symmetric support vectors") {
  SvmProblem problem;
  problem.x = {{0.0, 0.0}, {4.0, 0.0}};
  problem.y = {1, -1};
  RngStream rng(5);
  const auto result = smo_train(problem, 100.0, 1.0, SmoConfig{}, rng);
  REQUIRE(result.model.alphas.size() == 2);
  CHECK(result.model.alphas[0] == doctest::Approx(result.model.alphas[1]).epsilon(1e-9));
  double sum_ay = 0.0;
  for (std::size_t i = 0; i < result.model.alphas.size(); ++i)
    sum_ay += result.model.alphas[i] * result.model.sv_labels[i];
  CHECK(std::abs(sum_ay) < 1e-6);
  CHECK(classify(result.model, problem.x[0]) == 1);
  CHECK(classify(result.model, problem.x[1]) == -1);
}

TEST_CASE("decision_value trivial cases and re-summation oracle") {
  SvmModel empty;
  empty.bias = 0.7;
  CHECK(decision_value(empty, std::vector<double>{1.0, 2.0}) == 0.7);

  SvmModel lone;
  lone.support_vectors = {{0.5, -0.5}};
  lone.sv_labels = {1};
  lone.alphas = {1.0};
  lone.bias = 0.0;
  lone.gamma = 1.3;
  CHECK(decision_value(lone, lone.support_vectors[0]) == doctest::Approx(1.0));

  RngStream rng(7);
  SvmModel model;
  model.gamma = 0.8;
  model.bias = -0.1;
  for (int i = 0; i < 6; ++i) {
    model.support_vectors.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
    model.sv_labels.push_back(rng.bernoulli(0.5) ? 1 : -1);
    model.alphas.push_back(rng.uniform(0.0, 2.0));
  }
  for (int probe = 0; probe < 20; ++probe) {
    const std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
    double naive = model.bias;
    for (int i = 0; i < 6; ++i)
      naive += model.alphas[i] * model.sv_labels[i] *
               std::exp(-model.gamma *
                        (std::pow(x[0] - model.support_vectors[i][0], 2) +
                         std::pow(x[1] - model.support_vectors[i][1], 2)));
    CHECK(decision_value(model, x) == doctest::Approx(naive).epsilon(1e-12));
  }
}

TEST_CASE("classify follows the strict-positive rule, boundary to -1") {
  SvmModel model;  // no SVs: decision value equals the bias
  model.bias = 0.3;
  CHECK(classify(model, std::vector<double>{0.0}) == 1);
  model.bias = 0.0;
  CHECK(classify(model, std::vector<double>{0.0}) == -1);
  model.bias = -2.0;
  CHECK(classify(model, std::vector<double>{0.0}) == -1);
}

TEST_CASE("SMO matches the brute-force dual on tiny instances") {
  RngStream rng(11);
  SmoConfig tight;
  tight.kkt_tolerance = 1e-9;
  tight.max_passes = 2000;
  for (int trial = 0; trial < 10; ++trial) {
    const int n = rng.uniform_int(3, 6);
    auto problem = random_problem(n, 2, rng);
    const double c = std::vector<double>{0.5, 1.0, 10.0}[rng.uniform_int(0, 2)];
    const double gamma = std::vector<double>{0.5, 1.0, 2.0}[rng.uniform_int(0, 2)];

    auto solver_rng = rng.child(trial);
    const auto result = smo_train(problem, c, gamma, tight, solver_rng);
    const auto oracle = vmimo_test::brute_force_dual(problem, c, gamma);
    REQUIRE(oracle.has_value());

    const double w_smo = dual_objective(problem, result.alphas_full, gamma);
    CHECK(std::abs(w_smo - oracle->objective) <= 1e-6);
    CHECK(kkt_max_violation(problem, result.alphas_full, result.model.bias, c,
                            gamma) <= 1e-3);

    double sum_ay = 0.0;
    for (int i = 0; i < n; ++i)
      sum_ay += result.alphas_full[i] * problem.y[i];
    CHECK(std::abs(sum_ay) < 1e-6);
    for (double a : result.alphas_full) {
      CHECK(a >= 0.0);
      CHECK(a <= c);
    }
  }
}

TEST_CASE("dual objective is monotone over SMO steps") {
  RngStream rng(13);
  auto problem = random_problem(12, 2, rng);
  SmoConfig cfg;
  cfg.record_objective_trace = true;
  auto solver_rng = rng.child(1);
  const auto result = smo_train(problem, 5.0, 1.0, cfg, solver_rng);
  REQUIRE(result.objective_trace.size() > 1);
  for (std::size_t i = 1; i < result.objective_trace.size(); ++i)
    CHECK(result.objective_trace[i] >= result.objective_trace[i - 1] - 1e-9);
}

TEST_CASE("KKT residuals within tolerance on an HH1 subsample") {
  RngStream data_rng(17);
  const auto dataset = generate_dataset(hh1_profile(0.05), 200, data_rng);
  const auto scaler = Scaler::fit(dataset);
  const auto problem = to_svm_problem(dataset, scaler);

  SmoConfig cfg;  // default 1e-3 tolerance
  RngStream rng(19);
  const auto result = smo_train(problem, 8.0, 0.5, cfg, rng);
  CHECK(result.converged);
  CHECK(kkt_max_violation(problem, result.alphas_full, result.model.bias, 8.0,
                          0.5) <= cfg.kkt_tolerance);
  // stored support vectors obey the box and exclude zeros
  for (double a : result.model.alphas) {
    CHECK(a > 0.0);
    CHECK(a <= 8.0);
  }
}

TEST_CASE("single-class training set is rejected") {
  SvmProblem problem;
  problem.x = {{0.0}, {1.0}};
  problem.y = {1, 1};
  RngStream rng(23);
  CHECK_THROWS(smo_train(problem, 1.0, 1.0, SmoConfig{}, rng));
}

TEST_CASE("cross_validate partitions samples and keeps its bookkeeping honest") {
  RngStream data_rng(29);
  const auto dataset = generate_dataset(st2_profile(0.05), 150, data_rng);
  const auto scaler = Scaler::fit(dataset);
  const auto problem = to_svm_problem(dataset, scaler);

  GridSearchSpec spec;
  spec.c_grid = {1.0, 8.0};
  spec.gamma_grid = {0.25, 1.0};
  spec.folds = 3;
  RngStream rng(31);
  const auto cv = cross_validate(problem, spec, SmoConfig{}, rng);

  // every sample lands in exactly one fold, every fold is stratified
  REQUIRE(cv.fold_of_sample.size() == static_cast<std::size_t>(problem.size()));
  for (int fold = 0; fold < spec.folds; ++fold) {
    int pos = 0, neg = 0;
    for (int i = 0; i < problem.size(); ++i) {
      if (cv.fold_of_sample[i] != fold) continue;
      (problem.y[i] == 1 ? pos : neg)++;
    }
    CHECK(pos > 0);
    CHECK(neg > 0);
  }

  // recompute the winning-cell accuracy from the stored predictions
  double acc_sum = 0.0;
  for (int fold = 0; fold < spec.folds; ++fold) {
    int correct = 0, count = 0;
    for (int i = 0; i < problem.size(); ++i) {
      if (cv.fold_of_sample[i] != fold) continue;
      ++count;
      if (cv.best_cell_predictions[i] == problem.y[i]) ++correct;
    }
    acc_sum += static_cast<double>(correct) / count;
  }
  CHECK(cv.best_accuracy == doctest::Approx(acc_sum / spec.folds).epsilon(1e-12));
}

TEST_CASE("one-cell grid returns that cell") {
  RngStream data_rng(37);
  const auto dataset = generate_dataset(hh1_profile(0.0), 90, data_rng);
  const auto scaler = Scaler::fit(dataset);
  const auto problem = to_svm_problem(dataset, scaler);
  GridSearchSpec spec;
  spec.c_grid = {4.0};
  spec.gamma_grid = {0.5};
  RngStream rng(41);
  const auto cv = cross_validate(problem, spec, SmoConfig{}, rng);
  CHECK(cv.best_c == 4.0);
  CHECK(cv.best_gamma == 0.5);
}

TEST_CASE("accuracy ties break toward the flattest model") {
  // Hugely separated clusters: every cell classifies perfectly, so the
  // scan must keep the smallest C, then the smallest gamma.
  SvmProblem problem;
  RngStream rng(43);
  for (int i = 0; i < 30; ++i) {
    const double side = i % 2 == 0 ? 1.0 : -1.0;
    problem.x.push_back({side * 10.0 + rng.uniform(-0.1, 0.1),
                         side * 10.0 + rng.uniform(-0.1, 0.1)});
    problem.y.push_back(side > 0 ? 1 : -1);
  }
  GridSearchSpec spec;
  spec.c_grid = {0.5, 2.0, 8.0};
  spec.gamma_grid = {0.125, 0.5, 2.0};
  const auto cv = cross_validate(problem, spec, SmoConfig{}, rng);
  CHECK(cv.best_accuracy == doctest::Approx(1.0));
  CHECK(cv.best_c == 0.5);
  CHECK(cv.best_gamma == 0.125);
}

TEST_CASE("cross_validate input validation") {
  SvmProblem tiny;
  tiny.x = {{0.0}, {1.0}};
  tiny.y = {1, -1};
  RngStream rng(47);
  CHECK_THROWS(cross_validate(tiny, GridSearchSpec{}, SmoConfig{}, rng));

  SvmProblem single;
  for (int i = 0; i < 12; ++i) {
    single.x.push_back({static_cast<double>(i)});
    single.y.push_back(1);
  }
  CHECK_THROWS(cross_validate(single, GridSearchSpec{}, SmoConfig{}, rng));
}

TEST_CASE("model JSON round-trip preserves predictions") {
  RngStream data_rng(53);
  const auto dataset = generate_dataset(ou1_profile(0.05), 120, data_rng);
  const auto scaler = Scaler::fit(dataset);
  const auto problem = to_svm_problem(dataset, scaler);
  RngStream rng(59);
  const auto result = smo_train(problem, 2.0, 0.5, SmoConfig{}, rng);

  const auto loaded = svm_from_json(svm_to_json(result.model));
  CHECK(loaded.bias == result.model.bias);
  CHECK(loaded.alphas == result.model.alphas);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> probe;
    for (int k = 0; k < kFeatureDim; ++k) probe.push_back(rng.uniform(-1, 1));
    CHECK(classify(result.model, probe) == classify(loaded, probe));
  }
}

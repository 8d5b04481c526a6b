#include "vmimo/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vmimo/errors.hpp"
#include "vmimo/textio.hpp"

namespace vmimo {
namespace {

double pct_or_nan(const std::optional<double>& value) {
  return value ? 100.0 * *value : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

void ConfusionCounts::add(int predicted, int truth) {
  if (predicted == 1)
    truth == 1 ? ++tp : ++fp;
  else
    truth == 1 ? ++fn : ++tn;
}

ConfusionCounts& ConfusionCounts::operator+=(const ConfusionCounts& other) {
  tp += other.tp;
  fp += other.fp;
  tn += other.tn;
  fn += other.fn;
  return *this;
}

ConfusionCounts confusion(std::span<const int> predictions,
                          std::span<const int> truths) {
  if (predictions.size() != truths.size())
    throw std::invalid_argument("confusion: prediction/truth length mismatch");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    c.add(predictions[i], truths[i]);
  return c;
}

std::optional<double> accuracy(const ConfusionCounts& c) {
  const long denom = c.total();
  if (denom == 0) return std::nullopt;
  return static_cast<double>(c.tp + c.tn) / denom;
}

std::optional<double> precision(const ConfusionCounts& c) {
  const long denom = c.tp + c.fp;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(c.tp) / denom;
}

std::optional<double> recall_paper(const ConfusionCounts& c) {
  const long denom = c.tn + c.fn;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(c.tn) / denom;
}

std::optional<double> recall_standard(const ConfusionCounts& c) {
  const long denom = c.tp + c.fn;
  if (denom == 0) return std::nullopt;
  return static_cast<double>(c.tp) / denom;
}

std::vector<ReportRow> experiment_report(const ExperimentSettings& settings,
                                         std::uint64_t seed) {
  if (settings.profiles.empty())
    throw ConfigError("experiment_report: no profiles configured");
  if (settings.profiles.size() != settings.profile_mix.size())
    throw ConfigError("experiment_report: profile/mix size mismatch");

  const RngStream root(seed);
  std::vector<ReportRow> rows;
  for (const int n_users : settings.user_counts) {
    if (n_users <= 0) throw ConfigError("experiment_report: user count must be > 0");
    auto mix_rng = root.child(900000 + n_users);
    const auto profile_of =
        allocate_profile_mix(n_users, settings.profile_mix, mix_rng);

    std::vector<ConfusionCounts> per_user(n_users);
    parallel_for(n_users, settings.threads, [&](int u) {
      // Dataset stream depends on (seed, count, user) only: both engines
      // compare on identical data.
      const auto user_rng = root.child(static_cast<std::uint64_t>(n_users) *
                                           100000 + u);
      const auto& profile = settings.profiles[profile_of[u]];
      auto data_rng = user_rng.child(0);
      const auto dataset =
          generate_dataset(profile, settings.n_samples, data_rng);
      auto split_rng = user_rng.child(1);
      const auto [train_idx, test_idx] =
          stratified_split(dataset, settings.train_fraction, split_rng);

      std::vector<Sample> train_set;
      train_set.reserve(train_idx.size());
      for (int idx : train_idx) train_set.push_back(dataset[idx]);

      auto model_rng = user_rng.child(2);
      const auto model = train_user_model(train_set, settings.classifier,
                                          settings.settings, model_rng);

      ConfusionCounts counts;
      for (int idx : test_idx) {
        const int predicted = model.predict_features(dataset[idx].features);
        const int truth = rule_label(profile, dataset[idx].context);
        counts.add(predicted, truth);
      }
      per_user[u] = counts;
    });

    ConfusionCounts pooled;
    for (const auto& c : per_user) pooled += c;

    ReportRow row;
    row.n_users = n_users;
    row.classifier = to_string(settings.classifier);
    const double error_rate =
        pooled.total() > 0
            ? static_cast<double>(pooled.fp + pooled.fn) / pooled.total()
            : 0.0;
    // Squared decision error on the +-1 scale is 4 per miss; normalizing by
    // the span^2 reduces it to the error rate.
    row.mse_pct = 100.0 * error_rate;
    row.accuracy_pct = pct_or_nan(accuracy(pooled));
    row.precision_pct = pct_or_nan(precision(pooled));
    row.recall_paper_pct = pct_or_nan(recall_paper(pooled));
    row.recall_std_pct = pct_or_nan(recall_standard(pooled));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_report_csv(const std::filesystem::path& path,
                      std::span<const ReportRow> rows) {
  std::ostringstream out;
  out << "# mse_pct: mean squared decision error on the +-1 label scale, "
         "normalized by the scale span^2 (equals misclassification rate x 100)\n";
  out << "n_users,classifier,mse_pct,accuracy_pct,precision_pct,"
         "recall_paper_pct,recall_std_pct\n";
  for (const auto& row : rows)
    out << row.n_users << ',' << row.classifier << ',' << format_g6(row.mse_pct)
        << ',' << format_g6(row.accuracy_pct) << ','
        << format_g6(row.precision_pct) << ','
        << format_g6(row.recall_paper_pct) << ','
        << format_g6(row.recall_std_pct) << '\n';
  write_text_file(path, out.str());
}

}  // namespace vmimo

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wsbm/inference.hpp"
#include "wsbm/model.hpp"
#include "wsbm/netgraph.hpp"

namespace wsbm {

/// The five compared variants: pure (alpha 0), balanced (alpha 0.5) and
/// classic (alpha 1) block models, and the degree-corrected balanced and
/// classic variants.
enum class RosterModel { PureWSBM, BalancedWSBM, SBM, DCWBM, DCBM };

std::string_view to_string(RosterModel m) noexcept;
std::optional<RosterModel> parse_roster_model(std::string_view tag) noexcept;
ModelConfig roster_config(RosterModel m, int k, FamilyKind weight_family);

struct RosterEntry {
  std::string tag;
  ModelConfig config;
};
std::vector<RosterEntry> make_roster(std::span<const RosterModel> models, int k, FamilyKind weight_family);

/// Posterior-mean edge probability of (i, j), averaged over both endpoints'
/// beliefs. With DC existence this is the rate mean times d_out(i) d_in(j),
/// clamped to [0, 1]; `approximate` is then set.
double predict_existence(const FitResult& fit, VertexId i, VertexId j, bool* approximate = nullptr);

/// Posterior-mean weight of (i, j). Models with alpha = 1 ignore weights in
/// inference and predict the training mean weight of the MAP-label bundle,
/// falling back to the global training mean for empty bundles.
double predict_weight(const FitResult& fit, VertexId i, VertexId j);

struct PredictionRecord {
  VertexId src = 0;
  VertexId dst = 0;
  double predicted_existence = 0.0;
  double predicted_weight = 0.0;
  int truth_existence = 0;
  std::optional<double> truth_weight;
};

/// Brier-style existence MSE over all records; weight MSE over records with a
/// true weight (NaN if there are none).
double existence_mse(std::span<const PredictionRecord> records);
double weight_mse(std::span<const PredictionRecord> records);
/// Area under the ROC curve of predicted existence (ties count one half);
/// NaN when only one outcome is present.
double existence_auc(std::span<const PredictionRecord> records);

struct TrialResult {
  int trial = 0;
  std::string model;
  double existence_mse = 0.0;
  double weight_mse = 0.0;
  double auc = 0.0;
  double elbo = 0.0;
  std::vector<PredictionRecord> records;
};

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;  // sample standard deviation / sqrt(count)
};
MeanSe mean_se(std::span<const double> values);

struct ModelSummary {
  std::string model;
  MeanSe existence_mse;
  MeanSe weight_mse;
  MeanSe auc;
};

struct EvalReport {
  std::vector<TrialResult> trials;  // trial-major, roster order within a trial
  std::vector<ModelSummary> summary;
  std::optional<WeightTransform> transform;  // set when weights were normalized first
};

struct CvOptions {
  double fraction = 0.2;
  int trials = 25;
  int restarts = 10;
  std::uint64_t seed = 0;
  FitOptions fit;
  int threads = 1;
  std::optional<NormalizeMode> normalize;  // scores are then in normalized units
};

/// Repeated holdout: per trial one split of `fraction` of the observed pairs is
/// made missing, every roster model is fitted on it (best of `restarts`) and
/// scored on the held-out pairs.
EvalReport run_cv(const ObservedNetwork& net, const std::vector<RosterEntry>& roster, const CvOptions& options);

/// CSV: trial,model,existence_mse,weight_mse,auc,elbo.
void write_trials_csv(const EvalReport& report, std::ostream& out);

}  // namespace wsbm

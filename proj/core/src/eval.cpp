#include "wsbm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "wsbm/error.hpp"
#include "wsbm/synthgen.hpp"

namespace wsbm {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_vertex(const FitResult& fit, VertexId v) {
  if (v >= fit.beliefs.num_vertices()) throw InputError("vertex index outside the fitted network");
}

}  // namespace

std::string_view to_string(RosterModel m) noexcept {
  switch (m) {
    case RosterModel::PureWSBM: return "pWSBM";
    case RosterModel::BalancedWSBM: return "bWSBM";
    case RosterModel::SBM: return "SBM";
    case RosterModel::DCWBM: return "DCWBM";
    case RosterModel::DCBM: return "DCBM";
  }
  return "?";
}

std::optional<RosterModel> parse_roster_model(std::string_view tag) noexcept {
  for (auto m : {RosterModel::PureWSBM, RosterModel::BalancedWSBM, RosterModel::SBM, RosterModel::DCWBM,
                 RosterModel::DCBM}) {
    if (to_string(m) == tag) return m;
  }
  return std::nullopt;
}

ModelConfig roster_config(RosterModel m, int k, FamilyKind weight_family) {
  ModelConfig c;
  c.k = k;
  c.weight_family = weight_family;
  switch (m) {
    case RosterModel::PureWSBM: c.alpha = 0.0; break;
    case RosterModel::BalancedWSBM: c.alpha = 0.5; break;
    case RosterModel::SBM: c.alpha = 1.0; break;
    case RosterModel::DCWBM:
      c.alpha = 0.5;
      c.existence_family = FamilyKind::DCExistence;
      break;
    case RosterModel::DCBM:
      c.alpha = 1.0;
      c.existence_family = FamilyKind::DCExistence;
      break;
  }
  return c;
}

std::vector<RosterEntry> make_roster(std::span<const RosterModel> models, int k, FamilyKind weight_family) {
  std::vector<RosterEntry> out;
  for (auto m : models) out.push_back({std::string(to_string(m)), roster_config(m, k, weight_family)});
  return out;
}

// Probability that (i, j) falls in bundle (z, z'); a self-loop has one label.
double pair_weight(std::span<const double> mi, std::span<const double> mj, bool loop, int z, int zp) {
  if (loop) return z == zp ? mi[z] : 0.0;
  return mi[z] * mj[zp];
}

double predict_existence(const FitResult& fit, VertexId i, VertexId j, bool* approximate) {
  check_vertex(fit, i);
  check_vertex(fit, j);
  const int k = fit.beliefs.k();
  const auto mi = fit.beliefs.row(i);
  const auto mj = fit.beliefs.row(j);
  double p = 0.0;
  for (int z = 0; z < k; ++z)
    for (int zp = 0; zp < k; ++zp)
      p += pair_weight(mi, mj, i == j, z, zp) * posterior_mean(fit.predictive.tau_existence[bundle_index(k, z, zp)]);
  const bool dc = fit.config.degree_corrected();
  if (dc) p *= fit.out_degree[i] * fit.in_degree[j];
  if (approximate) *approximate = dc;
  return std::clamp(p, 0.0, 1.0);
}

double predict_weight(const FitResult& fit, VertexId i, VertexId j) {
  check_vertex(fit, i);
  check_vertex(fit, j);
  const int k = fit.beliefs.k();
  if (fit.config.alpha >= 1.0) {
    const auto labels = fit.beliefs.map_labels();
    const double m = fit.bundle_weight_mean(labels[i], labels[j]);
    return std::isnan(m) ? fit.global_weight_mean : m;
  }
  const auto mi = fit.beliefs.row(i);
  const auto mj = fit.beliefs.row(j);
  double w = 0.0;
  for (int z = 0; z < k; ++z)
    for (int zp = 0; zp < k; ++zp)
      w += pair_weight(mi, mj, i == j, z, zp) * posterior_mean(fit.predictive.tau_weight[bundle_index(k, z, zp)]);
  return w;
}

double existence_mse(std::span<const PredictionRecord> records) {
  if (records.empty()) return kNaN;
  double s = 0.0;
  for (const auto& r : records) {
    const double d = r.predicted_existence - r.truth_existence;
    s += d * d;
  }
  return s / static_cast<double>(records.size());
}

double weight_mse(std::span<const PredictionRecord> records) {
  double s = 0.0;
  std::size_t count = 0;
  for (const auto& r : records) {
    if (!r.truth_weight) continue;
    const double d = r.predicted_weight - *r.truth_weight;
    s += d * d;
    ++count;
  }
  return count ? s / static_cast<double>(count) : kNaN;
}

double existence_auc(std::span<const PredictionRecord> records) {
  std::vector<std::pair<double, int>> items;
  for (const auto& r : records) items.push_back({r.predicted_existence, r.truth_existence});
  std::sort(items.begin(), items.end());
  double pos = 0.0, rank_sum = 0.0;
  for (std::size_t a = 0; a < items.size();) {
    std::size_t b = a;
    while (b < items.size() && items[b].first == items[a].first) ++b;
    const double mid_rank = 0.5 * static_cast<double>(a + 1 + b);  // average 1-based rank
    for (std::size_t c = a; c < b; ++c) {
      if (items[c].second) {
        pos += 1.0;
        rank_sum += mid_rank;
      }
    }
    a = b;
  }
  const double neg = static_cast<double>(items.size()) - pos;
  if (pos == 0.0 || neg == 0.0) return kNaN;
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

MeanSe mean_se(std::span<const double> values) {
  MeanSe out;
  std::vector<double> v;
  for (double x : values)
    if (!std::isnan(x)) v.push_back(x);
  if (v.empty()) return {kNaN, kNaN};
  for (double x : v) out.mean += x;
  out.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.se = std::sqrt(ss / static_cast<double>(v.size() - 1)) / std::sqrt(static_cast<double>(v.size()));
  }
  return out;
}

EvalReport run_cv(const ObservedNetwork& input, const std::vector<RosterEntry>& roster, const CvOptions& options) {
  if (roster.empty()) throw ContractError("empty model roster");
  if (options.trials < 1) throw ContractError("at least one trial is required");
  if (options.fit.engine == Engine::BeliefPropagation) {
    for (const auto& e : roster) {
      if (e.config.degree_corrected()) {
        throw UnsupportedConfiguration("model " + e.tag + " needs the vb engine (degree correction)");
      }
    }
  }

  EvalReport report;
  ObservedNetwork net = input;
  if (options.normalize) {
    auto normalized = normalize_weights(input, *options.normalize);
    net = std::move(normalized.network);
    report.transform = normalized.transform;
  }

  std::vector<HoldoutSplit> splits;
  for (int t = 0; t < options.trials; ++t) {
    splits.push_back(holdout_split(net, options.fraction, derive_seed(options.seed, "trial", t)));
  }

  const std::size_t m = roster.size();
  report.trials.resize(static_cast<std::size_t>(options.trials) * m);
  parallel_for(report.trials.size(), options.threads, [&](std::size_t job) {
    const int t = static_cast<int>(job / m);
    const auto& entry = roster[job % m];
    const auto& split = splits[t];
    const auto rr = run_restarts(split.train, entry.config, options.restarts,
                                 derive_seed(options.seed, "fit-" + entry.tag, t), options.fit, 1);
    TrialResult tr;
    tr.trial = t;
    tr.model = entry.tag;
    tr.elbo = rr.best.elbo;
    for (const auto& h : split.test) {
      PredictionRecord rec;
      rec.src = h.src;
      rec.dst = h.dst;
      rec.predicted_existence = predict_existence(rr.best, h.src, h.dst);
      rec.predicted_weight = predict_weight(rr.best, h.src, h.dst);
      rec.truth_existence = h.is_edge ? 1 : 0;
      if (h.is_edge) rec.truth_weight = h.weight;
      tr.records.push_back(rec);
    }
    tr.existence_mse = existence_mse(tr.records);
    tr.weight_mse = weight_mse(tr.records);
    tr.auc = existence_auc(tr.records);
    report.trials[job] = std::move(tr);
  });

  for (const auto& entry : roster) {
    std::vector<double> e, w, a;
    for (const auto& tr : report.trials) {
      if (tr.model != entry.tag) continue;
      e.push_back(tr.existence_mse);
      w.push_back(tr.weight_mse);
      a.push_back(tr.auc);
    }
    report.summary.push_back({entry.tag, mean_se(e), mean_se(w), mean_se(a)});
  }
  return report;
}

void write_trials_csv(const EvalReport& report, std::ostream& out) {
  out << "trial,model,existence_mse,weight_mse,auc,elbo\n";
  for (const auto& tr : report.trials) {
    out << tr.trial << ',' << tr.model << ',' << format_double(tr.existence_mse) << ','
        << format_double(tr.weight_mse) << ',' << format_double(tr.auc) << ',' << format_double(tr.elbo) << '\n';
  }
}

}  // namespace wsbm

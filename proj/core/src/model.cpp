#include "wsbm/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wsbm/error.hpp"

namespace wsbm {

void ModelConfig::validate() const {
  if (k < 1) throw ContractError("K must be at least 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ContractError("alpha must lie in [0, 1]");
  if (!is_existence_family(existence_family)) {
    throw ContractError("existence family must be bernoulli or dc");
  }
  if (!is_weight_family(weight_family)) {
    throw ContractError("weight family must be normal, poisson or exponential");
  }
  auto check_prior = [](const std::optional<HyperParams>& prior, FamilyKind family, const char* what) {
    if (!prior) return;
    if (prior->family != family) throw ContractError(std::string(what) + " prior has the wrong family");
    if (auto why = admissibility_violation(*prior); !why.empty()) {
      throw ContractError(std::string(what) + " prior is inadmissible: " + why);
    }
  };
  check_prior(existence_prior, existence_family, "existence");
  check_prior(weight_prior, weight_family, "weight");
  if (!mu0.empty()) {
    if (mu0.size() != static_cast<std::size_t>(k)) throw ContractError("mu0 must have K entries");
    double s = 0.0;
    for (double p : mu0) {
      if (!(p > 0.0)) throw ContractError("mu0 entries must be positive");
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12) throw ContractError("mu0 must sum to 1");
  }
}

ModelConfig resolve_config(const ModelConfig& config, const ObservedNetwork& net) {
  ModelConfig out = config;
  out.validate();
  if (!out.existence_prior) out.existence_prior = default_prior(out.existence_family);
  if (!out.weight_prior) {
    double mean = 0.0, sq = 0.0;
    const auto edges = net.weighted_edges();
    for (const auto& e : edges) mean += e.weight;
    if (!edges.empty()) mean /= static_cast<double>(edges.size());
    for (const auto& e : edges) sq += (e.weight - mean) * (e.weight - mean);
    const double var = edges.empty() ? 1.0 : sq / static_cast<double>(edges.size());
    out.weight_prior = default_prior(out.weight_family, edges.empty() ? 0.0 : mean, var);
  }
  if (out.mu0.empty()) out.mu0.assign(static_cast<std::size_t>(out.k), 1.0 / out.k);
  return out;
}

VertexBeliefs::VertexBeliefs(std::size_t n, int k) : m_(n, static_cast<std::size_t>(k), 1.0 / k) {}

VertexBeliefs VertexBeliefs::random(std::size_t n, int k, Rng& rng) {
  VertexBeliefs b(n, k);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = b.row(i);
    double s = 0.0;
    for (auto& x : row) s += (x = -std::log(uniform_open(rng)));
    for (auto& x : row) x /= s;
  }
  return b;
}

VertexBeliefs VertexBeliefs::one_hot(std::span<const int> labels, int k) {
  VertexBeliefs b(labels.size(), k);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= k) throw ContractError("label outside [0, K)");
    auto row = b.row(i);
    std::fill(row.begin(), row.end(), 0.0);
    row[static_cast<std::size_t>(labels[i])] = 1.0;
  }
  return b;
}

std::vector<int> VertexBeliefs::map_labels() const {
  std::vector<int> labels(num_vertices());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto r = row(i);
    labels[i] = static_cast<int>(std::max_element(r.begin(), r.end()) - r.begin());
  }
  return labels;
}

void VertexBeliefs::validate(double tol) const {
  for (std::size_t i = 0; i < num_vertices(); ++i) {
    double s = 0.0;
    for (double x : row(i)) {
      if (!(x >= 0.0)) throw ContractError("belief row " + std::to_string(i) + " has a negative entry");
      s += x;
    }
    if (std::abs(s - 1.0) > tol) throw ContractError("belief row " + std::to_string(i) + " does not sum to 1");
  }
}

BundlePosteriors posteriors_from_stats(const BundleStats& stats, const ModelConfig& resolved,
                                       double existence_scale, double weight_scale) {
  const std::size_t bundles = static_cast<std::size_t>(stats.k) * stats.k;
  BundlePosteriors p;
  p.k = stats.k;
  p.prior_existence = *resolved.existence_prior;
  p.prior_weight = *resolved.weight_prior;
  p.tau_existence.reserve(bundles);
  p.tau_weight.reserve(bundles);
  p.eta_existence.reserve(bundles);
  p.eta_weight.reserve(bundles);
  for (std::size_t r = 0; r < bundles; ++r) {
    try {
      p.tau_existence.push_back(posterior_update(p.prior_existence, stats.existence[r] * existence_scale));
      p.tau_weight.push_back(posterior_update(p.prior_weight, stats.weight[r] * weight_scale));
      p.eta_existence.push_back(expected_nat_params(p.tau_existence.back()));
      p.eta_weight.push_back(expected_nat_params(p.tau_weight.back()));
    } catch (const AdmissibilityError& e) {
      throw AdmissibilityError("bundle " + std::to_string(r) + ": " + e.what());
    }
  }
  return p;
}

double label_prior_term(const VertexBeliefs& beliefs, std::span<const double> mu0) {
  double g = 0.0;
  for (std::size_t i = 0; i < beliefs.num_vertices(); ++i) {
    auto row = beliefs.row(i);
    for (std::size_t z = 0; z < row.size(); ++z)
      if (row[z] > 0.0) g += row[z] * std::log(mu0[z] / row[z]);
  }
  return g;
}

double bundle_term(std::span<const StatVector> stats, double scale, const HyperParams& prior,
                   std::span<const HyperParams> tau, std::span<const StatVector> eta) {
  const double log_z0 = log_partition(prior);
  double g = 0.0;
  for (std::size_t r = 0; r < tau.size(); ++r) {
    StatVector lhs = stats[r] * scale + prior.tau;
    for (std::size_t c = 0; c < lhs.size(); ++c) lhs[c] -= tau[r].tau[c];
    g += lhs.dot(eta[r]) + log_partition(tau[r]) - log_z0;
  }
  return g;
}

std::string_view to_string(Engine engine) noexcept {
  return engine == Engine::VariationalBayes ? "vb" : "bp";
}

}  // namespace wsbm

#pragma once

#include <vector>

#include "wsbm/model.hpp"
#include "wsbm/netgraph.hpp"

namespace wsbm {

/// Expected sufficient statistics <T>_r under factorized beliefs.
///
/// Weight statistics sum over W. Existence statistics sum over the observed
/// pairs E = W u N without enumerating N: the constant last component is the
/// product of global belief sums minus the diagonal and the missing pairs.
/// A modeled self-loop (i, i) has one label at both ends, so it contributes
/// mu_i(z) to bundle (z, z) only. With DCExistence, beliefs are weighted by
/// the weighted out/in degrees in that component. Cost O((n + |W| + |M|) K^2).
BundleStats expected_stats(const SparseView& view, const VertexBeliefs& beliefs, const ModelConfig& resolved);

/// Bundle update: tau_r = tau_0 + alpha <T_e>_r and tau_0 + (1 - alpha) <T_w>_r.
BundlePosteriors update_bundles(const SparseView& view, const VertexBeliefs& beliefs,
                                const ModelConfig& resolved);

/// Running sums of beliefs over all vertices used by the sparse belief update.
struct BeliefSums {
  std::vector<double> plain;     // sum_j mu_j(z)
  std::vector<double> out_deg;   // sum_j d_out(j) mu_j(z)
  std::vector<double> in_deg;    // sum_j d_in(j) mu_j(z)

  static BeliefSums compute(const SparseView& view, const VertexBeliefs& beliefs);
  void replace_row(const SparseView& view, VertexId i, std::span<const double> old_row,
                   std::span<const double> new_row);
};

/// Exponent of the mean-field belief update for vertex i:
/// log mu0(z) + sum_r d<T>_r/d mu_i(z) . <eta>_r, with the existence part scaled
/// by alpha and the weight part by (1 - alpha). Both out- and in-pairs of i contribute.
void belief_exponent(const SparseView& view, const BundlePosteriors& posteriors, const ModelConfig& resolved,
                     const VertexBeliefs& beliefs, const BeliefSums& sums, VertexId i,
                     std::span<double> out);
std::vector<double> belief_exponent(const SparseView& view, const BundlePosteriors& posteriors,
                                    const ModelConfig& resolved, const VertexBeliefs& beliefs, VertexId i);

struct InnerReport {
  int sweeps = 0;
  double max_change = 0.0;
  bool converged = false;
};

/// Sequential coordinate updates mu_i(z) ~ exp(exponent) over all vertices,
/// repeated until the largest entry change of a sweep is below `tol`.
InnerReport update_beliefs(const SparseView& view, const BundlePosteriors& posteriors,
                           const ModelConfig& resolved, VertexBeliefs& beliefs, double tol, int max_sweeps);

/// Mean-field ELBO G, up to the family base-measure constants.
double elbo(const SparseView& view, const VertexBeliefs& beliefs, const BundlePosteriors& posteriors,
            const ModelConfig& resolved);
double elbo_from_stats(const BundleStats& stats, const VertexBeliefs& beliefs,
                       const BundlePosteriors& posteriors, const ModelConfig& resolved);

/// Variational Bayes from the given initial beliefs. `resolved` must come from
/// resolve_config. Non-convergence is reported through FitResult::converged.
FitResult fit_vb(const SparseView& view, const ModelConfig& resolved, VertexBeliefs init,
                 const StoppingRule& stopping);

/// Checks every weighted edge against the weight family's support.
void validate_weights(const ObservedNetwork& net, const ModelConfig& resolved);

}  // namespace wsbm

namespace wsbm {

/// Fills FitResult's degree vectors, MAP-label bundle weight means, and the
/// global weight mean from the training view.
void attach_prediction_aids(const SparseView& view, FitResult& result);

}  // namespace wsbm

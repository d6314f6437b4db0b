#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wsbm/matrix.hpp"
#include "wsbm/model.hpp"
#include "wsbm/netgraph.hpp"

namespace wsbm {

/// Undirected pair graph on which messages are passed.
///
/// The sparse form joins a and b when either (a, b) or (b, a) is a weighted
/// edge; every other observed pair is handled by the shared non-edge field.
/// The dense reference form joins every pair with at least one observed
/// direction and uses no field.
class BpGraph {
 public:
  static BpGraph sparse(const SparseView& view);
  static BpGraph dense(const SparseView& view);

  std::size_t num_vertices() const noexcept { return off_.size() - 1; }
  std::size_t num_pairs() const noexcept { return pairs_.size(); }
  std::size_t num_slots() const noexcept { return nbr_.size(); }
  bool is_dense() const noexcept { return dense_; }

  /// Pair p joins pairs()[p].src < pairs()[p].dst.
  const std::vector<VertexPair>& pairs() const noexcept { return pairs_; }

  /// Slots of vertex i are [slot_begin(i), slot_end(i)); slot s points to
  /// neighbor(s) through pair_of(s), and reverse(s) is the slot of i at that neighbor.
  std::size_t slot_begin(VertexId i) const noexcept { return off_[i]; }
  std::size_t slot_end(VertexId i) const noexcept { return off_[i + 1]; }
  VertexId neighbor(std::size_t s) const noexcept { return nbr_[s]; }
  std::size_t pair_of(std::size_t s) const noexcept { return pair_[s]; }
  std::size_t reverse(std::size_t s) const noexcept { return rev_[s]; }
  std::size_t degree(VertexId i) const noexcept { return off_[i + 1] - off_[i]; }
  /// Slot of neighbor j at vertex i, if the two are joined.
  std::optional<std::size_t> find_slot(VertexId i, VertexId j) const noexcept;

 private:
  static BpGraph from_pairs(std::size_t n, std::vector<VertexPair> pairs, bool dense);

  bool dense_ = false;
  std::vector<VertexPair> pairs_;
  std::vector<std::size_t> off_, nbr_, pair_, rev_;
};

/// Log evidence matrices: for pair (a, b), log_pair[p](z_a, z_b) sums the
/// log-likelihood contributions of both directions, existence scaled by alpha
/// and weight by (1 - alpha). log_non_edge(z, z') is the contribution of one
/// directed non-edge from group z to group z'.
struct EdgeEvidence {
  int k = 0;
  std::vector<Matrix> log_pair;
  Matrix log_non_edge;

  /// Oriented entry for slot s of vertex i: evidence(z_i, z_neighbor).
  double at(const BpGraph& g, std::size_t s, VertexId i, int zi, int zj) const noexcept {
    const auto& m = log_pair[g.pair_of(s)];
    return g.pairs()[g.pair_of(s)].src == i ? m(zi, zj) : m(zj, zi);
  }
};

/// Throws UnsupportedConfiguration for DC existence or modeled self-loops.
void check_bp_supported(const ModelConfig& config, bool self_loops);

EdgeEvidence compute_evidence(const BpGraph& graph, const SparseView& view, const BundlePosteriors& posteriors,
                              const ModelConfig& resolved);

/// Cavity distributions: slot s of vertex i holds the distribution of z_i with
/// the neighbor at s removed (the message i sends to that neighbor).
struct MessageSet {
  int k = 0;
  std::vector<double> values;  // num_slots x k

  std::span<double> slot(std::size_t s) noexcept { return {values.data() + s * k, static_cast<std::size_t>(k)}; }
  std::span<const double> slot(std::size_t s) const noexcept {
    return {values.data() + s * k, static_cast<std::size_t>(k)};
  }

  static MessageSet uniform(const BpGraph& graph, int k);
  /// Uniform plus Dirichlet(1) noise scaled by `noise`, renormalized.
  static MessageSet perturbed(const BpGraph& graph, int k, double noise, Rng& rng);
};

/// Log of the factor slot s of vertex i contributes to i's belief:
/// log sum_{z'} evidence(z, z') m_{j->i}(z').
void incoming_log_factor(const BpGraph& graph, const EdgeEvidence& ev, const MessageSet& messages, VertexId i,
                         std::size_t s, std::span<double> out);

/// Mean-field non-edge field (n x K, log domain) computed from vertex beliefs:
/// for each vertex the sum over its non-adjacent observed non-edge directions of
/// log sum_{z'} exp(log_non_edge) mu_j(z'). Zero when alpha = 0 or the graph is dense.
Matrix non_edge_field(const BpGraph& graph, const SparseView& view, const EdgeEvidence& ev,
                      const VertexBeliefs& beliefs, double alpha);

struct SweepReport {
  double max_change = 0.0;
  int resets = 0;  // messages that degenerated and were reset to uniform
};

/// One synchronous update of every message against the previous snapshot,
/// then new = (1 - damping) * update + damping * old.
SweepReport sweep_messages(const BpGraph& graph, const EdgeEvidence& ev, const Matrix& field,
                           std::span<const double> mu0, MessageSet& messages, double damping);

VertexBeliefs compute_vertex_beliefs(const BpGraph& graph, const EdgeEvidence& ev, const Matrix& field,
                                     std::span<const double> mu0, const MessageSet& messages);

/// Joint beliefs per pair, oriented (z_src, z_dst) as in graph.pairs().
std::vector<Matrix> compute_pairwise(const BpGraph& graph, const EdgeEvidence& ev, const MessageSet& messages);

/// Expected statistics under pairwise beliefs on graph pairs and factorized
/// beliefs elsewhere.
BundleStats bp_stats(const BpGraph& graph, const SparseView& view, const VertexBeliefs& beliefs,
                     const std::vector<Matrix>& pairwise, const ModelConfig& resolved);

/// ELBO with the Bethe entropy in place of the mean-field entropy.
double bethe_elbo(const BpGraph& graph, const BundleStats& stats, const VertexBeliefs& beliefs,
                  const std::vector<Matrix>& pairwise, const BundlePosteriors& posteriors,
                  const ModelConfig& resolved);

/// Loopy BP fit from initial vertex beliefs: alternates bundle updates with
/// message passing to convergence. `rng` draws the message perturbation.
FitResult fit_bp(const SparseView& view, const ModelConfig& resolved, VertexBeliefs init, Rng& rng,
                 const StoppingRule& stopping, const BpOptions& options);

}  // namespace wsbm

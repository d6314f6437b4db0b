#pragma once

#include <vector>

#include "wsbm/model.hpp"
#include "wsbm/netgraph.hpp"
#include "wsbm/rng.hpp"

namespace wsbm {

/// Hard clustering of vertices by their connection profiles.
///
/// Vertex i's profile has, for every out-neighbor j and in-neighbor j, an
/// existence coordinate sqrt(alpha) and a weight coordinate
/// sqrt(1 - alpha) * (w - mean) / sd, with weights standardized over all
/// edges. Absent pairs are zero. Centers are seeded k-means++ style from `rng`
/// and refined by `lloyd_steps` assignment rounds. Cost O(steps * K * (n + m)).
std::vector<int> profile_kmeans(const SparseView& view, int k, double alpha, Rng& rng, int lloyd_steps = 5);

/// Dirichlet(1) rows, or one-hot rows from profile_kmeans. For 0 < alpha < 1
/// the profile view is drawn uniformly from {alpha, existence only, weight only}.
VertexBeliefs initial_beliefs(const SparseView& view, const ModelConfig& resolved, InitKind kind, Rng& rng);

}  // namespace wsbm

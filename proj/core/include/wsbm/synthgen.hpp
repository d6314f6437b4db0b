#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "wsbm/expfam.hpp"
#include "wsbm/matrix.hpp"
#include "wsbm/netgraph.hpp"

namespace wsbm {

/// Parameters of the block-model generative process.
///
/// Existence of (i, j) is Bernoulli with edge_prob(z_i, z_j), multiplied by
/// propensity_i * propensity_j (capped at 1) when propensities are given.
/// Weights of existing edges are drawn from `weight_family`: Normal uses
/// weight_mean and weight_variance, Poisson and Exponential use weight_mean.
struct GeneratorSpec {
  std::vector<int> labels;  // one group in [0, k) per vertex
  int k = 1;
  Matrix edge_prob;          // k x k
  std::vector<double> propensity;  // empty: all 1
  FamilyKind weight_family = FamilyKind::NormalWeight;
  Matrix weight_mean;        // k x k
  Matrix weight_variance;    // k x k, Normal only
  bool directed = true;
  bool self_loops = false;
  double missing_fraction = 0.0;
  std::uint64_t seed = 0;

  /// Throws ContractError on out-of-range labels, probabilities outside [0, 1],
  /// nonpositive Normal variances, shape mismatches, or a bad missing fraction.
  void validate() const;
};

/// Labels for consecutive blocks of the given sizes: 0,0,..,1,1,..
std::vector<int> labels_from_sizes(std::span<const int> sizes);

struct Sample {
  ObservedNetwork network;
  std::vector<int> labels;
};

/// Draws one network. Pairs are visited in (i, j) order, each drawing its
/// existence and then its weight, so the result is a function of the seed.
Sample sample(const GeneratorSpec& spec);

/// Complete undirected graph over 4 groups of `group_size`; the weight of
/// (i, j) is min(g_i, g_j) + 1 + Normal(0, noise_sd^2) for 0-based groups g.
Sample fig2_toy(int group_size, double noise_sd, std::uint64_t seed);

/// Complete directed graph over `groups` groups of `group_size` vertices;
/// within-group weights Normal(-1, sigma2), between-group Normal(1, sigma2).
Sample fig4_suite(double sigma2, std::uint64_t seed, int groups = 8, int group_size = 10);

/// Directed network with exactly `edges` distinct non-loop pairs chosen
/// uniformly at random and labels assigned round-robin over `k` groups.
/// Weights are Normal(mean_in, variance) within groups and Normal(mean_out,
/// variance) between. Cost is O(edges), so it suits large sparse instances.
Sample sparse_uniform(std::size_t n, int k, std::size_t edges, double mean_in, double mean_out, double variance,
                      std::uint64_t seed);

enum class Archetype { Assortative, Disassortative, CorePeriphery, Ordered };
std::optional<Archetype> parse_archetype(std::string_view name) noexcept;

/// Edge-probability patterns of the classic structures with `k` groups:
/// assortative (dense within), disassortative (dense between), core-periphery
/// (group 0 links to everyone), ordered (edges from lower to higher groups).
/// Weights are Normal with mean 1 on dense bundles and -1 elsewhere.
GeneratorSpec archetype_spec(Archetype type, int k, int group_size, std::uint64_t seed);

/// Normalized mutual information 2 I(A;B) / (H(A) + H(B)) with natural logs.
/// 1 when both partitions are a single cluster, 0 when exactly one is.
/// Throws ContractError on a length mismatch.
double nmi(std::span<const int> a, std::span<const int> b);

}  // namespace wsbm

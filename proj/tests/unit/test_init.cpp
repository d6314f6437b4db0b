#include <gtest/gtest.h>

#include "wsbm/error.hpp"
#include "wsbm/init.hpp"
#include "wsbm/synthgen.hpp"

using namespace wsbm;

namespace {

Sample blocks(double p_in, double p_out, double mean_in, double mean_out, std::uint64_t seed) {
  GeneratorSpec g;
  g.k = 3;
  g.labels = labels_from_sizes(std::vector<int>{12, 12, 12});
  g.edge_prob = Matrix(3, 3, p_out);
  g.weight_mean = Matrix(3, 3, mean_out);
  for (int z = 0; z < 3; ++z) {
    g.edge_prob(z, z) = p_in;
    g.weight_mean(z, z) = mean_in;
  }
  g.weight_variance = Matrix(3, 3, 0.05);
  g.seed = seed;
  return sample(g);
}

}  // namespace

TEST(ProfileKMeans, RecoversClearExistenceStructure) {
  const auto s = blocks(0.9, 0.05, 1.0, 1.0, 4);
  const SparseView view(s.network);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    hits += nmi(s.labels, profile_kmeans(view, 3, 1.0, rng)) == 1.0;
  }
  EXPECT_GE(hits, 8);
}

TEST(ProfileKMeans, WeightViewSeesWeightOnlyStructure) {
  const auto s = blocks(1.0, 1.0, 1.0, -1.0, 5);
  const SparseView view(s.network);
  Rng a(1), b(1);
  // Complete graph: existence profiles carry no signal, weight profiles do.
  EXPECT_LT(nmi(s.labels, profile_kmeans(view, 3, 1.0, a)), 0.5);
  EXPECT_DOUBLE_EQ(nmi(s.labels, profile_kmeans(view, 3, 0.0, b)), 1.0);
}

TEST(ProfileKMeans, DeterministicPerStreamAndDegenerateCases) {
  const auto s = blocks(0.5, 0.2, 1.0, 0.0, 6);
  const SparseView view(s.network);
  Rng a(9), b(9);
  EXPECT_EQ(profile_kmeans(view, 4, 0.5, a), profile_kmeans(view, 4, 0.5, b));
  Rng c(1);
  EXPECT_EQ(profile_kmeans(view, 1, 0.5, c), std::vector<int>(36, 0));
  const auto empty = ObservedNetwork::build(5, {}, {}, {});
  const auto labels = profile_kmeans(SparseView(empty), 3, 0.5, c);
  EXPECT_EQ(labels.size(), 5u);
  for (int z : labels) EXPECT_TRUE(z >= 0 && z < 3);
  EXPECT_THROW(profile_kmeans(view, 0, 0.5, c), ContractError);
}

TEST(InitialBeliefs, KindsProduceValidRows) {
  const auto s = blocks(0.6, 0.1, 1.0, 0.0, 7);
  const SparseView view(s.network);
  ModelConfig c;
  c.k = 3;
  c = resolve_config(c, s.network);
  Rng rng(2);
  const auto hard = initial_beliefs(view, c, InitKind::ProfileKMeans, rng);
  EXPECT_NO_THROW(hard.validate());
  for (std::size_t i = 0; i < hard.num_vertices(); ++i)
    for (int z = 0; z < 3; ++z) EXPECT_TRUE(hard(i, z) == 0.0 || hard(i, z) == 1.0);
  const auto soft = initial_beliefs(view, c, InitKind::Dirichlet, rng);
  EXPECT_NO_THROW(soft.validate(1e-12));
  EXPECT_EQ(soft.num_vertices(), 36u);
}

TEST(InitialBeliefs, ParsesKindNames) {
  EXPECT_EQ(parse_init_kind("kmeans"), InitKind::ProfileKMeans);
  EXPECT_EQ(parse_init_kind("dirichlet"), InitKind::Dirichlet);
  EXPECT_EQ(to_string(InitKind::Dirichlet), "dirichlet");
  EXPECT_THROW(parse_init_kind("random"), ContractError);
}

#include <gtest/gtest.h>

#include "properties.hpp"

using namespace wsbm::testing;

namespace {

constexpr std::uint64_t kSeed = 20240611;

void expect_holds(const PropertyResult& r) {
  EXPECT_TRUE(r.passed()) << r.summary();
  ::testing::Test::RecordProperty("worst", std::to_string(r.worst));
}

}  // namespace

TEST(Property, ElboMonotone) { expect_holds(elbo_monotone(100, kSeed)); }
TEST(Property, SparseMatchesDense) { expect_holds(sparse_matches_dense(100, kSeed + 1)); }
TEST(Property, ExpectedEtaIsGradient) { expect_holds(expected_eta_gradient(100, kSeed + 2)); }
TEST(Property, BpExactOnTrees) { expect_holds(bp_exact_on_trees(60, kSeed + 3)); }
TEST(Property, ZeroVarianceFinite) { expect_holds(zero_variance_is_finite(30, kSeed + 4)); }
TEST(Property, AlphaOneIgnoresWeights) { expect_holds(alpha_one_ignores_weights(50, kSeed + 5)); }
TEST(Property, VertexPermutationEquivariance) { expect_holds(vertex_permutation_equivariance(20, kSeed + 6)); }
TEST(Property, GroupRelabelInvariance) { expect_holds(group_relabel_invariance(50, kSeed + 7)); }
TEST(Property, NmiIdentities) { expect_holds(nmi_identities(300, kSeed + 8)); }

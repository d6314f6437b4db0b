#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "wsbm/error.hpp"
#include "wsbm/netgraph.hpp"

using namespace wsbm;

namespace {

ObservedNetwork parse(const std::string& edges, const std::string& missing = "", LoadOptions opt = {}) {
  std::istringstream e(edges), m(missing);
  return parse_edge_list(e, missing.empty() ? nullptr : &m, opt);
}

std::string error_of(const std::string& edges, const std::string& missing = "", LoadOptions opt = {}) {
  try {
    parse(edges, missing, opt);
  } catch (const InputError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Netgraph, CountsPairsByKind) {
  auto net = ObservedNetwork::build(4, {{0, 1, 2.0}, {1, 2, 0.0}}, {{3, 0}}, {true, false});
  EXPECT_EQ(net.modeled_pair_count(), 12u);
  EXPECT_EQ(net.non_edge_count(), 9u);
  EXPECT_EQ(net.observed_pair_count(), 11u);
  EXPECT_EQ(net.weight_of({1, 2}), 0.0);  // a zero weight is still an edge
  EXPECT_FALSE(net.weight_of({2, 1}).has_value());
  EXPECT_TRUE(net.is_missing({3, 0}));

  auto loops = ObservedNetwork::build(4, {{2, 2, 1.0}}, {}, {true, true});
  EXPECT_EQ(loops.modeled_pair_count(), 16u);
  auto undirected = ObservedNetwork::build(4, {{1, 0, 1.0}}, {}, {false, false});
  EXPECT_EQ(undirected.modeled_pair_count(), 6u);
  EXPECT_EQ(undirected.weighted_edges()[0].src, 0u);
}

TEST(Netgraph, BuildRejectsInvalidLists) {
  EXPECT_THROW(ObservedNetwork::build(3, {{0, 3, 1.0}}, {}, {}), InputError);
  EXPECT_THROW(ObservedNetwork::build(3, {{0, 1, 1.0}, {0, 1, 2.0}}, {}, {}), InputError);
  EXPECT_THROW(ObservedNetwork::build(3, {{0, 1, 1.0}}, {{0, 1}}, {}), InputError);
  EXPECT_THROW(ObservedNetwork::build(3, {{0, 1, NAN}}, {}, {}), InputError);
  EXPECT_THROW(ObservedNetwork::build(3, {{1, 1, 1.0}}, {}, {true, false}), InputError);
  EXPECT_THROW(ObservedNetwork::build(3, {{0, 1, 1.0}, {1, 0, 1.0}}, {}, {false, false}), InputError);
}

TEST(Netgraph, DegreeCacheCountsObservedPairs) {
  auto net = ObservedNetwork::build(3, {{0, 1, 1.0}, {0, 2, 1.0}}, {{1, 0}}, {true, false});
  const auto& d = net.degrees();
  EXPECT_EQ(d.w_out, (std::vector<std::int64_t>{2, 0, 0}));
  EXPECT_EQ(d.w_in, (std::vector<std::int64_t>{0, 1, 1}));
  EXPECT_EQ(d.e_out, (std::vector<std::int64_t>{2, 1, 2}));
  EXPECT_EQ(d.e_in, (std::vector<std::int64_t>{1, 2, 2}));
  EXPECT_EQ(d, compute_degrees(net));
}

TEST(Netgraph, WithMissingUpdatesDegreesIncrementally) {
  auto net = ObservedNetwork::build(4, {{0, 1, 1.0}, {2, 3, 2.0}, {1, 3, 1.0}}, {}, {true, false});
  const VertexPair hide[] = {{0, 1}, {3, 2}};
  auto hidden = net.with_missing(hide);
  EXPECT_EQ(hidden.degrees(), compute_degrees(hidden));
  EXPECT_TRUE(hidden.is_missing({0, 1}));
  EXPECT_EQ(hidden.weighted_edges().size(), 2u);
  EXPECT_THROW(hidden.with_missing(hide), InputError);
}

TEST(Netgraph, SparseViewExpandsUndirectedInput) {
  auto net = ObservedNetwork::build(3, {{0, 1, 2.0}, {1, 2, 3.0}}, {{0, 2}}, {false, false});
  SparseView v(net);
  EXPECT_EQ(v.weighted_edges().size(), 4u);
  EXPECT_EQ(v.missing_pairs().size(), 2u);
  EXPECT_EQ(v.edge_weight(1, 0), 2.0);
  EXPECT_EQ(v.edge_weight(2, 1), 3.0);
  EXPECT_TRUE(v.has_missing(2, 0));
  EXPECT_EQ(v.out_degree(), (std::vector<double>{1, 2, 1}));
  EXPECT_EQ(v.in_degree(), v.out_degree());
  ASSERT_EQ(v.in_edges(1).size(), 2u);
  EXPECT_EQ(v.in_edges(1)[0].other, 0u);
}

TEST(Netgraph, ParsesStringIdsInOrderOfAppearance) {
  auto net = parse("# header\nb a 1.5\n\na c -2\n", "c b\n");
  EXPECT_EQ(net.names(), (std::vector<std::string>{"b", "a", "c"}));
  EXPECT_EQ(net.weight_of({0, 1}), 1.5);
  EXPECT_EQ(net.weight_of({1, 2}), -2.0);
  EXPECT_TRUE(net.is_missing({2, 0}));
}

TEST(Netgraph, ParseErrorsCarryLineNumbers) {
  EXPECT_NE(error_of("0 1 1\n0 1\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("0 1 x\n").find("malformed weight"), std::string::npos);
  EXPECT_NE(error_of("0 1 inf\n").find("non-finite"), std::string::npos);
  EXPECT_NE(error_of("0 1 1\n0 1 2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("0 1 1\n", "0 1\n").find("(0, 1)"), std::string::npos);
  EXPECT_NE(error_of("0 1 1\n", "0\n").find("missing list line 1"), std::string::npos);
  LoadOptions numbered;
  numbered.num_vertices = 2;
  EXPECT_NE(error_of("0 5 1\n", "", numbered).find("not an integer in [0, 2)"), std::string::npos);
}

TEST(Netgraph, CanonicalWriterRoundTrips) {
  auto net = parse("x y 0.1\ny z 1e-300\nz x 12345678.875\n", "y x\n");
  std::ostringstream e, m;
  write_edge_list(net, e);
  write_missing_list(net, m);
  auto back = parse(e.str(), m.str());
  ASSERT_EQ(back.weighted_edges().size(), 3u);
  for (const auto& w : net.weighted_edges()) {
    const VertexPair p{w.src, w.dst};
    const auto& names = net.names();
    const auto find = [&](const std::string& s) {
      return static_cast<VertexId>(std::find(back.names().begin(), back.names().end(), s) - back.names().begin());
    };
    EXPECT_EQ(back.weight_of({find(names[p.src]), find(names[p.dst])}), w.weight);
  }
  std::ostringstream again;
  write_edge_list(back, again);
  EXPECT_EQ(again.str(), e.str());
}

TEST(Netgraph, FormatDoubleIsShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Netgraph, LabelsFileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "wsbm_labels_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "labels.tsv";
  {
    std::ofstream f(path);
    const std::vector<std::string> names{"a", "b", "c"};
    const std::vector<int> labels{2, 0, 1};
    write_labels(names, labels, f);
  }
  auto [names, labels] = read_labels(path);
  EXPECT_EQ(names, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(labels, (std::vector<int>{2, 0, 1}));
  std::filesystem::remove_all(dir);
}

TEST(Netgraph, NormalizationMapsOntoUnitInterval) {
  auto net = ObservedNetwork::build(3, {{0, 1, 1.0}, {1, 2, 100.0}, {2, 0, 10.0}}, {}, {});
  auto lin = normalize_weights(net, NormalizeMode::Linear);
  EXPECT_DOUBLE_EQ(*lin.network.weight_of({0, 1}), -1.0);
  EXPECT_DOUBLE_EQ(*lin.network.weight_of({1, 2}), 1.0);
  auto lg = normalize_weights(net, NormalizeMode::LogThenLinear);
  EXPECT_NEAR(*lg.network.weight_of({2, 0}), 0.0, 1e-15);
  EXPECT_NEAR(lg.transform.inverse(lg.transform.apply(37.0)), 37.0, 1e-12);
  auto neg = ObservedNetwork::build(2, {{0, 1, -1.0}}, {}, {});
  EXPECT_THROW(normalize_weights(neg, NormalizeMode::LogThenLinear), InputError);
}

TEST(Netgraph, HoldoutSplitMovesObservedOffDiagonalPairs) {
  std::vector<WeightedEdge> edges;
  for (VertexId i = 0; i < 12; ++i)
    for (VertexId j = 0; j < 12; ++j)
      if (i != j && (i + j) % 3 == 0) edges.push_back({i, j, double(i + j)});
  auto net = ObservedNetwork::build(12, edges, {{0, 1}}, {true, false});
  auto split = holdout_split(net, 0.25, 9);
  const auto observed = net.observed_pair_count();
  EXPECT_EQ(split.test.size(), static_cast<std::size_t>(std::llround(0.25 * observed)));
  EXPECT_EQ(split.train.observed_pair_count(), observed - split.test.size());
  std::set<std::pair<VertexId, VertexId>> seen;
  for (const auto& h : split.test) {
    EXPECT_NE(h.src, h.dst);
    EXPECT_TRUE(seen.insert({h.src, h.dst}).second);
    EXPECT_FALSE(net.is_missing({h.src, h.dst}));
    EXPECT_TRUE(split.train.is_missing({h.src, h.dst}));
    EXPECT_EQ(h.is_edge, net.weight_of({h.src, h.dst}).has_value());
    if (h.is_edge) EXPECT_EQ(h.weight, *net.weight_of({h.src, h.dst}));
  }
  auto again = holdout_split(net, 0.25, 9);
  ASSERT_EQ(again.test.size(), split.test.size());
  for (std::size_t k = 0; k < split.test.size(); ++k) {
    EXPECT_EQ(again.test[k].src, split.test[k].src);
    EXPECT_EQ(again.test[k].dst, split.test[k].dst);
  }
  EXPECT_THROW(holdout_split(net, 1.0, 1), ContractError);
}

#pragma once

#include <cmath>
#include <vector>

#include "wsbm/expfam.hpp"
#include "wsbm/model.hpp"
#include "wsbm/netgraph.hpp"

// Brute-force references that enumerate every ordered vertex pair.
namespace wsbm::testing {

// Observed ordered pairs of the directed expansion, straight from the network.
struct DensePair {
  VertexId i, j;
  bool edge;
  double weight;
};

inline std::vector<DensePair> dense_pairs(const ObservedNetwork& net) {
  std::vector<DensePair> out;
  const auto n = static_cast<VertexId>(net.num_vertices());
  for (VertexId i = 0; i < n; ++i) {
    for (VertexId j = 0; j < n; ++j) {
      if (i == j && !net.self_loops()) continue;
      if (net.is_missing({i, j})) continue;
      const auto w = net.weight_of({i, j});
      out.push_back({i, j, w.has_value(), w.value_or(0.0)});
    }
  }
  return out;
}

inline std::vector<double> dense_degrees(const ObservedNetwork& net, bool out_dir) {
  std::vector<double> d(net.num_vertices(), 0.0);
  for (const auto& p : dense_pairs(net))
    if (p.edge) d[out_dir ? p.i : p.j] += 1.0;
  return d;
}

inline StatVector existence_T(const ModelConfig& c, const DensePair& p, const std::vector<double>& dout,
                       const std::vector<double>& din) {
  const double x = p.edge ? 1.0 : 0.0;
  if (c.degree_corrected()) return {x, dout[p.i] * din[p.j]};
  return {x, 1.0};
}

inline BundleStats dense_stats(const ObservedNetwork& net, const VertexBeliefs& b, const ModelConfig& c) {
  const int k = b.k();
  const auto dout = dense_degrees(net, true), din = dense_degrees(net, false);
  BundleStats st;
  st.k = k;
  st.existence.assign(k * k, StatVector(2));
  st.weight.assign(k * k, StatVector(dimension(c.weight_family)));
  for (const auto& p : dense_pairs(net)) {
    const auto te = existence_T(c, p, dout, din);
    for (int z = 0; z < k; ++z) {
      for (int zp = 0; zp < k; ++zp) {
        // A self-loop has one label at both ends.
        const double q = p.i == p.j ? (z == zp ? b(p.i, z) : 0.0) : b(p.i, z) * b(p.j, zp);
        st.existence[k * z + zp] += te * q;
        if (p.edge) st.weight[k * z + zp] += suff_stats(c.weight_family, p.weight) * q;
      }
    }
  }
  return st;
}

// d/d mu_i(z) of sum_r scale <T>_r . <eta>_r, plus log mu0(z).
inline std::vector<double> dense_gradient(const ObservedNetwork& net, const VertexBeliefs& b, const BundlePosteriors& post,
                                   const ModelConfig& c, VertexId i) {
  const int k = b.k();
  const auto dout = dense_degrees(net, true), din = dense_degrees(net, false);
  std::vector<double> g(k);
  for (int z = 0; z < k; ++z) g[z] = std::log(c.mu0[z]);
  for (const auto& p : dense_pairs(net)) {
    if (p.i != i && p.j != i) continue;
    const auto te = existence_T(c, p, dout, din);
    auto add = [&](int z, double coef, int r) {
      g[z] += coef * c.alpha * te.dot(post.eta_existence[r]);
      if (p.edge) g[z] += coef * (1 - c.alpha) * suff_stats(c.weight_family, p.weight).dot(post.eta_weight[r]);
    };
    for (int z = 0; z < k; ++z) {
      if (p.i == p.j) {
        add(z, 1.0, k * z + z);
        continue;
      }
      for (int zp = 0; zp < k; ++zp) {
        if (p.i == i) add(z, b(p.j, zp), k * z + zp);
        if (p.j == i) add(z, b(p.i, zp), k * zp + z);
      }
    }
  }
  return g;
}

inline double dense_elbo(const ObservedNetwork& net, const VertexBeliefs& b, const ModelConfig& c) {
  const auto st = dense_stats(net, b, c);
  double g = 0.0;
  auto term = [&](const StatVector& t, double scale, const HyperParams& prior) {
    const auto post = posterior_update(prior, t * scale);
    return log_partition(post) - log_partition(prior);  // optimal tau: first term vanishes
  };
  for (int r = 0; r < b.k() * b.k(); ++r) {
    g += term(st.existence[r], c.alpha, *c.existence_prior);
    g += term(st.weight[r], 1 - c.alpha, *c.weight_prior);
  }
  for (std::size_t i = 0; i < b.num_vertices(); ++i)
    for (int z = 0; z < b.k(); ++z)
      if (b(i, z) > 0) g += b(i, z) * std::log(c.mu0[z] / b(i, z));
  return g;
}

}  // namespace wsbm::testing

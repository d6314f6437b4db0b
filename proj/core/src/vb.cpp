#include "wsbm/vb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "wsbm/error.hpp"

namespace wsbm {
namespace {

constexpr double kRowFloor = 1e-300;

// Scratch buffers for one vertex's belief exponent.
struct ExponentScratch {
  std::vector<double> c_out, c_in, n_out, n_in, v_out, v_in;

  ExponentScratch(int k, std::size_t dw)
      : c_out(k), c_in(k), n_out(k), n_in(k), v_out(k * dw), v_in(k * dw) {}
};

void compute_exponent(const SparseView& view, const BundlePosteriors& post, const ModelConfig& cfg,
                      const VertexBeliefs& beliefs, const BeliefSums& sums, VertexId i,
                      ExponentScratch& s, std::span<double> out) {
  const int k = beliefs.k();
  const double alpha = cfg.alpha;
  const auto mu_i = beliefs.row(i);
  for (int z = 0; z < k; ++z) out[z] = std::log(cfg.mu0[z]);

  if (alpha > 0.0) {
    std::fill(s.c_out.begin(), s.c_out.end(), 0.0);
    std::fill(s.c_in.begin(), s.c_in.end(), 0.0);
    // A self-loop sits in bundle (z, z) alone, so it enters once and linearly.
    double loop_edge = 0.0;
    for (const auto& a : view.out_edges(i)) {
      if (a.other == i) {
        loop_edge = 1.0;
        continue;
      }
      const auto mu_j = beliefs.row(a.other);
      for (int z = 0; z < k; ++z) s.c_out[z] += mu_j[z];
    }
    for (const auto& a : view.in_edges(i)) {
      if (a.other == i) continue;
      const auto mu_j = beliefs.row(a.other);
      for (int z = 0; z < k; ++z) s.c_in[z] += mu_j[z];
    }
    const bool dc = cfg.degree_corrected();
    const auto& dout = view.out_degree();
    const auto& din = view.in_degree();
    const double w_src = dc ? dout[i] : 1.0;
    const double w_dst = dc ? din[i] : 1.0;
    // Observed pairs (i, j) and (j, i) with j != i: all others minus missing.
    const auto& by_dst = dc ? sums.in_deg : sums.plain;
    const auto& by_src = dc ? sums.out_deg : sums.plain;
    for (int z = 0; z < k; ++z) {
      s.n_out[z] = by_dst[z] - w_dst * mu_i[z];
      s.n_in[z] = by_src[z] - w_src * mu_i[z];
    }
    bool loop_missing = false;
    for (VertexId j : view.out_missing(i)) {
      if (j == i) {
        loop_missing = true;
        continue;
      }
      const auto mu_j = beliefs.row(j);
      const double w = dc ? din[j] : 1.0;
      for (int z = 0; z < k; ++z) s.n_out[z] -= w * mu_j[z];
    }
    for (VertexId j : view.in_missing(i)) {
      if (j == i) continue;
      const auto mu_j = beliefs.row(j);
      const double w = dc ? dout[j] : 1.0;
      for (int z = 0; z < k; ++z) s.n_in[z] -= w * mu_j[z];
    }
    for (int z = 0; z < k; ++z) {
      s.n_out[z] *= w_src;
      s.n_in[z] *= w_dst;
    }
    const double loop_pair = view.self_loops() && !loop_missing ? w_src * w_dst : 0.0;
    for (int z = 0; z < k; ++z) {
      double acc = 0.0;
      for (int zp = 0; zp < k; ++zp) {
        const auto& e_out = post.eta_existence[bundle_index(k, z, zp)];
        const auto& e_in = post.eta_existence[bundle_index(k, zp, z)];
        acc += s.c_out[zp] * e_out[0] + s.n_out[zp] * e_out[1] + s.c_in[zp] * e_in[0] + s.n_in[zp] * e_in[1];
      }
      const auto& e_loop = post.eta_existence[bundle_index(k, z, z)];
      acc += loop_edge * e_loop[0] + loop_pair * e_loop[1];
      out[z] += alpha * acc;
    }
  }

  if (alpha < 1.0) {
    const std::size_t dw = dimension(cfg.weight_family);
    std::fill(s.v_out.begin(), s.v_out.end(), 0.0);
    std::fill(s.v_in.begin(), s.v_in.end(), 0.0);
    std::optional<StatVector> loop;
    for (const auto& a : view.out_edges(i)) {
      const auto t = suff_stats(cfg.weight_family, a.weight);
      if (a.other == i) {
        loop = t;
        continue;
      }
      const auto mu_j = beliefs.row(a.other);
      for (int z = 0; z < k; ++z)
        for (std::size_t c = 0; c < dw; ++c) s.v_out[z * dw + c] += mu_j[z] * t[c];
    }
    for (const auto& a : view.in_edges(i)) {
      if (a.other == i) continue;
      const auto t = suff_stats(cfg.weight_family, a.weight);
      const auto mu_j = beliefs.row(a.other);
      for (int z = 0; z < k; ++z)
        for (std::size_t c = 0; c < dw; ++c) s.v_in[z * dw + c] += mu_j[z] * t[c];
    }
    for (int z = 0; z < k; ++z) {
      double acc = 0.0;
      for (int zp = 0; zp < k; ++zp) {
        const auto& w_out = post.eta_weight[bundle_index(k, z, zp)];
        const auto& w_in = post.eta_weight[bundle_index(k, zp, z)];
        for (std::size_t c = 0; c < dw; ++c) {
          acc += s.v_out[zp * dw + c] * w_out[c] + s.v_in[zp * dw + c] * w_in[c];
        }
      }
      if (loop) acc += loop->dot(post.eta_weight[bundle_index(k, z, z)]);
      out[z] += (1.0 - alpha) * acc;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------

BundleStats expected_stats(const SparseView& view, const VertexBeliefs& beliefs, const ModelConfig& cfg) {
  const int k = beliefs.k();
  const std::size_t n = view.num_vertices();
  const std::size_t kk = static_cast<std::size_t>(k) * k;
  const std::size_t dw = dimension(cfg.weight_family);
  if (beliefs.num_vertices() != n) throw ContractError("beliefs do not match the network size");

  BundleStats st;
  st.k = k;
  st.existence.assign(kk, StatVector(2));
  st.weight.assign(kk, StatVector(dw));

  // Weighted edges, accumulated per source vertex.
  std::vector<double> acc_c(k), acc_w(k * dw);
  for (VertexId i = 0; i < n; ++i) {
    const auto arcs = view.out_edges(i);
    if (arcs.empty()) continue;
    std::fill(acc_c.begin(), acc_c.end(), 0.0);
    std::fill(acc_w.begin(), acc_w.end(), 0.0);
    const auto mu_i = beliefs.row(i);
    for (const auto& a : arcs) {
      const auto t = suff_stats(cfg.weight_family, a.weight);
      if (a.other == i) {
        // Both ends share one label: the loop belongs to bundle (z, z).
        for (int z = 0; z < k; ++z) {
          const int r = bundle_index(k, z, z);
          st.existence[r][0] += mu_i[z];
          st.weight[r] += t * mu_i[z];
        }
        continue;
      }
      const auto mu_j = beliefs.row(a.other);
      for (int zp = 0; zp < k; ++zp) {
        acc_c[zp] += mu_j[zp];
        for (std::size_t c = 0; c < dw; ++c) acc_w[zp * dw + c] += mu_j[zp] * t[c];
      }
    }
    for (int z = 0; z < k; ++z) {
      const double m = mu_i[z];
      if (m == 0.0) continue;
      for (int zp = 0; zp < k; ++zp) {
        const int r = bundle_index(k, z, zp);
        st.existence[r][0] += m * acc_c[zp];
        for (std::size_t c = 0; c < dw; ++c) st.weight[r][c] += m * acc_w[zp * dw + c];
      }
    }
  }

  // Observed-pair component: all ordered pairs minus missing, diagonal per the loop flag.
  const bool dc = cfg.degree_corrected();
  const auto& dout = view.out_degree();
  const auto& din = view.in_degree();
  auto src_w = [&](VertexId v) { return dc ? dout[v] : 1.0; };
  auto dst_w = [&](VertexId v) { return dc ? din[v] : 1.0; };

  std::vector<double> src_sum(k, 0.0), dst_sum(k, 0.0);
  for (VertexId i = 0; i < n; ++i) {
    const auto mu = beliefs.row(i);
    for (int z = 0; z < k; ++z) {
      src_sum[z] += src_w(i) * mu[z];
      dst_sum[z] += dst_w(i) * mu[z];
    }
  }
  Matrix pair(k, k);
  for (int z = 0; z < k; ++z)
    for (int zp = 0; zp < k; ++zp) pair(z, zp) = src_sum[z] * dst_sum[zp];
  // The product of sums treats (i, i) as two independent ends; remove that
  // and, when loops are modeled, add them back on the diagonal bundles.
  for (VertexId i = 0; i < n; ++i) {
    const auto mu = beliefs.row(i);
    const double w = src_w(i) * dst_w(i);
    for (int z = 0; z < k; ++z) {
      for (int zp = 0; zp < k; ++zp) pair(z, zp) -= w * mu[z] * mu[zp];
      if (view.self_loops()) pair(z, z) += w * mu[z];
    }
  }
  for (const auto& p : view.missing_pairs()) {
    const auto mu_i = beliefs.row(p.src);
    const auto mu_j = beliefs.row(p.dst);
    const double w = src_w(p.src) * dst_w(p.dst);
    if (p.src == p.dst) {
      for (int z = 0; z < k; ++z) pair(z, z) -= w * mu_i[z];
      continue;
    }
    for (int z = 0; z < k; ++z)
      for (int zp = 0; zp < k; ++zp) pair(z, zp) -= w * mu_i[z] * mu_j[zp];
  }
  for (int z = 0; z < k; ++z)
    for (int zp = 0; zp < k; ++zp) st.existence[bundle_index(k, z, zp)][1] = pair(z, zp);
  return st;
}

BundlePosteriors update_bundles(const SparseView& view, const VertexBeliefs& beliefs, const ModelConfig& cfg) {
  return posteriors_from_stats(expected_stats(view, beliefs, cfg), cfg, cfg.alpha, 1.0 - cfg.alpha);
}

BeliefSums BeliefSums::compute(const SparseView& view, const VertexBeliefs& beliefs) {
  const int k = beliefs.k();
  BeliefSums s;
  s.plain.assign(k, 0.0);
  s.out_deg.assign(k, 0.0);
  s.in_deg.assign(k, 0.0);
  const auto& dout = view.out_degree();
  const auto& din = view.in_degree();
  for (VertexId i = 0; i < beliefs.num_vertices(); ++i) {
    const auto mu = beliefs.row(i);
    for (int z = 0; z < k; ++z) {
      s.plain[z] += mu[z];
      s.out_deg[z] += dout[i] * mu[z];
      s.in_deg[z] += din[i] * mu[z];
    }
  }
  return s;
}

void BeliefSums::replace_row(const SparseView& view, VertexId i, std::span<const double> old_row,
                             std::span<const double> new_row) {
  const double dout = view.out_degree()[i];
  const double din = view.in_degree()[i];
  for (std::size_t z = 0; z < plain.size(); ++z) {
    const double d = new_row[z] - old_row[z];
    plain[z] += d;
    out_deg[z] += dout * d;
    in_deg[z] += din * d;
  }
}

void belief_exponent(const SparseView& view, const BundlePosteriors& posteriors, const ModelConfig& cfg,
                     const VertexBeliefs& beliefs, const BeliefSums& sums, VertexId i, std::span<double> out) {
  ExponentScratch scratch(beliefs.k(), dimension(cfg.weight_family));
  compute_exponent(view, posteriors, cfg, beliefs, sums, i, scratch, out);
}

std::vector<double> belief_exponent(const SparseView& view, const BundlePosteriors& posteriors,
                                    const ModelConfig& cfg, const VertexBeliefs& beliefs, VertexId i) {
  std::vector<double> out(beliefs.k());
  belief_exponent(view, posteriors, cfg, beliefs, BeliefSums::compute(view, beliefs), i, out);
  return out;
}

InnerReport update_beliefs(const SparseView& view, const BundlePosteriors& posteriors, const ModelConfig& cfg,
                           VertexBeliefs& beliefs, double tol, int max_sweeps) {
  const int k = beliefs.k();
  ExponentScratch scratch(k, dimension(cfg.weight_family));
  std::vector<double> exponent(k), fresh(k);
  InnerReport report;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    // Rebuilt every sweep so incremental updates cannot drift.
    BeliefSums sums = BeliefSums::compute(view, beliefs);
    double max_change = 0.0;
    for (VertexId i = 0; i < beliefs.num_vertices(); ++i) {
      compute_exponent(view, posteriors, cfg, beliefs, sums, i, scratch, exponent);
      const double top = *std::max_element(exponent.begin(), exponent.end());
      double total = 0.0;
      for (int z = 0; z < k; ++z) total += (fresh[z] = std::max(std::exp(exponent[z] - top), kRowFloor));
      for (int z = 0; z < k; ++z) fresh[z] /= total;

      auto row = beliefs.row(i);
      for (int z = 0; z < k; ++z) max_change = std::max(max_change, std::abs(fresh[z] - row[z]));
      sums.replace_row(view, i, row, fresh);
      std::copy(fresh.begin(), fresh.end(), row.begin());
    }
    report.sweeps = sweep + 1;
    report.max_change = max_change;
    if (max_change < tol) {
      report.converged = true;
      break;
    }
  }
  return report;
}

double elbo_from_stats(const BundleStats& stats, const VertexBeliefs& beliefs, const BundlePosteriors& post,
                       const ModelConfig& cfg) {
  return bundle_term(stats.existence, cfg.alpha, post.prior_existence, post.tau_existence, post.eta_existence) +
         bundle_term(stats.weight, 1.0 - cfg.alpha, post.prior_weight, post.tau_weight, post.eta_weight) +
         label_prior_term(beliefs, cfg.mu0);
}

double elbo(const SparseView& view, const VertexBeliefs& beliefs, const BundlePosteriors& posteriors,
            const ModelConfig& cfg) {
  return elbo_from_stats(expected_stats(view, beliefs, cfg), beliefs, posteriors, cfg);
}

void validate_weights(const ObservedNetwork& net, const ModelConfig& cfg) {
  for (const auto& e : net.weighted_edges()) {
    try {
      suff_stats(cfg.weight_family, e.weight);
    } catch (const InputError& err) {
      throw InputError("edge (" + net.names()[e.src] + ", " + net.names()[e.dst] + ") weight " +
                       format_double(e.weight) + ": " + err.what());
    }
  }
}

void attach_prediction_aids(const SparseView& view, FitResult& result) {
  const int k = result.beliefs.k();
  result.out_degree = view.out_degree();
  result.in_degree = view.in_degree();
  const auto labels = result.beliefs.map_labels();
  Matrix sum(k, k), count(k, k);
  double total = 0.0;
  for (const auto& e : view.weighted_edges()) {
    sum(labels[e.src], labels[e.dst]) += e.weight;
    count(labels[e.src], labels[e.dst]) += 1.0;
    total += e.weight;
  }
  result.bundle_weight_mean = Matrix(k, k, std::numeric_limits<double>::quiet_NaN());
  for (int z = 0; z < k; ++z)
    for (int zp = 0; zp < k; ++zp)
      if (count(z, zp) > 0.0) result.bundle_weight_mean(z, zp) = sum(z, zp) / count(z, zp);
  result.global_weight_mean =
      view.weighted_edges().empty() ? 0.0 : total / static_cast<double>(view.weighted_edges().size());
}

FitResult fit_vb(const SparseView& view, const ModelConfig& cfg, VertexBeliefs init, const StoppingRule& stop) {
  FitResult result;
  result.engine = Engine::VariationalBayes;
  result.config = cfg;
  result.beliefs = std::move(init);
  if (result.beliefs.num_vertices() != view.num_vertices() || result.beliefs.k() != cfg.k) {
    throw ContractError("initial beliefs do not match the network and K");
  }

  BundleStats stats = expected_stats(view, result.beliefs, cfg);
  BundlePosteriors post = posteriors_from_stats(stats, cfg, cfg.alpha, 1.0 - cfg.alpha);
  double g = elbo_from_stats(stats, result.beliefs, post, cfg);
  result.elbo_trace.push_back(g);

  for (int it = 1; it <= stop.max_outer; ++it) {
    update_beliefs(view, post, cfg, result.beliefs, stop.inner_tol, stop.max_inner);
    stats = expected_stats(view, result.beliefs, cfg);
    post = posteriors_from_stats(stats, cfg, cfg.alpha, 1.0 - cfg.alpha);
    const double next = elbo_from_stats(stats, result.beliefs, post, cfg);
    result.elbo_trace.push_back(next);
    result.iterations = it;
    const bool done = std::abs(next - g) <= stop.outer_tol * std::max(1.0, std::abs(next));
    g = next;
    if (done) {
      result.converged = true;
      break;
    }
  }
  result.elbo = g;
  result.posteriors = std::move(post);
  result.predictive = posteriors_from_stats(stats, cfg, 1.0, 1.0);
  attach_prediction_aids(view, result);
  return result;
}

}  // namespace wsbm

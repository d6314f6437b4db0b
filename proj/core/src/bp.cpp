#include "wsbm/bp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wsbm/error.hpp"
#include "wsbm/vb.hpp"

namespace wsbm {
namespace {

constexpr double kFloor = 1e-300;

double log_sum_exp(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

// Softmax of `logits` into `out` with the row floor applied. Returns false if
// the input was degenerate (no finite maximum).
bool normalize_logits(std::span<const double> logits, std::span<double> out) {
  const double top = *std::max_element(logits.begin(), logits.end());
  if (!std::isfinite(top)) return false;
  double total = 0.0;
  for (std::size_t z = 0; z < logits.size(); ++z) total += (out[z] = std::max(std::exp(logits[z] - top), kFloor));
  for (double& x : out) x /= total;
  return true;
}

double xlogy_ratio(double p, double q) { return p > 0.0 ? p * std::log(p / q) : 0.0; }

}  // namespace

// ---------------------------------------------------------------------------
// Graph

BpGraph BpGraph::from_pairs(std::size_t n, std::vector<VertexPair> pairs, bool dense) {
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  BpGraph g;
  g.dense_ = dense;
  g.off_.assign(n + 1, 0);
  for (const auto& p : pairs) {
    ++g.off_[p.src + 1];
    ++g.off_[p.dst + 1];
  }
  for (std::size_t i = 0; i < n; ++i) g.off_[i + 1] += g.off_[i];
  const std::size_t slots = g.off_[n];
  g.nbr_.resize(slots);
  g.pair_.resize(slots);
  g.rev_.resize(slots);
  std::vector<std::size_t> fill(g.off_.begin(), g.off_.end() - 1);
  // Pairs sorted by (src, dst) leave each vertex's neighbors in ascending order.
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [a, b] = pairs[p];
    const std::size_t sa = fill[a]++;
    const std::size_t sb = fill[b]++;
    g.nbr_[sa] = b;
    g.nbr_[sb] = a;
    g.pair_[sa] = g.pair_[sb] = p;
    g.rev_[sa] = sb;
    g.rev_[sb] = sa;
  }
  g.pairs_ = std::move(pairs);
  return g;
}

BpGraph BpGraph::sparse(const SparseView& view) {
  std::vector<VertexPair> pairs;
  pairs.reserve(view.weighted_edges().size());
  for (const auto& e : view.weighted_edges()) {
    if (e.src == e.dst) throw UnsupportedConfiguration("belief propagation does not model self-loops");
    pairs.push_back({std::min(e.src, e.dst), std::max(e.src, e.dst)});
  }
  return from_pairs(view.num_vertices(), std::move(pairs), false);
}

BpGraph BpGraph::dense(const SparseView& view) {
  const auto n = static_cast<VertexId>(view.num_vertices());
  std::vector<VertexPair> pairs;
  for (VertexId a = 0; a < n; ++a) {
    for (VertexId b = a + 1; b < n; ++b) {
      if (view.has_missing(a, b) && view.has_missing(b, a)) continue;
      pairs.push_back({a, b});
    }
  }
  return from_pairs(n, std::move(pairs), true);
}

std::optional<std::size_t> BpGraph::find_slot(VertexId i, VertexId j) const noexcept {
  const auto first = nbr_.begin() + static_cast<std::ptrdiff_t>(off_[i]);
  const auto last = nbr_.begin() + static_cast<std::ptrdiff_t>(off_[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<std::size_t>(j));
  if (it == last || *it != j) return std::nullopt;
  return static_cast<std::size_t>(it - nbr_.begin());
}

// ---------------------------------------------------------------------------
// Evidence

void check_bp_supported(const ModelConfig& config, bool self_loops) {
  if (config.existence_family != FamilyKind::BernoulliExistence) {
    throw UnsupportedConfiguration("belief propagation requires Bernoulli existence (no degree correction)");
  }
  if (self_loops) throw UnsupportedConfiguration("belief propagation does not model self-loops");
}

EdgeEvidence compute_evidence(const BpGraph& graph, const SparseView& view, const BundlePosteriors& post,
                              const ModelConfig& cfg) {
  check_bp_supported(cfg, view.self_loops());
  const int k = cfg.k;
  const double alpha = cfg.alpha;
  EdgeEvidence ev;
  ev.k = k;
  ev.log_non_edge = Matrix(k, k);
  for (int z = 0; z < k; ++z)
    for (int zp = 0; zp < k; ++zp)
      ev.log_non_edge(z, zp) = alpha > 0.0 ? alpha * post.eta_existence[bundle_index(k, z, zp)][1] : 0.0;

  // One direction i -> j, added into m(z_i, z_j) through `put`.
  auto direction = [&](VertexId i, VertexId j, auto&& put) {
    if (const auto w = view.edge_weight(i, j)) {
      const StatVector t = suff_stats(cfg.weight_family, *w);
      for (int z = 0; z < k; ++z) {
        for (int zp = 0; zp < k; ++zp) {
          const int r = bundle_index(k, z, zp);
          double v = 0.0;
          if (alpha > 0.0) v += alpha * (post.eta_existence[r][0] + post.eta_existence[r][1]);
          if (alpha < 1.0) v += (1.0 - alpha) * t.dot(post.eta_weight[r]);
          put(z, zp, v);
        }
      }
    } else if (!view.has_missing(i, j)) {
      for (int z = 0; z < k; ++z)
        for (int zp = 0; zp < k; ++zp) put(z, zp, ev.log_non_edge(z, zp));
    }
  };

  ev.log_pair.assign(graph.num_pairs(), Matrix(k, k));
  for (std::size_t p = 0; p < graph.num_pairs(); ++p) {
    const auto [a, b] = graph.pairs()[p];
    Matrix& m = ev.log_pair[p];
    direction(a, b, [&](int za, int zb, double v) { m(za, zb) += v; });
    direction(b, a, [&](int zb, int za, double v) { m(za, zb) += v; });
  }
  return ev;
}

// ---------------------------------------------------------------------------
// Messages

MessageSet MessageSet::uniform(const BpGraph& graph, int k) {
  MessageSet m;
  m.k = k;
  m.values.assign(graph.num_slots() * k, 1.0 / k);
  return m;
}

MessageSet MessageSet::perturbed(const BpGraph& graph, int k, double noise, Rng& rng) {
  MessageSet m = uniform(graph, k);
  std::vector<double> d(k);
  for (std::size_t s = 0; s < graph.num_slots(); ++s) {
    double total = 0.0;
    for (int z = 0; z < k; ++z) total += (d[z] = -std::log(uniform_open(rng)));
    auto row = m.slot(s);
    double norm = 0.0;
    for (int z = 0; z < k; ++z) norm += (row[z] = 1.0 / k + noise * d[z] / total);
    for (int z = 0; z < k; ++z) row[z] /= norm;
  }
  return m;
}

void incoming_log_factor(const BpGraph& graph, const EdgeEvidence& ev, const MessageSet& messages, VertexId i,
                         std::size_t s, std::span<double> out) {
  const int k = ev.k;
  const auto in = messages.slot(graph.reverse(s));
  double terms[64];
  std::vector<double> big;
  double* buf = terms;
  if (k > 64) {
    big.resize(k);
    buf = big.data();
  }
  for (int z = 0; z < k; ++z) {
    for (int zp = 0; zp < k; ++zp) buf[zp] = ev.at(graph, s, i, z, zp) + std::log(std::max(in[zp], kFloor));
    out[z] = log_sum_exp({buf, static_cast<std::size_t>(k)});
  }
}

Matrix non_edge_field(const BpGraph& graph, const SparseView& view, const EdgeEvidence& ev,
                      const VertexBeliefs& beliefs, double alpha) {
  const std::size_t n = beliefs.num_vertices();
  const int k = ev.k;
  Matrix field(n, k);
  if (graph.is_dense() || alpha <= 0.0) return field;

  // a(j, z): vertex j as the target of a non-edge from group z; b(j, z): as its source.
  Matrix a(n, k), b(n, k);
  std::vector<double> buf(k), logmu(k);
  std::vector<double> sum_a(k, 0.0), sum_b(k, 0.0);
  for (VertexId j = 0; j < n; ++j) {
    const auto mu = beliefs.row(j);
    for (int z = 0; z < k; ++z) logmu[z] = std::log(std::max(mu[z], kFloor));
    for (int z = 0; z < k; ++z) {
      for (int zp = 0; zp < k; ++zp) buf[zp] = ev.log_non_edge(z, zp) + logmu[zp];
      a(j, z) = log_sum_exp(buf);
      for (int zp = 0; zp < k; ++zp) buf[zp] = ev.log_non_edge(zp, z) + logmu[zp];
      b(j, z) = log_sum_exp(buf);
      sum_a[z] += a(j, z);
      sum_b[z] += b(j, z);
    }
  }
  for (VertexId i = 0; i < n; ++i) {
    auto f = field.row(i);
    for (int z = 0; z < k; ++z) f[z] = sum_a[z] - a(i, z) + sum_b[z] - b(i, z);
    for (std::size_t s = graph.slot_begin(i); s < graph.slot_end(i); ++s) {
      const VertexId j = graph.neighbor(s);
      for (int z = 0; z < k; ++z) f[z] -= a(j, z) + b(j, z);
    }
    for (VertexId j : view.out_missing(i)) {
      if (graph.find_slot(i, j)) continue;
      for (int z = 0; z < k; ++z) f[z] -= a(j, z);
    }
    for (VertexId j : view.in_missing(i)) {
      if (graph.find_slot(i, j)) continue;
      for (int z = 0; z < k; ++z) f[z] -= b(j, z);
    }
  }
  return field;
}

SweepReport sweep_messages(const BpGraph& graph, const EdgeEvidence& ev, const Matrix& field,
                           std::span<const double> mu0, MessageSet& messages, double damping) {
  const int k = ev.k;
  const MessageSet old = messages;
  SweepReport report;
  std::vector<double> total(k), h, cavity(k), fresh(k);
  for (VertexId i = 0; i < graph.num_vertices(); ++i) {
    const std::size_t first = graph.slot_begin(i);
    const std::size_t deg = graph.degree(i);
    if (deg == 0) continue;
    h.resize(deg * k);
    for (int z = 0; z < k; ++z) total[z] = std::log(mu0[z]) + field(i, z);
    for (std::size_t t = 0; t < deg; ++t) {
      std::span<double> hs(h.data() + t * k, k);
      incoming_log_factor(graph, ev, old, i, first + t, hs);
      for (int z = 0; z < k; ++z) total[z] += hs[z];
    }
    for (std::size_t t = 0; t < deg; ++t) {
      for (int z = 0; z < k; ++z) cavity[z] = total[z] - h[t * k + z];
      if (!normalize_logits(cavity, fresh)) {
        std::fill(fresh.begin(), fresh.end(), 1.0 / k);
        ++report.resets;
      }
      auto row = messages.slot(first + t);
      double norm = 0.0;
      for (int z = 0; z < k; ++z) norm += (fresh[z] = (1.0 - damping) * fresh[z] + damping * row[z]);
      for (int z = 0; z < k; ++z) {
        const double v = fresh[z] / norm;
        report.max_change = std::max(report.max_change, std::abs(v - row[z]));
        row[z] = v;
      }
    }
  }
  return report;
}

VertexBeliefs compute_vertex_beliefs(const BpGraph& graph, const EdgeEvidence& ev, const Matrix& field,
                                     std::span<const double> mu0, const MessageSet& messages) {
  const int k = ev.k;
  VertexBeliefs beliefs(graph.num_vertices(), k);
  std::vector<double> total(k), hs(k);
  for (VertexId i = 0; i < graph.num_vertices(); ++i) {
    for (int z = 0; z < k; ++z) total[z] = std::log(mu0[z]) + field(i, z);
    for (std::size_t s = graph.slot_begin(i); s < graph.slot_end(i); ++s) {
      incoming_log_factor(graph, ev, messages, i, s, hs);
      for (int z = 0; z < k; ++z) total[z] += hs[z];
    }
    auto row = beliefs.row(i);
    if (!normalize_logits(total, row)) std::fill(row.begin(), row.end(), 1.0 / k);
  }
  return beliefs;
}

std::vector<Matrix> compute_pairwise(const BpGraph& graph, const EdgeEvidence& ev, const MessageSet& messages) {
  const int k = ev.k;
  std::vector<Matrix> out(graph.num_pairs(), Matrix(k, k));
  std::vector<double> logits(static_cast<std::size_t>(k) * k), probs(logits.size());
  for (VertexId a = 0; a < graph.num_vertices(); ++a) {
    for (std::size_t s = graph.slot_begin(a); s < graph.slot_end(a); ++s) {
      if (graph.neighbor(s) < a) continue;
      const std::size_t p = graph.pair_of(s);
      const auto ma = messages.slot(s);
      const auto mb = messages.slot(graph.reverse(s));
      for (int za = 0; za < k; ++za)
        for (int zb = 0; zb < k; ++zb)
          logits[za * k + zb] = ev.log_pair[p](za, zb) + std::log(std::max(ma[za], kFloor)) +
                                std::log(std::max(mb[zb], kFloor));
      if (!normalize_logits(logits, probs)) std::fill(probs.begin(), probs.end(), 1.0 / (k * k));
      std::copy(probs.begin(), probs.end(), out[p].data().begin());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics and objective

BundleStats bp_stats(const BpGraph& graph, const SparseView& view, const VertexBeliefs& beliefs,
                     const std::vector<Matrix>& pairwise, const ModelConfig& cfg) {
  const int k = cfg.k;
  const std::size_t dw = dimension(cfg.weight_family);
  BundleStats st = expected_stats(view, beliefs, cfg);
  for (auto& e : st.existence) e[0] = 0.0;
  for (auto& w : st.weight) w = StatVector(dw);

  for (const auto& e : view.weighted_edges()) {
    const auto slot = graph.find_slot(e.src, e.dst);
    if (!slot) throw ContractError("weighted edge missing from the message graph");
    const Matrix& pw = pairwise[graph.pair_of(*slot)];
    const bool forward = e.src < e.dst;
    const StatVector t = suff_stats(cfg.weight_family, e.weight);
    for (int z = 0; z < k; ++z) {
      for (int zp = 0; zp < k; ++zp) {
        const double q = forward ? pw(z, zp) : pw(zp, z);
        const int r = bundle_index(k, z, zp);
        st.existence[r][0] += q;
        for (std::size_t c = 0; c < dw; ++c) st.weight[r][c] += q * t[c];
      }
    }
  }

  // Replace the factorized term of every observed direction of a joined pair.
  for (std::size_t p = 0; p < graph.num_pairs(); ++p) {
    const auto [a, b] = graph.pairs()[p];
    const bool ab = !view.has_missing(a, b);
    const bool ba = !view.has_missing(b, a);
    const auto mua = beliefs.row(a);
    const auto mub = beliefs.row(b);
    for (int za = 0; za < k; ++za) {
      for (int zb = 0; zb < k; ++zb) {
        const double d = pairwise[p](za, zb) - mua[za] * mub[zb];
        if (ab) st.existence[bundle_index(k, za, zb)][1] += d;
        if (ba) st.existence[bundle_index(k, zb, za)][1] += d;
      }
    }
  }
  return st;
}

double bethe_elbo(const BpGraph& graph, const BundleStats& stats, const VertexBeliefs& beliefs,
                  const std::vector<Matrix>& pairwise, const BundlePosteriors& post, const ModelConfig& cfg) {
  const int k = cfg.k;
  double g = bundle_term(stats.existence, cfg.alpha, post.prior_existence, post.tau_existence, post.eta_existence) +
             bundle_term(stats.weight, 1.0 - cfg.alpha, post.prior_weight, post.tau_weight, post.eta_weight);
  for (VertexId i = 0; i < beliefs.num_vertices(); ++i) {
    const double c = static_cast<double>(graph.degree(i)) - 1.0;
    const auto mu = beliefs.row(i);
    double kl = 0.0;
    for (int z = 0; z < k; ++z) kl += xlogy_ratio(mu[z], cfg.mu0[z]);
    g += c * kl;
  }
  for (std::size_t p = 0; p < graph.num_pairs(); ++p) {
    for (int za = 0; za < k; ++za)
      for (int zb = 0; zb < k; ++zb) g -= xlogy_ratio(pairwise[p](za, zb), cfg.mu0[za] * cfg.mu0[zb]);
  }
  return g;
}

FitResult fit_bp(const SparseView& view, const ModelConfig& cfg, VertexBeliefs init, Rng& rng,
                 const StoppingRule& stop, const BpOptions& options) {
  check_bp_supported(cfg, view.self_loops());
  if (init.num_vertices() != view.num_vertices() || init.k() != cfg.k) {
    throw ContractError("initial beliefs do not match the network and K");
  }
  const BpGraph graph = options.dense_reference ? BpGraph::dense(view) : BpGraph::sparse(view);

  FitResult result;
  result.engine = Engine::BeliefPropagation;
  result.config = cfg;
  result.beliefs = std::move(init);
  MessageSet messages = MessageSet::perturbed(graph, cfg.k, 0.01, rng);

  BundleStats stats = expected_stats(view, result.beliefs, cfg);
  BundlePosteriors post = posteriors_from_stats(stats, cfg, cfg.alpha, 1.0 - cfg.alpha);
  EdgeEvidence ev = compute_evidence(graph, view, post, cfg);
  Matrix field = non_edge_field(graph, view, ev, result.beliefs, cfg.alpha);
  double g = std::numeric_limits<double>::quiet_NaN();

  for (int it = 1; it <= stop.max_outer; ++it) {
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      const SweepReport rep = sweep_messages(graph, ev, field, cfg.mu0, messages, options.damping);
      VertexBeliefs fresh = compute_vertex_beliefs(graph, ev, field, cfg.mu0, messages);
      double change = rep.max_change;
      for (std::size_t x = 0; x < fresh.matrix().data().size(); ++x) {
        change = std::max(change, std::abs(fresh.matrix().data()[x] - result.beliefs.matrix().data()[x]));
      }
      result.beliefs = std::move(fresh);
      field = non_edge_field(graph, view, ev, result.beliefs, cfg.alpha);
      if (change < options.message_tol) break;
    }
    const auto pairwise = compute_pairwise(graph, ev, messages);
    stats = bp_stats(graph, view, result.beliefs, pairwise, cfg);
    post = posteriors_from_stats(stats, cfg, cfg.alpha, 1.0 - cfg.alpha);
    const double next = bethe_elbo(graph, stats, result.beliefs, pairwise, post, cfg);
    result.elbo_trace.push_back(next);
    result.iterations = it;
    const bool done = std::isfinite(g) && std::abs(next - g) <= stop.outer_tol * std::max(1.0, std::abs(next));
    g = next;
    if (done) {
      result.converged = true;
      break;
    }
    ev = compute_evidence(graph, view, post, cfg);
    field = non_edge_field(graph, view, ev, result.beliefs, cfg.alpha);
  }
  result.elbo = g;
  result.posteriors = std::move(post);
  result.predictive = posteriors_from_stats(stats, cfg, 1.0, 1.0);
  attach_prediction_aids(view, result);
  return result;
}

}  // namespace wsbm

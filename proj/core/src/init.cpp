#include "wsbm/init.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wsbm/error.hpp"

namespace wsbm {
namespace {

// Sparse connection profiles over 4n coordinates: (out|in, neighbor, existence|weight).
class Profiles {
 public:
  Profiles(const SparseView& view, double alpha) : view_(view), n_(view.num_vertices()) {
    exist_ = std::sqrt(alpha);
    scale_ = std::sqrt(1.0 - alpha);
    const auto edges = view.weighted_edges();
    double mean = 0.0, sq = 0.0;
    for (const auto& e : edges) mean += e.weight;
    if (!edges.empty()) mean /= static_cast<double>(edges.size());
    for (const auto& e : edges) sq += (e.weight - mean) * (e.weight - mean);
    const double sd = edges.empty() ? 0.0 : std::sqrt(sq / static_cast<double>(edges.size()));
    mean_ = mean;
    inv_sd_ = sd > 0.0 ? 1.0 / sd : 1.0;
    norm_.resize(n_);
    for (VertexId i = 0; i < n_; ++i) {
      double s = 0.0;
      visit(i, [&](std::size_t, double v) { s += v * v; });
      norm_[i] = s;
    }
  }

  std::size_t dims() const noexcept { return 4 * n_; }
  double norm(VertexId i) const noexcept { return norm_[i]; }

  template <class F>
  void visit(VertexId i, F&& f) const {
    for (const auto& a : view_.out_edges(i)) emit(a.other, a.weight, f);
    for (const auto& a : view_.in_edges(i)) emit(n_ + a.other, a.weight, f);
  }

 private:
  template <class F>
  void emit(std::size_t slot, double w, F& f) const {
    f(2 * slot, exist_);
    f(2 * slot + 1, scale_ * (w - mean_) * inv_sd_);
  }

  const SparseView& view_;
  std::size_t n_;
  double exist_ = 0.0, scale_ = 0.0, mean_ = 0.0, inv_sd_ = 1.0;
  std::vector<double> norm_;
};

std::size_t pick_uniform(std::size_t n, Rng& rng) { return static_cast<std::size_t>(uniform_index(rng, n)); }

}  // namespace

std::string_view to_string(InitKind kind) noexcept {
  return kind == InitKind::Dirichlet ? "dirichlet" : "kmeans";
}

InitKind parse_init_kind(std::string_view text) {
  if (text == "kmeans") return InitKind::ProfileKMeans;
  if (text == "dirichlet") return InitKind::Dirichlet;
  throw ContractError("unknown initialization '" + std::string(text) + "' (expected kmeans or dirichlet)");
}

std::vector<int> profile_kmeans(const SparseView& view, int k, double alpha, Rng& rng, int lloyd_steps) {
  if (k < 1) throw ContractError("K must be at least 1");
  const std::size_t n = view.num_vertices();
  std::vector<int> labels(n, 0);
  if (n == 0 || k == 1) return labels;

  const Profiles prof(view, alpha);
  const std::size_t d = prof.dims();
  const auto kk = static_cast<std::size_t>(k);
  Matrix centers(kk, d, 0.0);
  std::vector<double> cnorm(kk, 0.0);

  auto set_center_to_vertex = [&](std::size_t c, VertexId v) {
    auto row = centers.row(c);
    std::fill(row.begin(), row.end(), 0.0);
    prof.visit(v, [&](std::size_t x, double val) { row[x] += val; });
    cnorm[c] = prof.norm(v);
  };
  auto distance = [&](VertexId i, std::size_t c) {
    const auto row = centers.row(c);
    double dot = 0.0;
    prof.visit(i, [&](std::size_t x, double val) { dot += val * row[x]; });
    return std::max(0.0, prof.norm(i) - 2.0 * dot + cnorm[c]);
  };

  // k-means++ seeding: each new center is a vertex drawn with probability
  // proportional to its squared distance from the nearest chosen center.
  set_center_to_vertex(0, static_cast<VertexId>(pick_uniform(n, rng)));
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < kk; ++c) {
    double total = 0.0;
    for (VertexId i = 0; i < n; ++i) total += (nearest[i] = std::min(nearest[i], distance(i, c - 1)));
    std::size_t pick = n - 1;
    if (total > 0.0) {
      double r = uniform_open(rng) * total;
      for (VertexId i = 0; i < n; ++i) {
        r -= nearest[i];
        if (r <= 0.0 && nearest[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = pick_uniform(n, rng);
    }
    set_center_to_vertex(c, static_cast<VertexId>(pick));
  }

  auto assign = [&] {
    bool changed = false;
    for (VertexId i = 0; i < n; ++i) {
      int best = 0;
      double best_d = distance(i, 0);
      for (std::size_t c = 1; c < kk; ++c) {
        const double dc = distance(i, c);
        if (dc < best_d) {
          best_d = dc;
          best = static_cast<int>(c);
        }
      }
      changed |= labels[i] != best;
      labels[i] = best;
    }
    return changed;
  };

  assign();
  for (int step = 0; step < lloyd_steps; ++step) {
    std::vector<std::size_t> count(kk, 0);
    for (int z : labels) ++count[static_cast<std::size_t>(z)];
    for (std::size_t c = 0; c < kk; ++c) {
      // An emptied cluster keeps its previous center.
      if (count[c] == 0) continue;
      auto row = centers.row(c);
      std::fill(row.begin(), row.end(), 0.0);
    }
    for (VertexId i = 0; i < n; ++i) {
      auto row = centers.row(static_cast<std::size_t>(labels[i]));
      prof.visit(i, [&](std::size_t x, double val) { row[x] += val; });
    }
    for (std::size_t c = 0; c < kk; ++c) {
      if (count[c] == 0) continue;
      auto row = centers.row(c);
      double s = 0.0;
      for (auto& x : row) {
        x /= static_cast<double>(count[c]);
        s += x * x;
      }
      cnorm[c] = s;
    }
    if (!assign()) break;
  }
  return labels;
}

VertexBeliefs initial_beliefs(const SparseView& view, const ModelConfig& resolved, InitKind kind, Rng& rng) {
  if (kind == InitKind::Dirichlet) return VertexBeliefs::random(view.num_vertices(), resolved.k, rng);
  double mix = resolved.alpha;
  if (mix > 0.0 && mix < 1.0) {
    // Structure may live in only one component, and noise in the other would
    // blur the profiles, so each restart draws its view.
    constexpr double views[] = {-1.0, 1.0, 0.0};
    const double v = views[uniform_index(rng, 3)];
    if (v >= 0.0) mix = v;
  }
  return VertexBeliefs::one_hot(profile_kmeans(view, resolved.k, mix, rng), resolved.k);
}

}  // namespace wsbm

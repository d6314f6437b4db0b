#include "wsbm/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <unordered_set>

#include "wsbm/error.hpp"
#include "wsbm/rng.hpp"

namespace wsbm {
namespace {

bool square(const Matrix& m, int k) {
  return m.rows() == static_cast<std::size_t>(k) && m.cols() == static_cast<std::size_t>(k);
}

// Inverse-transform Poisson draw; fine for the moderate means used here.
double poisson_draw(double mean, Rng& rng) {
  const double u = uniform_open(rng);
  double p = std::exp(-mean);
  double cdf = p;
  double x = 0.0;
  while (u > cdf && p > 0.0) {
    x += 1.0;
    p *= mean / x;
    cdf += p;
  }
  return x;
}

double weight_draw(const GeneratorSpec& spec, int a, int b, Rng& rng) {
  const double mean = spec.weight_mean(a, b);
  switch (spec.weight_family) {
    case FamilyKind::NormalWeight:
      return mean + std::sqrt(spec.weight_variance(a, b)) * standard_normal(rng);
    case FamilyKind::PoissonWeight:
      return poisson_draw(mean, rng);
    case FamilyKind::ExponentialWeight:
      return -mean * std::log(uniform_open(rng));
    default:
      throw ContractError("not a weight family");
  }
}

}  // namespace

void GeneratorSpec::validate() const {
  if (k < 1) throw ContractError("K must be at least 1");
  for (int z : labels)
    if (z < 0 || z >= k) throw ContractError("label outside [0, K)");
  if (!square(edge_prob, k) || !square(weight_mean, k)) throw ContractError("bundle parameter matrices must be K x K");
  for (double p : edge_prob.data())
    if (!(p >= 0.0 && p <= 1.0)) throw ContractError("edge probability outside [0, 1]");
  if (!propensity.empty()) {
    if (propensity.size() != labels.size()) throw ContractError("one propensity per vertex is required");
    for (double p : propensity)
      if (!(p >= 0.0) || !std::isfinite(p)) throw ContractError("propensities must be finite and nonnegative");
  }
  if (!is_weight_family(weight_family)) throw ContractError("weight_family is not a weight family");
  if (weight_family == FamilyKind::NormalWeight) {
    if (!square(weight_variance, k)) throw ContractError("weight variance matrix must be K x K");
    for (double v : weight_variance.data())
      if (!(v > 0.0)) throw ContractError("Normal variances must be positive");
  } else {
    for (double m : weight_mean.data())
      if (!(m > 0.0)) throw ContractError("Poisson and Exponential means must be positive");
  }
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0)) throw ContractError("missing fraction outside [0, 1)");
}

std::vector<int> labels_from_sizes(std::span<const int> sizes) {
  std::vector<int> labels;
  for (std::size_t g = 0; g < sizes.size(); ++g) labels.insert(labels.end(), sizes[g], static_cast<int>(g));
  return labels;
}

Sample sample(const GeneratorSpec& spec) {
  spec.validate();
  const auto n = static_cast<VertexId>(spec.labels.size());
  Rng rng = make_rng(spec.seed, "sample");
  std::vector<WeightedEdge> edges;
  for (VertexId i = 0; i < n; ++i) {
    const VertexId first = spec.directed ? 0 : i;
    for (VertexId j = first; j < n; ++j) {
      if (i == j && !spec.self_loops) continue;
      const int a = spec.labels[i];
      const int b = spec.labels[j];
      double p = spec.edge_prob(a, b);
      if (!spec.propensity.empty()) p = std::min(1.0, p * spec.propensity[i] * spec.propensity[j]);
      if (uniform_open(rng) >= p) continue;
      edges.push_back({i, j, weight_draw(spec, a, b, rng)});
    }
  }
  Sample out;
  out.labels = spec.labels;
  out.network = ObservedNetwork::build(n, std::move(edges), {}, {spec.directed, spec.self_loops});
  if (spec.missing_fraction > 0.0) {
    out.network = holdout_split(out.network, spec.missing_fraction, derive_seed(spec.seed, "missing")).train;
  }
  return out;
}

Sample fig2_toy(int group_size, double noise_sd, std::uint64_t seed) {
  constexpr int k = 4;
  if (group_size < 1) throw ContractError("group size must be positive");
  if (!(noise_sd >= 0.0)) throw ContractError("noise_sd must be nonnegative");
  const std::vector<int> sizes(k, group_size);
  const auto labels = labels_from_sizes(sizes);
  const auto n = static_cast<VertexId>(labels.size());
  Rng rng = make_rng(seed, "fig2");
  std::vector<WeightedEdge> edges;
  for (VertexId i = 0; i < n; ++i) {
    for (VertexId j = i + 1; j < n; ++j) {
      const double level = std::min(labels[i], labels[j]) + 1.0;
      edges.push_back({i, j, level + noise_sd * standard_normal(rng)});
    }
  }
  return {ObservedNetwork::build(n, std::move(edges), {}, {false, false}), labels};
}

Sample fig4_suite(double sigma2, std::uint64_t seed, int groups, int group_size) {
  if (!(sigma2 > 0.0)) throw ContractError("sigma2 must be positive");
  GeneratorSpec spec;
  spec.k = groups;
  spec.labels = labels_from_sizes(std::vector<int>(groups, group_size));
  spec.edge_prob = Matrix(groups, groups, 1.0);
  spec.weight_mean = Matrix(groups, groups, 1.0);
  for (int z = 0; z < groups; ++z) spec.weight_mean(z, z) = -1.0;
  spec.weight_variance = Matrix(groups, groups, sigma2);
  spec.seed = seed;
  return sample(spec);
}

Sample sparse_uniform(std::size_t n, int k, std::size_t edges, double mean_in, double mean_out, double variance,
                      std::uint64_t seed) {
  if (k < 1 || n < 2) throw ContractError("need K >= 1 and at least two vertices");
  if (edges > n * (n - 1)) throw ContractError("more edges requested than ordered pairs");
  if (!(variance > 0.0)) throw ContractError("variance must be positive");
  Sample out;
  out.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.labels[i] = static_cast<int>(i % static_cast<std::size_t>(k));
  Rng rng = make_rng(seed, "sparse");
  auto pick = [n](Rng& r) { return uniform_index(r, n); };
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(edges * 2);
  std::vector<WeightedEdge> list;
  list.reserve(edges);
  const double sd = std::sqrt(variance);
  while (list.size() < edges) {
    const auto i = static_cast<VertexId>(pick(rng));
    const auto j = static_cast<VertexId>(pick(rng));
    if (i == j || !seen.insert(static_cast<std::uint64_t>(i) * n + j).second) continue;
    const double mean = out.labels[i] == out.labels[j] ? mean_in : mean_out;
    list.push_back({i, j, mean + sd * standard_normal(rng)});
  }
  out.network = ObservedNetwork::build(n, std::move(list), {}, {true, false});
  return out;
}

std::optional<Archetype> parse_archetype(std::string_view name) noexcept {
  if (name == "assortative") return Archetype::Assortative;
  if (name == "disassortative") return Archetype::Disassortative;
  if (name == "core-periphery") return Archetype::CorePeriphery;
  if (name == "ordered") return Archetype::Ordered;
  return std::nullopt;
}

GeneratorSpec archetype_spec(Archetype type, int k, int group_size, std::uint64_t seed) {
  constexpr double dense = 0.5;
  constexpr double sparse = 0.05;
  GeneratorSpec spec;
  spec.k = k;
  spec.labels = labels_from_sizes(std::vector<int>(k, group_size));
  spec.edge_prob = Matrix(k, k, sparse);
  spec.weight_mean = Matrix(k, k, -1.0);
  spec.weight_variance = Matrix(k, k, 0.25);
  spec.seed = seed;
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      bool hot = false;
      switch (type) {
        case Archetype::Assortative: hot = a == b; break;
        case Archetype::Disassortative: hot = a != b; break;
        case Archetype::CorePeriphery: hot = a == 0 || b == 0; break;
        case Archetype::Ordered: hot = b == a + 1; break;
      }
      if (hot) {
        spec.edge_prob(a, b) = dense;
        spec.weight_mean(a, b) = 1.0;
      }
    }
  }
  return spec;
}

double nmi(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw ContractError("label sequences differ in length");
  const double n = static_cast<double>(a.size());
  if (a.empty()) return 1.0;
  std::map<int, double> ca, cb;
  std::map<std::pair<int, int>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1.0;
    cb[b[i]] += 1.0;
    joint[{a[i], b[i]}] += 1.0;
  }
  // Terms are summed in sorted order so the result is exactly symmetric and
  // invariant to relabeling.
  auto sorted_sum = [](std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  };
  auto entropy = [&](const std::map<int, double>& c) {
    std::vector<double> terms;
    for (const auto& [_, v] : c) terms.push_back(-v / n * std::log(v / n));
    return sorted_sum(std::move(terms));
  };
  const double ha = entropy(ca);
  const double hb = entropy(cb);
  if (ca.size() == 1 && cb.size() == 1) return 1.0;
  if (ca.size() == 1 || cb.size() == 1) return 0.0;
  std::vector<double> terms;
  for (const auto& [key, v] : joint) terms.push_back(v / n * std::log(v * n / (ca[key.first] * cb[key.second])));
  const double mi = sorted_sum(std::move(terms));
  return std::clamp(2.0 * mi / (ha + hb), 0.0, 1.0);
}

}  // namespace wsbm

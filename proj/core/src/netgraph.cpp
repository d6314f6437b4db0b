#include "wsbm/netgraph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "wsbm/error.hpp"
#include "wsbm/rng.hpp"

namespace wsbm {
namespace {

std::uint64_t key(VertexPair p) { return (std::uint64_t{p.src} << 32) | p.dst; }

bool edge_less(const WeightedEdge& a, const WeightedEdge& b) {
  return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
}

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = std::to_string(i);
  return names;
}

template <class T>
void build_csr(std::size_t n, const std::vector<std::pair<VertexId, T>>& items,
               std::vector<std::size_t>& offsets, std::vector<T>& values) {
  offsets.assign(n + 1, 0);
  for (const auto& [v, _] : items) ++offsets[v + 1];
  for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
  values.resize(items.size());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (const auto& [v, x] : items) values[cursor[v]++] = x;
}

}  // namespace

// ---------------------------------------------------------------------------
// ObservedNetwork

std::uint64_t ObservedNetwork::modeled_pair_count() const noexcept {
  const std::uint64_t n = n_;
  if (flags_.directed) return flags_.self_loops ? n * n : n * (n - (n > 0 ? 1 : 0));
  return flags_.self_loops ? n * (n + 1) / 2 : n * (n - (n > 0 ? 1 : 0)) / 2;
}

VertexPair ObservedNetwork::canonical(VertexPair p) const noexcept {
  if (!flags_.directed && p.src > p.dst) std::swap(p.src, p.dst);
  return p;
}

bool ObservedNetwork::is_modeled(VertexPair p) const noexcept {
  if (p.src >= n_ || p.dst >= n_) return false;
  return flags_.self_loops || p.src != p.dst;
}

std::optional<double> ObservedNetwork::weight_of(VertexPair p) const {
  p = canonical(p);
  const WeightedEdge probe{p.src, p.dst, 0.0};
  auto it = std::lower_bound(weighted_.begin(), weighted_.end(), probe, edge_less);
  if (it != weighted_.end() && it->src == p.src && it->dst == p.dst) return it->weight;
  return std::nullopt;
}

bool ObservedNetwork::is_missing(VertexPair p) const {
  return std::binary_search(missing_.begin(), missing_.end(), canonical(p));
}

ObservedNetwork ObservedNetwork::build(std::size_t n, std::vector<WeightedEdge> weighted,
                                       std::vector<VertexPair> missing, Flags flags,
                                       std::vector<std::string> names) {
  if (n > std::numeric_limits<VertexId>::max()) throw InputError("too many vertices");
  if (names.empty()) names = default_names(n);
  if (names.size() != n) throw InputError("vertex name count does not match n");

  ObservedNetwork net;
  net.n_ = n;
  net.flags_ = flags;
  net.names_ = std::move(names);

  auto check_pair = [&](VertexPair p, const char* what) {
    if (p.src >= n || p.dst >= n) {
      throw InputError(std::string(what) + " (" + std::to_string(p.src) + ", " +
                       std::to_string(p.dst) + ") has a vertex index outside [0, n)");
    }
    if (!flags.self_loops && p.src == p.dst) {
      throw InputError(std::string(what) + " at vertex " + net.names_[p.src] +
                       " is a self-loop but self-loops are not modeled");
    }
  };

  std::unordered_set<std::uint64_t> seen;
  seen.reserve(weighted.size() * 2 + missing.size() * 2);
  for (auto& e : weighted) {
    check_pair({e.src, e.dst}, "weighted edge");
    if (!std::isfinite(e.weight)) {
      throw InputError("weighted edge (" + net.names_[e.src] + ", " + net.names_[e.dst] +
                       ") has a non-finite weight");
    }
    const VertexPair c = net.canonical({e.src, e.dst});
    e.src = c.src;
    e.dst = c.dst;
    if (!seen.insert(key(c)).second) {
      throw InputError("duplicate weighted edge (" + net.names_[c.src] + ", " + net.names_[c.dst] + ")");
    }
  }
  std::unordered_set<std::uint64_t> seen_missing;
  for (auto& p : missing) {
    check_pair(p, "missing pair");
    p = net.canonical(p);
    if (seen.count(key(p))) {
      throw InputError("pair (" + net.names_[p.src] + ", " + net.names_[p.dst] +
                       ") is listed both as a weighted edge and as missing");
    }
    if (!seen_missing.insert(key(p)).second) {
      throw InputError("duplicate missing pair (" + net.names_[p.src] + ", " + net.names_[p.dst] + ")");
    }
  }
  std::sort(weighted.begin(), weighted.end(), edge_less);
  std::sort(missing.begin(), missing.end());
  net.weighted_ = std::move(weighted);
  net.missing_ = std::move(missing);
  net.degrees_ = compute_degrees(net);
  return net;
}

std::vector<WeightedEdge> ObservedNetwork::directed_weighted_edges() const {
  std::vector<WeightedEdge> out(weighted_.begin(), weighted_.end());
  if (!flags_.directed) {
    for (const auto& e : weighted_)
      if (e.src != e.dst) out.push_back({e.dst, e.src, e.weight});
    std::sort(out.begin(), out.end(), edge_less);
  }
  return out;
}

std::vector<VertexPair> ObservedNetwork::directed_missing_pairs() const {
  std::vector<VertexPair> out(missing_.begin(), missing_.end());
  if (!flags_.directed) {
    for (const auto& p : missing_)
      if (p.src != p.dst) out.push_back({p.dst, p.src});
    std::sort(out.begin(), out.end());
  }
  return out;
}

DegreeCache compute_degrees(const ObservedNetwork& net) {
  const std::size_t n = net.num_vertices();
  DegreeCache d;
  d.w_out.assign(n, 0);
  d.w_in.assign(n, 0);
  const std::int64_t pairs_per_vertex =
      static_cast<std::int64_t>(n) - (net.self_loops() || n == 0 ? 0 : 1);
  d.e_out.assign(n, pairs_per_vertex);
  d.e_in.assign(n, pairs_per_vertex);
  for (const auto& e : net.directed_weighted_edges()) {
    ++d.w_out[e.src];
    ++d.w_in[e.dst];
  }
  for (const auto& p : net.directed_missing_pairs()) {
    --d.e_out[p.src];
    --d.e_in[p.dst];
  }
  return d;
}

ObservedNetwork ObservedNetwork::with_missing(std::span<const VertexPair> pairs) const {
  ObservedNetwork out;
  out.n_ = n_;
  out.flags_ = flags_;
  out.names_ = names_;
  out.degrees_ = degrees_;

  std::unordered_set<std::uint64_t> moving;
  moving.reserve(pairs.size() * 2);
  for (VertexPair p : pairs) {
    if (!is_modeled(p)) throw InputError("cannot hide a pair that is not modeled");
    p = canonical(p);
    if (is_missing(p)) throw InputError("pair is already missing");
    if (!moving.insert(key(p)).second) throw InputError("pair listed twice");

    const bool edge = weight_of(p).has_value();
    auto drop = [&](VertexId a, VertexId b) {
      --out.degrees_.e_out[a];
      --out.degrees_.e_in[b];
      if (edge) {
        --out.degrees_.w_out[a];
        --out.degrees_.w_in[b];
      }
    };
    drop(p.src, p.dst);
    if (!flags_.directed && p.src != p.dst) drop(p.dst, p.src);
    out.missing_.push_back(p);
  }
  out.weighted_.reserve(weighted_.size());
  for (const auto& e : weighted_)
    if (!moving.count(key({e.src, e.dst}))) out.weighted_.push_back(e);
  out.missing_.insert(out.missing_.end(), missing_.begin(), missing_.end());
  std::sort(out.missing_.begin(), out.missing_.end());
  return out;
}

// ---------------------------------------------------------------------------
// SparseView

SparseView::SparseView(const ObservedNetwork& net)
    : n_(net.num_vertices()),
      self_loops_(net.self_loops()),
      edges_(net.directed_weighted_edges()),
      missing_(net.directed_missing_pairs()) {
  std::vector<std::pair<VertexId, Arc>> out_items, in_items;
  out_items.reserve(edges_.size());
  in_items.reserve(edges_.size());
  for (const auto& e : edges_) {
    out_items.push_back({e.src, {e.dst, e.weight}});
    in_items.push_back({e.dst, {e.src, e.weight}});
  }
  build_csr(n_, out_items, out_off_, out_arcs_);
  build_csr(n_, in_items, in_off_, in_arcs_);

  std::vector<std::pair<VertexId, VertexId>> m_out_items, m_in_items;
  for (const auto& p : missing_) {
    m_out_items.push_back({p.src, p.dst});
    m_in_items.push_back({p.dst, p.src});
  }
  build_csr(n_, m_out_items, m_out_off_, m_out_);
  build_csr(n_, m_in_items, m_in_off_, m_in_);

  d_out_.assign(n_, 0.0);
  d_in_.assign(n_, 0.0);
  for (VertexId i = 0; i < n_; ++i) {
    d_out_[i] = static_cast<double>(out_edges(i).size());
    d_in_[i] = static_cast<double>(in_edges(i).size());
  }
}

bool SparseView::has_edge(VertexId i, VertexId j) const noexcept {
  auto arcs = out_edges(i);
  auto it = std::lower_bound(arcs.begin(), arcs.end(), j,
                             [](const Arc& a, VertexId v) { return a.other < v; });
  return it != arcs.end() && it->other == j;
}

std::optional<double> SparseView::edge_weight(VertexId i, VertexId j) const noexcept {
  auto arcs = out_edges(i);
  auto it = std::lower_bound(arcs.begin(), arcs.end(), j,
                             [](const Arc& a, VertexId v) { return a.other < v; });
  if (it != arcs.end() && it->other == j) return it->weight;
  return std::nullopt;
}

bool SparseView::has_missing(VertexId i, VertexId j) const noexcept {
  auto m = out_missing(i);
  return std::binary_search(m.begin(), m.end(), j);
}

// ---------------------------------------------------------------------------
// Files

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

class VertexIndex {
 public:
  explicit VertexIndex(std::optional<std::size_t> declared) : declared_(declared) {
    if (declared_) names_ = default_names(*declared_);
  }

  VertexId resolve(std::string_view token, const std::string& where) {
    if (declared_) {
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
      if (ec != std::errc() || ptr != token.data() + token.size() || v >= *declared_) {
        throw InputError(where + ": vertex id '" + std::string(token) +
                         "' is not an integer in [0, " + std::to_string(*declared_) + ")");
      }
      return static_cast<VertexId>(v);
    }
    auto [it, inserted] = index_.try_emplace(std::string(token), static_cast<VertexId>(names_.size()));
    if (inserted) names_.emplace_back(token);
    return it->second;
  }

  std::vector<std::string> take_names() { return std::move(names_); }

 private:
  std::optional<std::size_t> declared_;
  std::unordered_map<std::string, VertexId> index_;
  std::vector<std::string> names_;
};

template <class OnLine>
void for_each_data_line(std::istream& in, OnLine&& on_line) {
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') continue;
    on_line(tokens, number);
  }
}

}  // namespace

ObservedNetwork parse_edge_list(std::istream& edges, std::istream* missing, const LoadOptions& options) {
  VertexIndex index(options.num_vertices);
  std::vector<WeightedEdge> weighted;
  std::vector<VertexPair> missing_pairs;

  for_each_data_line(edges, [&](const std::vector<std::string_view>& tok, std::size_t line) {
    const std::string where = "edge list line " + std::to_string(line);
    if (tok.size() != 3) throw InputError(where + ": expected 'i j weight'");
    const VertexId i = index.resolve(tok[0], where);
    const VertexId j = index.resolve(tok[1], where);
    double w = 0.0;
    auto [ptr, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), w);
    if (ec != std::errc() || ptr != tok[2].data() + tok[2].size()) {
      throw InputError(where + ": malformed weight '" + std::string(tok[2]) + "'");
    }
    if (!std::isfinite(w)) throw InputError(where + ": non-finite weight");
    weighted.push_back({i, j, w});
  });
  if (missing) {
    for_each_data_line(*missing, [&](const std::vector<std::string_view>& tok, std::size_t line) {
      const std::string where = "missing list line " + std::to_string(line);
      if (tok.size() != 2) throw InputError(where + ": expected 'i j'");
      missing_pairs.push_back({index.resolve(tok[0], where), index.resolve(tok[1], where)});
    });
  }
  auto names = index.take_names();
  const std::size_t n = names.size();
  return ObservedNetwork::build(n, std::move(weighted), std::move(missing_pairs),
                                {options.directed, options.include_self_loops}, std::move(names));
}

ObservedNetwork load_edge_list(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream edges(path);
  if (!edges) throw InputError("cannot open edge list " + path.string());
  if (options.missing_path) {
    std::ifstream missing(*options.missing_path);
    if (!missing) throw InputError("cannot open missing-pair list " + options.missing_path->string());
    return parse_edge_list(edges, &missing, options);
  }
  return parse_edge_list(edges, nullptr, options);
}

namespace {

// Stored pairs re-oriented (undirected: smaller name first) and sorted by name.
template <class Item>
std::vector<std::pair<std::pair<std::string_view, std::string_view>, const Item*>> by_name(
    const ObservedNetwork& net, std::span<const Item> items) {
  const auto& names = net.names();
  std::vector<std::pair<std::pair<std::string_view, std::string_view>, const Item*>> rows;
  rows.reserve(items.size());
  for (const auto& it : items) {
    std::string_view a = names[it.src], b = names[it.dst];
    if (!net.directed() && b < a) std::swap(a, b);
    rows.push_back({{a, b}, &it});
  }
  std::sort(rows.begin(), rows.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  return rows;
}

}  // namespace

void write_edge_list(const ObservedNetwork& net, std::ostream& out) {
  for (const auto& [names, e] : by_name(net, net.weighted_edges())) {
    out << names.first << '\t' << names.second << '\t' << format_double(e->weight) << '\n';
  }
}

void write_missing_list(const ObservedNetwork& net, std::ostream& out) {
  for (const auto& [names, p] : by_name(net, net.missing_pairs())) {
    out << names.first << '\t' << names.second << '\n';
  }
}

void write_edge_list(const ObservedNetwork& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_edge_list(net, out);
}

void write_labels(std::span<const std::string> names, std::span<const int> labels, std::ostream& out) {
  if (names.size() != labels.size()) throw ContractError("names and labels differ in length");
  for (std::size_t i = 0; i < names.size(); ++i) out << names[i] << '\t' << labels[i] << '\n';
}

std::pair<std::vector<std::string>, std::vector<int>> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open labels file " + path.string());
  std::vector<std::string> names;
  std::vector<int> labels;
  for_each_data_line(in, [&](const std::vector<std::string_view>& tok, std::size_t line) {
    const std::string where = path.string() + " line " + std::to_string(line);
    if (tok.size() != 2) throw InputError(where + ": expected 'vertex group'");
    int g = 0;
    auto [ptr, ec] = std::from_chars(tok[1].data(), tok[1].data() + tok[1].size(), g);
    if (ec != std::errc() || ptr != tok[1].data() + tok[1].size()) {
      throw InputError(where + ": malformed group '" + std::string(tok[1]) + "'");
    }
    names.emplace_back(tok[0]);
    labels.push_back(g);
  });
  return {std::move(names), std::move(labels)};
}

// ---------------------------------------------------------------------------
// Normalization

double WeightTransform::apply(double w) const {
  const double x = mode == NormalizeMode::LogThenLinear ? std::log10(w) : w;
  if (hi == lo) return 0.0;
  return 2.0 * (x - lo) / (hi - lo) - 1.0;
}

double WeightTransform::inverse(double v) const {
  const double x = hi == lo ? lo : lo + (v + 1.0) * 0.5 * (hi - lo);
  return mode == NormalizeMode::LogThenLinear ? std::pow(10.0, x) : x;
}

NormalizedNetwork normalize_weights(const ObservedNetwork& net, NormalizeMode mode) {
  WeightTransform t;
  t.mode = mode;
  bool first = true;
  for (const auto& e : net.weighted_edges()) {
    if (mode == NormalizeMode::LogThenLinear && !(e.weight > 0.0)) {
      const auto& names = net.names();
      throw InputError("log normalization needs positive weights; edge (" + names[e.src] + ", " +
                       names[e.dst] + ") has weight " + format_double(e.weight));
    }
    const double x = mode == NormalizeMode::LogThenLinear ? std::log10(e.weight) : e.weight;
    t.lo = first ? x : std::min(t.lo, x);
    t.hi = first ? x : std::max(t.hi, x);
    first = false;
  }
  return {net.map_weights([&](double w) { return t.apply(w); }), t};
}

// ---------------------------------------------------------------------------
// Holdout

HoldoutSplit holdout_split(const ObservedNetwork& net, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw ContractError("holdout fraction must lie in (0, 1)");
  const std::uint64_t observed = net.observed_pair_count();
  const auto target = static_cast<std::uint64_t>(std::llround(fraction * static_cast<double>(observed)));
  if (target >= observed) throw ContractError("holdout fraction leaves no training pairs");

  const std::size_t n = net.num_vertices();
  Rng rng = make_rng(seed, "holdout");
  auto pick = [n](Rng& r) { return uniform_index(r, n); };

  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(target * 2);
  std::vector<VertexPair> held;
  held.reserve(target);
  while (held.size() < target) {
    VertexPair p{static_cast<VertexId>(pick(rng)), static_cast<VertexId>(pick(rng))};
    if (!net.is_modeled(p)) continue;
    // Undirected: accept only the stored orientation so unordered pairs stay uniform.
    if (!net.directed() && p.src > p.dst) continue;
    if (net.is_missing(p)) continue;
    if (!chosen.insert(key(p)).second) continue;
    held.push_back(p);
  }

  HoldoutSplit split;
  split.test.reserve(held.size());
  for (const auto& p : held) {
    const auto w = net.weight_of(p);
    split.test.push_back({p.src, p.dst, w.has_value(), w.value_or(0.0)});
  }
  split.train = net.with_missing(held);
  return split;
}

}  // namespace wsbm

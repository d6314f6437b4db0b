#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wsbm {

using VertexId = std::uint32_t;

struct WeightedEdge {
  VertexId src = 0;
  VertexId dst = 0;
  double weight = 0.0;
  friend bool operator==(const WeightedEdge&, const WeightedEdge&) = default;
};

struct VertexPair {
  VertexId src = 0;
  VertexId dst = 0;
  friend bool operator==(const VertexPair&, const VertexPair&) = default;
  friend auto operator<=>(const VertexPair&, const VertexPair&) = default;
};

/// Per-vertex degree counts of the directed (symmetric, for undirected input) view.
/// `w_*` count weighted edges, `e_*` count observed pairs (weighted edges + non-edges).
struct DegreeCache {
  std::vector<std::int64_t> w_out, w_in, e_out, e_in;
  friend bool operator==(const DegreeCache&, const DegreeCache&) = default;
};

/// A network over n vertices whose modeled pairs are split into weighted edges W,
/// missing (unobserved) pairs M, and implied non-edges N = everything else.
///
/// Directed networks model ordered pairs. Undirected networks store each unordered
/// pair once (src <= dst) and expose the symmetric directed expansion to the
/// inference engines. Self-loops are modeled only when `self_loops` is set.
/// A weight of zero in W is an edge, not a non-edge.
class ObservedNetwork {
 public:
  struct Flags {
    bool directed = true;
    bool self_loops = false;
  };

  ObservedNetwork() = default;

  /// Validates and canonicalizes (sorts) the lists. Throws InputError on
  /// out-of-range indices, duplicates, W/M overlap, non-finite weights, or
  /// self-loops when they are not modeled. Empty `names` become "0".."n-1".
  static ObservedNetwork build(std::size_t n, std::vector<WeightedEdge> weighted,
                               std::vector<VertexPair> missing, Flags flags,
                               std::vector<std::string> names = {});

  std::size_t num_vertices() const noexcept { return n_; }
  bool directed() const noexcept { return flags_.directed; }
  bool self_loops() const noexcept { return flags_.self_loops; }
  Flags flags() const noexcept { return flags_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  /// Stored lists (one entry per unordered pair when undirected).
  std::span<const WeightedEdge> weighted_edges() const noexcept { return weighted_; }
  std::span<const VertexPair> missing_pairs() const noexcept { return missing_; }

  /// Number of modeled pairs in stored units (ordered if directed, unordered otherwise).
  std::uint64_t modeled_pair_count() const noexcept;
  std::uint64_t non_edge_count() const noexcept {
    return modeled_pair_count() - weighted_.size() - missing_.size();
  }
  std::uint64_t observed_pair_count() const noexcept {
    return modeled_pair_count() - missing_.size();
  }

  const DegreeCache& degrees() const noexcept { return degrees_; }

  /// Symmetric directed expansion, sorted by (src, dst).
  std::vector<WeightedEdge> directed_weighted_edges() const;
  std::vector<VertexPair> directed_missing_pairs() const;

  /// Canonical stored form of a pair (orders endpoints when undirected).
  VertexPair canonical(VertexPair p) const noexcept;
  bool is_modeled(VertexPair p) const noexcept;
  std::optional<double> weight_of(VertexPair p) const;
  bool is_missing(VertexPair p) const;

  /// Returns a copy in which the given observed pairs become missing. Degree
  /// caches are updated incrementally. Throws InputError if a pair is already
  /// missing or not modeled.
  ObservedNetwork with_missing(std::span<const VertexPair> pairs) const;

  /// Copy with every stored weight replaced by f(weight).
  template <class F>
  ObservedNetwork map_weights(F&& f) const {
    ObservedNetwork out = *this;
    for (auto& e : out.weighted_) e.weight = f(e.weight);
    return out;
  }

 private:
  std::size_t n_ = 0;
  Flags flags_;
  std::vector<WeightedEdge> weighted_;
  std::vector<VertexPair> missing_;
  std::vector<std::string> names_;
  DegreeCache degrees_;
};

/// Recomputes the degree cache from the pair lists.
DegreeCache compute_degrees(const ObservedNetwork& net);

/// Compressed adjacency of the directed expansion used by the inference engines.
class SparseView {
 public:
  struct Arc {
    VertexId other;
    double weight;
  };

  explicit SparseView(const ObservedNetwork& net);

  std::size_t num_vertices() const noexcept { return n_; }
  bool self_loops() const noexcept { return self_loops_; }

  std::span<const WeightedEdge> weighted_edges() const noexcept { return edges_; }
  std::span<const VertexPair> missing_pairs() const noexcept { return missing_; }

  std::span<const Arc> out_edges(VertexId i) const noexcept { return slice(out_arcs_, out_off_, i); }
  std::span<const Arc> in_edges(VertexId i) const noexcept { return slice(in_arcs_, in_off_, i); }
  std::span<const VertexId> out_missing(VertexId i) const noexcept { return slice(m_out_, m_out_off_, i); }
  std::span<const VertexId> in_missing(VertexId i) const noexcept { return slice(m_in_, m_in_off_, i); }

  /// Weighted-edge degrees as reals (degree-corrected propensities).
  const std::vector<double>& out_degree() const noexcept { return d_out_; }
  const std::vector<double>& in_degree() const noexcept { return d_in_; }

  /// Whether the ordered pair is in the respective list (binary search).
  bool has_edge(VertexId i, VertexId j) const noexcept;
  bool has_missing(VertexId i, VertexId j) const noexcept;
  /// Weight of the ordered pair if it is a weighted edge.
  std::optional<double> edge_weight(VertexId i, VertexId j) const noexcept;

 private:
  template <class T>
  static std::span<const T> slice(const std::vector<T>& v, const std::vector<std::size_t>& off,
                                  VertexId i) noexcept {
    return {v.data() + off[i], off[i + 1] - off[i]};
  }

  std::size_t n_ = 0;
  bool self_loops_ = false;
  std::vector<WeightedEdge> edges_;
  std::vector<VertexPair> missing_;
  std::vector<std::size_t> out_off_, in_off_, m_out_off_, m_in_off_;
  std::vector<Arc> out_arcs_, in_arcs_;
  std::vector<VertexId> m_out_, m_in_;
  std::vector<double> d_out_, d_in_;
};

// ---------------------------------------------------------------------------
// Edge-list files

struct LoadOptions {
  bool directed = true;
  bool include_self_loops = false;
  /// When set, vertex ids must be integers in [0, n); otherwise ids are arbitrary
  /// strings numbered by first appearance.
  std::optional<std::size_t> num_vertices;
  std::optional<std::filesystem::path> missing_path;
};

/// Reads whitespace-separated "i j weight" lines ('#' comments and blank lines
/// ignored) plus an optional "i j" missing-pair file. Throws InputError with the
/// file and line number on malformed input.
ObservedNetwork load_edge_list(const std::filesystem::path& path, const LoadOptions& options = {});
ObservedNetwork parse_edge_list(std::istream& edges, std::istream* missing,
                                const LoadOptions& options = {});

/// Canonical writers: pairs sorted by vertex name, weights in shortest
/// round-trip decimal form, tab-separated.
void write_edge_list(const ObservedNetwork& net, std::ostream& out);
void write_missing_list(const ObservedNetwork& net, std::ostream& out);
void write_edge_list(const ObservedNetwork& net, const std::filesystem::path& path);

/// "vertex <TAB> group" lines.
void write_labels(std::span<const std::string> names, std::span<const int> labels, std::ostream& out);
/// Reads a labels file; returns (names, labels) in file order.
std::pair<std::vector<std::string>, std::vector<int>> read_labels(const std::filesystem::path& path);

/// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

// ---------------------------------------------------------------------------
// Weight normalization

enum class NormalizeMode { Linear, LogThenLinear };

/// Affine map of observed weights onto [-1, 1], optionally after log10.
struct WeightTransform {
  NormalizeMode mode = NormalizeMode::Linear;
  double lo = 0.0;  // min of (log10) weights
  double hi = 0.0;  // max of (log10) weights

  double apply(double w) const;
  double inverse(double v) const;
};

struct NormalizedNetwork {
  ObservedNetwork network;
  WeightTransform transform;
};

NormalizedNetwork normalize_weights(const ObservedNetwork& net, NormalizeMode mode);

// ---------------------------------------------------------------------------
// Cross-validation holdout

struct HeldOutPair {
  VertexId src = 0;
  VertexId dst = 0;
  bool is_edge = false;
  double weight = 0.0;  // meaningful only when is_edge
};

struct HoldoutSplit {
  ObservedNetwork train;
  std::vector<HeldOutPair> test;
};

/// Moves round(fraction * observed pairs) uniformly chosen observed pairs into
/// the missing list of the training network. Deterministic in `seed`.
HoldoutSplit holdout_split(const ObservedNetwork& net, double fraction, std::uint64_t seed);

}  // namespace wsbm

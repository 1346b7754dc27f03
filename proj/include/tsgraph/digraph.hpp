#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tsgraph/tensor.hpp"

namespace tsgraph {

/// Multivariate series: values is rows x channels, row-major.
struct TimeSeries {
  std::size_t rows = 0;
  std::size_t channels = 0;
  std::vector<double> values;
  double sample_rate_hz = 1.0;
  std::optional<int> label;

  double at(std::size_t i, std::size_t j) const { return values[i * channels + j]; }
};

/// Neighborhood semantics: Head = in-neighbors (senders), Tail = out-neighbors
/// (receivers), Union = both.
enum class Alpha { Head, Tail, Union };

/// Simple digraph over nodes 0..num_nodes-1, at most one edge per ordered
/// pair. In weighted mode an edge exists iff its weight is nonzero.
/// Immutable after construction.
class Digraph {
 public:
  struct Edge {
    std::size_t tail;
    std::size_t head;
  };

  Digraph() = default;
  Digraph(std::size_t num_nodes, std::vector<Edge> edges);
  Digraph(std::size_t num_nodes, std::vector<Edge> edges, std::vector<double> weights);

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_edges() const { return edges_.size(); }
  const std::vector<Edge>& edges() const { return edges_; }
  bool weighted() const { return !weights_.empty(); }
  const std::vector<double>& weights() const { return weights_; }
  double weight(std::size_t edge_index) const {
    return weights_.empty() ? 1.0 : weights_[edge_index];
  }

  /// Edge indices with tail == v, sorted by head.
  const std::vector<std::size_t>& out_edges(std::size_t v) const;
  /// Edge indices with head == v, sorted by tail.
  const std::vector<std::size_t>& in_edges(std::size_t v) const;

  /// N^h / N^t / N^u of the node, sorted, duplicates removed.
  std::vector<std::size_t> neighborhood(std::size_t v, Alpha alpha) const;

  /// Dense num_nodes^2 row-major matrix, A[i][j] = weight of edge i->j.
  std::vector<double> adjacency_matrix() const;
  bool is_undirected() const;

  std::optional<double> self_loop_weight(std::size_t v) const;

  Digraph permuted(const std::vector<std::size_t>& perm) const;
  Digraph reversed() const;

  /// `tail head weight` per line, 1-based indices.
  void write_edge_list(std::ostream& os) const;
  static Digraph read_edge_list(std::istream& is, std::size_t num_nodes);

  /// Disjoint union of `copies` instances of g; block k occupies node range
  /// [k*g.num_nodes, (k+1)*g.num_nodes).
  static Digraph disjoint_copies(const Digraph& g, std::size_t copies);

 private:
  void build_index();

  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> weights_;
  std::vector<std::vector<std::size_t>> out_index_;
  std::vector<std::vector<std::size_t>> in_index_;
};

struct FeaturedDigraph {
  Digraph graph;
  Tensor features;  // [num_nodes, feature_dim]
};

enum class TimeDigraphVariant { Series, Grid };

/// Topology parameters of a time-digraph: stride d between connected nodes,
/// connection count bound k (lookback window k*d), optional adjacent edges.
struct TimeDigraphSpec {
  std::size_t stride = 1;           // d
  std::size_t count_bound = 1;      // k
  bool include_adjacent = true;
  TimeDigraphVariant variant = TimeDigraphVariant::Series;
};

/// Nodes v_0..v_{n-1}; edge i->l iff l > i and (adjacent rule or stride rule:
/// d | (l-i) and l-i < k*d). All edges point forward in time.
Digraph build_series_digraph(std::size_t n, const TimeDigraphSpec& spec);

/// Grid over n time steps x m channels, node (i,j) at index i*m+j. Restricted
/// variant: edge (i,j)->(l,k) iff not a self loop, l >= i, and l-i in {0,1}
/// or (d | (l-i) and l-i < k*d). Dense variant keeps every non-self-loop pair
/// with l >= i.
Digraph build_grid_digraph(std::size_t n, std::size_t m, const TimeDigraphSpec& spec,
                           bool dense = false);

/// Series variant: feature rows are the sample vectors x(i); grid variant:
/// scalar features x(i)_j in node order.
FeaturedDigraph attach_features(const TimeSeries& ts, Digraph g,
                                TimeDigraphVariant variant);

/// Induced subgraph on the ordered subset with features pulled back row-wise.
FeaturedDigraph pullback_subgraph_features(const FeaturedDigraph& fd,
                                           const std::vector<std::size_t>& nodes);

}  // namespace tsgraph

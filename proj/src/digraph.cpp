#include "tsgraph/digraph.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace tsgraph {

namespace {

void validate_edges(std::size_t num_nodes, const std::vector<Digraph::Edge>& edges,
                    const std::vector<double>& weights) {
  if (!weights.empty() && weights.size() != edges.size()) {
    throw std::invalid_argument("Digraph: one weight per edge required");
  }
  std::unordered_set<std::size_t> seen;
  seen.reserve(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& ed = edges[e];
    if (ed.tail >= num_nodes || ed.head >= num_nodes) {
      throw std::invalid_argument("Digraph: edge endpoint out of range");
    }
    if (!weights.empty() && weights[e] == 0.0) {
      throw std::invalid_argument("Digraph: weighted edge must be nonzero");
    }
    if (!seen.insert(ed.tail * num_nodes + ed.head).second) {
      throw std::invalid_argument("Digraph: duplicate edge");
    }
  }
}

}  // namespace

Digraph::Digraph(std::size_t num_nodes, std::vector<Edge> edges)
    : num_nodes_(num_nodes), edges_(std::move(edges)) {
  validate_edges(num_nodes_, edges_, weights_);
  build_index();
}

Digraph::Digraph(std::size_t num_nodes, std::vector<Edge> edges,
                 std::vector<double> weights)
    : num_nodes_(num_nodes), edges_(std::move(edges)), weights_(std::move(weights)) {
  validate_edges(num_nodes_, edges_, weights_);
  build_index();
}

void Digraph::build_index() {
  out_index_.assign(num_nodes_, {});
  in_index_.assign(num_nodes_, {});
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    out_index_[edges_[e].tail].push_back(e);
    in_index_[edges_[e].head].push_back(e);
  }
  for (auto& v : out_index_)
    std::sort(v.begin(), v.end(), [this](std::size_t a, std::size_t b) {
      return edges_[a].head < edges_[b].head;
    });
  for (auto& v : in_index_)
    std::sort(v.begin(), v.end(), [this](std::size_t a, std::size_t b) {
      return edges_[a].tail < edges_[b].tail;
    });
}

const std::vector<std::size_t>& Digraph::out_edges(std::size_t v) const {
  if (v >= num_nodes_) throw std::out_of_range("Digraph: node out of range");
  return out_index_[v];
}

const std::vector<std::size_t>& Digraph::in_edges(std::size_t v) const {
  if (v >= num_nodes_) throw std::out_of_range("Digraph: node out of range");
  return in_index_[v];
}

std::vector<std::size_t> Digraph::neighborhood(std::size_t v, Alpha alpha) const {
  if (v >= num_nodes_) throw std::out_of_range("Digraph: node out of range");
  std::vector<std::size_t> result;
  if (alpha == Alpha::Head || alpha == Alpha::Union) {
    for (std::size_t e : in_index_[v]) result.push_back(edges_[e].tail);
  }
  if (alpha == Alpha::Tail || alpha == Alpha::Union) {
    for (std::size_t e : out_index_[v]) result.push_back(edges_[e].head);
  }
  std::sort(result.begin(), result.end());
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

std::vector<double> Digraph::adjacency_matrix() const {
  std::vector<double> a(num_nodes_ * num_nodes_, 0.0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    a[edges_[e].tail * num_nodes_ + edges_[e].head] = weight(e);
  }
  return a;
}

bool Digraph::is_undirected() const {
  const auto a = adjacency_matrix();
  for (std::size_t i = 0; i < num_nodes_; ++i)
    for (std::size_t j = i + 1; j < num_nodes_; ++j)
      if (a[i * num_nodes_ + j] != a[j * num_nodes_ + i]) return false;
  return true;
}

std::optional<double> Digraph::self_loop_weight(std::size_t v) const {
  for (std::size_t e : out_edges(v)) {
    if (edges_[e].head == v) return weight(e);
  }
  return std::nullopt;
}

Digraph Digraph::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != num_nodes_) {
    throw std::invalid_argument("permuted: permutation size mismatch");
  }
  std::vector<Edge> edges(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    edges[e] = {perm[edges_[e].tail], perm[edges_[e].head]};
  }
  if (weighted()) return Digraph(num_nodes_, std::move(edges), weights_);
  return Digraph(num_nodes_, std::move(edges));
}

Digraph Digraph::reversed() const {
  std::vector<Edge> edges(edges_.size());
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    edges[e] = {edges_[e].head, edges_[e].tail};
  }
  if (weighted()) return Digraph(num_nodes_, std::move(edges), weights_);
  return Digraph(num_nodes_, std::move(edges));
}

void Digraph::write_edge_list(std::ostream& os) const {
  os.precision(17);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    os << edges_[e].tail + 1 << ' ' << edges_[e].head + 1 << ' ' << weight(e) << '\n';
  }
}

Digraph Digraph::read_edge_list(std::istream& is, std::size_t num_nodes) {
  std::vector<Edge> edges;
  std::vector<double> weights;
  std::string line;
  bool any_nonunit = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::size_t tail = 0, head = 0;
    double w = 1.0;
    if (!(ls >> tail >> head >> w)) {
      throw std::invalid_argument("read_edge_list: malformed line: " + line);
    }
    if (tail == 0 || head == 0) {
      throw std::invalid_argument("read_edge_list: indices are 1-based");
    }
    edges.push_back({tail - 1, head - 1});
    weights.push_back(w);
    any_nonunit = any_nonunit || w != 1.0;
  }
  if (any_nonunit) return Digraph(num_nodes, std::move(edges), std::move(weights));
  return Digraph(num_nodes, std::move(edges));
}

Digraph Digraph::disjoint_copies(const Digraph& g, std::size_t copies) {
  if (copies == 0) throw std::invalid_argument("disjoint_copies: need at least one copy");
  if (copies == 1) return g;
  const std::size_t n = g.num_nodes();
  std::vector<Edge> edges;
  edges.reserve(g.num_edges() * copies);
  std::vector<double> weights;
  if (g.weighted()) weights.reserve(g.num_edges() * copies);
  for (std::size_t k = 0; k < copies; ++k) {
    const std::size_t off = k * n;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      edges.push_back({g.edges()[e].tail + off, g.edges()[e].head + off});
      if (g.weighted()) weights.push_back(g.weights()[e]);
    }
  }
  if (g.weighted()) return Digraph(n * copies, std::move(edges), std::move(weights));
  return Digraph(n * copies, std::move(edges));
}

Digraph build_series_digraph(std::size_t n, const TimeDigraphSpec& spec) {
  if (n < 1) throw std::invalid_argument("build_series_digraph: need at least one node");
  if (spec.stride < 1 || spec.count_bound < 1) {
    throw std::invalid_argument("build_series_digraph: stride and count bound must be positive");
  }
  const std::size_t d = spec.stride;
  const std::size_t window = spec.count_bound * d;
  std::vector<Digraph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    if (spec.include_adjacent && i + 1 < n) edges.push_back({i, i + 1});
    for (std::size_t span = d; span < window && i + span < n; span += d) {
      if (span == 1 && spec.include_adjacent) continue;  // already added
      edges.push_back({i, i + span});
    }
  }
  return Digraph(n, std::move(edges));
}

Digraph build_grid_digraph(std::size_t n, std::size_t m, const TimeDigraphSpec& spec,
                           bool dense) {
  if (n < 1 || m < 1) throw std::invalid_argument("build_grid_digraph: invalid dims");
  const std::size_t d = spec.stride;
  const std::size_t window = spec.count_bound * d;
  auto node = [m](std::size_t i, std::size_t j) { return i * m + j; };
  std::vector<Digraph::Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t l = i; l < n; ++l) {
        const std::size_t span = l - i;
        if (!dense) {
          const bool near = span <= 1;
          const bool strided = span % d == 0 && span < window;
          if (!near && !strided) {
            if (span >= window && span > 1) break;  // spans only grow from here
            continue;
          }
        }
        for (std::size_t k = 0; k < m; ++k) {
          if (i == l && j == k) continue;  // self loop
          edges.push_back({node(i, j), node(l, k)});
        }
      }
    }
  }
  return Digraph(n * m, std::move(edges));
}

FeaturedDigraph attach_features(const TimeSeries& ts, Digraph g,
                                TimeDigraphVariant variant) {
  const std::size_t expected =
      variant == TimeDigraphVariant::Series ? ts.rows : ts.rows * ts.channels;
  if (g.num_nodes() != expected) {
    throw std::invalid_argument("attach_features: node count does not match series");
  }
  if (variant == TimeDigraphVariant::Series) {
    Tensor f({ts.rows, ts.channels}, ts.values);
    return {std::move(g), std::move(f)};
  }
  // grid: node (i,j) carries the scalar x(i)_j; node order is time-major so
  // the flattened sample matrix is already in node order.
  Tensor f({ts.rows * ts.channels, 1}, ts.values);
  return {std::move(g), std::move(f)};
}

FeaturedDigraph pullback_subgraph_features(const FeaturedDigraph& fd,
                                           const std::vector<std::size_t>& nodes) {
  const std::size_t n = fd.graph.num_nodes();
  std::vector<std::size_t> position(n, static_cast<std::size_t>(-1));
  for (std::size_t p = 0; p < nodes.size(); ++p) {
    if (nodes[p] >= n) throw std::invalid_argument("pullback: node out of range");
    if (position[nodes[p]] != static_cast<std::size_t>(-1)) {
      throw std::invalid_argument("pullback: duplicate node in subset");
    }
    position[nodes[p]] = p;
  }
  std::vector<Digraph::Edge> edges;
  std::vector<double> weights;
  for (std::size_t e = 0; e < fd.graph.num_edges(); ++e) {
    const auto& ed = fd.graph.edges()[e];
    if (position[ed.tail] == static_cast<std::size_t>(-1)) continue;
    if (position[ed.head] == static_cast<std::size_t>(-1)) continue;
    edges.push_back({position[ed.tail], position[ed.head]});
    if (fd.graph.weighted()) weights.push_back(fd.graph.weights()[e]);
  }
  Digraph sub = fd.graph.weighted()
                    ? Digraph(nodes.size(), std::move(edges), std::move(weights))
                    : Digraph(nodes.size(), std::move(edges));
  Tensor feats = nodes.empty()
                     ? Tensor()
                     : gather_rows(fd.features, nodes);
  return {std::move(sub), std::move(feats)};
}

}  // namespace tsgraph

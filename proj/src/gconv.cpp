#include "tsgraph/gconv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "tsgraph/ops.hpp"

namespace tsgraph {

namespace {

struct EdgePairs {
  std::vector<std::size_t> center;
  std::vector<std::size_t> source;
  std::vector<double> edge_weight;
  std::vector<std::size_t> center_degree;  // |N^alpha| per node
};

// One (center, neighbor) pair per element of N^alpha(center). With alpha=u a
// neighbor connected in both directions is counted once and keeps the
// tail-side weight A_{i,j}.
EdgePairs collect_pairs(const Digraph& g, Alpha alpha) {
  EdgePairs out;
  const std::size_t n = g.num_nodes();
  out.center_degree.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t before = out.center.size();
    if (alpha == Alpha::Tail) {
      for (std::size_t e : g.out_edges(i)) {
        out.center.push_back(i);
        out.source.push_back(g.edges()[e].head);
        out.edge_weight.push_back(g.weight(e));
      }
    } else if (alpha == Alpha::Head) {
      for (std::size_t e : g.in_edges(i)) {
        out.center.push_back(i);
        out.source.push_back(g.edges()[e].tail);
        out.edge_weight.push_back(g.weight(e));
      }
    } else {
      // merge the two sorted neighbor lists
      const auto& oe = g.out_edges(i);
      const auto& ie = g.in_edges(i);
      std::size_t a = 0, b = 0;
      while (a < oe.size() || b < ie.size()) {
        const std::size_t oh = a < oe.size() ? g.edges()[oe[a]].head : SIZE_MAX;
        const std::size_t it = b < ie.size() ? g.edges()[ie[b]].tail : SIZE_MAX;
        if (oh <= it) {
          out.center.push_back(i);
          out.source.push_back(oh);
          out.edge_weight.push_back(g.weight(oe[a]));
          if (oh == it) ++b;
          ++a;
        } else {
          out.center.push_back(i);
          out.source.push_back(it);
          out.edge_weight.push_back(g.weight(ie[b]));
          ++b;
        }
      }
    }
    out.center_degree[i] = out.center.size() - before;
  }
  return out;
}

std::vector<double> alpha_weighted_degrees(const Digraph& g, Alpha alpha) {
  std::vector<double> deg(g.num_nodes(), 0.0);
  EdgePairs pairs = collect_pairs(g, alpha);
  for (std::size_t e = 0; e < pairs.center.size(); ++e) {
    deg[pairs.center[e]] += pairs.edge_weight[e];
  }
  return deg;
}

Tensor apply_activation(Tensor t, MpActivation act) {
  return act == MpActivation::Silu ? silu(t) : t;
}

}  // namespace

FeaturedDigraph linear_message_passing(const FeaturedDigraph& fd,
                                       const MessagePassingSpec& spec) {
  const Digraph& g = fd.graph;
  const std::size_t n = g.num_nodes();
  if (!spec.weight.defined() || spec.weight.ndim() != 2 ||
      spec.weight.shape()[1] != fd.features.cols()) {
    throw std::invalid_argument("message_passing: weight does not match feature dim");
  }
  if (fd.features.rows() != n) {
    throw std::invalid_argument("message_passing: feature row count mismatch");
  }
  const std::size_t out_dim = spec.weight.shape()[0];

  EdgePairs pairs = collect_pairs(g, spec.alpha);
  std::vector<double> coeff = pairs.edge_weight;
  if (spec.normalization == MpNormalization::Mean) {
    for (std::size_t e = 0; e < coeff.size(); ++e) {
      coeff[e] /= static_cast<double>(pairs.center_degree[pairs.center[e]]);
    }
  } else if (spec.normalization == MpNormalization::Sym) {
    std::vector<double> deg = alpha_weighted_degrees(g, spec.alpha);
    for (std::size_t e = 0; e < coeff.size(); ++e) {
      const double di = deg[pairs.center[e]];
      const double dj = deg[pairs.source[e]];
      if (di <= 0.0 || dj <= 0.0) {
        throw std::domain_error("message_passing: sym normalization needs positive degrees");
      }
      coeff[e] /= std::sqrt(di * dj);
    }
  }

  Tensor transformed = linear(fd.features, spec.weight);
  Tensor aggregated;
  if (pairs.center.empty()) {
    aggregated = Tensor::zeros({n, out_dim});
  } else {
    Tensor msgs = scale_rows(gather_rows(transformed, pairs.source), std::move(coeff));
    aggregated = segment_sum(msgs, pairs.center, n);
  }

  Tensor result = aggregated;
  if (spec.self_term) {
    if (!spec.self_weight.defined() || spec.self_weight.ndim() != 2 ||
        spec.self_weight.shape()[1] != fd.features.cols() ||
        spec.self_weight.shape()[0] != out_dim) {
      throw std::invalid_argument("message_passing: self weight shape mismatch");
    }
    std::vector<double> self_coeff(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto w = g.self_loop_weight(i);
      self_coeff[i] = spec.self_coefficient * (w ? *w : 1.0);
    }
    result = result + scale_rows(linear(fd.features, spec.self_weight),
                                 std::move(self_coeff));
  }
  if (spec.bias.defined() && spec.bias.size() > 0) {
    result = add_rowvec(result, spec.bias);
  }
  return {g, apply_activation(std::move(result), spec.activation)};
}

MessagePassingSpec sage_spec(Tensor weight, Tensor self_weight, Tensor bias,
                             Alpha alpha, MpActivation act) {
  MessagePassingSpec spec;
  spec.alpha = alpha;
  spec.normalization = MpNormalization::Mean;
  spec.weight = std::move(weight);
  spec.bias = std::move(bias);
  spec.self_term = true;
  spec.self_weight = std::move(self_weight);
  spec.self_coefficient = 1.0;
  spec.activation = act;
  return spec;
}

MessagePassingSpec gcn_spec(Tensor weight, Tensor bias, Alpha alpha,
                            MpActivation act) {
  MessagePassingSpec spec;
  spec.alpha = alpha;
  spec.normalization = MpNormalization::Sym;
  spec.weight = std::move(weight);
  spec.bias = std::move(bias);
  spec.self_term = false;
  spec.activation = act;
  return spec;
}

FeaturedDigraph gat_conv(const FeaturedDigraph& fd, const GatParams& params,
                         Alpha alpha) {
  const Digraph& g = fd.graph;
  const std::size_t n = g.num_nodes();
  if (params.heads < 1 || params.head_weights.size() != params.heads ||
      params.head_attention.size() != params.heads) {
    throw std::invalid_argument("gat_conv: inconsistent head parameters");
  }
  const std::size_t head_dim = params.head_weights[0].shape()[0];
  for (const Tensor& w : params.head_weights) {
    if (w.ndim() != 2 || w.shape()[0] != head_dim ||
        w.shape()[1] != fd.features.cols()) {
      throw std::invalid_argument("gat_conv: head weight shape mismatch");
    }
  }
  for (const Tensor& a : params.head_attention) {
    if (a.size() != 2 * head_dim) {
      throw std::invalid_argument("gat_conv: attention vector must have 2*head_dim entries");
    }
  }

  // neighborhood pairs plus a self pair for every node
  EdgePairs base = collect_pairs(g, alpha);
  std::vector<std::size_t> center, source;
  center.reserve(base.center.size() + n);
  source.reserve(base.center.size() + n);
  for (std::size_t i = 0, e = 0; i < n; ++i) {
    bool saw_self = false;
    for (std::size_t k = 0; k < base.center_degree[i]; ++k, ++e) {
      center.push_back(i);
      source.push_back(base.source[e]);
      saw_self = saw_self || base.source[e] == i;
    }
    if (!saw_self) {
      center.push_back(i);
      source.push_back(i);
    }
  }

  std::vector<Tensor> head_outputs;
  head_outputs.reserve(params.heads);
  for (std::size_t h = 0; h < params.heads; ++h) {
    Tensor z = linear(fd.features, params.head_weights[h]);
    const auto& av = params.head_attention[h].values();
    Tensor a_src({1, head_dim},
                 std::vector<double>(av.begin(), av.begin() + head_dim));
    Tensor a_dst({1, head_dim},
                 std::vector<double>(av.begin() + head_dim, av.end()));
    // logits_e = leaky(a_src . z[center] + a_dst . z[source])
    Tensor s_center = linear(z, a_src);
    Tensor s_source = linear(z, a_dst);
    Tensor logits = leaky_relu(
        gather_rows(s_center, center) + gather_rows(s_source, source),
        params.negative_slope);

    // softmax within each center group; the max shift is a constant
    std::vector<double> group_max(n, -std::numeric_limits<double>::infinity());
    for (std::size_t e = 0; e < center.size(); ++e) {
      group_max[center[e]] = std::max(group_max[center[e]], logits.values()[e]);
    }
    std::vector<double> shift(center.size());
    for (std::size_t e = 0; e < center.size(); ++e) shift[e] = -group_max[center[e]];
    Tensor ex = exp(logits + Tensor({center.size(), 1}, std::move(shift)));
    Tensor denom = segment_sum(ex, center, n);
    Tensor attn = ex / gather_rows(denom, center);

    Tensor msgs = mul_rows(gather_rows(z, source), attn);
    head_outputs.push_back(segment_sum(msgs, center, n));
  }

  Tensor merged;
  if (params.merge == GatMerge::Concat) {
    merged = concat_cols(head_outputs);
  } else {
    merged = head_outputs[0];
    for (std::size_t h = 1; h < params.heads; ++h) merged = merged + head_outputs[h];
    merged = (1.0 / static_cast<double>(params.heads)) * merged;
  }
  if (params.bias.defined() && params.bias.size() > 0) {
    merged = add_rowvec(merged, params.bias);
  }
  return {g, std::move(merged)};
}

Lemma1Construction lemma1_build(const std::vector<double>& kernel, std::size_t len) {
  const std::size_t r = kernel.size();
  if (r == 0) throw std::invalid_argument("lemma1_build: empty kernel");
  if (r > len) throw std::invalid_argument("lemma1_build: kernel longer than signal");

  // A_{i,i+off} = kernel[off] for off in [0, r); zero entries carry no edge.
  std::vector<Digraph::Edge> edges;
  std::vector<double> weights;
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t off = 0; off < r && i + off < len; ++off) {
      if (kernel[off] == 0.0) continue;
      edges.push_back({i, i + off});
      weights.push_back(kernel[off]);
    }
  }

  Lemma1Construction out;
  out.graph = Digraph(len, std::move(edges), std::move(weights));
  out.retained_nodes.resize(len - r + 1);
  for (std::size_t i = 0; i < out.retained_nodes.size(); ++i) out.retained_nodes[i] = i;
  out.spec.alpha = Alpha::Tail;
  out.spec.normalization = MpNormalization::None;
  out.spec.weight = Tensor({1, 1}, {1.0});
  out.spec.self_term = false;
  out.spec.activation = MpActivation::Identity;
  return out;
}

double lemma1_check(const std::vector<double>& kernel, const std::vector<double>& x) {
  if (x.size() < kernel.size()) {
    throw std::invalid_argument("lemma1_check: signal shorter than kernel");
  }
  // direct path: valid 1-D convolution
  Conv1dParams conv;
  conv.kernel = Tensor({1, 1, kernel.size()}, kernel);
  conv.bias = Tensor::zeros({1});
  conv.dilation = 1;
  conv.causal = false;
  Tensor signal({x.size(), 1}, x);
  Tensor direct = conv1d(signal, conv);

  // graph path
  Lemma1Construction built = lemma1_build(kernel, x.size());
  FeaturedDigraph fd{built.graph, signal};
  FeaturedDigraph convolved = linear_message_passing(fd, built.spec);
  FeaturedDigraph restricted = pullback_subgraph_features(convolved, built.retained_nodes);

  double worst = 0.0;
  for (std::size_t i = 0; i < direct.size(); ++i) {
    worst = std::max(worst, std::abs(direct.values()[i] - restricted.features.values()[i]));
  }
  return worst;
}

}  // namespace tsgraph

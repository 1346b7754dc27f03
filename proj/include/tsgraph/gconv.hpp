#pragma once

#include "tsgraph/digraph.hpp"
#include "tsgraph/tensor.hpp"

namespace tsgraph {

enum class MpNormalization { None, Mean, Sym };
enum class MpActivation { Identity, Silu };

/// Linear message passing
///   h_i' = act( sum_{j in N^a(i)} c_ij * A_ij * W h_j  +  l * a_ii * B h_i )
/// where the edge weight is looked up in the direction the edge exists and
/// a_ii falls back to 1 when the node has no self loop.
struct MessagePassingSpec {
  Alpha alpha = Alpha::Head;
  MpNormalization normalization = MpNormalization::None;
  Tensor weight;              // [out, in]
  Tensor bias;                // optional, [out]
  bool self_term = false;
  Tensor self_weight;         // B, [out, in]; required when self_term
  double self_coefficient = 1.0;  // l
  MpActivation activation = MpActivation::Identity;
};

FeaturedDigraph linear_message_passing(const FeaturedDigraph& fd,
                                       const MessagePassingSpec& spec);

/// Mean aggregation with a separate self weight (Sage form).
MessagePassingSpec sage_spec(Tensor weight, Tensor self_weight, Tensor bias,
                             Alpha alpha, MpActivation act = MpActivation::Identity);
/// Symmetric normalization, no separate self term; add self loops to the
/// graph to recover the Kipf-Welling form.
MessagePassingSpec gcn_spec(Tensor weight, Tensor bias, Alpha alpha,
                            MpActivation act = MpActivation::Identity);

enum class GatMerge { Concat, Average };

struct GatParams {
  std::size_t heads = 1;
  std::vector<Tensor> head_weights;     // per head, [head_dim, in]
  std::vector<Tensor> head_attention;   // per head, [2 * head_dim]
  double negative_slope = 0.2;
  GatMerge merge = GatMerge::Concat;
  Tensor bias;                          // optional, [merged_dim]
};

/// Attention over each node's N^a neighborhood plus the node itself.
FeaturedDigraph gat_conv(const FeaturedDigraph& fd, const GatParams& params,
                         Alpha alpha);

/// Weighted digraph realizing a width-r 1-D convolution as a graph
/// convolution restricted to the nodes where the sum is fully supported.
struct Lemma1Construction {
  Digraph graph;
  std::vector<std::size_t> retained_nodes;  // output positions
  MessagePassingSpec spec;
};

Lemma1Construction lemma1_build(const std::vector<double>& kernel, std::size_t len);

/// Max |conv1d(x; kernel) - pullback(gconv(x))| over the retained nodes.
double lemma1_check(const std::vector<double>& kernel, const std::vector<double>& x);

}  // namespace tsgraph

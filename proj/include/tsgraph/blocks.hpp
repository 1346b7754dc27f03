#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "tsgraph/gconv.hpp"
#include "tsgraph/ops.hpp"

namespace tsgraph {

/// Stable, named traversal of a model's learnable tensors and persistent
/// buffers (batch-norm running statistics). Serialization, optimizers and
/// parameter counting all go through this.
struct ParamVisitor {
  virtual ~ParamVisitor() = default;
  virtual void param(const std::string& name, Tensor& t) = 0;
  virtual void buffer(const std::string& /*name*/, std::vector<double>& /*data*/) {}
};

enum class LayerKind { Tcn, Gnn };
enum class GconvKind { Sage, Gcn, Gat };
enum class DownsampleKind { Average, Max, Graph };

Tensor init_uniform(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng);

struct LinearLayer {
  Tensor weight;  // [out, in]
  Tensor bias;    // [out]
  static LinearLayer init(std::size_t in, std::size_t out, Rng& rng);
  Tensor forward(const Tensor& x) const { return linear(x, weight, bias); }
  void visit(const std::string& prefix, ParamVisitor& v);
};

struct ConvLayer {
  Conv1dParams params;
  static ConvLayer init(std::size_t in, std::size_t out, std::size_t f,
                        std::size_t dilation, bool causal, Rng& rng);
  Tensor forward(const Tensor& x, std::size_t segments) const {
    return conv1d(x, params, segments);
  }
  void visit(const std::string& prefix, ParamVisitor& v);
};

struct SageLayer {
  Tensor weight;       // neighbor transform
  Tensor self_weight;  // separate self transform
  Tensor bias;
  Alpha alpha = Alpha::Tail;
  static SageLayer init(std::size_t in, std::size_t out, Alpha alpha, Rng& rng);
  Tensor forward(const Tensor& x, const Digraph& g) const;
  void visit(const std::string& prefix, ParamVisitor& v);
};

struct GcnLayer {
  Tensor weight;
  Tensor bias;
  Alpha alpha = Alpha::Tail;
  static GcnLayer init(std::size_t in, std::size_t out, Alpha alpha, Rng& rng);
  Tensor forward(const Tensor& x, const Digraph& g) const;
  void visit(const std::string& prefix, ParamVisitor& v);
};

struct GatLayer {
  GatParams params;
  Alpha alpha = Alpha::Tail;
  std::size_t out_dim = 0;
  static GatLayer init(std::size_t in, std::size_t out, std::size_t heads,
                       GatMerge merge, Alpha alpha, Rng& rng);
  Tensor forward(const Tensor& x, const Digraph& g) const;
  void visit(const std::string& prefix, ParamVisitor& v);
};

struct BatchNormLayer {
  BatchNormState state;
  explicit BatchNormLayer(std::size_t channels) : state(channels) {}
  Tensor forward(const Tensor& x, bool train) { return batch_norm(x, state, train); }
  void visit(const std::string& prefix, ParamVisitor& v);
};

/// Per-layer channel plan of the skip-connections block. TCN layers use the
/// doubling dilations 2^0..2^{n-1}; GNN layers are single graph convolutions.
struct SkipBlockConfig {
  LayerKind layer_kind = LayerKind::Tcn;
  std::vector<std::size_t> channels;   // per-layer output channels
  std::vector<std::size_t> skip_dims;  // per-layer skip projection width
  std::size_t kernel_size = 7;
  GconvKind gconv_kind = GconvKind::Sage;
  Alpha alpha = Alpha::Tail;
  double dropout = 0.1;
};

/// n layers of (dilated causal conv | graph conv + activation), each followed
/// by a kernel-1 projection to its skip dimension and an activation; the
/// projected tensor feeds the next layer and all n of them are concatenated
/// channel-wise as the block output. Zero layers degenerate to the identity.
class SkipBlock {
 public:
  SkipBlock() = default;
  SkipBlock(const SkipBlockConfig& cfg, std::size_t in_channels, Rng& rng);

  Tensor forward(const Tensor& x, const Digraph* graph, std::size_t segments,
                 bool train, Rng& rng);
  std::size_t output_channels(std::size_t in_channels) const;
  bool needs_graph() const { return cfg_.layer_kind == LayerKind::Gnn; }
  void visit(const std::string& prefix, ParamVisitor& v);

 private:
  struct Layer {
    std::optional<ConvLayer> tcn;
    std::optional<SageLayer> gnn;
    std::optional<BatchNormLayer> inner_bn;  // GNN mode, after the inner activation
    ConvLayer projection;
    BatchNormLayer projection_bn;
    Layer() : projection_bn(0) {}
  };
  SkipBlockConfig cfg_;
  std::vector<Layer> layers_;
};

/// The graph convolutions that follow a skip block: dims lists each
/// convolution's output width; a GAT stack concatenates heads on hidden
/// layers and averages them on the last one.
struct GconvStackConfig {
  GconvKind kind = GconvKind::Sage;
  std::size_t heads = 2;
  std::vector<std::size_t> dims;
  Alpha alpha = Alpha::Tail;
};

class GconvStack {
 public:
  GconvStack() = default;
  GconvStack(const GconvStackConfig& cfg, std::size_t in_channels, Rng& rng);
  Tensor forward(const Tensor& x, const Digraph& g) const;  // SiLU after each conv
  bool empty() const { return layers_.empty(); }
  std::size_t output_channels(std::size_t in_channels) const;
  void visit(const std::string& prefix, ParamVisitor& v);

 private:
  using AnyGconv = std::variant<SageLayer, GcnLayer, GatLayer>;
  std::vector<AnyGconv> layers_;
};

struct EncoderConfig {
  SkipBlockConfig skip;
  GconvStackConfig gconvs;  // empty dims = absent
  std::optional<std::size_t> bottleneck_channels;  // kernel-1 channel adjust
  bool tail_conv = false;  // extra dilation-1 causal conv after the graph convolutions
  std::size_t tail_conv_kernel = 8;
  DownsampleKind downsample = DownsampleKind::Average;
  std::size_t shrink = 1;
};

/// skip block -> graph convolutions -> optional kernel-1 conv -> pool by s.
class Encoder {
 public:
  Encoder() = default;
  Encoder(const EncoderConfig& cfg, std::size_t in_channels, Rng& rng);

  /// x: [segments*len, in]; fine_graph spans segments*len nodes (may be null
  /// for pure TCN encoders). Output has segments*len/s rows.
  Tensor forward(const Tensor& x, const Digraph* fine_graph, std::size_t segments,
                 bool train, Rng& rng);
  std::size_t output_channels() const { return out_channels_; }
  std::size_t shrink() const { return cfg_.shrink; }
  bool needs_graph() const;
  void visit(const std::string& prefix, ParamVisitor& v);

 private:
  EncoderConfig cfg_;
  std::size_t in_channels_ = 0;
  std::size_t out_channels_ = 0;
  SkipBlock skip_;
  GconvStack gconvs_;
  std::optional<ConvLayer> bottleneck_;
  std::optional<ConvLayer> tail_;
};

struct DecoderConfig {
  std::size_t upsample = 1;
  GconvStackConfig gconvs;
  SkipBlockConfig skip;
  std::size_t out_channels = 1;
};

/// upsample -> graph convolutions -> skip block -> kernel-1 conv back to the
/// input channel count.
class Decoder {
 public:
  Decoder() = default;
  Decoder(const DecoderConfig& cfg, std::size_t in_channels, Rng& rng);

  Tensor forward(const Tensor& x, const Digraph* full_graph, std::size_t segments,
                 bool train, Rng& rng);
  std::size_t upsample() const { return cfg_.upsample; }
  bool needs_graph() const;
  void visit(const std::string& prefix, ParamVisitor& v);

 private:
  DecoderConfig cfg_;
  GconvStack gconvs_;
  SkipBlock skip_;
  ConvLayer final_conv_;
};

/// Series digraphs for (segment length, segment count) pairs, memoized;
/// batches run on disjoint unions of the per-segment graph.
class SeriesGraphCache {
 public:
  SeriesGraphCache() = default;
  explicit SeriesGraphCache(TimeDigraphSpec spec) : spec_(spec) {}
  const Digraph& get(std::size_t seg_len, std::size_t segments);
  const TimeDigraphSpec& spec() const { return spec_; }

 private:
  TimeDigraphSpec spec_;
  std::map<std::pair<std::size_t, std::size_t>, Digraph> cache_;
};

}  // namespace tsgraph

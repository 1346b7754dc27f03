#include "tsgraph/blocks.hpp"

#include <cmath>
#include <stdexcept>

namespace tsgraph {

Tensor init_uniform(std::vector<std::size_t> shape, std::size_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in == 0 ? 1 : fan_in));
  return Tensor::uniform(std::move(shape), -bound, bound, rng, /*requires_grad=*/true);
}

LinearLayer LinearLayer::init(std::size_t in, std::size_t out, Rng& rng) {
  LinearLayer l;
  l.weight = init_uniform({out, in}, in, rng);
  l.bias = init_uniform({out}, in, rng);
  return l;
}

void LinearLayer::visit(const std::string& prefix, ParamVisitor& v) {
  v.param(prefix + ".weight", weight);
  v.param(prefix + ".bias", bias);
}

ConvLayer ConvLayer::init(std::size_t in, std::size_t out, std::size_t f,
                          std::size_t dilation, bool causal, Rng& rng) {
  ConvLayer l;
  l.params.kernel = init_uniform({out, in, f}, in * f, rng);
  l.params.bias = init_uniform({out}, in * f, rng);
  l.params.dilation = dilation;
  l.params.causal = causal;
  return l;
}

void ConvLayer::visit(const std::string& prefix, ParamVisitor& v) {
  v.param(prefix + ".kernel", params.kernel);
  v.param(prefix + ".bias", params.bias);
}

SageLayer SageLayer::init(std::size_t in, std::size_t out, Alpha alpha, Rng& rng) {
  SageLayer l;
  l.weight = init_uniform({out, in}, in, rng);
  l.self_weight = init_uniform({out, in}, in, rng);
  l.bias = init_uniform({out}, in, rng);
  l.alpha = alpha;
  return l;
}

Tensor SageLayer::forward(const Tensor& x, const Digraph& g) const {
  MessagePassingSpec spec = sage_spec(weight, self_weight, bias, alpha);
  return linear_message_passing({g, x}, spec).features;
}

void SageLayer::visit(const std::string& prefix, ParamVisitor& v) {
  v.param(prefix + ".weight", weight);
  v.param(prefix + ".self_weight", self_weight);
  v.param(prefix + ".bias", bias);
}

GcnLayer GcnLayer::init(std::size_t in, std::size_t out, Alpha alpha, Rng& rng) {
  GcnLayer l;
  l.weight = init_uniform({out, in}, in, rng);
  l.bias = init_uniform({out}, in, rng);
  l.alpha = alpha;
  return l;
}

Tensor GcnLayer::forward(const Tensor& x, const Digraph& g) const {
  MessagePassingSpec spec = gcn_spec(weight, bias, alpha);
  return linear_message_passing({g, x}, spec).features;
}

void GcnLayer::visit(const std::string& prefix, ParamVisitor& v) {
  v.param(prefix + ".weight", weight);
  v.param(prefix + ".bias", bias);
}

GatLayer GatLayer::init(std::size_t in, std::size_t out, std::size_t heads,
                        GatMerge merge, Alpha alpha, Rng& rng) {
  if (heads == 0) throw std::invalid_argument("GatLayer: heads must be positive");
  if (merge == GatMerge::Concat && out % heads != 0) {
    throw std::invalid_argument("GatLayer: heads must divide output dim for concat");
  }
  const std::size_t head_dim = merge == GatMerge::Concat ? out / heads : out;
  GatLayer l;
  l.alpha = alpha;
  l.out_dim = out;
  l.params.heads = heads;
  l.params.merge = merge;
  for (std::size_t h = 0; h < heads; ++h) {
    l.params.head_weights.push_back(init_uniform({head_dim, in}, in, rng));
    l.params.head_attention.push_back(init_uniform({2 * head_dim}, 2 * head_dim, rng));
  }
  l.params.bias = init_uniform({out}, in, rng);
  return l;
}

Tensor GatLayer::forward(const Tensor& x, const Digraph& g) const {
  return gat_conv({g, x}, params, alpha).features;
}

void GatLayer::visit(const std::string& prefix, ParamVisitor& v) {
  for (std::size_t h = 0; h < params.heads; ++h) {
    const std::string head = prefix + ".head" + std::to_string(h);
    v.param(head + ".weight", params.head_weights[h]);
    v.param(head + ".attention", params.head_attention[h]);
  }
  v.param(prefix + ".bias", params.bias);
}

void BatchNormLayer::visit(const std::string& prefix, ParamVisitor& v) {
  v.param(prefix + ".gamma", state.gamma);
  v.param(prefix + ".beta", state.beta);
  v.buffer(prefix + ".running_mean", state.running_mean);
  v.buffer(prefix + ".running_var", state.running_var);
}

// ---------------------------------------------------------------------------
// SkipBlock

SkipBlock::SkipBlock(const SkipBlockConfig& cfg, std::size_t in_channels, Rng& rng)
    : cfg_(cfg) {
  if (cfg.channels.size() != cfg.skip_dims.size()) {
    throw std::invalid_argument("SkipBlock: channels and skip_dims must align");
  }
  std::size_t in = in_channels;
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    Layer layer;
    const std::size_t out = cfg.channels[i];
    if (cfg.layer_kind == LayerKind::Tcn) {
      layer.tcn = ConvLayer::init(in, out, cfg.kernel_size, std::size_t{1} << i,
                                  /*causal=*/true, rng);
    } else {
      if (cfg.gconv_kind != GconvKind::Sage) {
        throw std::invalid_argument("SkipBlock: gnn layers use Sage convolutions");
      }
      layer.gnn = SageLayer::init(in, out, cfg.alpha, rng);
      layer.inner_bn.emplace(out);
    }
    layer.projection = ConvLayer::init(out, cfg.skip_dims[i], 1, 1, true, rng);
    layer.projection_bn = BatchNormLayer(cfg.skip_dims[i]);
    layers_.push_back(std::move(layer));
    in = cfg.skip_dims[i];
  }
}

Tensor SkipBlock::forward(const Tensor& x, const Digraph* graph,
                          std::size_t segments, bool train, Rng& rng) {
  if (layers_.empty()) return x;
  if (needs_graph() && graph == nullptr) {
    throw std::invalid_argument("SkipBlock: gnn mode requires a graph");
  }
  if (graph && graph->num_nodes() != x.rows()) {
    throw std::invalid_argument("SkipBlock: graph node count does not match length");
  }
  std::vector<Tensor> stored;
  stored.reserve(layers_.size());
  Tensor h = x;
  for (Layer& layer : layers_) {
    Tensor inner;
    if (layer.tcn) {
      inner = layer.tcn->forward(h, segments);
    } else {
      inner = silu(layer.gnn->forward(h, *graph));
      inner = layer.inner_bn->forward(inner, train);
      inner = dropout(inner, cfg_.dropout, train, rng);
    }
    Tensor s = silu(layer.projection.forward(inner, segments));
    s = layer.projection_bn.forward(s, train);
    s = dropout(s, cfg_.dropout, train, rng);
    stored.push_back(s);
    h = s;
  }
  return stored.size() == 1 ? stored[0] : concat_cols(stored);
}

std::size_t SkipBlock::output_channels(std::size_t in_channels) const {
  if (layers_.empty()) return in_channels;
  std::size_t total = 0;
  for (std::size_t d : cfg_.skip_dims) total += d;
  return total;
}

void SkipBlock::visit(const std::string& prefix, ParamVisitor& v) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string base = prefix + ".layer" + std::to_string(i);
    Layer& layer = layers_[i];
    if (layer.tcn) layer.tcn->visit(base + ".inner", v);
    if (layer.gnn) layer.gnn->visit(base + ".inner", v);
    if (layer.inner_bn) layer.inner_bn->visit(base + ".inner_bn", v);
    layer.projection.visit(base + ".proj", v);
    layer.projection_bn.visit(base + ".proj_bn", v);
  }
}

// ---------------------------------------------------------------------------
// GconvStack

GconvStack::GconvStack(const GconvStackConfig& cfg, std::size_t in_channels, Rng& rng) {
  std::size_t in = in_channels;
  for (std::size_t i = 0; i < cfg.dims.size(); ++i) {
    const std::size_t out = cfg.dims[i];
    const bool last = i + 1 == cfg.dims.size();
    switch (cfg.kind) {
      case GconvKind::Sage:
        layers_.emplace_back(SageLayer::init(in, out, cfg.alpha, rng));
        break;
      case GconvKind::Gcn:
        layers_.emplace_back(GcnLayer::init(in, out, cfg.alpha, rng));
        break;
      case GconvKind::Gat:
        layers_.emplace_back(GatLayer::init(
            in, out, cfg.heads, last ? GatMerge::Average : GatMerge::Concat,
            cfg.alpha, rng));
        break;
    }
    in = out;
  }
}

Tensor GconvStack::forward(const Tensor& x, const Digraph& g) const {
  Tensor h = x;
  for (const AnyGconv& layer : layers_) {
    h = std::visit([&](const auto& l) { return l.forward(h, g); }, layer);
    h = silu(h);
  }
  return h;
}

std::size_t GconvStack::output_channels(std::size_t in_channels) const {
  if (layers_.empty()) return in_channels;
  return std::visit(
      [](const auto& l) -> std::size_t {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, GatLayer>) {
          return l.out_dim;
        } else {
          return l.weight.shape()[0];
        }
      },
      layers_.back());
}

void GconvStack::visit(const std::string& prefix, ParamVisitor& v) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const std::string base = prefix + ".gconv" + std::to_string(i);
    std::visit([&](auto& l) { l.visit(base, v); }, layers_[i]);
  }
}

// ---------------------------------------------------------------------------
// Encoder

Encoder::Encoder(const EncoderConfig& cfg, std::size_t in_channels, Rng& rng)
    : cfg_(cfg), in_channels_(in_channels) {
  if (cfg.shrink < 1) throw std::invalid_argument("Encoder: shrink must be positive");
  skip_ = SkipBlock(cfg.skip, in_channels, rng);
  std::size_t ch = skip_.output_channels(in_channels);
  if (!cfg.gconvs.dims.empty()) {
    gconvs_ = GconvStack(cfg.gconvs, ch, rng);
    ch = gconvs_.output_channels(ch);
  }
  if (cfg.bottleneck_channels) {
    bottleneck_ = ConvLayer::init(ch, *cfg.bottleneck_channels, 1, 1, true, rng);
    ch = *cfg.bottleneck_channels;
  }
  if (cfg.tail_conv) {
    tail_ = ConvLayer::init(ch, ch, cfg.tail_conv_kernel, 1, true, rng);
  }
  out_channels_ = ch;
}

bool Encoder::needs_graph() const { return skip_.needs_graph() || !gconvs_.empty(); }

Tensor Encoder::forward(const Tensor& x, const Digraph* fine_graph,
                        std::size_t segments, bool train, Rng& rng) {
  if (needs_graph() && fine_graph == nullptr) {
    throw std::invalid_argument("Encoder: configuration requires a graph");
  }
  const std::size_t seg_len = x.rows() / segments;
  if (seg_len % cfg_.shrink != 0) {
    throw std::invalid_argument("Encoder: shrink does not divide temporal length");
  }
  Tensor h = skip_.forward(x, fine_graph, segments, train, rng);
  if (!gconvs_.empty()) h = gconvs_.forward(h, *fine_graph);
  if (bottleneck_) h = silu(bottleneck_->forward(h, segments));
  if (tail_) h = silu(tail_->forward(h, segments));
  switch (cfg_.downsample) {
    case DownsampleKind::Max:
      return pool_shrink(h, cfg_.shrink, PoolMode::Max);
    case DownsampleKind::Average:
    case DownsampleKind::Graph:
      // graph downsampling aggregates each run of s nodes onto one coarse
      // node with uniform weights, which is the windowed mean
      return pool_shrink(h, cfg_.shrink, PoolMode::Average);
  }
  throw std::logic_error("Encoder: unknown downsample kind");
}

void Encoder::visit(const std::string& prefix, ParamVisitor& v) {
  skip_.visit(prefix + ".skip", v);
  gconvs_.visit(prefix, v);
  if (bottleneck_) bottleneck_->visit(prefix + ".bottleneck", v);
  if (tail_) tail_->visit(prefix + ".tail", v);
}

// ---------------------------------------------------------------------------
// Decoder

Decoder::Decoder(const DecoderConfig& cfg, std::size_t in_channels, Rng& rng)
    : cfg_(cfg) {
  std::size_t ch = in_channels;
  if (!cfg.gconvs.dims.empty()) {
    gconvs_ = GconvStack(cfg.gconvs, ch, rng);
    ch = gconvs_.output_channels(ch);
  }
  skip_ = SkipBlock(cfg.skip, ch, rng);
  ch = skip_.output_channels(ch);
  final_conv_ = ConvLayer::init(ch, cfg.out_channels, 1, 1, true, rng);
}

bool Decoder::needs_graph() const { return skip_.needs_graph() || !gconvs_.empty(); }

Tensor Decoder::forward(const Tensor& x, const Digraph* full_graph,
                        std::size_t segments, bool train, Rng& rng) {
  if (needs_graph() && full_graph == nullptr) {
    throw std::invalid_argument("Decoder: configuration requires a graph");
  }
  Tensor h = upsample_nearest(x, cfg_.upsample);
  if (!gconvs_.empty()) h = gconvs_.forward(h, *full_graph);
  h = skip_.forward(h, full_graph, segments, train, rng);
  return final_conv_.forward(h, segments);
}

void Decoder::visit(const std::string& prefix, ParamVisitor& v) {
  gconvs_.visit(prefix, v);
  skip_.visit(prefix + ".skip", v);
  final_conv_.visit(prefix + ".final", v);
}

const Digraph& SeriesGraphCache::get(std::size_t seg_len, std::size_t segments) {
  const auto key = std::make_pair(seg_len, segments);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  Digraph base = build_series_digraph(seg_len, spec_);
  Digraph batched = Digraph::disjoint_copies(base, segments);
  return cache_.emplace(key, std::move(batched)).first->second;
}

}  // namespace tsgraph

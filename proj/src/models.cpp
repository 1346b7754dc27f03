#include "tsgraph/models.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace tsgraph {

using nlohmann::json;

namespace {

constexpr std::size_t kSupervisedKernel = 8;
constexpr std::size_t kAutoencoderKernel = 7;
constexpr std::size_t kUnsupervisedLookback = 25;

TimeDigraphSpec supervised_graph_spec() {
  TimeDigraphSpec spec;
  spec.stride = 4;
  spec.count_bound = 32;  // lookback 128
  spec.include_adjacent = true;
  return spec;
}

TimeDigraphSpec unsupervised_graph_spec(std::size_t stride_d) {
  if (stride_d < 1) throw std::invalid_argument("graph stride must be positive");
  TimeDigraphSpec spec;
  spec.stride = stride_d;
  spec.count_bound = (kUnsupervisedLookback + stride_d - 1) / stride_d;
  spec.include_adjacent = true;
  return spec;
}

SkipBlockConfig tcn_skip(std::vector<std::size_t> channels,
                         std::vector<std::size_t> skip_dims, std::size_t kernel) {
  SkipBlockConfig cfg;
  cfg.layer_kind = LayerKind::Tcn;
  cfg.channels = std::move(channels);
  cfg.skip_dims = std::move(skip_dims);
  cfg.kernel_size = kernel;
  return cfg;
}

SkipBlockConfig gnn_skip(std::vector<std::size_t> channels,
                         std::vector<std::size_t> skip_dims) {
  SkipBlockConfig cfg;
  cfg.layer_kind = LayerKind::Gnn;
  cfg.gconv_kind = GconvKind::Sage;
  cfg.channels = std::move(channels);
  cfg.skip_dims = std::move(skip_dims);
  return cfg;
}

GconvStackConfig gconv_stack(GconvKind kind, std::vector<std::size_t> dims,
                             std::size_t heads = 2) {
  GconvStackConfig cfg;
  cfg.kind = kind;
  cfg.dims = std::move(dims);
  cfg.heads = heads;
  return cfg;
}

std::vector<std::size_t> repeat(std::size_t value, std::size_t count) {
  return std::vector<std::size_t>(count, value);
}

}  // namespace

const std::vector<std::string>& classifier_model_names() {
  static const std::vector<std::string> names = {
      "TGraphClassifier", "TCNGraphClassifier", "TCNClassifier"};
  return names;
}

const std::vector<std::string>& autoencoder_model_names() {
  static const std::vector<std::string> names = {
      "TGraphMixedAE", "TGraphAE", "TCNGraphAE1",
      "TCNGraphAE2",   "TCNAE1",   "TCNAE2"};
  return names;
}

bool is_classifier_model(const std::string& name) {
  const auto& names = classifier_model_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

bool is_autoencoder_model(const std::string& name) {
  const auto& names = autoencoder_model_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ClassifierConfig make_classifier_config(const std::string& name,
                                        std::size_t input_length,
                                        std::size_t input_channels) {
  ClassifierConfig cfg;
  cfg.name = name;
  cfg.input_length = input_length;
  cfg.input_channels = input_channels;
  cfg.graph = supervised_graph_spec();
  cfg.num_classes = 2;
  EncoderConfig& enc = cfg.encoder;
  enc.shrink = 16;
  enc.downsample = DownsampleKind::Average;

  if (name == "TGraphClassifier") {
    enc.skip = gnn_skip(repeat(32, 4), repeat(16, 4));
    enc.gconvs = gconv_stack(GconvKind::Sage, {16});
    enc.tail_conv = true;  // trailing dilation-1 convolution
    enc.tail_conv_kernel = kSupervisedKernel;
    cfg.readout = Readout::MeanPool;
    cfg.mlp_dims = {};
  } else if (name == "TCNGraphClassifier") {
    enc.skip = tcn_skip(repeat(32, 7), repeat(16, 7), kSupervisedKernel);
    enc.gconvs = gconv_stack(GconvKind::Sage, {2});
    cfg.readout = Readout::Flatten;
    cfg.mlp_dims = {};
  } else if (name == "TCNClassifier") {
    enc.skip = tcn_skip(repeat(32, 4), repeat(16, 4), kSupervisedKernel);
    cfg.readout = Readout::Flatten;
    cfg.mlp_dims = {30, 30};
  } else {
    throw std::invalid_argument("unknown classifier model: " + name);
  }
  return cfg;
}

AutoencoderConfig make_autoencoder_config(const std::string& name,
                                          std::size_t input_length,
                                          std::size_t input_channels,
                                          std::size_t stride_d) {
  AutoencoderConfig cfg;
  cfg.name = name;
  cfg.input_length = input_length;
  cfg.input_channels = input_channels;
  cfg.graph = unsupervised_graph_spec(stride_d);
  EncoderConfig& enc = cfg.encoder;
  DecoderConfig& dec = cfg.decoder;
  dec.out_channels = input_channels;

  if (name == "TGraphMixedAE") {
    enc.skip = gnn_skip(repeat(64, 7), repeat(32, 7));
    enc.gconvs = gconv_stack(GconvKind::Sage, {2});
    enc.downsample = DownsampleKind::Graph;
    enc.shrink = 16;
    dec.skip = tcn_skip(repeat(64, 7), repeat(32, 7), kAutoencoderKernel);
  } else if (name == "TGraphAE") {
    enc.skip = gnn_skip(repeat(64, 4), repeat(32, 4));
    enc.gconvs = gconv_stack(GconvKind::Gat, {2});
    enc.downsample = DownsampleKind::Average;
    enc.shrink = 16;
    dec.gconvs = gconv_stack(GconvKind::Gat, {2});
    dec.skip = gnn_skip(repeat(64, 4), repeat(32, 4));
  } else if (name == "TCNGraphAE1") {
    enc.skip = tcn_skip(repeat(32, 3), repeat(16, 3), kAutoencoderKernel);
    enc.gconvs = gconv_stack(GconvKind::Gat, {100, 2});
    enc.downsample = DownsampleKind::Graph;
    enc.shrink = 32;
    dec.gconvs = gconv_stack(GconvKind::Gat, {100, 2});
    dec.skip = tcn_skip(repeat(32, 3), repeat(16, 3), kAutoencoderKernel);
  } else if (name == "TCNGraphAE2") {
    enc.skip = tcn_skip(repeat(64, 7), repeat(32, 7), kAutoencoderKernel);
    enc.gconvs = gconv_stack(GconvKind::Gat, {100, 4});
    enc.downsample = DownsampleKind::Graph;
    enc.shrink = 32;
    dec.gconvs = gconv_stack(GconvKind::Gat, {100, 4});
    dec.skip = tcn_skip(repeat(64, 7), repeat(32, 7), kAutoencoderKernel);
  } else if (name == "TCNAE1") {
    enc.skip = tcn_skip(repeat(32, 3), repeat(16, 3), kAutoencoderKernel);
    enc.bottleneck_channels = 2;
    enc.downsample = DownsampleKind::Max;
    enc.shrink = 32;
    dec.skip = tcn_skip(repeat(32, 3), repeat(16, 3), kAutoencoderKernel);
  } else if (name == "TCNAE2") {
    enc.skip = tcn_skip(repeat(64, 7), repeat(32, 7), kAutoencoderKernel);
    enc.bottleneck_channels = 4;
    enc.downsample = DownsampleKind::Average;
    enc.shrink = 32;
    dec.skip = tcn_skip(repeat(64, 7), repeat(32, 7), kAutoencoderKernel);
  } else {
    throw std::invalid_argument("unknown autoencoder model: " + name);
  }
  dec.upsample = enc.shrink;
  return cfg;
}

// ---------------------------------------------------------------------------
// Classifier

Classifier::Classifier(ClassifierConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), graphs_(cfg_.graph), rng_(seed) {
  Rng init_rng(seed);
  encoder_ = Encoder(cfg_.encoder, cfg_.input_channels, init_rng);
  std::size_t readout_dim;
  if (cfg_.readout == Readout::Flatten) {
    readout_dim = (cfg_.input_length / cfg_.encoder.shrink) * encoder_.output_channels();
  } else {
    readout_dim = encoder_.output_channels();
  }
  std::size_t in = readout_dim;
  for (std::size_t h : cfg_.mlp_dims) {
    mlp_.push_back(LinearLayer::init(in, h, init_rng));
    in = h;
  }
  mlp_.push_back(LinearLayer::init(in, cfg_.num_classes, init_rng));
}

Tensor Classifier::logits(const Tensor& x, std::size_t segments, bool train) {
  if (segments == 0 || x.rows() % segments != 0) {
    throw std::invalid_argument("Classifier: rows not divisible into segments");
  }
  const std::size_t seg_len = x.rows() / segments;
  const Digraph* graph =
      encoder_.needs_graph() ? &graphs_.get(seg_len, segments) : nullptr;
  Tensor h = encoder_.forward(x, graph, segments, train, rng_);
  const std::size_t rows_per_seg = seg_len / encoder_.shrink();
  if (cfg_.readout == Readout::Flatten) {
    h = reshape(h, {segments, rows_per_seg * encoder_.output_channels()});
  } else {
    h = pool_shrink(h, rows_per_seg, PoolMode::Average);
  }
  for (std::size_t i = 0; i + 1 < mlp_.size(); ++i) h = silu(mlp_[i].forward(h));
  return mlp_.back().forward(h);
}

Tensor Classifier::probabilities(const Tensor& x, std::size_t segments) {
  return softmax_rows(logits(x, segments, /*train=*/false));
}

void Classifier::visit(ParamVisitor& v) {
  encoder_.visit("encoder", v);
  for (std::size_t i = 0; i < mlp_.size(); ++i) {
    mlp_[i].visit("mlp." + std::to_string(i), v);
  }
}

namespace {

struct ParamCollector : ParamVisitor {
  std::vector<std::pair<std::string, Tensor*>> params;
  std::vector<std::pair<std::string, std::vector<double>*>> buffers;
  void param(const std::string& name, Tensor& t) override {
    params.emplace_back(name, &t);
  }
  void buffer(const std::string& name, std::vector<double>& d) override {
    buffers.emplace_back(name, &d);
  }
};

}  // namespace

std::vector<Tensor> Classifier::parameters() {
  ParamCollector c;
  visit(c);
  std::vector<Tensor> out;
  out.reserve(c.params.size());
  for (auto& [name, t] : c.params) out.push_back(*t);
  return out;
}

// ---------------------------------------------------------------------------
// Autoencoder

Autoencoder::Autoencoder(AutoencoderConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)), graphs_(cfg_.graph), rng_(seed) {
  Rng init_rng(seed);
  encoder_ = Encoder(cfg_.encoder, cfg_.input_channels, init_rng);
  decoder_ = Decoder(cfg_.decoder, encoder_.output_channels(), init_rng);
  if (cfg_.decoder.upsample != cfg_.encoder.shrink) {
    throw std::invalid_argument("Autoencoder: upsample factor must equal shrink");
  }
}

Tensor Autoencoder::encode(const Tensor& x, std::size_t segments, bool train) {
  if (segments == 0 || x.rows() % segments != 0) {
    throw std::invalid_argument("Autoencoder: rows not divisible into segments");
  }
  const std::size_t seg_len = x.rows() / segments;
  const Digraph* graph =
      encoder_.needs_graph() ? &graphs_.get(seg_len, segments) : nullptr;
  return encoder_.forward(x, graph, segments, train, rng_);
}

Tensor Autoencoder::reconstruct(const Tensor& x, std::size_t segments, bool train) {
  const std::size_t seg_len = segments == 0 ? 0 : x.rows() / segments;
  Tensor z = encode(x, segments, train);
  const Digraph* graph =
      decoder_.needs_graph() ? &graphs_.get(seg_len, segments) : nullptr;
  return decoder_.forward(z, graph, segments, train, rng_);
}

void Autoencoder::visit(ParamVisitor& v) {
  encoder_.visit("encoder", v);
  decoder_.visit("decoder", v);
}

std::vector<Tensor> Autoencoder::parameters() {
  ParamCollector c;
  visit(c);
  std::vector<Tensor> out;
  out.reserve(c.params.size());
  for (auto& [name, t] : c.params) out.push_back(*t);
  return out;
}

// ---------------------------------------------------------------------------
// parameter counting and serialization

namespace {

template <typename Model>
long long count_params_impl(Model& model) {
  ParamCollector c;
  model.visit(c);
  long long total = 0;
  for (auto& [name, t] : c.params) total += static_cast<long long>(t->size());
  return total;
}

json graph_to_json(const TimeDigraphSpec& spec) {
  return json{{"stride", spec.stride},
              {"count_bound", spec.count_bound},
              {"include_adjacent", spec.include_adjacent}};
}

TimeDigraphSpec graph_from_json(const json& j) {
  TimeDigraphSpec spec;
  spec.stride = j.at("stride").get<std::size_t>();
  spec.count_bound = j.at("count_bound").get<std::size_t>();
  spec.include_adjacent = j.at("include_adjacent").get<bool>();
  return spec;
}

template <typename Model>
void save_model_impl(Model& model, const std::filesystem::path& dir,
                     const std::string& kind, const std::string& name,
                     std::size_t input_length, std::size_t input_channels,
                     const TimeDigraphSpec& graph) {
  std::filesystem::create_directories(dir);
  ParamCollector c;
  model.visit(c);

  json manifest = json::array();
  std::ofstream bin(dir / "params.bin", std::ios::binary | std::ios::trunc);
  if (!bin) throw std::runtime_error("save_model: cannot open params.bin");
  std::size_t offset = 0;
  auto dump = [&](const std::string& pname, const std::vector<std::size_t>& shape,
                  const std::vector<double>& data, const char* entry_kind) {
    manifest.push_back(json{{"name", pname},
                            {"shape", shape},
                            {"offset", offset},
                            {"kind", entry_kind}});
    bin.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
    offset += data.size() * sizeof(double);
  };
  for (auto& [pname, t] : c.params) dump(pname, t->shape(), t->values(), "param");
  for (auto& [bname, d] : c.buffers) dump(bname, {d->size()}, *d, "buffer");
  bin.close();

  json doc{{"format_version", 1},
           {"kind", kind},
           {"name", name},
           {"input_length", input_length},
           {"input_channels", input_channels},
           {"graph", graph_to_json(graph)},
           {"params_file", "params.bin"},
           {"manifest", manifest}};
  std::ofstream js(dir / "model.json", std::ios::trunc);
  if (!js) throw std::runtime_error("save_model: cannot open model.json");
  js << doc.dump(2) << '\n';
}

json read_model_doc(const std::filesystem::path& dir) {
  std::ifstream js(dir / "model.json");
  if (!js) throw std::runtime_error("load_model: missing model.json in " + dir.string());
  json doc = json::parse(js);
  if (doc.at("format_version").get<int>() != 1) {
    throw std::runtime_error("load_model: unsupported format version");
  }
  return doc;
}

template <typename Model>
void load_params_impl(Model& model, const std::filesystem::path& dir, const json& doc) {
  ParamCollector c;
  model.visit(c);
  std::ifstream bin(dir / doc.at("params_file").get<std::string>(), std::ios::binary);
  if (!bin) throw std::runtime_error("load_model: cannot open params file");

  auto read_into = [&](std::size_t offset, std::vector<double>& out) {
    bin.seekg(static_cast<std::streamoff>(offset));
    bin.read(reinterpret_cast<char*>(out.data()),
             static_cast<std::streamsize>(out.size() * sizeof(double)));
    if (!bin) throw std::runtime_error("load_model: truncated params file");
  };

  std::size_t applied = 0;
  for (const json& entry : doc.at("manifest")) {
    const std::string name = entry.at("name").get<std::string>();
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    const std::string kind = entry.at("kind").get<std::string>();
    if (kind == "param") {
      auto it = std::find_if(c.params.begin(), c.params.end(),
                             [&](const auto& p) { return p.first == name; });
      if (it == c.params.end()) {
        throw std::runtime_error("load_model: unknown parameter " + name);
      }
      const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
      if (shape != it->second->shape()) {
        throw std::runtime_error("load_model: shape mismatch for " + name);
      }
      read_into(offset, it->second->values_mut());
    } else {
      auto it = std::find_if(c.buffers.begin(), c.buffers.end(),
                             [&](const auto& p) { return p.first == name; });
      if (it == c.buffers.end()) {
        throw std::runtime_error("load_model: unknown buffer " + name);
      }
      read_into(offset, *it->second);
    }
    ++applied;
  }
  if (applied != c.params.size() + c.buffers.size()) {
    throw std::runtime_error("load_model: manifest does not cover every array");
  }
}

}  // namespace

long long count_params(Classifier& model) { return count_params_impl(model); }
long long count_params(Autoencoder& model) { return count_params_impl(model); }

void save_model(Classifier& model, const std::filesystem::path& dir) {
  const auto& cfg = model.config();
  save_model_impl(model, dir, "classifier", cfg.name, cfg.input_length,
                  cfg.input_channels, cfg.graph);
}

void save_model(Autoencoder& model, const std::filesystem::path& dir) {
  const auto& cfg = model.config();
  save_model_impl(model, dir, "autoencoder", cfg.name, cfg.input_length,
                  cfg.input_channels, cfg.graph);
}

ModelTaskKind peek_model_kind(const std::filesystem::path& dir) {
  const json doc = read_model_doc(dir);
  const std::string kind = doc.at("kind").get<std::string>();
  if (kind == "classifier") return ModelTaskKind::Classifier;
  if (kind == "autoencoder") return ModelTaskKind::Autoencoder;
  throw std::runtime_error("load_model: unknown model kind " + kind);
}

Classifier load_classifier(const std::filesystem::path& dir) {
  const json doc = read_model_doc(dir);
  if (doc.at("kind").get<std::string>() != "classifier") {
    throw std::runtime_error("load_classifier: not a classifier model");
  }
  ClassifierConfig cfg = make_classifier_config(
      doc.at("name").get<std::string>(), doc.at("input_length").get<std::size_t>(),
      doc.at("input_channels").get<std::size_t>());
  cfg.graph = graph_from_json(doc.at("graph"));
  Classifier model(std::move(cfg), /*seed=*/0);
  load_params_impl(model, dir, doc);
  return model;
}

Autoencoder load_autoencoder(const std::filesystem::path& dir) {
  const json doc = read_model_doc(dir);
  if (doc.at("kind").get<std::string>() != "autoencoder") {
    throw std::runtime_error("load_autoencoder: not an autoencoder model");
  }
  const auto graph = graph_from_json(doc.at("graph"));
  AutoencoderConfig cfg = make_autoencoder_config(
      doc.at("name").get<std::string>(), doc.at("input_length").get<std::size_t>(),
      doc.at("input_channels").get<std::size_t>(), graph.stride);
  cfg.graph = graph;
  Autoencoder model(std::move(cfg), /*seed=*/0);
  load_params_impl(model, dir, doc);
  return model;
}

}  // namespace tsgraph

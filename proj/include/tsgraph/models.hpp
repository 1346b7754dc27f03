#pragma once

#include <filesystem>
#include <string>

#include "tsgraph/blocks.hpp"

namespace tsgraph {

enum class Readout { Flatten, MeanPool };

struct ClassifierConfig {
  std::string name;  // registry name, e.g. "TGraphClassifier"
  EncoderConfig encoder;
  Readout readout = Readout::Flatten;
  std::vector<std::size_t> mlp_dims;  // empty = single linear layer
  std::size_t num_classes = 2;
  std::size_t input_length = 640;
  std::size_t input_channels = 1;
  TimeDigraphSpec graph;
};

struct AutoencoderConfig {
  std::string name;
  EncoderConfig encoder;
  DecoderConfig decoder;
  std::size_t input_length = 128;
  std::size_t input_channels = 1;
  TimeDigraphSpec graph;
};

/// Encoder -> readout (flatten | node mean) -> MLP -> class logits.
class Classifier {
 public:
  Classifier(ClassifierConfig cfg, std::uint64_t seed);

  Tensor logits(const Tensor& x, std::size_t segments, bool train);
  /// Softmax class probabilities, eval mode.
  Tensor probabilities(const Tensor& x, std::size_t segments);

  const ClassifierConfig& config() const { return cfg_; }
  void visit(ParamVisitor& v);
  std::vector<Tensor> parameters();
  Rng& dropout_rng() { return rng_; }
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

 private:
  ClassifierConfig cfg_;
  Encoder encoder_;
  std::vector<LinearLayer> mlp_;
  SeriesGraphCache graphs_;
  Rng rng_;
};

/// Encoder -> Decoder; reconstruction has the input's shape.
class Autoencoder {
 public:
  Autoencoder(AutoencoderConfig cfg, std::uint64_t seed);

  Tensor reconstruct(const Tensor& x, std::size_t segments, bool train);
  Tensor encode(const Tensor& x, std::size_t segments, bool train);

  const AutoencoderConfig& config() const { return cfg_; }
  void visit(ParamVisitor& v);
  std::vector<Tensor> parameters();
  Rng& dropout_rng() { return rng_; }
  void reseed(std::uint64_t seed) { rng_.seed(seed); }

 private:
  AutoencoderConfig cfg_;
  Encoder encoder_;
  Decoder decoder_;
  SeriesGraphCache graphs_;
  Rng rng_;
};

// Model registry: the hyperparameter-table configurations by name.
const std::vector<std::string>& classifier_model_names();
const std::vector<std::string>& autoencoder_model_names();
bool is_classifier_model(const std::string& name);
bool is_autoencoder_model(const std::string& name);

ClassifierConfig make_classifier_config(const std::string& name,
                                        std::size_t input_length = 640,
                                        std::size_t input_channels = 1);
/// stride_d: time-digraph stride (4 or 8); the connection bound is derived
/// from the 25-sample lookback window.
AutoencoderConfig make_autoencoder_config(const std::string& name,
                                          std::size_t input_length = 128,
                                          std::size_t input_channels = 1,
                                          std::size_t stride_d = 4);

/// Total learnable scalar count.
long long count_params(Classifier& model);
long long count_params(Autoencoder& model);

// Serialization: <dir>/model.json (versioned config + manifest of
// name/shape/offset) plus <dir>/params.bin (raw little-endian doubles).
// Round trips are bit exact.
void save_model(Classifier& model, const std::filesystem::path& dir);
void save_model(Autoencoder& model, const std::filesystem::path& dir);

enum class ModelTaskKind { Classifier, Autoencoder };
ModelTaskKind peek_model_kind(const std::filesystem::path& dir);
Classifier load_classifier(const std::filesystem::path& dir);
Autoencoder load_autoencoder(const std::filesystem::path& dir);

}  // namespace tsgraph

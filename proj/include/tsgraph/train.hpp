#pragma once

#include "tsgraph/models.hpp"
#include "tsgraph/optim.hpp"

namespace tsgraph {

/// One preprocessed window: len*channels samples plus its binary label and
/// the 5-second slice it came from.
struct Window {
  std::vector<double> values;
  int label = 1;              // 0 bad, 1 good
  std::size_t group_id = 0;   // 5-second slice id
  std::size_t recording_id = 0;
};

struct TrainOptions {
  std::size_t epochs = 75;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

struct TrainHistory {
  std::vector<double> epoch_loss;
};

/// Tensor [count*len, channels] from a span of windows (by index).
Tensor stack_windows(const std::vector<Window>& windows,
                     const std::vector<std::size_t>& indices, std::size_t len,
                     std::size_t channels);

/// Cross-entropy training with Adam; deterministic given the seed; throws on
/// a non-finite loss.
TrainHistory train_classifier(Classifier& model, const std::vector<Window>& data,
                              const TrainOptions& opts);

/// Reconstruction (MSE) training with Adam.
TrainHistory train_autoencoder(Autoencoder& model, const std::vector<Window>& data,
                               const TrainOptions& opts);

/// Fraction of correct class predictions, eval mode.
double classifier_accuracy(Classifier& model, const std::vector<Window>& data,
                           std::size_t batch_size = 64);

/// Per-window reconstructions, eval mode.
std::vector<std::vector<double>> reconstruct_windows(Autoencoder& model,
                                                     const std::vector<Window>& data,
                                                     std::size_t batch_size = 64);

}  // namespace tsgraph

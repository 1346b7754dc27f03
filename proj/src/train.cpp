#include "tsgraph/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tsgraph {

namespace {

void check_windows(const std::vector<Window>& data, std::size_t len,
                   std::size_t channels) {
  if (data.empty()) throw std::invalid_argument("train: dataset is empty");
  for (const Window& w : data) {
    if (w.values.size() != len * channels) {
      throw std::invalid_argument("train: window size does not match model input");
    }
  }
}

std::vector<std::vector<std::size_t>> make_batches(std::size_t count,
                                                   std::size_t batch_size, Rng& rng) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::vector<std::size_t>> batches;
  for (std::size_t start = 0; start < count; start += batch_size) {
    const std::size_t end = std::min(count, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

[[noreturn]] void abort_nan(const char* what, std::size_t epoch, std::size_t batch) {
  throw std::runtime_error(std::string(what) + ": non-finite loss at epoch " +
                           std::to_string(epoch) + ", batch " + std::to_string(batch));
}

}  // namespace

Tensor stack_windows(const std::vector<Window>& windows,
                     const std::vector<std::size_t>& indices, std::size_t len,
                     std::size_t channels) {
  std::vector<double> values;
  values.reserve(indices.size() * len * channels);
  for (std::size_t i : indices) {
    values.insert(values.end(), windows[i].values.begin(), windows[i].values.end());
  }
  return Tensor({indices.size() * len, channels}, std::move(values));
}

TrainHistory train_classifier(Classifier& model, const std::vector<Window>& data,
                              const TrainOptions& opts) {
  const std::size_t len = model.config().input_length;
  const std::size_t ch = model.config().input_channels;
  check_windows(data, len, ch);
  model.reseed(opts.seed);
  Rng shuffle_rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
  AdamState adam;
  adam.lr = opts.learning_rate;
  std::vector<Tensor> params = model.parameters();

  TrainHistory history;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t seen = 0;
    const auto batches = make_batches(data.size(), opts.batch_size, shuffle_rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& batch = batches[b];
      Tensor x = stack_windows(data, batch, len, ch);
      std::vector<int> labels;
      labels.reserve(batch.size());
      for (std::size_t i : batch) labels.push_back(data[i].label);
      Tensor logits = model.logits(x, batch.size(), /*train=*/true);
      Tensor loss = cross_entropy_with_logits(logits, labels);
      const double value = loss.item();
      if (!std::isfinite(value)) abort_nan("train_classifier", epoch, b);
      for (Tensor& p : params) p.zero_grad();
      loss.backward();
      adam_step(params, adam);
      loss_sum += value * static_cast<double>(batch.size());
      seen += batch.size();
    }
    history.epoch_loss.push_back(loss_sum / static_cast<double>(seen));
  }
  return history;
}

TrainHistory train_autoencoder(Autoencoder& model, const std::vector<Window>& data,
                               const TrainOptions& opts) {
  const std::size_t len = model.config().input_length;
  const std::size_t ch = model.config().input_channels;
  check_windows(data, len, ch);
  model.reseed(opts.seed);
  Rng shuffle_rng(opts.seed ^ 0x9e3779b97f4a7c15ull);
  AdamState adam;
  adam.lr = opts.learning_rate;
  std::vector<Tensor> params = model.parameters();

  TrainHistory history;
  for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
    double loss_sum = 0.0;
    std::size_t seen = 0;
    const auto batches = make_batches(data.size(), opts.batch_size, shuffle_rng);
    for (std::size_t b = 0; b < batches.size(); ++b) {
      const auto& batch = batches[b];
      Tensor x = stack_windows(data, batch, len, ch);
      Tensor recon = model.reconstruct(x, batch.size(), /*train=*/true);
      Tensor loss = mse_loss(recon, x);
      const double value = loss.item();
      if (!std::isfinite(value)) abort_nan("train_autoencoder", epoch, b);
      for (Tensor& p : params) p.zero_grad();
      loss.backward();
      adam_step(params, adam);
      loss_sum += value * static_cast<double>(batch.size());
      seen += batch.size();
    }
    history.epoch_loss.push_back(loss_sum / static_cast<double>(seen));
  }
  return history;
}

double classifier_accuracy(Classifier& model, const std::vector<Window>& data,
                           std::size_t batch_size) {
  const std::size_t len = model.config().input_length;
  const std::size_t ch = model.config().input_channels;
  check_windows(data, len, ch);
  std::size_t correct = 0;
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    Tensor x = stack_windows(data, idx, len, ch);
    Tensor probs = model.probabilities(x, idx.size());
    const std::size_t classes = probs.shape()[1];
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double* row = probs.values().data() + r * classes;
      std::size_t best = 0;
      for (std::size_t cidx = 1; cidx < classes; ++cidx) {
        if (row[cidx] > row[best]) best = cidx;
      }
      if (static_cast<int>(best) == data[idx[r]].label) ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

std::vector<std::vector<double>> reconstruct_windows(Autoencoder& model,
                                                     const std::vector<Window>& data,
                                                     std::size_t batch_size) {
  const std::size_t len = model.config().input_length;
  const std::size_t ch = model.config().input_channels;
  check_windows(data, len, ch);
  std::vector<std::vector<double>> out;
  out.reserve(data.size());
  for (std::size_t start = 0; start < data.size(); start += batch_size) {
    const std::size_t end = std::min(data.size(), start + batch_size);
    std::vector<std::size_t> idx(end - start);
    std::iota(idx.begin(), idx.end(), start);
    Tensor x = stack_windows(data, idx, len, ch);
    Tensor recon = model.reconstruct(x, idx.size(), /*train=*/false);
    const double* rv = recon.values().data();
    for (std::size_t r = 0; r < idx.size(); ++r) {
      out.emplace_back(rv + r * len * ch, rv + (r + 1) * len * ch);
    }
  }
  return out;
}

}  // namespace tsgraph

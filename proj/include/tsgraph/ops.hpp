#pragma once

#include "tsgraph/tensor.hpp"

namespace tsgraph {

/// 1-D convolution weights. kernel is [out_channels, in_channels, f];
/// causal mode left-pads by dilation*(f-1) zeros so output length equals
/// input length, valid mode trims to len - dilation*(f-1).
struct Conv1dParams {
  Tensor kernel;
  Tensor bias;
  std::size_t dilation = 1;
  bool causal = true;
};

/// x is [rows, in_channels] holding `segments` independent series of equal
/// length laid out back to back; convolution never reads across a segment
/// boundary.
Tensor conv1d(const Tensor& x, const Conv1dParams& p, std::size_t segments = 1);

enum class PoolMode { Average, Max };

/// Non-overlapping windows of size s along rows, reduced by mean or max.
/// s must divide the per-segment length.
Tensor pool_shrink(const Tensor& x, std::size_t s, PoolMode mode);
Tensor upsample_nearest(const Tensor& x, std::size_t s);

struct BatchNormState {
  Tensor gamma;
  Tensor beta;
  std::vector<double> running_mean;
  std::vector<double> running_var;
  double momentum = 0.1;
  double eps = 1e-5;

  explicit BatchNormState(std::size_t channels);
};

/// Per-channel normalization over all rows. Train mode uses batch statistics
/// (population variance) and updates the running estimates; eval mode uses
/// the running estimates.
Tensor batch_norm(const Tensor& x, BatchNormState& bn, bool train);

/// Train mode masks entries with probability rate and scales survivors by
/// 1/(1-rate); eval mode is the identity.
Tensor dropout(const Tensor& x, double rate, bool train, Rng& rng);

Tensor norm_dropout(const Tensor& x, bool train, BatchNormState& bn, double rate,
                    Rng& rng);

}  // namespace tsgraph

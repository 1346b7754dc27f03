#pragma once

#include <functional>

#include "tsgraph/tensor.hpp"

namespace tsgraph {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t step = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;
};

/// Bias-corrected Adam update reading param.grad(); moment buffers are
/// allocated on first use and must keep matching the parameter list.
void adam_step(std::vector<Tensor>& params, AdamState& state);

/// Max over coordinates of |analytic - central difference| / max(1, |analytic|)
/// for the scalar map f at x. f must rebuild its graph from x's current
/// values on every call.
double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, Tensor& x,
                         double h);

/// Same, restricted to at most max_coords coordinates drawn without
/// replacement from rng (checks every coordinate when max_coords >= size).
double finite_diff_check_sampled(const std::function<Tensor(const Tensor&)>& f,
                                 Tensor& x, double h, std::size_t max_coords,
                                 Rng& rng);

}  // namespace tsgraph

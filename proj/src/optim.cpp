#include "tsgraph/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tsgraph {

void adam_step(std::vector<Tensor>& params, AdamState& state) {
  if (state.m.empty()) {
    state.m.resize(params.size());
    state.v.resize(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m[i].assign(params[i].size(), 0.0);
      state.v[i].assign(params[i].size(), 0.0);
    }
  }
  if (state.m.size() != params.size()) {
    throw std::invalid_argument("adam_step: parameter list changed size");
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params[i];
    if (state.m[i].size() != p.size()) {
      throw std::invalid_argument("adam_step: moment buffer shape mismatch");
    }
    const std::vector<double>& g = p.has_grad() ? p.grad() : p.grad_mut();
    std::vector<double>& val = p.values_mut();
    std::vector<double>& m = state.m[i];
    std::vector<double>& v = state.v[i];
    for (std::size_t j = 0; j < val.size(); ++j) {
      m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
      v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      val[j] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

namespace {

double check_coords(const std::function<Tensor(const Tensor&)>& f, Tensor& x,
                    double h, const std::vector<std::size_t>& coords) {
  if (h <= 0.0) throw std::invalid_argument("finite_diff_check: h must be positive");
  x.zero_grad();
  Tensor loss = f(x);
  if (loss.size() != 1) {
    throw std::invalid_argument("finite_diff_check: f must return a scalar");
  }
  loss.backward();
  std::vector<double> analytic = x.grad();

  double worst = 0.0;
  std::vector<double>& vals = x.values_mut();
  for (std::size_t i : coords) {
    const double saved = vals[i];
    vals[i] = saved + h;
    const double fp = f(x).item();
    vals[i] = saved - h;
    const double fm = f(x).item();
    vals[i] = saved;
    const double numeric = (fp - fm) / (2.0 * h);
    const double rel = std::abs(analytic[i] - numeric) /
                       std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, rel);
  }
  return worst;
}

}  // namespace

double finite_diff_check(const std::function<Tensor(const Tensor&)>& f, Tensor& x,
                         double h) {
  std::vector<std::size_t> coords(x.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  return check_coords(f, x, h, coords);
}

double finite_diff_check_sampled(const std::function<Tensor(const Tensor&)>& f,
                                 Tensor& x, double h, std::size_t max_coords,
                                 Rng& rng) {
  std::vector<std::size_t> coords(x.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (max_coords < coords.size()) {
    std::shuffle(coords.begin(), coords.end(), rng);
    coords.resize(max_coords);
  }
  return check_coords(f, x, h, coords);
}

}  // namespace tsgraph

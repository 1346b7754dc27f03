#include "tsgraph/ops.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tsgraph {

namespace {

// kernel [out,in,f] -> [f][in][out] so the innermost conv loop runs over a
// contiguous out-channel span.
std::vector<double> transpose_kernel_fio(const std::vector<double>& k,
                                         std::size_t out_ch, std::size_t in_ch,
                                         std::size_t f) {
  std::vector<double> kt(k.size());
  for (std::size_t o = 0; o < out_ch; ++o)
    for (std::size_t i = 0; i < in_ch; ++i)
      for (std::size_t j = 0; j < f; ++j)
        kt[(j * in_ch + i) * out_ch + o] = k[(o * in_ch + i) * f + j];
  return kt;
}

// kernel [out,in,f] -> [f][out][in] for the input-gradient pass.
std::vector<double> transpose_kernel_foi(const std::vector<double>& k,
                                         std::size_t out_ch, std::size_t in_ch,
                                         std::size_t f) {
  std::vector<double> kt(k.size());
  for (std::size_t o = 0; o < out_ch; ++o)
    for (std::size_t i = 0; i < in_ch; ++i)
      for (std::size_t j = 0; j < f; ++j)
        kt[(j * out_ch + o) * in_ch + i] = k[(o * in_ch + i) * f + j];
  return kt;
}

}  // namespace

Tensor conv1d(const Tensor& x, const Conv1dParams& p, std::size_t segments) {
  if (x.ndim() != 2 || x.rows() == 0) throw std::invalid_argument("conv1d: empty input");
  if (p.kernel.ndim() != 3) throw std::invalid_argument("conv1d: kernel must be 3-D");
  const std::size_t out_ch = p.kernel.shape()[0];
  const std::size_t in_ch = p.kernel.shape()[1];
  const std::size_t f = p.kernel.shape()[2];
  if (x.shape()[1] != in_ch) {
    throw std::invalid_argument("conv1d: input channel count does not match kernel");
  }
  if (p.bias.size() != out_ch) throw std::invalid_argument("conv1d: bias size mismatch");
  if (p.dilation < 1 || f < 1) throw std::invalid_argument("conv1d: bad dilation or width");
  if (segments == 0 || x.rows() % segments != 0) {
    throw std::invalid_argument("conv1d: rows not divisible into segments");
  }
  const std::size_t seg_len = x.rows() / segments;
  const std::size_t reach = p.dilation * (f - 1);
  const std::size_t out_len = p.causal ? seg_len
                                       : (seg_len > reach ? seg_len - reach : 0);
  if (out_len == 0) throw std::invalid_argument("conv1d: input shorter than kernel reach");

  const std::size_t d = p.dilation;
  const bool causal = p.causal;
  std::vector<double> kt = transpose_kernel_fio(p.kernel.values(), out_ch, in_ch, f);
  std::vector<double> out(segments * out_len * out_ch);
  const double* xv = x.values().data();
  const double* bv = p.bias.values().data();

  for (std::size_t s = 0; s < segments; ++s) {
    const double* xs = xv + s * seg_len * in_ch;
    double* os = out.data() + s * out_len * out_ch;
    for (std::size_t t = 0; t < out_len; ++t) {
      double* orow = os + t * out_ch;
      for (std::size_t o = 0; o < out_ch; ++o) orow[o] = bv[o];
      // causal: tap j reads x[t - d*(f-1-j)]; valid: x[t + d*j]
      for (std::size_t j = 0; j < f; ++j) {
        std::ptrdiff_t row = causal
            ? static_cast<std::ptrdiff_t>(t) - static_cast<std::ptrdiff_t>(d * (f - 1 - j))
            : static_cast<std::ptrdiff_t>(t + d * j);
        if (row < 0) continue;
        const double* xrow = xs + row * in_ch;
        const double* kj = kt.data() + j * in_ch * out_ch;
        for (std::size_t i = 0; i < in_ch; ++i) {
          const double xval = xrow[i];
          if (xval == 0.0) continue;
          const double* ko = kj + i * out_ch;
          for (std::size_t o = 0; o < out_ch; ++o) orow[o] += xval * ko[o];
        }
      }
    }
  }

  return make_op(
      {segments * out_len, out_ch}, std::move(out), {x, p.kernel, p.bias},
      [segments, seg_len, out_len, out_ch, in_ch, f, d, causal](TensorNode& nd) {
        TensorNode* px = nd.parents[0].get();
        TensorNode* pk = nd.parents[1].get();
        TensorNode* pb = nd.parents[2].get();
        const double* g = nd.grad.data();
        if (px->requires_grad) {
          px->ensure_grad();
          std::vector<double> kfoi =
              transpose_kernel_foi(pk->values, out_ch, in_ch, f);
          for (std::size_t s = 0; s < segments; ++s) {
            const double* gs = g + s * out_len * out_ch;
            double* dxs = px->grad.data() + s * seg_len * in_ch;
            for (std::size_t t = 0; t < out_len; ++t) {
              const double* grow = gs + t * out_ch;
              for (std::size_t j = 0; j < f; ++j) {
                std::ptrdiff_t row = causal
                    ? static_cast<std::ptrdiff_t>(t) -
                          static_cast<std::ptrdiff_t>(d * (f - 1 - j))
                    : static_cast<std::ptrdiff_t>(t + d * j);
                if (row < 0) continue;
                double* dxrow = dxs + row * in_ch;
                const double* kj = kfoi.data() + j * out_ch * in_ch;
                for (std::size_t o = 0; o < out_ch; ++o) {
                  const double gv = grow[o];
                  if (gv == 0.0) continue;
                  const double* ki = kj + o * in_ch;
                  for (std::size_t i = 0; i < in_ch; ++i) dxrow[i] += gv * ki[i];
                }
              }
            }
          }
        }
        if (pk->requires_grad) {
          pk->ensure_grad();
          // accumulate in [f][out][in] then fold back into [out][in][f]
          std::vector<double> dk(f * out_ch * in_ch, 0.0);
          for (std::size_t s = 0; s < segments; ++s) {
            const double* gs = g + s * out_len * out_ch;
            const double* xs = px->values.data() + s * seg_len * in_ch;
            for (std::size_t t = 0; t < out_len; ++t) {
              const double* grow = gs + t * out_ch;
              for (std::size_t j = 0; j < f; ++j) {
                std::ptrdiff_t row = causal
                    ? static_cast<std::ptrdiff_t>(t) -
                          static_cast<std::ptrdiff_t>(d * (f - 1 - j))
                    : static_cast<std::ptrdiff_t>(t + d * j);
                if (row < 0) continue;
                const double* xrow = xs + row * in_ch;
                double* dkj = dk.data() + j * out_ch * in_ch;
                for (std::size_t o = 0; o < out_ch; ++o) {
                  const double gv = grow[o];
                  if (gv == 0.0) continue;
                  double* dki = dkj + o * in_ch;
                  for (std::size_t i = 0; i < in_ch; ++i) dki[i] += gv * xrow[i];
                }
              }
            }
          }
          for (std::size_t o = 0; o < out_ch; ++o)
            for (std::size_t i = 0; i < in_ch; ++i)
              for (std::size_t j = 0; j < f; ++j)
                pk->grad[(o * in_ch + i) * f + j] += dk[(j * out_ch + o) * in_ch + i];
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          const std::size_t total = segments * out_len;
          for (std::size_t t = 0; t < total; ++t)
            for (std::size_t o = 0; o < out_ch; ++o) pb->grad[o] += g[t * out_ch + o];
        }
      });
}

Tensor pool_shrink(const Tensor& x, std::size_t s, PoolMode mode) {
  if (s < 1) throw std::invalid_argument("pool_shrink: s must be positive");
  if (x.ndim() != 2) throw std::invalid_argument("pool_shrink: 2-D input required");
  const std::size_t n = x.rows(), c = x.cols();
  if (n % s != 0) throw std::invalid_argument("pool_shrink: s does not divide length");
  const std::size_t m = n / s;
  const double* xv = x.values().data();
  std::vector<double> out(m * c);

  if (mode == PoolMode::Average) {
    const double inv = 1.0 / static_cast<double>(s);
    for (std::size_t w = 0; w < m; ++w) {
      double* orow = out.data() + w * c;
      std::fill_n(orow, c, 0.0);
      for (std::size_t r = 0; r < s; ++r) {
        const double* xrow = xv + (w * s + r) * c;
        for (std::size_t j = 0; j < c; ++j) orow[j] += xrow[j];
      }
      for (std::size_t j = 0; j < c; ++j) orow[j] *= inv;
    }
    return make_op({m, c}, std::move(out), {x}, [m, c, s, inv](TensorNode& nd) {
      TensorNode* p = nd.parents[0].get();
      p->ensure_grad();
      for (std::size_t w = 0; w < m; ++w) {
        const double* grow = nd.grad.data() + w * c;
        for (std::size_t r = 0; r < s; ++r) {
          double* drow = p->grad.data() + (w * s + r) * c;
          for (std::size_t j = 0; j < c; ++j) drow[j] += grow[j] * inv;
        }
      }
    });
  }

  // max: first occurrence wins on ties
  std::vector<std::size_t> argmax(m * c);
  for (std::size_t w = 0; w < m; ++w) {
    double* orow = out.data() + w * c;
    for (std::size_t j = 0; j < c; ++j) {
      std::size_t best = w * s;
      double bv = xv[best * c + j];
      for (std::size_t r = 1; r < s; ++r) {
        const double v = xv[(w * s + r) * c + j];
        if (v > bv) {
          bv = v;
          best = w * s + r;
        }
      }
      orow[j] = bv;
      argmax[w * c + j] = best;
    }
  }
  return make_op({m, c}, std::move(out), {x},
                 [m, c, argmax = std::move(argmax)](TensorNode& nd) {
                   TensorNode* p = nd.parents[0].get();
                   p->ensure_grad();
                   for (std::size_t w = 0; w < m; ++w)
                     for (std::size_t j = 0; j < c; ++j)
                       p->grad[argmax[w * c + j] * c + j] += nd.grad[w * c + j];
                 });
}

Tensor upsample_nearest(const Tensor& x, std::size_t s) {
  if (s < 1) throw std::invalid_argument("upsample_nearest: s must be positive");
  if (x.ndim() != 2) throw std::invalid_argument("upsample_nearest: 2-D input required");
  const std::size_t n = x.rows(), c = x.cols();
  std::vector<double> out(n * s * c);
  const double* xv = x.values().data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < s; ++r)
      std::copy_n(xv + i * c, c, out.data() + (i * s + r) * c);
  return make_op({n * s, c}, std::move(out), {x}, [n, c, s](TensorNode& nd) {
    TensorNode* p = nd.parents[0].get();
    p->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      double* drow = p->grad.data() + i * c;
      for (std::size_t r = 0; r < s; ++r) {
        const double* grow = nd.grad.data() + (i * s + r) * c;
        for (std::size_t j = 0; j < c; ++j) drow[j] += grow[j];
      }
    }
  });
}

BatchNormState::BatchNormState(std::size_t channels)
    : gamma(Tensor::full({channels}, 1.0, true)),
      beta(Tensor::zeros({channels}, true)),
      running_mean(channels, 0.0),
      running_var(channels, 1.0) {}

Tensor batch_norm(const Tensor& x, BatchNormState& bn, bool train) {
  if (x.ndim() != 2) throw std::invalid_argument("batch_norm: 2-D input required");
  const std::size_t n = x.rows(), c = x.cols();
  if (bn.gamma.size() != c) throw std::invalid_argument("batch_norm: channel mismatch");
  const double* xv = x.values().data();
  const double eps = bn.eps;

  std::vector<double> mu(c, 0.0), var(c, 0.0);
  if (train) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) mu[j] += xv[i * c + j];
    for (std::size_t j = 0; j < c; ++j) mu[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < c; ++j) {
        const double d = xv[i * c + j] - mu[j];
        var[j] += d * d;
      }
    for (std::size_t j = 0; j < c; ++j) var[j] /= static_cast<double>(n);
    for (std::size_t j = 0; j < c; ++j) {
      bn.running_mean[j] = (1.0 - bn.momentum) * bn.running_mean[j] + bn.momentum * mu[j];
      bn.running_var[j] = (1.0 - bn.momentum) * bn.running_var[j] + bn.momentum * var[j];
    }
  } else {
    mu = bn.running_mean;
    var = bn.running_var;
  }

  std::vector<double> inv_std(c);
  for (std::size_t j = 0; j < c; ++j) inv_std[j] = 1.0 / std::sqrt(var[j] + eps);
  std::vector<double> xhat(n * c), out(n * c);
  const double* gv = bn.gamma.values().data();
  const double* bv = bn.beta.values().data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const double h = (xv[i * c + j] - mu[j]) * inv_std[j];
      xhat[i * c + j] = h;
      out[i * c + j] = gv[j] * h + bv[j];
    }

  return make_op(
      {n, c}, std::move(out), {x, bn.gamma, bn.beta},
      [n, c, train, inv_std = std::move(inv_std), xhat = std::move(xhat)](TensorNode& nd) {
        TensorNode* px = nd.parents[0].get();
        TensorNode* pg = nd.parents[1].get();
        TensorNode* pb = nd.parents[2].get();
        const double* g = nd.grad.data();
        std::vector<double> sum_dy(c, 0.0), sum_dy_xhat(c, 0.0);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < c; ++j) {
            sum_dy[j] += g[i * c + j];
            sum_dy_xhat[j] += g[i * c + j] * xhat[i * c + j];
          }
        if (pg->requires_grad) {
          pg->ensure_grad();
          for (std::size_t j = 0; j < c; ++j) pg->grad[j] += sum_dy_xhat[j];
        }
        if (pb->requires_grad) {
          pb->ensure_grad();
          for (std::size_t j = 0; j < c; ++j) pb->grad[j] += sum_dy[j];
        }
        if (px->requires_grad) {
          px->ensure_grad();
          const double* gamma = pg->values.data();
          if (train) {
            const double inv_n = 1.0 / static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < c; ++j) {
                const double dxhat = g[i * c + j];
                px->grad[i * c + j] +=
                    gamma[j] * inv_std[j] *
                    (dxhat - inv_n * sum_dy[j] - xhat[i * c + j] * inv_n * sum_dy_xhat[j]);
              }
          } else {
            for (std::size_t i = 0; i < n; ++i)
              for (std::size_t j = 0; j < c; ++j)
                px->grad[i * c + j] += g[i * c + j] * gamma[j] * inv_std[j];
          }
        }
      });
}

Tensor dropout(const Tensor& x, double rate, bool train, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw std::invalid_argument("dropout: rate must lie in [0,1)");
  }
  if (!train || rate == 0.0) return x;
  const double keep = 1.0 - rate;
  const double scale = 1.0 / keep;
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> mask(x.size());
  for (double& m : mask) m = dist(rng) < keep ? scale : 0.0;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.values()[i] * mask[i];
  return make_op(x.shape(), std::move(out), {x},
                 [mask = std::move(mask)](TensorNode& nd) {
                   TensorNode* p = nd.parents[0].get();
                   p->ensure_grad();
                   for (std::size_t i = 0; i < nd.grad.size(); ++i)
                     p->grad[i] += nd.grad[i] * mask[i];
                 });
}

Tensor norm_dropout(const Tensor& x, bool train, BatchNormState& bn, double rate,
                    Rng& rng) {
  return dropout(batch_norm(x, bn, train), rate, train, rng);
}

}  // namespace tsgraph

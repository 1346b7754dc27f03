#include "tsgraph/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace tsgraph {

namespace {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch");
  }
}

}  // namespace

void TensorNode::ensure_grad() {
  if (grad.size() != values.size()) grad.assign(values.size(), 0.0);
}

Tensor::Tensor() : node_(std::make_shared<TensorNode>()) {}

Tensor::Tensor(std::shared_ptr<TensorNode> node) : node_(std::move(node)) {}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> values,
               bool requires_grad) {
  if (shape_product(shape) != values.size()) {
    throw std::invalid_argument("Tensor: shape does not match value count");
  }
  for (std::size_t d : shape) {
    if (d == 0) throw std::invalid_argument("Tensor: zero dimension");
  }
  node_ = std::make_shared<TensorNode>();
  node_->shape = std::move(shape);
  node_->values = std::move(values);
  node_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(std::vector<std::size_t> shape, bool requires_grad) {
  std::vector<double> v(shape_product(shape), 0.0);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::full(std::vector<std::size_t> shape, double value, bool requires_grad) {
  std::vector<double> v(shape_product(shape), value);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
  return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::uniform(std::vector<std::size_t> shape, double lo, double hi,
                       Rng& rng, bool requires_grad) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(shape_product(shape));
  for (double& x : v) x = dist(rng);
  return Tensor(std::move(shape), std::move(v), requires_grad);
}

const std::vector<std::size_t>& Tensor::shape() const { return node_->shape; }
std::size_t Tensor::size() const { return node_->values.size(); }
std::size_t Tensor::ndim() const { return node_->shape.size(); }

std::size_t Tensor::rows() const {
  return node_->shape.empty() ? 0 : node_->shape[0];
}

std::size_t Tensor::cols() const {
  if (node_->shape.size() < 2) return node_->shape.empty() ? 0 : 1;
  std::size_t c = 1;
  for (std::size_t i = 1; i < node_->shape.size(); ++i) c *= node_->shape[i];
  return c;
}

const std::vector<double>& Tensor::values() const { return node_->values; }
std::vector<double>& Tensor::values_mut() { return node_->values; }

double Tensor::item() const {
  if (size() != 1) throw std::invalid_argument("item: tensor is not scalar");
  return node_->values[0];
}

bool Tensor::requires_grad() const { return node_->requires_grad; }
bool Tensor::has_grad() const { return node_->grad.size() == node_->values.size(); }

const std::vector<double>& Tensor::grad() const {
  if (!has_grad()) throw std::runtime_error("grad: not populated; call backward first");
  return node_->grad;
}

std::vector<double>& Tensor::grad_mut() {
  node_->ensure_grad();
  return node_->grad;
}

void Tensor::zero_grad() { node_->grad.clear(); }

void Tensor::backward() {
  if (size() != 1) throw std::invalid_argument("backward: loss must be scalar");
  if (!node_->requires_grad) return;

  // Topological order over the grad-requiring subgraph. The recorded graph is
  // acyclic by construction (nodes only ever point at pre-existing parents).
  std::vector<TensorNode*> order;
  std::unordered_set<TensorNode*> seen;
  struct Frame {
    TensorNode* n;
    std::size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({node_.get(), 0});
  seen.insert(node_.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.n->parents.size()) {
      TensorNode* p = f.n->parents[f.next_parent++].get();
      if (p->requires_grad && !seen.count(p)) {
        seen.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.n);
      stack.pop_back();
    }
  }

  node_->ensure_grad();
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    TensorNode* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
}

Tensor make_op(std::vector<std::size_t> shape, std::vector<double> values,
               std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backward_fn) {
  auto node = std::make_shared<TensorNode>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  bool needs_grad = false;
  for (const Tensor& p : parents) needs_grad = needs_grad || p.requires_grad();
  node->requires_grad = needs_grad;
  if (needs_grad) {
    node->parents.reserve(parents.size());
    for (const Tensor& p : parents) node->parents.push_back(p.node_ ? p.node_ : nullptr);
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor(node);
}

// ---------------------------------------------------------------------------
// elementwise

Tensor operator+(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "add");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](TensorNode& n) {
    for (int k = 0; k < 2; ++k) {
      TensorNode* p = n.parents[k].get();
      if (!p->requires_grad) continue;
      p->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) p->grad[i] += n.grad[i];
    }
  });
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "sub");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] - bv[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](TensorNode& n) {
    TensorNode* pa = n.parents[0].get();
    TensorNode* pb = n.parents[1].get();
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) pa->grad[i] += n.grad[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) pb->grad[i] -= n.grad[i];
    }
  });
}

Tensor operator*(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "mul");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](TensorNode& n) {
    TensorNode* pa = n.parents[0].get();
    TensorNode* pb = n.parents[1].get();
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i)
        pa->grad[i] += n.grad[i] * pb->values[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i)
        pb->grad[i] += n.grad[i] * pa->values[i];
    }
  });
}

Tensor operator/(const Tensor& a, const Tensor& b) {
  check_same_shape(a, b, "div");
  std::vector<double> out(a.size());
  const auto& av = a.values();
  const auto& bv = b.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] / bv[i];
  return make_op(a.shape(), std::move(out), {a, b}, [](TensorNode& n) {
    TensorNode* pa = n.parents[0].get();
    TensorNode* pb = n.parents[1].get();
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i)
        pa->grad[i] += n.grad[i] / pb->values[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i)
        pb->grad[i] -= n.grad[i] * n.values[i] / pb->values[i];
    }
  });
}

Tensor operator*(double s, const Tensor& a) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * av[i];
  return make_op(a.shape(), std::move(out), {a}, [s](TensorNode& n) {
    TensorNode* p = n.parents[0].get();
    p->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) p->grad[i] += s * n.grad[i];
  });
}

Tensor operator+(const Tensor& a, double s) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] + s;
  return make_op(a.shape(), std::move(out), {a}, [](TensorNode& n) {
    TensorNode* p = n.parents[0].get();
    p->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) p->grad[i] += n.grad[i];
  });
}

Tensor neg(const Tensor& a) { return -1.0 * a; }

Tensor exp(const Tensor& a) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(av[i]);
  return make_op(a.shape(), std::move(out), {a}, [](TensorNode& n) {
    TensorNode* p = n.parents[0].get();
    p->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      p->grad[i] += n.grad[i] * n.values[i];
  });
}

Tensor sigmoid(const Tensor& a) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 1.0 / (1.0 + std::exp(-av[i]));
  return make_op(a.shape(), std::move(out), {a}, [](TensorNode& n) {
    TensorNode* p = n.parents[0].get();
    p->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      double s = n.values[i];
      p->grad[i] += n.grad[i] * s * (1.0 - s);
    }
  });
}

Tensor silu(const Tensor& a) {
  const auto& av = a.values();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = av[i] / (1.0 + std::exp(-av[i]));
  }
  return make_op(a.shape(), std::move(out), {a}, [](TensorNode& n) {
    TensorNode* p = n.parents[0].get();
    p->ensure_grad();
    // d/dx x*s(x) = s(x) + x*s(x)*(1-s(x))
    for (std::size_t i = 0; i < n.grad.size(); ++i) {
      double x = p->values[i];
      double s = 1.0 / (1.0 + std::exp(-x));
      p->grad[i] += n.grad[i] * (s + x * s * (1.0 - s));
    }
  });
}

Tensor leaky_relu(const Tensor& a, double negative_slope) {
  std::vector<double> out(a.size());
  const auto& av = a.values();
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = av[i] > 0.0 ? av[i] : negative_slope * av[i];
  return make_op(a.shape(), std::move(out), {a}, [negative_slope](TensorNode& n) {
    TensorNode* p = n.parents[0].get();
    p->ensure_grad();
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      p->grad[i] += n.grad[i] * (p->values[i] > 0.0 ? 1.0 : negative_slope);
  });
}

// ---------------------------------------------------------------------------
// reductions

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return make_op({1}, {s}, {a}, [](TensorNode& n) {
    TensorNode* p = n.parents[0].get();
    p->ensure_grad();
    for (double& g : p->grad) g += n.grad[0];
  });
}

Tensor mean(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  const double inv = 1.0 / static_cast<double>(a.size());
  return make_op({1}, {s * inv}, {a}, [inv](TensorNode& n) {
    TensorNode* p = n.parents[0].get();
    p->ensure_grad();
    for (double& g : p->grad) g += n.grad[0] * inv;
  });
}

// ---------------------------------------------------------------------------
// linear algebra

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.ndim() != 2 || b.ndim() != 2 || a.shape()[1] != b.shape()[0]) {
    throw std::invalid_argument("matmul: incompatible shapes");
  }
  const std::size_t n = a.shape()[0], k = a.shape()[1], m = b.shape()[1];
  std::vector<double> out(n * m, 0.0);
  const double* av = a.values().data();
  const double* bv = b.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    double* orow = out.data() + i * m;
    const double* arow = av + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double x = arow[p];
      const double* brow = bv + p * m;
      for (std::size_t j = 0; j < m; ++j) orow[j] += x * brow[j];
    }
  }
  return make_op({n, m}, std::move(out), {a, b}, [n, k, m](TensorNode& nd) {
    TensorNode* pa = nd.parents[0].get();
    TensorNode* pb = nd.parents[1].get();
    const double* g = nd.grad.data();
    if (pa->requires_grad) {
      pa->ensure_grad();
      // dA = dY * B^T
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = g + i * m;
        double* darow = pa->grad.data() + i * k;
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = pb->values.data() + p * m;
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
          darow[p] += acc;
        }
      }
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      // dB = A^T * dY
      for (std::size_t i = 0; i < n; ++i) {
        const double* arow = pa->values.data() + i * k;
        const double* grow = g + i * m;
        for (std::size_t p = 0; p < k; ++p) {
          const double x = arow[p];
          double* dbrow = pb->grad.data() + p * m;
          for (std::size_t j = 0; j < m; ++j) dbrow[j] += x * grow[j];
        }
      }
    }
  });
}

namespace {

Tensor linear_impl(const Tensor& x, const Tensor& w, const Tensor* bias) {
  if (x.ndim() != 2 || w.ndim() != 2 || x.shape()[1] != w.shape()[1]) {
    throw std::invalid_argument("linear: incompatible shapes");
  }
  const std::size_t n = x.shape()[0], in = x.shape()[1], out_dim = w.shape()[0];
  if (bias && bias->size() != out_dim) {
    throw std::invalid_argument("linear: bias size mismatch");
  }
  std::vector<double> out(n * out_dim, 0.0);
  const double* xv = x.values().data();
  const double* wv = w.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* xrow = xv + i * in;
    double* orow = out.data() + i * out_dim;
    if (bias) {
      const double* bv = bias->values().data();
      for (std::size_t o = 0; o < out_dim; ++o) orow[o] = bv[o];
    }
    for (std::size_t p = 0; p < in; ++p) {
      const double xval = xrow[p];
      if (xval == 0.0) continue;
      const double* wcol = wv + p;  // w[o*in + p]
      for (std::size_t o = 0; o < out_dim; ++o) orow[o] += xval * wcol[o * in];
    }
  }
  std::vector<Tensor> parents = bias ? std::vector<Tensor>{x, w, *bias}
                                     : std::vector<Tensor>{x, w};
  return make_op({n, out_dim}, std::move(out), std::move(parents),
                 [n, in, out_dim](TensorNode& nd) {
                   TensorNode* px = nd.parents[0].get();
                   TensorNode* pw = nd.parents[1].get();
                   TensorNode* pb = nd.parents.size() > 2 ? nd.parents[2].get() : nullptr;
                   const double* g = nd.grad.data();
                   if (px->requires_grad) {
                     px->ensure_grad();
                     // dX = dY * W
                     for (std::size_t i = 0; i < n; ++i) {
                       const double* grow = g + i * out_dim;
                       double* dxrow = px->grad.data() + i * in;
                       for (std::size_t o = 0; o < out_dim; ++o) {
                         const double gv = grow[o];
                         if (gv == 0.0) continue;
                         const double* wrow = pw->values.data() + o * in;
                         for (std::size_t p = 0; p < in; ++p) dxrow[p] += gv * wrow[p];
                       }
                     }
                   }
                   if (pw->requires_grad) {
                     pw->ensure_grad();
                     // dW = dY^T * X
                     for (std::size_t i = 0; i < n; ++i) {
                       const double* grow = g + i * out_dim;
                       const double* xrow = px->values.data() + i * in;
                       for (std::size_t o = 0; o < out_dim; ++o) {
                         const double gv = grow[o];
                         if (gv == 0.0) continue;
                         double* dwrow = pw->grad.data() + o * in;
                         for (std::size_t p = 0; p < in; ++p) dwrow[p] += gv * xrow[p];
                       }
                     }
                   }
                   if (pb && pb->requires_grad) {
                     pb->ensure_grad();
                     for (std::size_t i = 0; i < n; ++i) {
                       const double* grow = g + i * out_dim;
                       for (std::size_t o = 0; o < out_dim; ++o) pb->grad[o] += grow[o];
                     }
                   }
                 });
}

}  // namespace

Tensor linear(const Tensor& x, const Tensor& w) { return linear_impl(x, w, nullptr); }

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias) {
  return linear_impl(x, w, &bias);
}

Tensor add_rowvec(const Tensor& x, const Tensor& b) {
  if (x.ndim() != 2 || b.size() != x.shape()[1]) {
    throw std::invalid_argument("add_rowvec: shape mismatch");
  }
  const std::size_t n = x.shape()[0], c = x.shape()[1];
  std::vector<double> out(x.values());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += b.values()[j];
  return make_op(x.shape(), std::move(out), {x, b}, [n, c](TensorNode& nd) {
    TensorNode* px = nd.parents[0].get();
    TensorNode* pb = nd.parents[1].get();
    if (px->requires_grad) {
      px->ensure_grad();
      for (std::size_t i = 0; i < nd.grad.size(); ++i) px->grad[i] += nd.grad[i];
    }
    if (pb->requires_grad) {
      pb->ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j) pb->grad[j] += nd.grad[i * c + j];
    }
  });
}

// ---------------------------------------------------------------------------
// row-indexed ops

Tensor gather_rows(const Tensor& x, std::vector<std::size_t> idx) {
  const std::size_t n = x.rows(), c = x.cols();
  for (std::size_t i : idx) {
    if (i >= n) throw std::out_of_range("gather_rows: row index out of range");
  }
  std::vector<double> out(idx.size() * c);
  const double* xv = x.values().data();
  for (std::size_t e = 0; e < idx.size(); ++e) {
    std::copy_n(xv + idx[e] * c, c, out.data() + e * c);
  }
  const std::size_t rows_out = idx.size();
  return make_op({rows_out, c}, std::move(out), {x},
                 [c, idx = std::move(idx)](TensorNode& nd) {
                   TensorNode* p = nd.parents[0].get();
                   p->ensure_grad();
                   for (std::size_t e = 0; e < idx.size(); ++e) {
                     const double* grow = nd.grad.data() + e * c;
                     double* drow = p->grad.data() + idx[e] * c;
                     for (std::size_t j = 0; j < c; ++j) drow[j] += grow[j];
                   }
                 });
}

Tensor segment_sum(const Tensor& x, std::vector<std::size_t> seg,
                   std::size_t num_segments) {
  if (seg.size() != x.rows()) {
    throw std::invalid_argument("segment_sum: one segment id per row required");
  }
  const std::size_t c = x.cols();
  for (std::size_t s : seg) {
    if (s >= num_segments) throw std::out_of_range("segment_sum: segment id out of range");
  }
  std::vector<double> out(num_segments * c, 0.0);
  const double* xv = x.values().data();
  for (std::size_t e = 0; e < seg.size(); ++e) {
    double* orow = out.data() + seg[e] * c;
    const double* xrow = xv + e * c;
    for (std::size_t j = 0; j < c; ++j) orow[j] += xrow[j];
  }
  return make_op({num_segments, c}, std::move(out), {x},
                 [c, seg = std::move(seg)](TensorNode& nd) {
                   TensorNode* p = nd.parents[0].get();
                   p->ensure_grad();
                   for (std::size_t e = 0; e < seg.size(); ++e) {
                     const double* grow = nd.grad.data() + seg[e] * c;
                     double* drow = p->grad.data() + e * c;
                     for (std::size_t j = 0; j < c; ++j) drow[j] += grow[j];
                   }
                 });
}

Tensor scale_rows(const Tensor& x, std::vector<double> coeff) {
  if (coeff.size() != x.rows()) {
    throw std::invalid_argument("scale_rows: one coefficient per row required");
  }
  const std::size_t c = x.cols();
  std::vector<double> out(x.size());
  const double* xv = x.values().data();
  for (std::size_t i = 0; i < coeff.size(); ++i) {
    const double s = coeff[i];
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = s * xv[i * c + j];
  }
  return make_op(x.shape(), std::move(out), {x},
                 [c, coeff = std::move(coeff)](TensorNode& nd) {
                   TensorNode* p = nd.parents[0].get();
                   p->ensure_grad();
                   for (std::size_t i = 0; i < coeff.size(); ++i) {
                     const double s = coeff[i];
                     for (std::size_t j = 0; j < c; ++j)
                       p->grad[i * c + j] += s * nd.grad[i * c + j];
                   }
                 });
}

Tensor mul_rows(const Tensor& x, const Tensor& a) {
  if (a.rows() != x.rows() || a.cols() != 1) {
    throw std::invalid_argument("mul_rows: multiplier must be [rows,1]");
  }
  const std::size_t n = x.rows(), c = x.cols();
  std::vector<double> out(x.size());
  const double* xv = x.values().data();
  const double* av = a.values().data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = av[i] * xv[i * c + j];
  return make_op(x.shape(), std::move(out), {x, a}, [n, c](TensorNode& nd) {
    TensorNode* px = nd.parents[0].get();
    TensorNode* pa = nd.parents[1].get();
    if (px->requires_grad) {
      px->ensure_grad();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < c; ++j)
          px->grad[i * c + j] += pa->values[i] * nd.grad[i * c + j];
    }
    if (pa->requires_grad) {
      pa->ensure_grad();
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < c; ++j)
          acc += nd.grad[i * c + j] * px->values[i * c + j];
        pa->grad[i] += acc;
      }
    }
  });
}

// ---------------------------------------------------------------------------
// shape

Tensor reshape(const Tensor& x, std::vector<std::size_t> shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  if (n != x.size()) throw std::invalid_argument("reshape: element count mismatch");
  return make_op(std::move(shape), x.values(), {x}, [](TensorNode& nd) {
    TensorNode* p = nd.parents[0].get();
    p->ensure_grad();
    for (std::size_t i = 0; i < nd.grad.size(); ++i) p->grad[i] += nd.grad[i];
  });
}

Tensor concat_cols(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat_cols: empty input");
  const std::size_t n = xs[0].rows();
  std::size_t total = 0;
  for (const Tensor& t : xs) {
    if (t.ndim() != 2 || t.rows() != n) {
      throw std::invalid_argument("concat_cols: row count mismatch");
    }
    total += t.cols();
  }
  std::vector<double> out(n * total);
  std::size_t off = 0;
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> widths;
  for (const Tensor& t : xs) {
    const std::size_t c = t.cols();
    offsets.push_back(off);
    widths.push_back(c);
    const double* tv = t.values().data();
    for (std::size_t i = 0; i < n; ++i)
      std::copy_n(tv + i * c, c, out.data() + i * total + off);
    off += c;
  }
  return make_op({n, total}, std::move(out), xs,
                 [n, total, offsets = std::move(offsets),
                  widths = std::move(widths)](TensorNode& nd) {
                   for (std::size_t k = 0; k < nd.parents.size(); ++k) {
                     TensorNode* p = nd.parents[k].get();
                     if (!p->requires_grad) continue;
                     p->ensure_grad();
                     const std::size_t c = widths[k], off = offsets[k];
                     for (std::size_t i = 0; i < n; ++i) {
                       const double* grow = nd.grad.data() + i * total + off;
                       double* drow = p->grad.data() + i * c;
                       for (std::size_t j = 0; j < c; ++j) drow[j] += grow[j];
                     }
                   }
                 });
}

// ---------------------------------------------------------------------------
// losses

Tensor mse_loss(const Tensor& pred, const Tensor& target) {
  check_same_shape(pred, target, "mse_loss");
  const std::size_t n = pred.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = pred.values()[i] - target.values()[i];
    acc += d * d;
  }
  const double inv = 1.0 / static_cast<double>(n);
  return make_op({1}, {acc * inv}, {pred, target}, [inv](TensorNode& nd) {
    TensorNode* pp = nd.parents[0].get();
    TensorNode* pt = nd.parents[1].get();
    const double g = nd.grad[0];
    if (pp->requires_grad) {
      pp->ensure_grad();
      for (std::size_t i = 0; i < pp->values.size(); ++i)
        pp->grad[i] += g * 2.0 * inv * (pp->values[i] - pt->values[i]);
    }
    if (pt->requires_grad) {
      pt->ensure_grad();
      for (std::size_t i = 0; i < pt->values.size(); ++i)
        pt->grad[i] -= g * 2.0 * inv * (pp->values[i] - pt->values[i]);
    }
  });
}

Tensor cross_entropy_with_logits(const Tensor& logits, const std::vector<int>& labels) {
  if (logits.ndim() != 2 || labels.size() != logits.shape()[0]) {
    throw std::invalid_argument("cross_entropy: one label per row required");
  }
  const std::size_t n = logits.shape()[0], c = logits.shape()[1];
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= c)
      throw std::out_of_range("cross_entropy: label out of range");
  }
  const double* z = logits.values().data();
  std::vector<double> probs(n * c);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = z + i * c;
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(row[j] - mx);
    const double lse = mx + std::log(denom);
    for (std::size_t j = 0; j < c; ++j) probs[i * c + j] = std::exp(row[j] - lse);
    loss += lse - row[labels[i]];
  }
  const double inv = 1.0 / static_cast<double>(n);
  return make_op({1}, {loss * inv}, {logits},
                 [n, c, inv, labels, probs = std::move(probs)](TensorNode& nd) {
                   TensorNode* p = nd.parents[0].get();
                   p->ensure_grad();
                   const double g = nd.grad[0] * inv;
                   for (std::size_t i = 0; i < n; ++i) {
                     for (std::size_t j = 0; j < c; ++j) {
                       double d = probs[i * c + j];
                       if (j == static_cast<std::size_t>(labels[i])) d -= 1.0;
                       p->grad[i * c + j] += g * d;
                     }
                   }
                 });
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.ndim() != 2) throw std::invalid_argument("softmax_rows: 2-D input required");
  const std::size_t n = logits.shape()[0], c = logits.shape()[1];
  std::vector<double> out(n * c);
  const double* z = logits.values().data();
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = z + i * c;
    double mx = row[0];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, row[j]);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(row[j] - mx);
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] = std::exp(row[j] - mx) / denom;
  }
  return make_op({n, c}, std::move(out), {logits}, [n, c](TensorNode& nd) {
    TensorNode* p = nd.parents[0].get();
    p->ensure_grad();
    for (std::size_t i = 0; i < n; ++i) {
      const double* prow = nd.values.data() + i * c;
      const double* grow = nd.grad.data() + i * c;
      double dot = 0.0;
      for (std::size_t j = 0; j < c; ++j) dot += grow[j] * prow[j];
      for (std::size_t j = 0; j < c; ++j)
        p->grad[i * c + j] += prow[j] * (grow[j] - dot);
    }
  });
}

bool all_finite(const Tensor& t) {
  for (double v : t.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace tsgraph

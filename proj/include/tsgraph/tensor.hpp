#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <random>
#include <vector>

namespace tsgraph {

using Rng = std::mt19937_64;

struct TensorNode;

/// Dense 64-bit float tensor participating in reverse-mode differentiation.
///
/// A Tensor is a cheap handle to a shared node in the recorded computation
/// graph. Operations on tensors with requires_grad set record backward
/// closures; Tensor::backward() on a scalar populates grad() on every
/// reachable grad-requiring tensor. Gradients accumulate across backward
/// calls until zero_grad().
class Tensor {
 public:
  Tensor();  // empty placeholder, size 0
  Tensor(std::vector<std::size_t> shape, std::vector<double> values,
         bool requires_grad = false);

  static Tensor zeros(std::vector<std::size_t> shape, bool requires_grad = false);
  static Tensor full(std::vector<std::size_t> shape, double value,
                     bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  /// Uniform values in [lo, hi).
  static Tensor uniform(std::vector<std::size_t> shape, double lo, double hi,
                        Rng& rng, bool requires_grad = false);

  const std::vector<std::size_t>& shape() const;
  std::size_t size() const;
  std::size_t ndim() const;
  /// 2-D helpers; a 1-D tensor counts as a single column.
  std::size_t rows() const;
  std::size_t cols() const;

  const std::vector<double>& values() const;
  std::vector<double>& values_mut();  // in-place update (optimizers); no grad tracking
  double item() const;                // scalar tensors only

  bool requires_grad() const;
  bool has_grad() const;
  const std::vector<double>& grad() const;
  std::vector<double>& grad_mut();
  void zero_grad();

  /// Reverse-mode sweep from a scalar. Throws on non-scalar.
  void backward();

  bool defined() const { return node_ != nullptr; }
  TensorNode* node() const { return node_.get(); }

 private:
  explicit Tensor(std::shared_ptr<TensorNode> node);
  std::shared_ptr<TensorNode> node_;
  friend Tensor make_op(std::vector<std::size_t> shape, std::vector<double> values,
                        std::vector<Tensor> parents,
                        std::function<void(TensorNode&)> backward_fn);
};

struct TensorNode {
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;  // sized lazily during backward
  bool requires_grad = false;
  std::vector<std::shared_ptr<TensorNode>> parents;
  std::function<void(TensorNode&)> backward_fn;

  std::size_t size() const { return values.size(); }
  void ensure_grad();
};

/// Records a new graph node. Parents that do not require grad are kept for
/// value access but the node drops its backward closure when no parent
/// requires grad.
Tensor make_op(std::vector<std::size_t> shape, std::vector<double> values,
               std::vector<Tensor> parents,
               std::function<void(TensorNode&)> backward_fn);

// elementwise
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(const Tensor& a, const Tensor& b);
Tensor operator/(const Tensor& a, const Tensor& b);
Tensor operator*(double s, const Tensor& a);
Tensor operator+(const Tensor& a, double s);
Tensor neg(const Tensor& a);
Tensor exp(const Tensor& a);
Tensor sigmoid(const Tensor& a);
Tensor silu(const Tensor& a);
Tensor leaky_relu(const Tensor& a, double negative_slope);

// reductions
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// linear algebra on 2-D tensors
Tensor matmul(const Tensor& a, const Tensor& b);  // [n,k] x [k,m]
/// y = x * w^T (+ bias); x: [n,in], w: [out,in], bias: [out].
Tensor linear(const Tensor& x, const Tensor& w);
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& bias);
Tensor add_rowvec(const Tensor& x, const Tensor& b);

// row-indexed ops (message passing plumbing)
Tensor gather_rows(const Tensor& x, std::vector<std::size_t> idx);
Tensor segment_sum(const Tensor& x, std::vector<std::size_t> seg,
                   std::size_t num_segments);
Tensor scale_rows(const Tensor& x, std::vector<double> coeff);  // constant coeffs
Tensor mul_rows(const Tensor& x, const Tensor& a);              // a: [n,1]

// shape
Tensor reshape(const Tensor& x, std::vector<std::size_t> shape);
Tensor concat_cols(const std::vector<Tensor>& xs);

// losses / classification heads
Tensor mse_loss(const Tensor& pred, const Tensor& target);
Tensor cross_entropy_with_logits(const Tensor& logits, const std::vector<int>& labels);
Tensor softmax_rows(const Tensor& logits);

bool all_finite(const Tensor& t);

}  // namespace tsgraph

#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "radt/errors.hpp"
#include "radt/rng.hpp"

namespace radt::nn {

/// Dense double-precision tensor (2D/3D plus scalars) with reverse-mode
/// autodiff. Ops record parents and a backward closure on a tape implied by
/// the node graph; backward() runs the closures in reverse topological order.
struct Node {
  std::vector<int> shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  std::size_t numel() const {
    std::size_t n = 1;
    for (int d : shape) n *= static_cast<std::size_t>(d);
    return n;
  }
  void ensure_grad() {
    if (grad.size() != numel()) grad.assign(numel(), 0.0);
  }
};

class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::shared_ptr<Node> node) : node_(std::move(node)) {}

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor constant(std::vector<int> shape, std::vector<double> data);
  static Tensor param(std::vector<int> shape, std::vector<double> data);
  /// Parameter initialized N(0, stddev), the GPT-2 convention.
  static Tensor randn_param(std::vector<int> shape, Rng& rng,
                            double stddev = 0.02);

  const std::vector<int>& shape() const { return node_->shape; }
  int dim(int i) const { return node_->shape[i]; }
  int ndim() const { return static_cast<int>(node_->shape.size()); }
  std::size_t numel() const { return node_->numel(); }
  bool requires_grad() const { return node_->requires_grad; }

  std::vector<double>& value() { return node_->value; }
  const std::vector<double>& value() const { return node_->value; }
  std::vector<double>& grad() { return node_->grad; }
  const std::vector<double>& grad() const { return node_->grad; }

  double item() const {
    if (numel() != 1) throw ArgumentError("item() requires a scalar tensor");
    return node_->value[0];
  }

  std::shared_ptr<Node> node() const { return node_; }
  explicit operator bool() const { return node_ != nullptr; }

 private:
  std::shared_ptr<Node> node_;
};

/// Reverse-mode sweep from a scalar loss; accumulates into .grad of every
/// reachable node that requires grad.
void backward(const Tensor& loss);

// ---- primitives ----

/// (m,k)x(k,n), (B,m,k)x(k,n) with shared rhs, or (B,m,k)x(B,k,n).
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose_last2(const Tensor& a);

/// Same shape, or b broadcast over the last dimension (bias add).
Tensor add(const Tensor& a, const Tensor& b);
/// Elementwise multiply, same shape.
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
/// Elementwise add of a raw constant buffer (no grad path through c).
Tensor add_constant(const Tensor& a, const std::vector<double>& c);

Tensor gelu(const Tensor& a);
Tensor sigmoid(const Tensor& a);
/// Normalization over the last dimension with learned gain/bias.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias,
                  double eps = 1e-5);
Tensor softmax_last(const Tensor& a);
/// Inverted dropout; identity when !training or p == 0.
Tensor dropout(const Tensor& a, double p, Rng& rng, bool training);

/// Rows of a (V,D) table -> (|idx|, D); backward scatter-adds.
Tensor select_rows(const Tensor& table, const std::vector<int>& idx);
/// Arbitrary row gather from a 2D tensor.
Tensor gather_rows(const Tensor& x, const std::vector<int>& idx);
/// Vertical concatenation of 2D tensors sharing the column count.
Tensor concat_rows(const std::vector<Tensor>& parts);
/// Rows of a and b interleaved: a0, b0, a1, b1, ...
Tensor interleave_rows(const Tensor& a, const Tensor& b);
/// Append zero rows up to target_rows.
Tensor pad_rows(const Tensor& x, int target_rows);
/// Stack 2D tensors of identical shape into (B, L, D).
Tensor stack(const std::vector<Tensor>& parts);
/// Slice one batch element of a 3D tensor -> (L, D).
Tensor slice_batch(const Tensor& x, int b);
/// Contiguous slice over the last dimension.
Tensor slice_last(const Tensor& x, int start, int len);

/// (B,L,D) -> (B*H, L, D/H) and back.
Tensor split_heads(const Tensor& x, int n_head);
Tensor merge_heads(const Tensor& x, int n_head);

/// Mean squared error against a constant target; scalar output.
Tensor mse_loss(const Tensor& pred, const std::vector<double>& target);
/// Binary cross entropy of probabilities against 0/1 targets, clamped to
/// [eps, 1-eps]; positive, to be minimized. Scalar output.
Tensor bce_loss(const Tensor& probs, const std::vector<double>& targets,
                double eps = 1e-7);
/// a + alpha * b on scalars.
Tensor add_scaled(const Tensor& a, const Tensor& b, double alpha);
/// Mean of scalar tensors.
Tensor mean_scalars(const std::vector<Tensor>& xs);

}  // namespace radt::nn

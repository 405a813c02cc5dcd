#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "relex/errors.hpp"
#include "relex/rng.hpp"

namespace relex {

using Shape = std::vector<int>;

int numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl;

// Handle to one node of the computation graph. Copying shares the node.
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(const Shape& shape);
  static Tensor constant(const Shape& shape, std::vector<double> values);
  static Tensor scalar(double v);
  // Trainable leaf with a persistent gradient buffer.
  static Tensor parameter(const Shape& shape, std::vector<double> values);

  bool defined() const { return impl != nullptr; }
  const Shape& shape() const;
  int size() const;
  std::vector<double>& values();
  const std::vector<double>& values() const;
  std::vector<double>& grad();
  const std::vector<double>& grad() const;
  double value() const;  // sole element of a one-element tensor

  bool requires_grad() const;
  bool trainable() const;
  void set_trainable(bool trainable);  // leaves only; clears requires_grad too
  void zero_grad();

  std::shared_ptr<TensorImpl> impl;
};

struct TensorImpl {
  Shape shape;
  std::vector<double> values;
  std::vector<double> grad;     // persistent; parameters only
  std::vector<double> adjoint;  // scratch owned by the running backward pass
  bool requires_grad = false;
  bool trainable = false;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  std::function<void(TensorImpl&)> backward_fn;
};

// Elementwise; operands must agree in shape.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);

// w is (r, c), x is (c); result (r).
Tensor matvec(const Tensor& w, const Tensor& x);
// matvec plus bias.
Tensor affine(const Tensor& w, const Tensor& x, const Tensor& b);

// One-dimensional stitching and indexing.
Tensor flatten(const Tensor& x);
Tensor concat(const std::vector<Tensor>& parts);
Tensor slice(const Tensor& x, int start, int len);
Tensor row(const Tensor& m, int i);
Tensor gather(const Tensor& x, std::vector<int> indices);
Tensor pick(const Tensor& x, int i);
Tensor sum(const Tensor& x);

Tensor tanh(const Tensor& x);
Tensor sigmoid(const Tensor& x);
Tensor softmax(const Tensor& x);
Tensor log_softmax(const Tensor& x);
Tensor log_sum_exp(const Tensor& x);

// u is (m, l, m), y1 and y2 are (m); result (l) with
// out[c] = sum over a, b of y1[a] * u[a][c][b] * y2[b].
Tensor bilinear(const Tensor& u, const Tensor& y1, const Tensor& y2);

// Inverted dropout. Mask entries are 0 or 1/keep_prob, one draw per element.
Tensor dropout_mask(const Shape& shape, double keep_prob, RngStream& rng);
Tensor apply_dropout(const Tensor& x, double keep_prob, RngStream& rng, bool training);

// Accumulates d loss / d leaf into every trainable leaf the loss depends on.
// A second call over the same graph adds the same gradients once more.
void backward(const Tensor& loss);

}  // namespace relex

#include "relex/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>
#include <utility>

namespace relex {

int numel(const Shape& shape) {
  int n = 1;
  for (int d : shape) n *= d;
  return n;
}

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << "(";
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ")";
  return os.str();
}

namespace {

void check(bool ok, const std::string& msg) {
  if (!ok) throw ShapeError(msg);
}

void check_dims(const Shape& shape) {
  for (int d : shape) check(d > 0, "tensor dimensions must be positive, got " + shape_str(shape));
}

Tensor make_leaf(const Shape& shape, std::vector<double> values) {
  check_dims(shape);
  check(static_cast<int>(values.size()) == numel(shape),
        "value count does not match shape " + shape_str(shape));
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = shape;
  impl->values = std::move(values);
  Tensor t;
  t.impl = std::move(impl);
  return t;
}

Tensor make_node(Shape shape, std::vector<double> values,
                 std::vector<std::shared_ptr<TensorImpl>> parents,
                 std::function<void(TensorImpl&)> backward_fn) {
  auto impl = std::make_shared<TensorImpl>();
  impl->shape = std::move(shape);
  impl->values = std::move(values);
  bool needs = false;
  for (const auto& p : parents) needs = needs || p->requires_grad;
  if (needs) {
    // Constant subgraphs keep no parents, so backward never visits them.
    impl->requires_grad = true;
    impl->parents = std::move(parents);
    impl->backward_fn = std::move(backward_fn);
  }
  Tensor t;
  t.impl = std::move(impl);
  return t;
}

}  // namespace

Tensor Tensor::zeros(const Shape& shape) {
  check_dims(shape);
  return make_leaf(shape, std::vector<double>(numel(shape), 0.0));
}

Tensor Tensor::constant(const Shape& shape, std::vector<double> values) {
  return make_leaf(shape, std::move(values));
}

Tensor Tensor::scalar(double v) { return make_leaf({1}, {v}); }

Tensor Tensor::parameter(const Shape& shape, std::vector<double> values) {
  Tensor t = make_leaf(shape, std::move(values));
  t.impl->requires_grad = true;
  t.impl->trainable = true;
  t.impl->grad.assign(t.impl->values.size(), 0.0);
  return t;
}

const Shape& Tensor::shape() const {
  if (!impl) throw Error("tensor handle is empty");
  return impl->shape;
}

int Tensor::size() const {
  if (!impl) throw Error("tensor handle is empty");
  return static_cast<int>(impl->values.size());
}

std::vector<double>& Tensor::values() {
  if (!impl) throw Error("tensor handle is empty");
  return impl->values;
}

const std::vector<double>& Tensor::values() const {
  if (!impl) throw Error("tensor handle is empty");
  return impl->values;
}

std::vector<double>& Tensor::grad() {
  if (!impl) throw Error("tensor handle is empty");
  if (impl->grad.empty()) throw Error("tensor has no gradient buffer");
  return impl->grad;
}

const std::vector<double>& Tensor::grad() const {
  return const_cast<Tensor*>(this)->grad();
}

double Tensor::value() const {
  if (!impl) throw Error("tensor handle is empty");
  check(impl->values.size() == 1, "value(): tensor has " + std::to_string(impl->values.size()) + " elements");
  return impl->values[0];
}

bool Tensor::requires_grad() const { return impl && impl->requires_grad; }

bool Tensor::trainable() const { return impl && impl->trainable; }

void Tensor::set_trainable(bool trainable) {
  if (!impl) throw Error("tensor handle is empty");
  if (!impl->parents.empty()) throw Error("set_trainable: not a leaf tensor");
  impl->trainable = trainable;
  impl->requires_grad = trainable;
}

void Tensor::zero_grad() {
  if (!impl) throw Error("tensor handle is empty");
  if (!impl->grad.empty()) impl->grad.assign(impl->grad.size(), 0.0);
}

Tensor add(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(),
        "add: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<double> out(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] += bv[i];
  return make_node(a.shape(), std::move(out), {a.impl, b.impl}, [](TensorImpl& self) {
    for (int k = 0; k < 2; ++k) {
      auto& p = *self.parents[k];
      if (!p.requires_grad) continue;
      for (size_t i = 0; i < self.adjoint.size(); ++i) p.adjoint[i] += self.adjoint[i];
    }
  });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(),
        "sub: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<double> out(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] -= bv[i];
  return make_node(a.shape(), std::move(out), {a.impl, b.impl}, [](TensorImpl& self) {
    auto& a = *self.parents[0];
    auto& b = *self.parents[1];
    for (size_t i = 0; i < self.adjoint.size(); ++i) {
      if (a.requires_grad) a.adjoint[i] += self.adjoint[i];
      if (b.requires_grad) b.adjoint[i] -= self.adjoint[i];
    }
  });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  check(a.shape() == b.shape(),
        "mul: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  std::vector<double> out(a.values());
  const auto& bv = b.values();
  for (size_t i = 0; i < out.size(); ++i) out[i] *= bv[i];
  return make_node(a.shape(), std::move(out), {a.impl, b.impl}, [](TensorImpl& self) {
    auto& a = *self.parents[0];
    auto& b = *self.parents[1];
    for (size_t i = 0; i < self.adjoint.size(); ++i) {
      if (a.requires_grad) a.adjoint[i] += self.adjoint[i] * b.values[i];
      if (b.requires_grad) b.adjoint[i] += self.adjoint[i] * a.values[i];
    }
  });
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.values());
  for (double& v : out) v *= c;
  return make_node(a.shape(), std::move(out), {a.impl}, [c](TensorImpl& self) {
    auto& a = *self.parents[0];
    for (size_t i = 0; i < self.adjoint.size(); ++i) a.adjoint[i] += c * self.adjoint[i];
  });
}

Tensor matvec(const Tensor& w, const Tensor& x) {
  check(w.shape().size() == 2, "matvec: matrix must be rank 2, got " + shape_str(w.shape()));
  check(x.shape().size() == 1, "matvec: vector must be rank 1, got " + shape_str(x.shape()));
  const int r = w.shape()[0], c = w.shape()[1];
  check(c == x.shape()[0],
        "matvec: " + shape_str(w.shape()) + " does not accept " + shape_str(x.shape()));
  const auto& wv = w.values();
  const auto& xv = x.values();
  std::vector<double> out(r, 0.0);
  for (int i = 0; i < r; ++i) {
    const double* wr = &wv[static_cast<size_t>(i) * c];
    double s = 0.0;
    for (int j = 0; j < c; ++j) s += wr[j] * xv[j];
    out[i] = s;
  }
  return make_node({r}, std::move(out), {w.impl, x.impl}, [r, c](TensorImpl& self) {
    auto& w = *self.parents[0];
    auto& x = *self.parents[1];
    for (int i = 0; i < r; ++i) {
      const double g = self.adjoint[i];
      if (g == 0.0) continue;
      if (w.requires_grad) {
        double* wr = &w.adjoint[static_cast<size_t>(i) * c];
        for (int j = 0; j < c; ++j) wr[j] += g * x.values[j];
      }
      if (x.requires_grad) {
        const double* wr = &w.values[static_cast<size_t>(i) * c];
        for (int j = 0; j < c; ++j) x.adjoint[j] += g * wr[j];
      }
    }
  });
}

Tensor affine(const Tensor& w, const Tensor& x, const Tensor& b) {
  return add(matvec(w, x), b);
}

Tensor flatten(const Tensor& x) {
  std::vector<double> out(x.values());
  return make_node({x.size()}, std::move(out), {x.impl}, [](TensorImpl& self) {
    auto& x = *self.parents[0];
    for (size_t i = 0; i < self.adjoint.size(); ++i) x.adjoint[i] += self.adjoint[i];
  });
}

Tensor concat(const std::vector<Tensor>& parts) {
  check(!parts.empty(), "concat: nothing to concatenate");
  int total = 0;
  std::vector<std::shared_ptr<TensorImpl>> parents;
  parents.reserve(parts.size());
  for (const auto& p : parts) {
    check(p.shape().size() == 1, "concat: parts must be rank 1, got " + shape_str(p.shape()));
    total += p.size();
    parents.push_back(p.impl);
  }
  std::vector<double> out;
  out.reserve(total);
  for (const auto& p : parts) out.insert(out.end(), p.values().begin(), p.values().end());
  return make_node({total}, std::move(out), std::move(parents), [](TensorImpl& self) {
    size_t off = 0;
    for (auto& pp : self.parents) {
      auto& p = *pp;
      const size_t n = p.values.size();
      if (p.requires_grad)
        for (size_t i = 0; i < n; ++i) p.adjoint[i] += self.adjoint[off + i];
      off += n;
    }
  });
}

Tensor slice(const Tensor& x, int start, int len) {
  check(x.shape().size() == 1, "slice: needs rank 1, got " + shape_str(x.shape()));
  check(start >= 0 && len > 0 && start + len <= x.size(),
        "slice: [" + std::to_string(start) + "," + std::to_string(start + len) +
            ") out of range for " + shape_str(x.shape()));
  const auto& xv = x.values();
  std::vector<double> out(xv.begin() + start, xv.begin() + start + len);
  return make_node({len}, std::move(out), {x.impl}, [start](TensorImpl& self) {
    auto& x = *self.parents[0];
    for (size_t i = 0; i < self.adjoint.size(); ++i) x.adjoint[start + i] += self.adjoint[i];
  });
}

Tensor row(const Tensor& m, int i) {
  check(m.shape().size() == 2, "row: needs rank 2, got " + shape_str(m.shape()));
  const int r = m.shape()[0], c = m.shape()[1];
  check(i >= 0 && i < r, "row: index " + std::to_string(i) + " out of range for " + shape_str(m.shape()));
  const auto& mv = m.values();
  std::vector<double> out(mv.begin() + static_cast<size_t>(i) * c,
                          mv.begin() + static_cast<size_t>(i + 1) * c);
  return make_node({c}, std::move(out), {m.impl}, [i, c](TensorImpl& self) {
    auto& m = *self.parents[0];
    double* dst = &m.adjoint[static_cast<size_t>(i) * c];
    for (int j = 0; j < c; ++j) dst[j] += self.adjoint[j];
  });
}

Tensor gather(const Tensor& x, std::vector<int> indices) {
  check(x.shape().size() == 1, "gather: needs rank 1, got " + shape_str(x.shape()));
  check(!indices.empty(), "gather: empty index list");
  const auto& xv = x.values();
  const int count = static_cast<int>(indices.size());
  std::vector<double> out(indices.size());
  for (size_t k = 0; k < indices.size(); ++k) {
    check(indices[k] >= 0 && indices[k] < x.size(),
          "gather: index " + std::to_string(indices[k]) + " out of range for " + shape_str(x.shape()));
    out[k] = xv[indices[k]];
  }
  return make_node({count}, std::move(out), {x.impl},
                   [idx = std::move(indices)](TensorImpl& self) {
                     auto& x = *self.parents[0];
                     for (size_t k = 0; k < idx.size(); ++k) x.adjoint[idx[k]] += self.adjoint[k];
                   });
}

Tensor pick(const Tensor& x, int i) {
  check(x.shape().size() == 1, "pick: needs rank 1, got " + shape_str(x.shape()));
  check(i >= 0 && i < x.size(),
        "pick: index " + std::to_string(i) + " out of range for " + shape_str(x.shape()));
  return make_node({1}, {x.values()[i]}, {x.impl}, [i](TensorImpl& self) {
    self.parents[0]->adjoint[i] += self.adjoint[0];
  });
}

Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return make_node({1}, {s}, {x.impl}, [](TensorImpl& self) {
    auto& x = *self.parents[0];
    for (size_t i = 0; i < x.adjoint.size(); ++i) x.adjoint[i] += self.adjoint[0];
  });
}

Tensor tanh(const Tensor& x) {
  std::vector<double> out(x.values());
  for (double& v : out) v = std::tanh(v);
  return make_node(x.shape(), std::move(out), {x.impl}, [](TensorImpl& self) {
    auto& x = *self.parents[0];
    for (size_t i = 0; i < self.adjoint.size(); ++i) {
      const double y = self.values[i];
      x.adjoint[i] += self.adjoint[i] * (1.0 - y * y);
    }
  });
}

Tensor sigmoid(const Tensor& x) {
  std::vector<double> out(x.values());
  for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
  return make_node(x.shape(), std::move(out), {x.impl}, [](TensorImpl& self) {
    auto& x = *self.parents[0];
    for (size_t i = 0; i < self.adjoint.size(); ++i) {
      const double y = self.values[i];
      x.adjoint[i] += self.adjoint[i] * y * (1.0 - y);
    }
  });
}

Tensor softmax(const Tensor& x) {
  check(x.shape().size() == 1 && x.size() > 0, "softmax: needs a nonempty vector");
  const auto& xv = x.values();
  const double m = *std::max_element(xv.begin(), xv.end());
  double s = 0.0;
  std::vector<double> out(xv.size());
  for (size_t i = 0; i < xv.size(); ++i) s += out[i] = std::exp(xv[i] - m);
  for (double& v : out) v /= s;
  return make_node(x.shape(), std::move(out), {x.impl}, [](TensorImpl& self) {
    auto& x = *self.parents[0];
    double dot = 0.0;
    for (size_t i = 0; i < self.adjoint.size(); ++i) dot += self.adjoint[i] * self.values[i];
    for (size_t i = 0; i < self.adjoint.size(); ++i)
      x.adjoint[i] += self.values[i] * (self.adjoint[i] - dot);
  });
}

Tensor log_softmax(const Tensor& x) {
  check(x.shape().size() == 1 && x.size() > 0, "log_softmax: needs a nonempty vector");
  const auto& xv = x.values();
  const double m = *std::max_element(xv.begin(), xv.end());
  double s = 0.0;
  for (double v : xv) s += std::exp(v - m);
  const double lse = m + std::log(s);
  std::vector<double> out(xv);
  for (double& v : out) v -= lse;
  return make_node(x.shape(), std::move(out), {x.impl}, [](TensorImpl& self) {
    auto& x = *self.parents[0];
    double gs = 0.0;
    for (double g : self.adjoint) gs += g;
    for (size_t i = 0; i < self.adjoint.size(); ++i)
      x.adjoint[i] += self.adjoint[i] - std::exp(self.values[i]) * gs;
  });
}

Tensor log_sum_exp(const Tensor& x) {
  check(x.shape().size() == 1 && x.size() > 0, "log_sum_exp: needs a nonempty vector");
  const auto& xv = x.values();
  const double m = *std::max_element(xv.begin(), xv.end());
  double s = 0.0;
  for (double v : xv) s += std::exp(v - m);
  const double lse = m + std::log(s);
  return make_node({1}, {lse}, {x.impl}, [](TensorImpl& self) {
    auto& x = *self.parents[0];
    const double g = self.adjoint[0];
    for (size_t i = 0; i < x.adjoint.size(); ++i)
      x.adjoint[i] += g * std::exp(x.values[i] - self.values[0]);
  });
}

Tensor bilinear(const Tensor& u, const Tensor& y1, const Tensor& y2) {
  check(u.shape().size() == 3, "bilinear: u must be rank 3, got " + shape_str(u.shape()));
  const int m1 = u.shape()[0], l = u.shape()[1], m2 = u.shape()[2];
  check(y1.shape() == Shape{m1}, "bilinear: y1 " + shape_str(y1.shape()) + " vs u " + shape_str(u.shape()));
  check(y2.shape() == Shape{m2}, "bilinear: y2 " + shape_str(y2.shape()) + " vs u " + shape_str(u.shape()));
  const auto& uv = u.values();
  const auto& a1 = y1.values();
  const auto& a2 = y2.values();
  std::vector<double> out(l, 0.0);
  for (int a = 0; a < m1; ++a) {
    const double ya = a1[a];
    if (ya == 0.0) continue;
    for (int c = 0; c < l; ++c) {
      const double* ur = &uv[(static_cast<size_t>(a) * l + c) * m2];
      double s = 0.0;
      for (int b = 0; b < m2; ++b) s += ur[b] * a2[b];
      out[c] += ya * s;
    }
  }
  return make_node({l}, std::move(out), {u.impl, y1.impl, y2.impl}, [m1, l, m2](TensorImpl& self) {
    auto& u = *self.parents[0];
    auto& y1 = *self.parents[1];
    auto& y2 = *self.parents[2];
    for (int c = 0; c < l; ++c) {
      const double g = self.adjoint[c];
      if (g == 0.0) continue;
      for (int a = 0; a < m1; ++a) {
        const double ya = y1.values[a];
        const size_t base = (static_cast<size_t>(a) * l + c) * m2;
        if (u.requires_grad) {
          const double gy = g * ya;
          for (int b = 0; b < m2; ++b) u.adjoint[base + b] += gy * y2.values[b];
        }
        if (y1.requires_grad) {
          double s = 0.0;
          for (int b = 0; b < m2; ++b) s += u.values[base + b] * y2.values[b];
          y1.adjoint[a] += g * s;
        }
        if (y2.requires_grad) {
          const double gy = g * ya;
          for (int b = 0; b < m2; ++b) y2.adjoint[b] += gy * u.values[base + b];
        }
      }
    }
  });
}

Tensor dropout_mask(const Shape& shape, double keep_prob, RngStream& rng) {
  if (!(keep_prob > 0.0 && keep_prob <= 1.0))
    throw ConfigError("dropout keep probability must be in (0, 1], got " + std::to_string(keep_prob));
  std::vector<double> mask(numel(shape));
  const double inv = 1.0 / keep_prob;
  for (double& v : mask) v = rng.uniform() < keep_prob ? inv : 0.0;
  return Tensor::constant(shape, std::move(mask));
}

Tensor apply_dropout(const Tensor& x, double keep_prob, RngStream& rng, bool training) {
  if (!training) return x;
  return mul(x, dropout_mask(x.shape(), keep_prob, rng));
}

void backward(const Tensor& loss) {
  if (!loss.impl) throw Error("backward: empty loss tensor");
  if (loss.impl->values.size() != 1) throw ShapeError("backward: loss must be a scalar");
  TensorImpl* root = loss.impl.get();
  if (!root->requires_grad) return;  // constant loss, nothing depends on parameters

  // Post-order over the reachable gradient-requiring subgraph: inputs before
  // consumers, so the reversed order is a valid backprop schedule.
  std::vector<TensorImpl*> order;
  std::unordered_set<TensorImpl*> seen;
  std::vector<std::pair<TensorImpl*, size_t>> stack;
  stack.emplace_back(root, 0);
  seen.insert(root);
  while (!stack.empty()) {
    auto& top = stack.back();
    if (top.second == top.first->parents.size()) {
      order.push_back(top.first);
      stack.pop_back();
      continue;
    }
    TensorImpl* p = top.first->parents[top.second++].get();
    if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
  }

  for (TensorImpl* n : order) n->adjoint.assign(n->values.size(), 0.0);
  root->adjoint[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
  for (TensorImpl* n : order) {
    if (n->parents.empty() && !n->backward_fn) {
      if (n->grad.empty()) n->grad.assign(n->values.size(), 0.0);
      for (size_t i = 0; i < n->grad.size(); ++i) n->grad[i] += n->adjoint[i];
    }
    n->adjoint.clear();
    n->adjoint.shrink_to_fit();
  }
}

}  // namespace relex

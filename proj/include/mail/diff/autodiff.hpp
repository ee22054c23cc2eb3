#pragma once

// Tape-based reverse-mode differentiation. Every op returns a Var whose node
// records its inputs and a closure that pushes the node's gradient into them.
// Nodes that do not depend on any gradient-requiring input record nothing.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "mail/core/error.hpp"
#include "mail/diff/kernels.hpp"
#include "mail/diff/tensor.hpp"

namespace mail::diff {

template <class T>
struct Node {
  Tensor<T> value;
  bool requires_grad = false;
  bool frozen = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;
};

/// Shared handle to a graph node. Copies alias the same node.
template <class T>
class Var {
 public:
  Var() = default;

  explicit Var(Tensor<T> value, bool requires_grad = false) : node_(std::make_shared<Node<T>>()) {
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
  }

  static Var constant(Tensor<T> value) { return Var(std::move(value), false); }
  static Var parameter(Tensor<T> value) { return Var(std::move(value), true); }

  bool defined() const noexcept { return static_cast<bool>(node_); }

  const Tensor<T>& value() const { return node_->value; }
  Tensor<T>& value() { return node_->value; }
  const Shape& shape() const { return node_->value.shape(); }
  std::size_t size() const { return node_->value.size(); }
  std::size_t dim(std::size_t i) const { return node_->value.dim(i); }
  std::size_t rank() const { return node_->value.rank(); }
  std::span<const T> data() const { return node_->value.data(); }
  T item() const { return node_->value.item(); }

  bool requires_grad() const { return node_ && node_->requires_grad; }
  void set_requires_grad(bool on) { node_->requires_grad = on; }
  bool frozen() const { return node_->frozen; }

  /// Frozen leaves stop requesting gradients; optimizers also skip them.
  void set_frozen(bool on) {
    node_->frozen = on;
    node_->requires_grad = !on;
  }

  bool has_grad() const { return !node_->value.grad().empty(); }
  std::span<const T> grad() const { return node_->value.grad(); }
  std::span<T> mutable_grad() { return node_->value.grad(); }
  void clear_grad() { node_->value.clear_grad(); }

  const std::shared_ptr<Node<T>>& node() const noexcept { return node_; }

 private:
  std::shared_ptr<Node<T>> node_;
};

namespace detail {

template <class T>
Var<T> record(Tensor<T> value, std::vector<Var<T>> inputs, std::function<void(Node<T>&)> fn) {
  Var<T> out(std::move(value));
  bool any = false;
  for (const auto& in : inputs) any = any || in.requires_grad();
  if (any) {
    auto& node = *out.node();
    node.requires_grad = true;
    node.parents.reserve(inputs.size());
    for (auto& in : inputs) node.parents.push_back(in.node());
    node.backward_fn = std::move(fn);
  }
  return out;
}

/// Gradient buffer of a parent, or an empty span when it does not need one.
template <class T>
std::span<T> grad_of(Node<T>& parent) {
  if (!parent.requires_grad) return {};
  return parent.value.ensure_grad();
}

template <class T>
T* grad_ptr(Node<T>& parent) {
  auto g = grad_of(parent);
  return g.empty() ? nullptr : g.data();
}

inline std::size_t last_dim(const Shape& s) { return s.empty() ? 1 : s.back(); }

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ConfigError(msg);
}

template <class T>
void require_same_shape(const Var<T>& a, const Var<T>& b, const char* op) {
  require(a.shape() == b.shape(), std::string(op) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                                      shape_string(b.shape()));
}

template <class T, class F, class D>
Var<T> unary(const Var<T>& x, F f, D dfdx) {
  Tensor<T> y(x.shape());
  const auto xs = x.data();
  for (std::size_t i = 0; i < xs.size(); ++i) y[i] = f(xs[i]);
  return record<T>(std::move(y), {x}, [dfdx](Node<T>& self) {
    auto gx = grad_of(*self.parents[0]);
    if (gx.empty()) return;
    const auto xs = self.parents[0]->value.data();
    const auto ys = self.value.data();
    const auto gy = self.value.grad();
    for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * dfdx(xs[i], ys[i]);
  });
}

template <class T>
T stable_sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <class T>
T softplus(T x) {
  return std::max(x, T(0)) + std::log1p(std::exp(-std::abs(x)));
}

/// Row-wise numerically stable log-softmax over the last dimension.
template <class T>
void log_softmax_rows(std::span<const T> x, std::size_t cols, std::span<T> out) {
  const std::size_t rows = x.size() / cols;
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.data() + r * cols;
    T* yr = out.data() + r * cols;
    const T mx = *std::max_element(xr, xr + cols);
    T total = 0;
    for (std::size_t j = 0; j < cols; ++j) total += std::exp(xr[j] - mx);
    const T lse = mx + std::log(total);
    for (std::size_t j = 0; j < cols; ++j) yr[j] = xr[j] - lse;
  }
}

}  // namespace detail

/// Reverse sweep from a scalar loss. Interior gradients are reset first and
/// leaf gradients accumulate, so clearing leaves and re-running reproduces
/// the same gradients.
template <class T>
void backward(const Var<T>& loss) {
  if (!loss.defined() || loss.size() != 1) {
    throw UsageError("backward requires a scalar loss, got shape " +
                     (loss.defined() ? shape_string(loss.shape()) : std::string("<undefined>")));
  }
  if (!loss.requires_grad()) return;

  std::vector<Node<T>*> order;
  std::unordered_set<Node<T>*> seen;
  std::vector<std::pair<Node<T>*, std::size_t>> stack{{loss.node().get(), 0}};
  seen.insert(loss.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node<T>* parent = node->parents[next++].get();
      if (parent->requires_grad && seen.insert(parent).second) stack.emplace_back(parent, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node<T>* n : order) {
    if (n->backward_fn) n->value.clear_grad();
  }
  loss.node()->value.ensure_grad()[0] += T(1);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node<T>* n = *it;
    if (n->backward_fn && !n->value.grad().empty()) n->backward_fn(*n);
  }
}

template <class T>
Var<T> detach(const Var<T>& x) {
  return Var<T>::constant(Tensor<T>(x.shape(), x.value().values()));
}

// ---------------------------------------------------------------- layers

/// y[n,o] = x[n,i] W[i,o] + b[o]. A rank-1 x is treated as a single row.
/// `b` may be undefined.
template <class T>
Var<T> dense(const Var<T>& x, const Var<T>& w, const Var<T>& b) {
  using detail::require;
  require(w.rank() == 2, "dense: weight must be rank 2, got " + shape_string(w.shape()));
  const bool vector_in = x.rank() == 1;
  require(vector_in || x.rank() == 2, "dense: input must be rank 1 or 2, got " + shape_string(x.shape()));
  const std::size_t n = vector_in ? 1 : x.dim(0);
  const std::size_t in = vector_in ? x.dim(0) : x.dim(1);
  const std::size_t out = w.dim(1);
  require(in == w.dim(0), "dense: input " + shape_string(x.shape()) + " does not conform to weight " +
                              shape_string(w.shape()));
  if (b.defined()) {
    require(b.rank() == 1 && b.dim(0) == out,
            "dense: bias " + shape_string(b.shape()) + " does not match output width " + std::to_string(out));
  }
  Tensor<T> y(vector_in ? Shape{out} : Shape{n, out});
  kernels::dense_forward(n, in, out, x.value().raw(), w.value().raw(), b.defined() ? b.value().raw() : nullptr,
                         y.raw());
  std::vector<Var<T>> inputs{x, w};
  if (b.defined()) inputs.push_back(b);
  return detail::record<T>(std::move(y), std::move(inputs), [n, in, out](Node<T>& self) {
    auto& px = *self.parents[0];
    auto& pw = *self.parents[1];
    T* db = self.parents.size() > 2 ? detail::grad_ptr(*self.parents[2]) : nullptr;
    kernels::dense_backward(n, in, out, px.value.raw(), pw.value.raw(), self.value.grad().data(),
                            detail::grad_ptr(px), detail::grad_ptr(pw), db);
  });
}

template <class T>
Var<T> matmul(const Var<T>& x, const Var<T>& w) {
  return dense(x, w, Var<T>());
}

/// 3x3 cross-correlation with zero padding 1. x is [n,c,h,w] or [c,h,w],
/// kernel is [k,c,3,3], bias (optional) is [k]; stride 1 or 2.
template <class T>
Var<T> conv2d(const Var<T>& x, const Var<T>& kernel, const Var<T>& bias, std::size_t stride) {
  using detail::require;
  require(stride == 1 || stride == 2, "conv2d: stride must be 1 or 2, got " + std::to_string(stride));
  const bool single = x.rank() == 3;
  require(single || x.rank() == 4, "conv2d: input must be [c,h,w] or [n,c,h,w], got " + shape_string(x.shape()));
  require(kernel.rank() == 4 && kernel.dim(2) == 3 && kernel.dim(3) == 3,
          "conv2d: kernel must be [k,c,3,3], got " + shape_string(kernel.shape()));
  kernels::ConvGeom g;
  g.batch = single ? 1 : x.dim(0);
  const std::size_t off = single ? 0 : 1;
  g.in_channels = x.dim(off);
  g.height = x.dim(off + 1);
  g.width = x.dim(off + 2);
  g.out_channels = kernel.dim(0);
  g.stride = stride;
  require(kernel.dim(1) == g.in_channels, "conv2d: kernel expects " + std::to_string(kernel.dim(1)) +
                                              " input channels, input has " + std::to_string(g.in_channels));
  require(g.height >= 3 && g.width >= 3, "conv2d: spatial size must be at least 3x3");
  if (bias.defined()) {
    require(bias.rank() == 1 && bias.dim(0) == g.out_channels, "conv2d: bias shape " + shape_string(bias.shape()));
  }
  Shape out_shape = single ? Shape{g.out_channels, g.out_height(), g.out_width()}
                           : Shape{g.batch, g.out_channels, g.out_height(), g.out_width()};
  Tensor<T> y(std::move(out_shape));
  kernels::conv2d_forward(g, x.value().raw(), kernel.value().raw(), bias.defined() ? bias.value().raw() : nullptr,
                          y.raw());
  std::vector<Var<T>> inputs{x, kernel};
  if (bias.defined()) inputs.push_back(bias);
  return detail::record<T>(std::move(y), std::move(inputs), [g](Node<T>& self) {
    auto& px = *self.parents[0];
    auto& pk = *self.parents[1];
    T* db = self.parents.size() > 2 ? detail::grad_ptr(*self.parents[2]) : nullptr;
    kernels::conv2d_backward(g, px.value.raw(), pk.value.raw(), self.value.grad().data(), detail::grad_ptr(px),
                             detail::grad_ptr(pk), db);
  });
}

// ----------------------------------------------------------- activations

template <class T>
Var<T> relu(const Var<T>& x) {
  return detail::unary(
      x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <class T>
Var<T> tanh(const Var<T>& x) {
  return detail::unary(
      x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

/// Logistic function, kept strictly inside (0,1) even where it would round
/// to an endpoint.
template <class T>
Var<T> sigmoid(const Var<T>& x) {
  constexpr T lo = std::numeric_limits<T>::min();
  const T hi = std::nextafter(T(1), T(0));
  return detail::unary(
      x, [lo, hi](T v) { return std::clamp(detail::stable_sigmoid(v), lo, hi); },
      [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Var<T> exp(const Var<T>& x) {
  return detail::unary(
      x, [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <class T>
Var<T> log(const Var<T>& x) {
  return detail::unary(
      x, [](T v) { return std::log(v); }, [](T v, T) { return T(1) / v; });
}

template <class T>
Var<T> square(const Var<T>& x) {
  return detail::unary(
      x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; });
}

template <class T>
Var<T> softplus(const Var<T>& x) {
  return detail::unary(
      x, [](T v) { return detail::softplus(v); }, [](T v, T) { return detail::stable_sigmoid(v); });
}

/// Gradient passes where lo <= x <= hi.
template <class T>
Var<T> clamp(const Var<T>& x, T lo, T hi) {
  return detail::unary(
      x, [lo, hi](T v) { return std::clamp(v, lo, hi); },
      [lo, hi](T v, T) { return (v >= lo && v <= hi) ? T(1) : T(0); });
}

template <class T>
Var<T> scale(const Var<T>& x, T factor) {
  return detail::unary(
      x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <class T>
Var<T> add_scalar(const Var<T>& x, T c) {
  return detail::unary(
      x, [c](T v) { return v + c; }, [](T, T) { return T(1); });
}

/// Softmax over the last dimension.
template <class T>
Var<T> softmax(const Var<T>& x) {
  const std::size_t cols = detail::last_dim(x.shape());
  Tensor<T> y(x.shape());
  detail::log_softmax_rows<T>(x.data(), cols, y.data());
  for (auto& v : y.data()) v = std::exp(v);
  return detail::record<T>(std::move(y), {x}, [cols](Node<T>& self) {
    auto gx = detail::grad_of(*self.parents[0]);
    if (gx.empty()) return;
    const auto ys = self.value.data();
    const auto gy = self.value.grad();
    for (std::size_t r = 0; r < ys.size() / cols; ++r) {
      T dot = 0;
      for (std::size_t j = 0; j < cols; ++j) dot += gy[r * cols + j] * ys[r * cols + j];
      for (std::size_t j = 0; j < cols; ++j) gx[r * cols + j] += ys[r * cols + j] * (gy[r * cols + j] - dot);
    }
  });
}

/// Log-softmax over the last dimension.
template <class T>
Var<T> log_softmax(const Var<T>& x) {
  const std::size_t cols = detail::last_dim(x.shape());
  Tensor<T> y(x.shape());
  detail::log_softmax_rows<T>(x.data(), cols, y.data());
  return detail::record<T>(std::move(y), {x}, [cols](Node<T>& self) {
    auto gx = detail::grad_of(*self.parents[0]);
    if (gx.empty()) return;
    const auto ys = self.value.data();
    const auto gy = self.value.grad();
    for (std::size_t r = 0; r < ys.size() / cols; ++r) {
      T total = 0;
      for (std::size_t j = 0; j < cols; ++j) total += gy[r * cols + j];
      for (std::size_t j = 0; j < cols; ++j) gx[r * cols + j] += gy[r * cols + j] - std::exp(ys[r * cols + j]) * total;
    }
  });
}

// ------------------------------------------------------------ arithmetic

template <class T>
Var<T> add(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "add");
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] + b.data()[i];
  return detail::record<T>(std::move(y), {a, b}, [](Node<T>& self) {
    const auto gy = self.value.grad();
    for (auto& p : self.parents) {
      auto g = detail::grad_of(*p);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += gy[i];
    }
  });
}

template <class T>
Var<T> sub(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "sub");
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] - b.data()[i];
  return detail::record<T>(std::move(y), {a, b}, [](Node<T>& self) {
    const auto gy = self.value.grad();
    auto ga = detail::grad_of(*self.parents[0]);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gy[i];
    auto gb = detail::grad_of(*self.parents[1]);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= gy[i];
  });
}

template <class T>
Var<T> mul(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "mul");
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a.data()[i] * b.data()[i];
  return detail::record<T>(std::move(y), {a, b}, [](Node<T>& self) {
    const auto gy = self.value.grad();
    const auto av = self.parents[0]->value.data();
    const auto bv = self.parents[1]->value.data();
    auto ga = detail::grad_of(*self.parents[0]);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += gy[i] * bv[i];
    auto gb = detail::grad_of(*self.parents[1]);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += gy[i] * av[i];
  });
}

/// Elementwise minimum; ties route the gradient to `a`.
template <class T>
Var<T> minimum(const Var<T>& a, const Var<T>& b) {
  detail::require_same_shape(a, b, "minimum");
  Tensor<T> y(a.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::min(a.data()[i], b.data()[i]);
  return detail::record<T>(std::move(y), {a, b}, [](Node<T>& self) {
    const auto gy = self.value.grad();
    const auto av = self.parents[0]->value.data();
    const auto bv = self.parents[1]->value.data();
    auto ga = detail::grad_of(*self.parents[0]);
    auto gb = detail::grad_of(*self.parents[1]);
    for (std::size_t i = 0; i < gy.size(); ++i) {
      if (av[i] <= bv[i]) {
        if (!ga.empty()) ga[i] += gy[i];
      } else if (!gb.empty()) {
        gb[i] += gy[i];
      }
    }
  });
}

// ------------------------------------------------------------ reductions

template <class T>
Var<T> sum(const Var<T>& x) {
  T total = 0;
  for (T v : x.data()) total += v;
  return detail::record<T>(Tensor<T>::scalar(total), {x}, [](Node<T>& self) {
    auto gx = detail::grad_of(*self.parents[0]);
    const T g = self.value.grad()[0];
    for (auto& v : gx) v += g;
  });
}

template <class T>
Var<T> mean(const Var<T>& x) {
  return scale(sum(x), T(1) / static_cast<T>(x.size()));
}

/// Sum over the last dimension: [n,k] -> [n].
template <class T>
Var<T> sum_rows(const Var<T>& x) {
  const std::size_t cols = detail::last_dim(x.shape());
  const std::size_t rows = x.size() / cols;
  Tensor<T> y(Shape{rows});
  for (std::size_t r = 0; r < rows; ++r) {
    T total = 0;
    for (std::size_t j = 0; j < cols; ++j) total += x.data()[r * cols + j];
    y[r] = total;
  }
  return detail::record<T>(std::move(y), {x}, [cols](Node<T>& self) {
    auto gx = detail::grad_of(*self.parents[0]);
    const auto gy = self.value.grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i / cols];
  });
}

// --------------------------------------------------------------- shaping

template <class T>
Var<T> reshape(const Var<T>& x, Shape shape) {
  Tensor<T> y(x.shape(), x.value().values());
  y.reshape(std::move(shape));
  return detail::record<T>(std::move(y), {x}, [](Node<T>& self) {
    auto gx = detail::grad_of(*self.parents[0]);
    const auto gy = self.value.grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
  });
}

/// [n,p] ++ [n,q] -> [n,p+q] along the last dimension.
template <class T>
Var<T> concat_cols(const Var<T>& a, const Var<T>& b) {
  detail::require(a.rank() == 2 && b.rank() == 2 && a.dim(0) == b.dim(0),
                  "concat_cols: incompatible shapes " + shape_string(a.shape()) + " and " + shape_string(b.shape()));
  const std::size_t n = a.dim(0), p = a.dim(1), q = b.dim(1);
  Tensor<T> y(Shape{n, p + q});
  for (std::size_t r = 0; r < n; ++r) {
    std::copy_n(a.data().data() + r * p, p, y.raw() + r * (p + q));
    std::copy_n(b.data().data() + r * q, q, y.raw() + r * (p + q) + p);
  }
  return detail::record<T>(std::move(y), {a, b}, [n, p, q](Node<T>& self) {
    const auto gy = self.value.grad();
    auto ga = detail::grad_of(*self.parents[0]);
    auto gb = detail::grad_of(*self.parents[1]);
    for (std::size_t r = 0; r < n; ++r) {
      if (!ga.empty())
        for (std::size_t j = 0; j < p; ++j) ga[r * p + j] += gy[r * (p + q) + j];
      if (!gb.empty())
        for (std::size_t j = 0; j < q; ++j) gb[r * q + j] += gy[r * (p + q) + p + j];
    }
  });
}

/// Columns [start, start+len) of a rank-2 tensor.
template <class T>
Var<T> slice_cols(const Var<T>& x, std::size_t start, std::size_t len) {
  detail::require(x.rank() == 2 && start + len <= x.dim(1) && len > 0,
                  "slice_cols: bad range on " + shape_string(x.shape()));
  const std::size_t n = x.dim(0), cols = x.dim(1);
  Tensor<T> y(Shape{n, len});
  for (std::size_t r = 0; r < n; ++r) std::copy_n(x.data().data() + r * cols + start, len, y.raw() + r * len);
  return detail::record<T>(std::move(y), {x}, [n, cols, start, len](Node<T>& self) {
    auto gx = detail::grad_of(*self.parents[0]);
    const auto gy = self.value.grad();
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < len; ++j) gx[r * cols + start + j] += gy[r * len + j];
  });
}

/// out[r] = x[r, index[r]] for rank-2 x.
template <class T>
Var<T> pick(const Var<T>& x, const std::vector<std::size_t>& index) {
  detail::require(x.rank() == 2 && index.size() == x.dim(0), "pick: need one index per row of " +
                                                                 shape_string(x.shape()));
  const std::size_t cols = x.dim(1);
  Tensor<T> y(Shape{index.size()});
  for (std::size_t r = 0; r < index.size(); ++r) {
    detail::require(index[r] < cols, "pick: index out of range");
    y[r] = x.data()[r * cols + index[r]];
  }
  return detail::record<T>(std::move(y), {x}, [cols, index](Node<T>& self) {
    auto gx = detail::grad_of(*self.parents[0]);
    const auto gy = self.value.grad();
    for (std::size_t r = 0; r < index.size(); ++r) gx[r * cols + index[r]] += gy[r];
  });
}

/// Forward value `hard`, backward identity into `soft`.
template <class T>
Var<T> straight_through(const Tensor<T>& hard, const Var<T>& soft) {
  detail::require(hard.shape() == soft.shape(), "straight_through: shape mismatch");
  return detail::record<T>(Tensor<T>(hard.shape(), hard.values()), {soft}, [](Node<T>& self) {
    auto gx = detail::grad_of(*self.parents[0]);
    const auto gy = self.value.grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += gy[i];
  });
}

// ---------------------------------------------------------------- losses

/// Mean binary cross-entropy on logits: mean(softplus(l) - t*l).
template <class T>
Var<T> bce_with_logits(const Var<T>& logits, const std::vector<T>& targets) {
  detail::require(targets.size() == logits.size(), "bce_with_logits: target count mismatch");
  const std::size_t n = logits.size();
  T total = 0;
  for (std::size_t i = 0; i < n; ++i) total += detail::softplus(logits.data()[i]) - targets[i] * logits.data()[i];
  return detail::record<T>(Tensor<T>::scalar(total / static_cast<T>(n)), {logits}, [targets, n](Node<T>& self) {
    auto gx = detail::grad_of(*self.parents[0]);
    const auto xs = self.parents[0]->value.data();
    const T g = self.value.grad()[0] / static_cast<T>(n);
    for (std::size_t i = 0; i < n; ++i) gx[i] += g * (detail::stable_sigmoid(xs[i]) - targets[i]);
  });
}

/// Mean of -log softmax(logits)[label] over rows.
template <class T>
Var<T> cross_entropy(const Var<T>& logits, const std::vector<std::size_t>& labels) {
  detail::require(logits.rank() == 2 && labels.size() == logits.dim(0), "cross_entropy: one label per row required");
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  std::vector<T> logp(logits.size());
  detail::log_softmax_rows<T>(logits.data(), k, logp);
  T total = 0;
  for (std::size_t r = 0; r < n; ++r) {
    detail::require(labels[r] < k, "cross_entropy: label out of range");
    total -= logp[r * k + labels[r]];
  }
  return detail::record<T>(Tensor<T>::scalar(total / static_cast<T>(n)), {logits},
                           [labels, logp = std::move(logp), n, k](Node<T>& self) {
                             auto gx = detail::grad_of(*self.parents[0]);
                             const T g = self.value.grad()[0] / static_cast<T>(n);
                             for (std::size_t r = 0; r < n; ++r)
                               for (std::size_t j = 0; j < k; ++j)
                                 gx[r * k + j] += g * (std::exp(logp[r * k + j]) - (j == labels[r] ? T(1) : T(0)));
                           });
}

/// Per-row KL(N(mu, exp(log_sigma)^2) || N(0, I)) for [n,d] inputs -> [n].
template <class T>
Var<T> gaussian_kl(const Var<T>& mu, const Var<T>& log_sigma) {
  detail::require_same_shape(mu, log_sigma, "gaussian_kl");
  const std::size_t d = detail::last_dim(mu.shape());
  const std::size_t n = mu.size() / d;
  Tensor<T> y(Shape{n});
  for (std::size_t r = 0; r < n; ++r) {
    T total = 0;
    for (std::size_t j = 0; j < d; ++j) {
      const T m = mu.data()[r * d + j], ls = log_sigma.data()[r * d + j];
      total += m * m + std::exp(T(2) * ls) - T(1) - T(2) * ls;
    }
    y[r] = T(0.5) * total;
  }
  return detail::record<T>(std::move(y), {mu, log_sigma}, [d](Node<T>& self) {
    const auto gy = self.value.grad();
    auto gm = detail::grad_of(*self.parents[0]);
    auto gl = detail::grad_of(*self.parents[1]);
    const auto ms = self.parents[0]->value.data();
    const auto ls = self.parents[1]->value.data();
    for (std::size_t i = 0; i < ms.size(); ++i) {
      const T g = gy[i / d];
      if (!gm.empty()) gm[i] += g * ms[i];
      if (!gl.empty()) gl[i] += g * (std::exp(T(2) * ls[i]) - T(1));
    }
  });
}

/// Per-row KL(softmax(logits) || uniform) -> [n].
template <class T>
Var<T> categorical_kl_uniform(const Var<T>& logits) {
  const std::size_t k = detail::last_dim(logits.shape());
  const std::size_t n = logits.size() / k;
  std::vector<T> logp(logits.size());
  detail::log_softmax_rows<T>(logits.data(), k, logp);
  Tensor<T> y(Shape{n});
  std::vector<T> neg_entropy(n, T(0));
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t j = 0; j < k; ++j) neg_entropy[r] += std::exp(logp[r * k + j]) * logp[r * k + j];
    y[r] = neg_entropy[r] + std::log(static_cast<T>(k));
  }
  return detail::record<T>(std::move(y), {logits},
                           [k, logp = std::move(logp), neg_entropy = std::move(neg_entropy)](Node<T>& self) {
                             auto gx = detail::grad_of(*self.parents[0]);
                             const auto gy = self.value.grad();
                             for (std::size_t i = 0; i < gx.size(); ++i) {
                               const std::size_t r = i / k;
                               gx[i] += gy[r] * std::exp(logp[i]) * (logp[i] - neg_entropy[r]);
                             }
                           });
}

/// Per-row entropy of softmax(logits) -> [n].
template <class T>
Var<T> categorical_entropy(const Var<T>& logits) {
  const std::size_t k = detail::last_dim(logits.shape());
  return add_scalar(scale(categorical_kl_uniform(logits), T(-1)), std::log(static_cast<T>(k)));
}

}  // namespace mail::diff

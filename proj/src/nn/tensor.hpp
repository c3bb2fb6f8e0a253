#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "common/error.hpp"
#include "kernels/kernels.hpp"

// Reverse-mode tape. A Tape owns every node of one computation; ops append
// nodes and record a backward closure. Creation order is a topological order
// of the graph, so backward() is a single reverse sweep. The engine is
// instantiated at float (training/inference) and double (gradient and
// Jacobian checks).
//
// Every op verifies its output is finite and raises NumericalError naming the
// op otherwise.

namespace svc::nn {

// Leaves new elements default-initialized (i.e. uninitialized for float):
// op outputs are always fully written, so the usual resize() memset is waste.
template <class T>
struct UninitAlloc : std::allocator<T> {
  using std::allocator<T>::allocator;
  template <class U>
  struct rebind {
    using other = UninitAlloc<U>;
  };
  template <class U>
  void construct(U* p) noexcept {
    ::new (static_cast<void*>(p)) U;
  }
  template <class U, class... Args>
  void construct(U* p, Args&&... args) {
    ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
  }
};

template <class S>
using ValueBuffer = std::vector<S, UninitAlloc<S>>;

struct Shape {
  int rank = 0;
  std::array<int, 3> d{1, 1, 1};

  static Shape scalar() { return {0, {1, 1, 1}}; }
  static Shape vec(int n) { return {1, {n, 1, 1}}; }
  static Shape mat(int r, int c) { return {2, {r, c, 1}}; }
  static Shape cube(int a, int b, int c) { return {3, {a, b, c}}; }

  size_t numel() const { return size_t(d[0]) * d[1] * d[2]; }
  int rows() const { return d[0]; }
  int cols() const { return d[1]; }
  bool operator==(const Shape& o) const { return rank == o.rank && d == o.d; }
  bool operator!=(const Shape& o) const { return !(*this == o); }

  std::string str() const {
    std::string s = "(";
    for (int i = 0; i < rank; ++i) s += (i ? "," : "") + std::to_string(d[i]);
    return s + ")";
  }
};

struct ConvSpec {
  int stride = 1;
  int pad = 0;
  int dilation = 1;
};

inline int conv_out_len(int in_len, int kernel, const ConvSpec& cs) {
  return (in_len + 2 * cs.pad - cs.dilation * (kernel - 1) - 1) / cs.stride + 1;
}

inline int tconv_out_len(int in_len, int kernel, int stride, int pad) {
  return (in_len - 1) * stride - 2 * pad + kernel;
}

template <class S>
class Tape {
 public:
  struct Node {
    Shape shape;
    ValueBuffer<S> val;
    ValueBuffer<S> grad;
    std::function<void()> bwd;
    bool needs_grad = false;
    const char* op = "leaf";
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  int size() const { return int(nodes_.size()); }
  const Node& node(int id) const { return nodes_[id]; }
  Shape shape(int id) const { return nodes_[id].shape; }
  const S* val(int id) const { return nodes_[id].val.data(); }
  S* mutable_val(int id) { return nodes_[id].val.data(); }
  S scalar_value(int id) const { return nodes_[id].val[0]; }
  const S* grad(int id) const { return nodes_[id].grad.data(); }
  bool needs_grad(int id) const { return nodes_[id].needs_grad; }

  // ------------------------------------------------------------- leaves ----

  int constant(Shape shp, const S* data) {
    int id = push(shp, "constant", false);
    std::copy(data, data + shp.numel(), nodes_[id].val.begin());
    return id;
  }

  int constant_fill(Shape shp, S v) {
    int id = push(shp, "constant", false);
    std::fill(nodes_[id].val.begin(), nodes_[id].val.end(), v);
    return id;
  }

  int leaf(Shape shp, const S* data) {
    int id = push(shp, "leaf", true);
    std::copy(data, data + shp.numel(), nodes_[id].val.begin());
    return id;
  }

  // -------------------------------------------------------- elementwise ----

  int add(int a, int b) { return binary("add", a, b, BinKind::add); }
  int mul(int a, int b) { return binary("mul", a, b, BinKind::mul); }
  int div(int a, int b) { return binary("div", a, b, BinKind::div); }
  int sub(int a, int b) { return add(a, scale(b, S(-1))); }

  int scale(int a, S k) {
    int id = push(shape(a), "scale", nodes_[a].needs_grad);
    kernels::scale(nodes_[id].val.data(), val(a), k, numel(a));
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, a, k] {
        kernels::axpy(nodes_[a].grad.data(), k, grad(id), numel(a));
      };
    return id;
  }

  int add_scalar(int a, S k) {
    int id = push(shape(a), "add_scalar", nodes_[a].needs_grad);
    const S* av = val(a);
    S* ov = nodes_[id].val.data();
    for (size_t i = 0; i < numel(a); ++i) ov[i] = av[i] + k;
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, a] {
        kernels::axpy(nodes_[a].grad.data(), S(1), grad(id), numel(a));
      };
    return id;
  }

  int tanh_op(int a) {
    return unary("tanh", a, [](S x) { return std::tanh(x); },
                 [](S x, S y) { (void)x; return S(1) - y * y; });
  }
  int sigmoid_op(int a) {
    return unary("sigmoid", a, [](S x) { return S(1) / (S(1) + std::exp(-x)); },
                 [](S x, S y) { (void)x; return y * (S(1) - y); });
  }
  int exp_op(int a) {
    return unary("exp", a, [](S x) { return std::exp(x); },
                 [](S x, S y) { (void)x; return y; });
  }
  int log_op(int a) {
    return unary("log", a, [](S x) { return std::log(x); },
                 [](S x, S y) { (void)y; return S(1) / x; });
  }
  int sin_op(int a) {
    return unary("sin", a, [](S x) { return std::sin(x); },
                 [](S x, S y) { (void)y; return std::cos(x); });
  }
  int cos_op(int a) {
    return unary("cos", a, [](S x) { return std::cos(x); },
                 [](S x, S y) { (void)y; return -std::sin(x); });
  }
  int sqrt_op(int a) {
    return unary("sqrt", a, [](S x) { return std::sqrt(x); },
                 [](S x, S y) { (void)x; return S(0.5) / y; });
  }
  int abs_op(int a) {
    return unary("abs", a, [](S x) { return x < 0 ? -x : x; },
                 [](S x, S y) { (void)y; return x > 0 ? S(1) : (x < 0 ? S(-1) : S(0)); });
  }

  int leaky_relu(int a, S slope) {
    int id = push(shape(a), "leaky_relu", nodes_[a].needs_grad);
    kernels::leaky_relu(nodes_[id].val.data(), val(a), slope, numel(a));
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, a, slope] {
        const S* x = val(a);
        const S* g = grad(id);
        S* gx = nodes_[a].grad.data();
        for (size_t i = 0; i < numel(a); ++i) gx[i] += g[i] * (x[i] > 0 ? S(1) : slope);
      };
    return id;
  }

  int clamp(int a, S lo, S hi) {
    int id = push(shape(a), "clamp", nodes_[a].needs_grad);
    kernels::clamp(nodes_[id].val.data(), val(a), lo, hi, numel(a));
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, a, lo, hi] {
        const S* x = val(a);
        const S* g = grad(id);
        S* gx = nodes_[a].grad.data();
        for (size_t i = 0; i < numel(a); ++i)
          if (x[i] > lo && x[i] < hi) gx[i] += g[i];
      };
    return id;
  }

  int atan2_op(int y, int x) {
    if (shape(y) != shape(x)) shape_error("atan2", shape(y), shape(x));
    int id = push(shape(y), "atan2", nodes_[y].needs_grad || nodes_[x].needs_grad);
    const S* yv = val(y);
    const S* xv = val(x);
    S* ov = nodes_[id].val.data();
    for (size_t i = 0; i < numel(y); ++i) ov[i] = std::atan2(yv[i], xv[i]);
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, y, x] {
        const S* yv2 = val(y);
        const S* xv2 = val(x);
        const S* g = grad(id);
        const S eps = S(1e-12);
        bool ny = nodes_[y].needs_grad, nx = nodes_[x].needs_grad;
        S* gy = ny ? nodes_[y].grad.data() : nullptr;
        S* gx = nx ? nodes_[x].grad.data() : nullptr;
        for (size_t i = 0; i < numel(id); ++i) {
          S r2 = yv2[i] * yv2[i] + xv2[i] * xv2[i] + eps;
          if (ny) gy[i] += g[i] * xv2[i] / r2;
          if (nx) gx[i] -= g[i] * yv2[i] / r2;
        }
      };
    return id;
  }

  // --------------------------------------------------- matmul and convs ----

  int matmul(int a, int b);
  int conv1d(int x, int w, int bias, const ConvSpec& cs);        // w: (Cout,Cin,K)
  int tconv1d(int x, int w, int bias, int stride, int pad);      // w: (Cin,Cout,K)

  // --------------------------------------------------- shape operations ----

  int concat_rows(const std::vector<int>& parts) {
    int cols = shape(parts[0]).cols();
    int rows = 0;
    bool ng = false;
    for (int p : parts) {
      if (shape(p).cols() != cols) shape_error("concat", shape(parts[0]), shape(p));
      rows += shape(p).rows();
      ng = ng || nodes_[p].needs_grad;
    }
    int id = push(Shape::mat(rows, cols), "concat", ng);
    S* ov = nodes_[id].val.data();
    size_t ofs = 0;
    for (int p : parts) {
      std::copy(val(p), val(p) + numel(p), ov + ofs);
      ofs += numel(p);
    }
    finite_check(id);
    if (ng) {
      auto parts_copy = parts;
      nodes_[id].bwd = [this, id, parts_copy] {
        const S* g = grad(id);
        size_t o = 0;
        for (int p : parts_copy) {
          if (nodes_[p].needs_grad)
            kernels::axpy(nodes_[p].grad.data(), S(1), g + o, numel(p));
          o += numel(p);
        }
      };
    }
    return id;
  }

  int slice_rows(int x, int r0, int r1) {
    Shape xs = shape(x);
    if (r0 < 0 || r1 > xs.rows() || r0 >= r1) shape_error("slice", xs, Shape::mat(r0, r1));
    int id = push(Shape::mat(r1 - r0, xs.cols()), "slice", nodes_[x].needs_grad);
    const size_t ofs = size_t(r0) * xs.cols();
    std::copy(val(x) + ofs, val(x) + ofs + numel(id), nodes_[id].val.begin());
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, x, ofs] {
        kernels::axpy(nodes_[x].grad.data() + ofs, S(1), grad(id), numel(id));
      };
    return id;
  }

  std::pair<int, int> split_rows(int x, int r) {
    return {slice_rows(x, 0, r), slice_rows(x, r, shape(x).rows())};
  }

  // (C,1) or vector -> (C,T)
  int broadcast_cols(int v, int T) {
    int C = shape(v).rows();
    int id = push(Shape::mat(C, T), "broadcast", nodes_[v].needs_grad);
    const S* src = val(v);
    S* ov = nodes_[id].val.data();
    for (int c = 0; c < C; ++c) std::fill(ov + size_t(c) * T, ov + size_t(c) * T + T, src[c]);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, v, C, T] {
        const S* g = grad(id);
        S* gv = nodes_[v].grad.data();
        for (int c = 0; c < C; ++c)
          gv[c] += S(kernels::sum(g + size_t(c) * T, size_t(T)));
      };
    return id;
  }

  // ----------------------------------------------------------- reductions --

  int sum_all(int a) {
    int id = push(Shape::scalar(), "sum", nodes_[a].needs_grad);
    nodes_[id].val[0] = S(kernels::sum(val(a), numel(a)));
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, a] {
        S g = grad(id)[0];
        S* gx = nodes_[a].grad.data();
        for (size_t i = 0; i < numel(a); ++i) gx[i] += g;
      };
    return id;
  }

  int mean_all(int a) { return scale(sum_all(a), S(1) / S(numel(a))); }

  // (C,T) -> (C,1)
  int row_mean(int x) {
    Shape xs = shape(x);
    const int C = xs.rows(), T = xs.cols();
    int id = push(Shape::mat(C, 1), "row_mean", nodes_[x].needs_grad);
    for (int c = 0; c < C; ++c)
      nodes_[id].val[c] = S(kernels::sum(val(x) + size_t(c) * T, size_t(T)) / T);
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, x, C, T] {
        const S* g = grad(id);
        S* gx = nodes_[x].grad.data();
        for (int c = 0; c < C; ++c) {
          S gc = g[c] / S(T);
          for (int t = 0; t < T; ++t) gx[size_t(c) * T + t] += gc;
        }
      };
    return id;
  }

  // ---------------------------------------------------------- layer norm ---

  // Normalizes each column over the channel dimension; gamma/beta are (C).
  int layer_norm(int x, int gamma, int beta) {
    Shape xs = shape(x);
    const int C = xs.rows(), T = xs.cols();
    if (int(shape(gamma).numel()) != C || int(shape(beta).numel()) != C)
      shape_error("layer_norm", xs, shape(gamma));
    bool ng = nodes_[x].needs_grad || nodes_[gamma].needs_grad || nodes_[beta].needs_grad;
    int id = push(xs, "layer_norm", ng);
    const S eps = S(1e-5);
    auto xhat = std::make_shared<std::vector<S>>(numel(x));
    auto inv_sigma = std::make_shared<std::vector<S>>(T);
    const S* xv = val(x);
    const S* gv = val(gamma);
    const S* bv = val(beta);
    S* ov = nodes_[id].val.data();
    for (int t = 0; t < T; ++t) {
      double mu = 0.0;
      for (int c = 0; c < C; ++c) mu += xv[size_t(c) * T + t];
      mu /= C;
      double var = 0.0;
      for (int c = 0; c < C; ++c) {
        double d = xv[size_t(c) * T + t] - mu;
        var += d * d;
      }
      var /= C;
      S is = S(1.0 / std::sqrt(var + double(eps)));
      (*inv_sigma)[t] = is;
      for (int c = 0; c < C; ++c) {
        S xh = (xv[size_t(c) * T + t] - S(mu)) * is;
        (*xhat)[size_t(c) * T + t] = xh;
        ov[size_t(c) * T + t] = gv[c] * xh + bv[c];
      }
    }
    finite_check(id);
    if (ng)
      nodes_[id].bwd = [this, id, x, gamma, beta, C, T, xhat, inv_sigma] {
        const S* g = grad(id);
        const S* gv2 = val(gamma);
        for (int t = 0; t < T; ++t) {
          double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
          for (int c = 0; c < C; ++c) {
            S dxh = g[size_t(c) * T + t] * gv2[c];
            sum_dxhat += dxh;
            sum_dxhat_xhat += double(dxh) * (*xhat)[size_t(c) * T + t];
          }
          if (nodes_[x].needs_grad) {
            S* gx = nodes_[x].grad.data();
            for (int c = 0; c < C; ++c) {
              S dxh = g[size_t(c) * T + t] * gv2[c];
              S xh = (*xhat)[size_t(c) * T + t];
              gx[size_t(c) * T + t] += (*inv_sigma)[t] *
                  (dxh - S(sum_dxhat / C) - xh * S(sum_dxhat_xhat / C));
            }
          }
        }
        if (nodes_[gamma].needs_grad) {
          S* gg = nodes_[gamma].grad.data();
          for (int c = 0; c < C; ++c) {
            double acc = 0.0;
            for (int t = 0; t < T; ++t)
              acc += double(g[size_t(c) * T + t]) * (*xhat)[size_t(c) * T + t];
            gg[c] += S(acc);
          }
        }
        if (nodes_[beta].needs_grad) {
          S* gb = nodes_[beta].grad.data();
          for (int c = 0; c < C; ++c)
            gb[c] += S(kernels::sum(g + size_t(c) * T, size_t(T)));
        }
      };
    return id;
  }

  // ------------------------------------------------------ gather/scatter ---

  // table (N,D), idx per output column -> (D,T)
  int gather_cols(int table, std::shared_ptr<const std::vector<int>> idx) {
    Shape ts = shape(table);
    const int N = ts.rows(), D = ts.cols();
    const int T = int(idx->size());
    for (int i : *idx)
      if (i < 0 || i >= N)
        raise(ErrorKind::ShapeError, "gather: index out of range");
    int id = push(Shape::mat(D, T), "gather", nodes_[table].needs_grad);
    const S* tv = val(table);
    S* ov = nodes_[id].val.data();
    for (int t = 0; t < T; ++t)
      for (int d = 0; d < D; ++d) ov[size_t(d) * T + t] = tv[size_t((*idx)[t]) * D + d];
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, table, idx, D, T] {
        const S* g = grad(id);
        S* gt = nodes_[table].grad.data();
        for (int t = 0; t < T; ++t)
          for (int d = 0; d < D; ++d)
            gt[size_t((*idx)[t]) * D + d] += g[size_t(d) * T + t];
      };
    return id;
  }

  // Flat gather: out[i] = x[idx[i]] (idx -1 reads as 0). Handles framing,
  // reflect padding and trimming with precomputed index tables.
  int take(int x, std::shared_ptr<const std::vector<int64_t>> idx, Shape out_shape) {
    if (idx->size() != out_shape.numel())
      raise(ErrorKind::ShapeError, "take: index table does not match output shape");
    const int64_t n = int64_t(numel(x));
    int id = push(out_shape, "take", nodes_[x].needs_grad);
    const S* xv = val(x);
    S* ov = nodes_[id].val.data();
    for (size_t i = 0; i < idx->size(); ++i) {
      int64_t j = (*idx)[i];
      if (j >= n) raise(ErrorKind::ShapeError, "take: index out of range");
      ov[i] = j >= 0 ? xv[j] : S(0);
    }
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, x, idx] {
        const S* g = grad(id);
        S* gx = nodes_[x].grad.data();
        for (size_t i = 0; i < idx->size(); ++i) {
          int64_t j = (*idx)[i];
          if (j >= 0) gx[j] += g[i];
        }
      };
    return id;
  }

  // Flat scatter-add: out[idx[i]] += x[i] (idx -1 drops). The adjoint of take.
  int overlap_add(int x, std::shared_ptr<const std::vector<int64_t>> idx, int out_len) {
    if (idx->size() != numel(x))
      raise(ErrorKind::ShapeError, "overlap_add: index table does not match input");
    int id = push(Shape::mat(1, out_len), "overlap_add", nodes_[x].needs_grad);
    const S* xv = val(x);
    S* ov = nodes_[id].val.data();
    std::fill(ov, ov + out_len, S(0));
    for (size_t i = 0; i < idx->size(); ++i) {
      int64_t j = (*idx)[i];
      if (j >= out_len) raise(ErrorKind::ShapeError, "overlap_add: index out of range");
      if (j >= 0) ov[j] += xv[i];
    }
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, x, idx] {
        const S* g = grad(id);
        S* gx = nodes_[x].grad.data();
        for (size_t i = 0; i < idx->size(); ++i) {
          int64_t j = (*idx)[i];
          if (j >= 0) gx[i] += g[j];
        }
      };
    return id;
  }

  // ------------------------------------------------------------ backward ---

  void backward(int loss_id) {
    if (shape(loss_id).numel() != 1)
      raise(ErrorKind::InvalidInput, "backward requires a scalar loss");
    // constants take no gradient storage; backward closures never write to
    // parents that do not need gradients
    for (auto& n : nodes_) {
      if (n.needs_grad) n.grad.assign(n.val.size(), S(0));
      else n.grad.clear();
    }
    if (!nodes_[loss_id].needs_grad)
      raise(ErrorKind::InvalidInput, "backward: loss does not depend on any leaf");
    nodes_[loss_id].grad[0] = S(1);
    for (int id = loss_id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.needs_grad && n.bwd) n.bwd();
    }
  }

 private:
  enum class BinKind { add, mul, div };

  std::vector<Node> nodes_;

  size_t numel(int id) const { return nodes_[id].shape.numel(); }

  int push(Shape shp, const char* op, bool needs_grad) {
    Node n;
    n.shape = shp;
    n.val.resize(shp.numel());
    n.needs_grad = needs_grad;
    n.op = op;
    nodes_.push_back(std::move(n));
    return int(nodes_.size()) - 1;
  }

  [[noreturn]] void shape_error(const char* op, Shape a, Shape b) const {
    raise(ErrorKind::ShapeError,
          std::string(op) + ": incompatible shapes " + a.str() + " and " + b.str());
  }

  void finite_check(int id) {
    if (!kernels::all_finite(nodes_[id].val.data(), numel(id)))
      raise(ErrorKind::NumericalError,
            std::string("op '") + nodes_[id].op + "' produced a non-finite value");
  }

  template <class F, class G>
  int unary(const char* op, int a, F fwd, G dydx) {
    int id = push(shape(a), op, nodes_[a].needs_grad);
    const S* av = val(a);
    S* ov = nodes_[id].val.data();
    for (size_t i = 0; i < numel(a); ++i) ov[i] = fwd(av[i]);
    finite_check(id);
    if (nodes_[id].needs_grad)
      nodes_[id].bwd = [this, id, a, dydx] {
        const S* x = val(a);
        const S* y = val(id);
        const S* g = grad(id);
        S* gx = nodes_[a].grad.data();
        for (size_t i = 0; i < numel(a); ++i) gx[i] += g[i] * dydx(x[i], y[i]);
      };
    return id;
  }

  // Broadcast classes: identical shapes; b a column (C,1) against (C,T);
  // b a single element against anything.
  enum class Bcast { same, col, scalar };

  Bcast bcast_kind(const char* op, int a, int b) const {
    if (shape(a) == shape(b)) return Bcast::same;
    if (numel(b) == 1) return Bcast::scalar;
    if (shape(b).rank == 2 && shape(b).cols() == 1 && shape(a).rank == 2 &&
        shape(a).rows() == shape(b).rows())
      return Bcast::col;
    shape_error(op, shape(a), shape(b));
  }

  int binary(const char* op, int a, int b, BinKind kind) {
    Bcast bc = bcast_kind(op, a, b);
    bool ng = nodes_[a].needs_grad || nodes_[b].needs_grad;
    int id = push(shape(a), op, ng);
    const S* av = val(a);
    const S* bv = val(b);
    S* ov = nodes_[id].val.data();
    const int C = shape(a).rank == 2 ? shape(a).rows() : 1;
    const int T = int(numel(a)) / C;

    auto apply = [kind](S x, S y) {
      switch (kind) {
        case BinKind::add: return x + y;
        case BinKind::mul: return x * y;
        case BinKind::div: return x / y;
      }
      return S(0);
    };

    switch (bc) {
      case Bcast::same:
        if (kind == BinKind::add) kernels::add(ov, av, bv, numel(a));
        else if (kind == BinKind::mul) kernels::mul(ov, av, bv, numel(a));
        else kernels::div(ov, av, bv, numel(a));
        break;
      case Bcast::scalar:
        for (size_t i = 0; i < numel(a); ++i) ov[i] = apply(av[i], bv[0]);
        break;
      case Bcast::col:
        for (int c = 0; c < C; ++c)
          for (int t = 0; t < T; ++t)
            ov[size_t(c) * T + t] = apply(av[size_t(c) * T + t], bv[c]);
        break;
    }
    finite_check(id);

    if (ng)
      nodes_[id].bwd = [this, id, a, b, kind, bc, C, T] {
        const S* g = grad(id);
        const S* av2 = val(a);
        const S* bv2 = val(b);
        const size_t n = numel(a);
        S* ga = nodes_[a].needs_grad ? nodes_[a].grad.data() : nullptr;
        S* gb = nodes_[b].needs_grad ? nodes_[b].grad.data() : nullptr;

        auto bval = [&](size_t i) {
          switch (bc) {
            case Bcast::same: return bv2[i];
            case Bcast::scalar: return bv2[0];
            case Bcast::col: return bv2[i / T];
          }
          return S(0);
        };
        auto add_gb = [&](size_t i, S v) {
          switch (bc) {
            case Bcast::same: gb[i] += v; break;
            case Bcast::scalar: gb[0] += v; break;
            case Bcast::col: gb[i / T] += v; break;
          }
        };

        switch (kind) {
          case BinKind::add:
            if (ga) kernels::axpy(ga, S(1), g, n);
            if (gb) {
              if (bc == Bcast::same) kernels::axpy(gb, S(1), g, n);
              else
                for (size_t i = 0; i < n; ++i) add_gb(i, g[i]);
            }
            break;
          case BinKind::mul:
            if (ga)
              for (size_t i = 0; i < n; ++i) ga[i] += g[i] * bval(i);
            if (gb)
              for (size_t i = 0; i < n; ++i) add_gb(i, g[i] * av2[i]);
            break;
          case BinKind::div:
            if (ga)
              for (size_t i = 0; i < n; ++i) ga[i] += g[i] / bval(i);
            if (gb)
              for (size_t i = 0; i < n; ++i) {
                S bb = bval(i);
                add_gb(i, -g[i] * av2[i] / (bb * bb));
              }
            break;
        }
      };
    return id;
  }
};

// Implementation of matmul/conv bodies (kept out of the class for length).
#include "nn/tensor_linops.inc"

}  // namespace svc::nn

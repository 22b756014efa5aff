// src/autodiff.cpp
//
// Copyright 2026 The sganlab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sgan/autodiff.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

namespace sgan::nn {

namespace {

thread_local bool g_grad_enabled = true;

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ColMat = Eigen::MatrixXd;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

Variable make_op(Tensor value, std::vector<Variable> parents, BackwardFn bwd,
                 const char* name) {
  bool needs = false;
  if (g_grad_enabled) {
    for (const Variable& p : parents)
      if (p.defined() && p.requires_grad()) needs = true;
  }
  if (!needs) return Variable(std::move(value), false);
  Variable out(std::move(value), true);
  out.node()->parents = std::move(parents);
  out.node()->backward = std::move(bwd);
  out.node()->op = name;
  return out;
}

void check_same_shape(const Variable& a, const Variable& b, const char* op) {
  if (!a.value().same_shape(b.value()))
    throw Error(std::string(op) + ": shape mismatch " + a.value().shape_str() +
                " vs " + b.value().shape_str());
}

Tensor map_unary(const Tensor& x, const std::function<double(double)>& f) {
  Tensor y(x.shape());
  const double* xp = x.data();
  double* yp = y.data();
  const long n = x.numel();
  for (long i = 0; i < n; ++i) yp[i] = f(xp[i]);
  return y;
}

// im2col for one sample: col(ci*k*k + u*k + v, ho*Wo + wo).
void im2col_sample(const double* x, long cin, long h, long w, long k, long pad,
                   long stride, long ho, long wo, ColMat& col) {
  for (long m = 0; m < ho * wo; ++m) {
    const long oy = m / wo, ox = m % wo;
    double* colp = col.data() + m * col.rows();  // column m (ColMajor)
    long r = 0;
    for (long ci = 0; ci < cin; ++ci) {
      const double* xc = x + ci * h * w;
      for (long u = 0; u < k; ++u) {
        const long iy = oy * stride + u - pad;
        for (long v = 0; v < k; ++v, ++r) {
          const long ix = ox * stride + v - pad;
          colp[r] = (iy >= 0 && iy < h && ix >= 0 && ix < w)
                        ? xc[iy * w + ix]
                        : 0.0;
        }
      }
    }
  }
}

Variable conv2d_igrad(const Variable& gy, const Variable& w, long stride,
                      long in_h, long in_w);
Variable conv2d_wgrad(const Variable& x, const Variable& gy, long stride,
                      long k);
Variable avgpool2_adj(const Variable& g);
Variable upsample2_bilinear_adj(const Variable& g);
Variable pad_axis1(const Variable& x, long start, long total);
Variable reduce_to_single_channel(const Variable& x);
Variable scatter_rows(const Variable& g, std::vector<long> idx, long rows);

}  // namespace

Variable::Variable(Tensor value, bool requires_grad) {
  node_ = std::make_shared<Node>();
  node_->value = std::move(value);
  node_->requires_grad = requires_grad;
}

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

// ---------------------------------------------------------------------------
// engine

namespace {

class GradOnGuard {
 public:
  GradOnGuard() : prev_(g_grad_enabled) { g_grad_enabled = true; }
  ~GradOnGuard() { g_grad_enabled = prev_; }

 private:
  bool prev_;
};

std::vector<Variable> run_backward(const Variable& root,
                                   const std::vector<Variable>& wrt,
                                   bool create_graph,
                                   std::vector<char>* reached = nullptr) {
  if (!root.defined()) throw Error("backward: undefined root");

  // Topological order: every node appears after all of its parents.
  std::vector<Node*> topo;
  std::unordered_set<Node*> done;
  {
    struct Frame {
      Node* n;
      size_t next;
    };
    std::vector<Frame> stack;
    std::unordered_set<Node*> on_stack;
    stack.push_back({root.node(), 0});
    on_stack.insert(root.node());
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < f.n->parents.size()) {
        Node* p = f.n->parents[f.next++].node();
        if (p && !done.count(p) && !on_stack.count(p)) {
          stack.push_back({p, 0});
          on_stack.insert(p);
        }
      } else {
        done.insert(f.n);
        topo.push_back(f.n);
        on_stack.erase(f.n);
        stack.pop_back();
      }
    }
  }

  std::unordered_set<Node*> wrt_set;
  for (const Variable& v : wrt)
    if (v.defined()) wrt_set.insert(v.node());

  // A node matters only if some wanted input is reachable through it.
  std::unordered_map<Node*, bool> relevant;
  for (Node* n : topo) {
    bool r = wrt_set.count(n) > 0;
    if (!r)
      for (const Variable& p : n->parents)
        if (p.defined() && relevant.count(p.node()) && relevant[p.node()]) {
          r = true;
          break;
        }
    relevant[n] = r;
  }

  std::unordered_map<Node*, Variable> grads;
  grads[root.node()] =
      Variable::constant(Tensor::ones(root.value().shape()));

  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    Node* n = *it;
    auto git = grads.find(n);
    if (git == grads.end() || !n->backward || !n->requires_grad) continue;
    if (!relevant[n]) continue;

    std::vector<Variable> pgrads;
    if (create_graph) {
      GradOnGuard on;
      pgrads = n->backward(git->second);
    } else {
      NoGradGuard off;
      pgrads = n->backward(git->second);
    }
    if (pgrads.size() != n->parents.size())
      throw Error("backward: arity mismatch in op " + std::string(n->op));
    for (size_t i = 0; i < pgrads.size(); ++i) {
      const Variable& p = n->parents[i];
      if (!p.defined() || !p.requires_grad() || !pgrads[i].defined()) continue;
      if (!relevant[p.node()]) continue;
      auto pit = grads.find(p.node());
      if (pit == grads.end()) {
        grads[p.node()] = pgrads[i];
      } else if (create_graph) {
        GradOnGuard on;
        pit->second = add(pit->second, pgrads[i]);
      } else {
        NoGradGuard off;
        pit->second = add(pit->second, pgrads[i]);
      }
    }
  }

  std::vector<Variable> out;
  out.reserve(wrt.size());
  if (reached) reached->assign(wrt.size(), 0);
  for (size_t i = 0; i < wrt.size(); ++i) {
    const Variable& v = wrt[i];
    auto git = v.defined() ? grads.find(v.node()) : grads.end();
    if (git != grads.end()) {
      out.push_back(git->second);
      if (reached) (*reached)[i] = 1;
    } else {
      out.push_back(Variable::constant(Tensor::zeros(v.value().shape())));
    }
  }
  return out;
}

}  // namespace

std::vector<Tensor> grad_tensors(const Variable& root,
                                 const std::vector<Variable>& wrt,
                                 std::vector<char>* reached) {
  std::vector<Variable> g = run_backward(root, wrt, false, reached);
  std::vector<Tensor> out;
  out.reserve(g.size());
  for (const Variable& v : g) out.push_back(v.value());
  return out;
}

std::vector<Variable> grad_graph(const Variable& root,
                                 const std::vector<Variable>& wrt) {
  return run_backward(root, wrt, true);
}

// ---------------------------------------------------------------------------
// elementwise

Variable add(const Variable& a, const Variable& b) {
  check_same_shape(a, b, "add");
  Tensor y(a.value().shape());
  const long n = y.numel();
  for (long i = 0; i < n; ++i) y[i] = a.value()[i] + b.value()[i];
  return make_op(std::move(y), {a, b},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {gy, gy};
                 },
                 "add");
}

Variable sub(const Variable& a, const Variable& b) {
  check_same_shape(a, b, "sub");
  Tensor y(a.value().shape());
  const long n = y.numel();
  for (long i = 0; i < n; ++i) y[i] = a.value()[i] - b.value()[i];
  return make_op(std::move(y), {a, b},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {gy, neg(gy)};
                 },
                 "sub");
}

Variable mul(const Variable& a, const Variable& b) {
  check_same_shape(a, b, "mul");
  Tensor y(a.value().shape());
  const long n = y.numel();
  for (long i = 0; i < n; ++i) y[i] = a.value()[i] * b.value()[i];
  return make_op(std::move(y), {a, b},
                 [a, b](const Variable& gy) -> std::vector<Variable> {
                   return {mul(gy, b), mul(gy, a)};
                 },
                 "mul");
}

Variable divv(const Variable& a, const Variable& b) {
  check_same_shape(a, b, "div");
  Tensor y(a.value().shape());
  const long n = y.numel();
  for (long i = 0; i < n; ++i) y[i] = a.value()[i] / b.value()[i];
  return make_op(std::move(y), {a, b},
                 [a, b](const Variable& gy) -> std::vector<Variable> {
                   Variable ga = divv(gy, b);
                   Variable gb = neg(mul(gy, divv(a, mul(b, b))));
                   return {ga, gb};
                 },
                 "div");
}

Variable neg(const Variable& x) {
  return make_op(map_unary(x.value(), [](double v) { return -v; }), {x},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {neg(gy)};
                 },
                 "neg");
}

Variable scale(const Variable& x, double k) {
  return make_op(map_unary(x.value(), [k](double v) { return k * v; }), {x},
                 [k](const Variable& gy) -> std::vector<Variable> {
                   return {scale(gy, k)};
                 },
                 "scale");
}

Variable add_scalar(const Variable& x, double k) {
  return make_op(map_unary(x.value(), [k](double v) { return v + k; }), {x},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {gy};
                 },
                 "add_scalar");
}

Variable sqrt_v(const Variable& x) {
  return make_op(map_unary(x.value(), [](double v) { return std::sqrt(v); }),
                 {x},
                 [x](const Variable& gy) -> std::vector<Variable> {
                   return {divv(scale(gy, 0.5), sqrt_v(x))};
                 },
                 "sqrt");
}

Variable exp_v(const Variable& x) {
  return make_op(map_unary(x.value(), [](double v) { return std::exp(v); }),
                 {x},
                 [x](const Variable& gy) -> std::vector<Variable> {
                   return {mul(gy, exp_v(x))};
                 },
                 "exp");
}

Variable log_v(const Variable& x) {
  return make_op(map_unary(x.value(), [](double v) { return std::log(v); }),
                 {x},
                 [x](const Variable& gy) -> std::vector<Variable> {
                   return {divv(gy, x)};
                 },
                 "log");
}

Variable square(const Variable& x) { return mul(x, x); }

Variable leaky_relu(const Variable& x, double slope) {
  return make_op(
      map_unary(x.value(),
                [slope](double v) { return v >= 0.0 ? v : slope * v; }),
      {x},
      [x, slope](const Variable& gy) -> std::vector<Variable> {
        // The gate depends on x only through its sign, so it is treated as
        // constant; second derivatives vanish almost everywhere.
        Tensor gate = map_unary(
            x.value(), [slope](double v) { return v >= 0.0 ? 1.0 : slope; });
        return {mul(gy, Variable::constant(std::move(gate)))};
      },
      "leaky_relu");
}

Variable clamp_min(const Variable& x, double floor) {
  return make_op(
      map_unary(x.value(), [floor](double v) { return std::max(v, floor); }),
      {x},
      [x, floor](const Variable& gy) -> std::vector<Variable> {
        Tensor gate = map_unary(
            x.value(), [floor](double v) { return v > floor ? 1.0 : 0.0; });
        return {mul(gy, Variable::constant(std::move(gate)))};
      },
      "clamp_min");
}

// ---------------------------------------------------------------------------
// shape

Variable reshape(const Variable& x, std::vector<long> shape) {
  Tensor y = x.value().reshaped(shape);
  std::vector<long> orig = x.value().shape();
  return make_op(std::move(y), {x},
                 [orig](const Variable& gy) -> std::vector<Variable> {
                   return {reshape(gy, orig)};
                 },
                 "reshape");
}

Variable concat_axis1(const Variable& a, const Variable& b) {
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  if (ta.rank() != tb.rank() || ta.rank() < 2)
    throw Error("concat_axis1: rank mismatch");
  for (int i = 0; i < ta.rank(); ++i)
    if (i != 1 && ta.dim(i) != tb.dim(i))
      throw Error("concat_axis1: incompatible shapes " + ta.shape_str() +
                  " vs " + tb.shape_str());
  std::vector<long> shape = ta.shape();
  const long ca = ta.dim(1), cb = tb.dim(1);
  shape[1] = ca + cb;
  long inner = 1;
  for (int i = 2; i < ta.rank(); ++i) inner *= ta.dim(i);
  const long n0 = ta.dim(0);
  Tensor y(shape);
  for (long n = 0; n < n0; ++n) {
    std::copy(ta.data() + n * ca * inner, ta.data() + (n + 1) * ca * inner,
              y.data() + n * (ca + cb) * inner);
    std::copy(tb.data() + n * cb * inner, tb.data() + (n + 1) * cb * inner,
              y.data() + (n * (ca + cb) + ca) * inner);
  }
  return make_op(std::move(y), {a, b},
                 [ca, cb](const Variable& gy) -> std::vector<Variable> {
                   return {narrow_axis1(gy, 0, ca), narrow_axis1(gy, ca, cb)};
                 },
                 "concat_axis1");
}

Variable narrow_axis1(const Variable& x, long start, long len) {
  const Tensor& tx = x.value();
  if (tx.rank() < 2 || start < 0 || start + len > tx.dim(1))
    throw Error("narrow_axis1: bad range");
  std::vector<long> shape = tx.shape();
  const long c = tx.dim(1);
  shape[1] = len;
  long inner = 1;
  for (int i = 2; i < tx.rank(); ++i) inner *= tx.dim(i);
  const long n0 = tx.dim(0);
  Tensor y(shape);
  for (long n = 0; n < n0; ++n)
    std::copy(tx.data() + (n * c + start) * inner,
              tx.data() + (n * c + start + len) * inner,
              y.data() + n * len * inner);
  return make_op(std::move(y), {x},
                 [start, c](const Variable& gy) -> std::vector<Variable> {
                   return {pad_axis1(gy, start, c)};
                 },
                 "narrow_axis1");
}

namespace {

Variable pad_axis1(const Variable& x, long start, long total) {
  const Tensor& tx = x.value();
  std::vector<long> shape = tx.shape();
  const long len = tx.dim(1);
  shape[1] = total;
  long inner = 1;
  for (int i = 2; i < tx.rank(); ++i) inner *= tx.dim(i);
  const long n0 = tx.dim(0);
  Tensor y(shape);
  for (long n = 0; n < n0; ++n)
    std::copy(tx.data() + n * len * inner, tx.data() + (n + 1) * len * inner,
              y.data() + (n * total + start) * inner);
  return make_op(std::move(y), {x},
                 [start, len](const Variable& gy) -> std::vector<Variable> {
                   return {narrow_axis1(gy, start, len)};
                 },
                 "pad_axis1");
}

}  // namespace

// ---------------------------------------------------------------------------
// matmul

Variable matmul(const Variable& a, const Variable& b, bool trans_a,
                bool trans_b) {
  const Tensor& ta = a.value();
  const Tensor& tb = b.value();
  if (ta.rank() != 2 || tb.rank() != 2) throw Error("matmul: rank-2 required");
  const long m = trans_a ? ta.dim(1) : ta.dim(0);
  const long ka = trans_a ? ta.dim(0) : ta.dim(1);
  const long kb = trans_b ? tb.dim(1) : tb.dim(0);
  const long n = trans_b ? tb.dim(0) : tb.dim(1);
  if (ka != kb)
    throw Error("matmul: inner dimension mismatch " + ta.shape_str() + " x " +
                tb.shape_str());
  Tensor y({m, n});
  ConstRowMap ma(ta.data(), ta.dim(0), ta.dim(1));
  ConstRowMap mb(tb.data(), tb.dim(0), tb.dim(1));
  RowMap my(y.data(), m, n);
  if (!trans_a && !trans_b)
    my.noalias() = ma * mb;
  else if (trans_a && !trans_b)
    my.noalias() = ma.transpose() * mb;
  else if (!trans_a && trans_b)
    my.noalias() = ma * mb.transpose();
  else
    my.noalias() = ma.transpose() * mb.transpose();
  return make_op(
      std::move(y), {a, b},
      [a, b, trans_a, trans_b](const Variable& gy) -> std::vector<Variable> {
        Variable ga, gb;
        if (!trans_a && !trans_b) {
          ga = matmul(gy, b, false, true);
          gb = matmul(a, gy, true, false);
        } else if (trans_a && !trans_b) {
          ga = matmul(b, gy, false, true);
          gb = matmul(a, gy, false, false);
        } else if (!trans_a && trans_b) {
          ga = matmul(gy, b, false, false);
          gb = matmul(gy, a, true, false);
        } else {
          ga = matmul(b, gy, true, true);
          gb = matmul(gy, a, true, true);
        }
        return {ga, gb};
      },
      "matmul");
}

// ---------------------------------------------------------------------------
// convolution

Variable conv2d(const Variable& x, const Variable& w, long stride) {
  const Tensor& tx = x.value();
  const Tensor& tw = w.value();
  if (tx.rank() != 4 || tw.rank() != 4) throw Error("conv2d: NCHW required");
  const long n0 = tx.dim(0), cin = tx.dim(1), h = tx.dim(2), wd = tx.dim(3);
  const long cout = tw.dim(0), k = tw.dim(2);
  if (tw.dim(1) != cin)
    throw Error("conv2d: channel mismatch " + tx.shape_str() + " vs " +
                tw.shape_str());
  if (tw.dim(3) != k || k % 2 == 0) throw Error("conv2d: odd square kernel required");
  if (stride != 1 && stride != 2) throw Error("conv2d: stride must be 1 or 2");
  const long pad = (k - 1) / 2;
  const long ho = (h + 2 * pad - k) / stride + 1;
  const long wo = (wd + 2 * pad - k) / stride + 1;
  Tensor y({n0, cout, ho, wo});
  ConstRowMap wmat(tw.data(), cout, cin * k * k);

  if (k == 1 && stride == 1) {
#pragma omp parallel for schedule(static)
    for (long n = 0; n < n0; ++n) {
      ConstRowMap xm(tx.data() + n * cin * h * wd, cin, h * wd);
      RowMap ym(y.data() + n * cout * h * wd, cout, h * wd);
      ym.noalias() = wmat * xm;
    }
  } else {
#pragma omp parallel for schedule(static)
    for (long n = 0; n < n0; ++n) {
      ColMat col(cin * k * k, ho * wo);
      im2col_sample(tx.data() + n * cin * h * wd, cin, h, wd, k, pad, stride,
                    ho, wo, col);
      RowMap ym(y.data() + n * cout * ho * wo, cout, ho * wo);
      ym.noalias() = wmat * col;
    }
  }
  return make_op(
      std::move(y), {x, w},
      [x, w, stride, h, wd, k](const Variable& gy) -> std::vector<Variable> {
        return {conv2d_igrad(gy, w, stride, h, wd),
                conv2d_wgrad(x, gy, stride, k)};
      },
      "conv2d");
}

namespace {

Variable conv2d_igrad(const Variable& gy, const Variable& w, long stride,
                      long in_h, long in_w) {
  const Tensor& tg = gy.value();
  const Tensor& tw = w.value();
  const long n0 = tg.dim(0), cout = tg.dim(1), ho = tg.dim(2), wo = tg.dim(3);
  const long cin = tw.dim(1), k = tw.dim(2), pad = (k - 1) / 2;
  Tensor gx({n0, cin, in_h, in_w});
  ConstRowMap wmat(tw.data(), cout, cin * k * k);
#pragma omp parallel for schedule(static)
  for (long n = 0; n < n0; ++n) {
    ConstRowMap gym(tg.data() + n * cout * ho * wo, cout, ho * wo);
    ColMat colg = wmat.transpose() * gym;  // (cin*k*k, ho*wo)
    double* gxp = gx.data() + n * cin * in_h * in_w;
    for (long m = 0; m < ho * wo; ++m) {
      const long oy = m / wo, ox = m % wo;
      const double* cp = colg.data() + m * colg.rows();
      long r = 0;
      for (long ci = 0; ci < cin; ++ci) {
        double* gxc = gxp + ci * in_h * in_w;
        for (long u = 0; u < k; ++u) {
          const long iy = oy * stride + u - pad;
          for (long v = 0; v < k; ++v, ++r) {
            const long ix = ox * stride + v - pad;
            if (iy >= 0 && iy < in_h && ix >= 0 && ix < in_w)
              gxc[iy * in_w + ix] += cp[r];
          }
        }
      }
    }
  }
  return make_op(
      std::move(gx), {gy, w},
      [gy, w, stride, k](const Variable& g) -> std::vector<Variable> {
        return {conv2d(g, w, stride), conv2d_wgrad(g, gy, stride, k)};
      },
      "conv2d_igrad");
}

Variable conv2d_wgrad(const Variable& x, const Variable& gy, long stride,
                      long k) {
  const Tensor& tx = x.value();
  const Tensor& tg = gy.value();
  const long n0 = tx.dim(0), cin = tx.dim(1), h = tx.dim(2), wd = tx.dim(3);
  const long cout = tg.dim(1), ho = tg.dim(2), wo = tg.dim(3);
  const long pad = (k - 1) / 2;
  Tensor gw({cout, cin, k, k});
  // Fixed chunking keeps the accumulation order independent of threading.
  const long kk = cin * k * k;
  const long chunks = std::min<long>(8, n0);
  std::vector<RowMat> partial(
      static_cast<size_t>(chunks));
  for (auto& p : partial) p = RowMat::Zero(cout, kk);
#pragma omp parallel for schedule(static)
  for (long c = 0; c < chunks; ++c) {
    const long lo = n0 * c / chunks, hi = n0 * (c + 1) / chunks;
    ColMat col(kk, ho * wo);
    for (long n = lo; n < hi; ++n) {
      im2col_sample(tx.data() + n * cin * h * wd, cin, h, wd, k, pad, stride,
                    ho, wo, col);
      ConstRowMap gym(tg.data() + n * cout * ho * wo, cout, ho * wo);
      partial[static_cast<size_t>(c)].noalias() += gym * col.transpose();
    }
  }
  RowMap gwm(gw.data(), cout, kk);
  gwm.setZero();
  for (const auto& p : partial) gwm += p;
  return make_op(
      std::move(gw), {x, gy},
      [x, gy, stride, h, wd](const Variable& g) -> std::vector<Variable> {
        return {conv2d_igrad(gy, g, stride, h, wd), conv2d(x, g, stride)};
      },
      "conv2d_wgrad");
}

}  // namespace

// ---------------------------------------------------------------------------
// resampling

Variable avgpool2(const Variable& x) {
  const Tensor& tx = x.value();
  if (tx.rank() != 4) throw Error("avgpool2: NCHW required");
  const long n0 = tx.dim(0), c = tx.dim(1), h = tx.dim(2), w = tx.dim(3);
  if (h % 2 || w % 2) throw Error("avgpool2: even spatial dims required");
  Tensor y({n0, c, h / 2, w / 2});
  const long ho = h / 2, wo = w / 2;
  for (long nc = 0; nc < n0 * c; ++nc) {
    const double* xp = tx.data() + nc * h * w;
    double* yp = y.data() + nc * ho * wo;
    for (long i = 0; i < ho; ++i)
      for (long j = 0; j < wo; ++j)
        yp[i * wo + j] = 0.25 * (xp[2 * i * w + 2 * j] +
                                 xp[2 * i * w + 2 * j + 1] +
                                 xp[(2 * i + 1) * w + 2 * j] +
                                 xp[(2 * i + 1) * w + 2 * j + 1]);
  }
  return make_op(std::move(y), {x},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {avgpool2_adj(gy)};
                 },
                 "avgpool2");
}

namespace {

Variable avgpool2_adj(const Variable& g) {
  const Tensor& tg = g.value();
  const long n0 = tg.dim(0), c = tg.dim(1), ho = tg.dim(2), wo = tg.dim(3);
  Tensor y({n0, c, ho * 2, wo * 2});
  const long h = ho * 2, w = wo * 2;
  for (long nc = 0; nc < n0 * c; ++nc) {
    const double* gp = tg.data() + nc * ho * wo;
    double* yp = y.data() + nc * h * w;
    for (long i = 0; i < ho; ++i)
      for (long j = 0; j < wo; ++j) {
        const double v = 0.25 * gp[i * wo + j];
        yp[2 * i * w + 2 * j] = v;
        yp[2 * i * w + 2 * j + 1] = v;
        yp[(2 * i + 1) * w + 2 * j] = v;
        yp[(2 * i + 1) * w + 2 * j + 1] = v;
      }
  }
  return make_op(std::move(y), {g},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {avgpool2(gy)};
                 },
                 "avgpool2_adj");
}

// Weights for 2x bilinear upsampling without corner alignment: output i
// samples the input at (i + 0.5)/2 - 0.5, clamped at the borders.
struct Lin2Tap {
  long i0, i1;
  double w0, w1;
};

std::vector<Lin2Tap> bilinear_taps(long in) {
  std::vector<Lin2Tap> taps(static_cast<size_t>(2 * in));
  for (long o = 0; o < 2 * in; ++o) {
    const double src = (static_cast<double>(o) + 0.5) / 2.0 - 0.5;
    double f = std::floor(src);
    long i0 = static_cast<long>(f);
    double t = src - f;
    long i1 = i0 + 1;
    if (i0 < 0) {
      i0 = 0;
      i1 = 0;
      t = 0.0;
    }
    if (i1 > in - 1) {
      i1 = in - 1;
      i0 = in - 1;
      t = 0.0;
    }
    taps[static_cast<size_t>(o)] = {i0, i1, 1.0 - t, t};
  }
  return taps;
}

}  // namespace

Variable upsample2_bilinear(const Variable& x) {
  const Tensor& tx = x.value();
  if (tx.rank() != 4) throw Error("upsample2_bilinear: NCHW required");
  const long n0 = tx.dim(0), c = tx.dim(1), h = tx.dim(2), w = tx.dim(3);
  Tensor y({n0, c, 2 * h, 2 * w});
  const auto rt = bilinear_taps(h);
  const auto ct = bilinear_taps(w);
  for (long nc = 0; nc < n0 * c; ++nc) {
    const double* xp = tx.data() + nc * h * w;
    double* yp = y.data() + nc * 4 * h * w;
    for (long i = 0; i < 2 * h; ++i) {
      const Lin2Tap& ri = rt[static_cast<size_t>(i)];
      for (long j = 0; j < 2 * w; ++j) {
        const Lin2Tap& cj = ct[static_cast<size_t>(j)];
        yp[i * 2 * w + j] =
            ri.w0 * (cj.w0 * xp[ri.i0 * w + cj.i0] +
                     cj.w1 * xp[ri.i0 * w + cj.i1]) +
            ri.w1 * (cj.w0 * xp[ri.i1 * w + cj.i0] +
                     cj.w1 * xp[ri.i1 * w + cj.i1]);
      }
    }
  }
  return make_op(std::move(y), {x},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {upsample2_bilinear_adj(gy)};
                 },
                 "upsample2_bilinear");
}

namespace {

Variable upsample2_bilinear_adj(const Variable& g) {
  const Tensor& tg = g.value();
  const long n0 = tg.dim(0), c = tg.dim(1), h2 = tg.dim(2), w2 = tg.dim(3);
  const long h = h2 / 2, w = w2 / 2;
  Tensor y({n0, c, h, w});
  const auto rt = bilinear_taps(h);
  const auto ct = bilinear_taps(w);
  for (long nc = 0; nc < n0 * c; ++nc) {
    const double* gp = tg.data() + nc * h2 * w2;
    double* yp = y.data() + nc * h * w;
    for (long i = 0; i < h2; ++i) {
      const Lin2Tap& ri = rt[static_cast<size_t>(i)];
      for (long j = 0; j < w2; ++j) {
        const Lin2Tap& cj = ct[static_cast<size_t>(j)];
        const double gv = gp[i * w2 + j];
        yp[ri.i0 * w + cj.i0] += ri.w0 * cj.w0 * gv;
        yp[ri.i0 * w + cj.i1] += ri.w0 * cj.w1 * gv;
        yp[ri.i1 * w + cj.i0] += ri.w1 * cj.w0 * gv;
        yp[ri.i1 * w + cj.i1] += ri.w1 * cj.w1 * gv;
      }
    }
  }
  return make_op(std::move(y), {g},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {upsample2_bilinear(gy)};
                 },
                 "upsample2_bilinear_adj");
}

}  // namespace

// ---------------------------------------------------------------------------
// reductions / broadcasts

Variable sum_all(const Variable& x) {
  double s = 0.0;
  const long n = x.value().numel();
  for (long i = 0; i < n; ++i) s += x.value()[i];
  std::vector<long> shape = x.value().shape();
  return make_op(Tensor::scalar(s), {x},
                 [shape](const Variable& gy) -> std::vector<Variable> {
                   return {broadcast_scalar(gy, shape)};
                 },
                 "sum_all");
}

Variable mean_all(const Variable& x) {
  return scale(sum_all(x), 1.0 / static_cast<double>(x.value().numel()));
}

Variable broadcast_scalar(const Variable& s, std::vector<long> shape) {
  if (s.value().numel() != 1) throw Error("broadcast_scalar: scalar required");
  Tensor y = Tensor::full(shape, s.value()[0]);
  return make_op(std::move(y), {s},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {sum_all(gy)};
                 },
                 "broadcast_scalar");
}

Variable reduce_spatial(const Variable& x) {
  const Tensor& tx = x.value();
  if (tx.rank() != 4) throw Error("reduce_spatial: NCHW required");
  const long n0 = tx.dim(0), c = tx.dim(1), hw = tx.dim(2) * tx.dim(3);
  const long h = tx.dim(2), w = tx.dim(3);
  Tensor y({n0, c});
  for (long nc = 0; nc < n0 * c; ++nc) {
    const double* xp = tx.data() + nc * hw;
    double s = 0.0;
    for (long i = 0; i < hw; ++i) s += xp[i];
    y[nc] = s;
  }
  return make_op(std::move(y), {x},
                 [h, w](const Variable& gy) -> std::vector<Variable> {
                   return {broadcast_spatial(gy, h, w)};
                 },
                 "reduce_spatial");
}

Variable broadcast_spatial(const Variable& m, long h, long w) {
  const Tensor& tm = m.value();
  if (tm.rank() != 2) throw Error("broadcast_spatial: (N,C) required");
  const long n0 = tm.dim(0), c = tm.dim(1);
  Tensor y({n0, c, h, w});
  for (long nc = 0; nc < n0 * c; ++nc) {
    double* yp = y.data() + nc * h * w;
    const double v = tm[nc];
    for (long i = 0; i < h * w; ++i) yp[i] = v;
  }
  return make_op(std::move(y), {m},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {reduce_spatial(gy)};
                 },
                 "broadcast_spatial");
}

Variable reduce_batch(const Variable& x) {
  const Tensor& tx = x.value();
  if (tx.rank() != 4) throw Error("reduce_batch: NCHW required");
  const long n0 = tx.dim(0), chw = tx.dim(1) * tx.dim(2) * tx.dim(3);
  Tensor y({tx.dim(1), tx.dim(2), tx.dim(3)});
  for (long n = 0; n < n0; ++n) {
    const double* xp = tx.data() + n * chw;
    for (long i = 0; i < chw; ++i) y[i] += xp[i];
  }
  return make_op(std::move(y), {x},
                 [n0](const Variable& gy) -> std::vector<Variable> {
                   return {broadcast_batch(gy, n0)};
                 },
                 "reduce_batch");
}

Variable broadcast_batch(const Variable& x, long n) {
  const Tensor& tx = x.value();
  if (tx.rank() != 3) throw Error("broadcast_batch: (C,H,W) required");
  const long chw = tx.numel();
  Tensor y({n, tx.dim(0), tx.dim(1), tx.dim(2)});
  for (long i = 0; i < n; ++i)
    std::copy(tx.data(), tx.data() + chw, y.data() + i * chw);
  return make_op(std::move(y), {x},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {reduce_batch(gy)};
                 },
                 "broadcast_batch");
}

Variable reduce_to_channel(const Variable& x) {
  const Tensor& tx = x.value();
  if (tx.rank() != 4) throw Error("reduce_to_channel: NCHW required");
  const long n0 = tx.dim(0), c = tx.dim(1), hw = tx.dim(2) * tx.dim(3);
  const long h = tx.dim(2), w = tx.dim(3);
  Tensor y({c});
  for (long n = 0; n < n0; ++n)
    for (long ci = 0; ci < c; ++ci) {
      const double* xp = tx.data() + (n * c + ci) * hw;
      double s = 0.0;
      for (long i = 0; i < hw; ++i) s += xp[i];
      y[ci] += s;
    }
  return make_op(std::move(y), {x},
                 [n0, h, w](const Variable& gy) -> std::vector<Variable> {
                   return {broadcast_channel(gy, n0, h, w)};
                 },
                 "reduce_to_channel");
}

Variable broadcast_channel(const Variable& b, long n, long h, long w) {
  const Tensor& tb = b.value();
  if (tb.rank() != 1) throw Error("broadcast_channel: rank-1 required");
  const long c = tb.dim(0);
  Tensor y({n, c, h, w});
  for (long i = 0; i < n; ++i)
    for (long ci = 0; ci < c; ++ci) {
      double* yp = y.data() + (i * c + ci) * h * w;
      const double v = tb[ci];
      for (long j = 0; j < h * w; ++j) yp[j] = v;
    }
  return make_op(std::move(y), {b},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {reduce_to_channel(gy)};
                 },
                 "broadcast_channel");
}

Variable broadcast_single_channel(const Variable& x, long c) {
  const Tensor& tx = x.value();
  if (tx.rank() != 4 || tx.dim(1) != 1)
    throw Error("broadcast_single_channel: (N,1,H,W) required");
  const long n0 = tx.dim(0), hw = tx.dim(2) * tx.dim(3);
  Tensor y({n0, c, tx.dim(2), tx.dim(3)});
  for (long n = 0; n < n0; ++n)
    for (long ci = 0; ci < c; ++ci)
      std::copy(tx.data() + n * hw, tx.data() + (n + 1) * hw,
                y.data() + (n * c + ci) * hw);
  return make_op(std::move(y), {x},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {reduce_to_single_channel(gy)};
                 },
                 "broadcast_single_channel");
}

namespace {

Variable reduce_to_single_channel(const Variable& x) {
  const Tensor& tx = x.value();
  const long n0 = tx.dim(0), c = tx.dim(1), hw = tx.dim(2) * tx.dim(3);
  Tensor y({n0, 1, tx.dim(2), tx.dim(3)});
  for (long n = 0; n < n0; ++n) {
    double* yp = y.data() + n * hw;
    for (long ci = 0; ci < c; ++ci) {
      const double* xp = tx.data() + (n * c + ci) * hw;
      for (long i = 0; i < hw; ++i) yp[i] += xp[i];
    }
  }
  const long cc = c;
  return make_op(std::move(y), {x},
                 [cc](const Variable& gy) -> std::vector<Variable> {
                   return {broadcast_single_channel(gy, cc)};
                 },
                 "reduce_to_single_channel");
}

}  // namespace

Variable reduce_rows(const Variable& x) {
  const Tensor& tx = x.value();
  if (tx.rank() != 2) throw Error("reduce_rows: rank-2 required");
  const long n0 = tx.dim(0), k = tx.dim(1);
  Tensor y({n0});
  for (long n = 0; n < n0; ++n) {
    const double* xp = tx.data() + n * k;
    double s = 0.0;
    for (long i = 0; i < k; ++i) s += xp[i];
    y[n] = s;
  }
  return make_op(std::move(y), {x},
                 [k](const Variable& gy) -> std::vector<Variable> {
                   return {broadcast_rows(gy, k)};
                 },
                 "reduce_rows");
}

Variable broadcast_rows(const Variable& v, long k) {
  const Tensor& tv = v.value();
  if (tv.rank() != 1) throw Error("broadcast_rows: rank-1 required");
  const long n0 = tv.dim(0);
  Tensor y({n0, k});
  for (long n = 0; n < n0; ++n) {
    double* yp = y.data() + n * k;
    for (long i = 0; i < k; ++i) yp[i] = tv[n];
  }
  return make_op(std::move(y), {v},
                 [](const Variable& gy) -> std::vector<Variable> {
                   return {reduce_rows(gy)};
                 },
                 "broadcast_rows");
}

// ---------------------------------------------------------------------------
// lookup

Variable gather_rows(const Variable& table, const std::vector<long>& idx) {
  const Tensor& tt = table.value();
  if (tt.rank() != 2) throw Error("gather_rows: rank-2 table required");
  const long rows = tt.dim(0), d = tt.dim(1);
  Tensor y({static_cast<long>(idx.size()), d});
  for (size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] < 0 || idx[i] >= rows) throw Error("gather_rows: index out of range");
    std::copy(tt.data() + idx[i] * d, tt.data() + (idx[i] + 1) * d,
              y.data() + static_cast<long>(i) * d);
  }
  std::vector<long> idx_copy = idx;
  return make_op(std::move(y), {table},
                 [idx_copy, rows](const Variable& gy) -> std::vector<Variable> {
                   return {scatter_rows(gy, idx_copy, rows)};
                 },
                 "gather_rows");
}

namespace {

Variable scatter_rows(const Variable& g, std::vector<long> idx, long rows) {
  const Tensor& tg = g.value();
  const long d = tg.dim(1);
  Tensor y({rows, d});
  for (size_t i = 0; i < idx.size(); ++i) {
    const double* gp = tg.data() + static_cast<long>(i) * d;
    double* yp = y.data() + idx[i] * d;
    for (long j = 0; j < d; ++j) yp[j] += gp[j];
  }
  return make_op(std::move(y), {g},
                 [idx](const Variable& gy) -> std::vector<Variable> {
                   return {gather_rows(gy, idx)};
                 },
                 "scatter_rows");
}

}  // namespace

// ---------------------------------------------------------------------------
// composites

Variable mean_rows(const Variable& x) {
  return scale(reduce_rows(x), 1.0 / static_cast<double>(x.value().dim(1)));
}

Variable logsumexp_rows(const Variable& x) {
  const Tensor& tx = x.value();
  const long n0 = tx.dim(0), k = tx.dim(1);
  Tensor mx({n0});
  for (long n = 0; n < n0; ++n) {
    double m = tx[n * k];
    for (long i = 1; i < k; ++i) m = std::max(m, tx[n * k + i]);
    mx[n] = m;
  }
  Variable m = Variable::constant(mx);  // constant shift, exact a.e.
  Variable shifted = sub(x, broadcast_rows(m, k));
  return add(log_v(reduce_rows(exp_v(shifted))), m);
}

Tensor numeric_grad(const std::function<double(const Tensor&)>& f,
                    const Tensor& x, double h) {
  Tensor g(x.shape());
  Tensor xc = x.clone();
  for (long i = 0; i < x.numel(); ++i) {
    const double orig = xc[i];
    xc[i] = orig + h;
    const double fp = f(xc);
    xc[i] = orig - h;
    const double fm = f(xc);
    xc[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace sgan::nn

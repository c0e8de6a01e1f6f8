#include "agvc/graph.hpp"

#include <algorithm>
#include <cmath>

#include "agvc/error.hpp"
#include "agvc/kernels.hpp"

namespace agvc {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

kernels::Conv2dDims conv_dims(const std::vector<int>& xs, const std::vector<int>& ws,
                              int stride, int pad) {
  kernels::Conv2dDims d{};
  d.in_c = xs[0];
  d.in_h = xs[1];
  d.in_w = xs[2];
  d.out_c = ws[0];
  d.kh = ws[2];
  d.kw = ws[3];
  d.stride = stride;
  d.pad = pad;
  d.out_h = (xs[1] + 2 * pad - ws[2]) / stride + 1;
  d.out_w = (xs[2] + 2 * pad - ws[3]) / stride + 1;
  return d;
}

}  // namespace

const char* op_name(OpKind k) {
  switch (k) {
    case OpKind::Const: return "const";
    case OpKind::Input: return "input";
    case OpKind::Add: return "add";
    case OpKind::Sub: return "sub";
    case OpKind::Mul: return "mul";
    case OpKind::MatMul: return "matmul";
    case OpKind::Conv2d: return "conv2d";
    case OpKind::Relu: return "relu";
    case OpKind::Sigmoid: return "sigmoid";
    case OpKind::MaxPool2x2: return "maxpool2x2";
    case OpKind::Mean: return "mean";
    case OpKind::Sum: return "sum";
    case OpKind::Scale: return "scale";
    case OpKind::Square: return "square";
    case OpKind::SoftmaxCe: return "softmax_ce";
    case OpKind::WeightedBce: return "weighted_bce";
  }
  return "?";
}

int CompGraph::push(Node n) {
  nodes_.push_back(std::move(n));
  evaluated_ = false;
  return static_cast<int>(nodes_.size()) - 1;
}

CompGraph::Node& CompGraph::node(int id) { return nodes_[static_cast<std::size_t>(id)]; }
const CompGraph::Node& CompGraph::node(int id) const {
  return nodes_[static_cast<std::size_t>(id)];
}

void CompGraph::check_id(int id) const {
  if (id < 0 || id >= node_count()) throw Error("invalid node id");
}

int CompGraph::constant(Tensor value, std::string name) {
  Node n;
  n.kind = OpKind::Const;
  n.name = std::move(name);
  n.shape = value.shape();
  n.value = std::move(value);
  n.bound = true;
  return push(std::move(n));
}

int CompGraph::input(std::string name, std::vector<int> shape, bool want_grad) {
  Tensor::checked_size(shape);
  Node n;
  n.kind = OpKind::Input;
  n.name = std::move(name);
  n.shape = std::move(shape);
  n.want_grad = want_grad;
  return push(std::move(n));
}

int CompGraph::param(const std::string& name) {
  if (!params_) throw Error("graph has no parameter store");
  const Tensor& t = params_->get(name);
  Node n;
  n.kind = OpKind::Input;
  n.name = name;
  n.shape = t.shape();
  n.want_grad = true;
  n.scalar = 1.0;  // marks a store-backed input
  return push(std::move(n));
}

int CompGraph::binary_same_shape(OpKind kind, int a, int b) {
  check_id(a);
  check_id(b);
  if (node(a).shape != node(b).shape)
    throw ShapeError(std::string(op_name(kind)) + ": shape mismatch " +
                     shape_str(node(a).shape) + " vs " + shape_str(node(b).shape));
  Node n;
  n.kind = kind;
  n.parents = {a, b};
  n.shape = node(a).shape;
  return push(std::move(n));
}

int CompGraph::add(int a, int b) { return binary_same_shape(OpKind::Add, a, b); }
int CompGraph::sub(int a, int b) { return binary_same_shape(OpKind::Sub, a, b); }
int CompGraph::mul(int a, int b) { return binary_same_shape(OpKind::Mul, a, b); }

int CompGraph::matmul(int a, int b) {
  check_id(a);
  check_id(b);
  const auto& sa = node(a).shape;
  const auto& sb = node(b).shape;
  if (sa.size() != 2 || sb.size() != 2 || sa[1] != sb[0])
    throw ShapeError("matmul: incompatible shapes " + shape_str(sa) + " x " +
                     shape_str(sb));
  Node n;
  n.kind = OpKind::MatMul;
  n.parents = {a, b};
  n.shape = {sa[0], sb[1]};
  return push(std::move(n));
}

int CompGraph::conv2d(int x, int w, int stride, int pad) {
  return conv2d(x, w, -1, stride, pad);
}

int CompGraph::conv2d(int x, int w, int bias, int stride, int pad) {
  check_id(x);
  check_id(w);
  const auto& xs = node(x).shape;
  const auto& ws = node(w).shape;
  if (xs.size() != 3 || ws.size() != 4)
    throw ShapeError("conv2d: need x (C,H,W) and w (OC,IC,KH,KW), got " +
                     shape_str(xs) + " and " + shape_str(ws));
  if (ws[1] != xs[0])
    throw ShapeError("conv2d: input channels " + std::to_string(xs[0]) +
                     " vs kernel " + std::to_string(ws[1]));
  if (stride < 1 || pad < 0) throw ShapeError("conv2d: bad stride/pad");
  if (xs[1] + 2 * pad < ws[2] || xs[2] + 2 * pad < ws[3])
    throw ShapeError("conv2d: kernel larger than padded input");
  if (bias >= 0) {
    check_id(bias);
    const auto& bs = node(bias).shape;
    if (bs.size() != 1 || bs[0] != ws[0])
      throw ShapeError("conv2d: bias shape " + shape_str(bs) + " vs OC " +
                       std::to_string(ws[0]));
  }
  auto d = conv_dims(xs, ws, stride, pad);
  Node n;
  n.kind = OpKind::Conv2d;
  n.parents = bias >= 0 ? std::vector<int>{x, w, bias} : std::vector<int>{x, w};
  n.shape = {d.out_c, d.out_h, d.out_w};
  n.stride = stride;
  n.pad = pad;
  return push(std::move(n));
}

int CompGraph::unary(OpKind kind, int x) {
  check_id(x);
  Node n;
  n.kind = kind;
  n.parents = {x};
  n.shape = node(x).shape;
  return push(std::move(n));
}

int CompGraph::relu(int x) { return unary(OpKind::Relu, x); }
int CompGraph::sigmoid(int x) { return unary(OpKind::Sigmoid, x); }
int CompGraph::square(int x) { return unary(OpKind::Square, x); }

int CompGraph::maxpool2x2(int x) {
  check_id(x);
  const auto& s = node(x).shape;
  if (s.size() != 3 || s[1] % 2 != 0 || s[2] % 2 != 0)
    throw ShapeError("maxpool2x2: need (C,H,W) with even H,W, got " + shape_str(s));
  Node n;
  n.kind = OpKind::MaxPool2x2;
  n.parents = {x};
  n.shape = {s[0], s[1] / 2, s[2] / 2};
  return push(std::move(n));
}

int CompGraph::mean(int x) {
  check_id(x);
  Node n;
  n.kind = OpKind::Mean;
  n.parents = {x};
  n.shape = {1};
  return push(std::move(n));
}

int CompGraph::sum(int x) {
  check_id(x);
  Node n;
  n.kind = OpKind::Sum;
  n.parents = {x};
  n.shape = {1};
  return push(std::move(n));
}

int CompGraph::scale(int x, double s) {
  check_id(x);
  Node n;
  n.kind = OpKind::Scale;
  n.parents = {x};
  n.shape = node(x).shape;
  n.scalar = s;
  return push(std::move(n));
}

int CompGraph::softmax_ce(int logits, int target) {
  check_id(logits);
  check_id(target);
  const auto& ls = node(logits).shape;
  if (ls.size() != 3)
    throw ShapeError("softmax_ce: logits must be (C,H,W), got " + shape_str(ls));
  if (node(target).shape != ls)
    throw ShapeError("softmax_ce: target shape " + shape_str(node(target).shape) +
                     " vs logits " + shape_str(ls));
  Node n;
  n.kind = OpKind::SoftmaxCe;
  n.parents = {logits, target};
  n.shape = {1};
  return push(std::move(n));
}

int CompGraph::weighted_bce(int logits, int labels, int weights) {
  check_id(logits);
  check_id(labels);
  check_id(weights);
  const auto& s = node(logits).shape;
  if (node(labels).shape != s || node(weights).shape != s)
    throw ShapeError("weighted_bce: logits/labels/weights shapes differ");
  Node n;
  n.kind = OpKind::WeightedBce;
  n.parents = {logits, labels, weights};
  n.shape = {1};
  return push(std::move(n));
}

void CompGraph::bind(const std::string& input_name, Tensor value) {
  for (Node& n : nodes_) {
    if (n.kind == OpKind::Input && n.name == input_name && n.scalar == 0.0) {
      if (value.shape() != n.shape)
        throw ShapeError("bind '" + input_name + "': shape " +
                         shape_str(value.shape()) + " vs declared " +
                         shape_str(n.shape));
      n.value = std::move(value);
      n.bound = true;
      evaluated_ = false;
      return;
    }
  }
  throw Error("no input named '" + input_name + "'");
}

void CompGraph::forward_node(int id) {
  Node& n = node(id);
  auto& out = n.value;
  auto parent_val = [&](int i) -> const Tensor& {
    return node(n.parents[static_cast<std::size_t>(i)]).value;
  };

  switch (n.kind) {
    case OpKind::Const:
      break;
    case OpKind::Input:
      if (n.scalar != 0.0) {
        out = params_->get(n.name);
        n.bound = true;
      } else if (!n.bound) {
        throw Error("input '" + n.name + "' not bound");
      }
      break;
    case OpKind::Add: {
      const Tensor &a = parent_val(0), &b = parent_val(1);
      out = Tensor(n.shape);
      for (std::int64_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
      break;
    }
    case OpKind::Sub: {
      const Tensor &a = parent_val(0), &b = parent_val(1);
      out = Tensor(n.shape);
      for (std::int64_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
      break;
    }
    case OpKind::Mul: {
      const Tensor &a = parent_val(0), &b = parent_val(1);
      out = Tensor(n.shape);
      for (std::int64_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
      break;
    }
    case OpKind::MatMul: {
      const Tensor &a = parent_val(0), &b = parent_val(1);
      const int M = a.shape()[0], K = a.shape()[1], N = b.shape()[1];
      out = Tensor(n.shape);
      for (int i = 0; i < M; ++i)
        for (int j = 0; j < N; ++j) {
          double acc = 0.0;
          for (int k = 0; k < K; ++k) acc += a[i * K + k] * b[k * N + j];
          out[i * N + j] = acc;
        }
      break;
    }
    case OpKind::Conv2d: {
      const Tensor &x = parent_val(0), &w = parent_val(1);
      const double* bias = n.parents.size() == 3 ? parent_val(2).data() : nullptr;
      auto d = conv_dims(x.shape(), w.shape(), n.stride, n.pad);
      out = Tensor(n.shape);
      kernels::conv2d_forward(x.data(), w.data(), bias, out.data(), d);
      break;
    }
    case OpKind::Relu: {
      const Tensor& x = parent_val(0);
      out = Tensor(n.shape);
      for (std::int64_t i = 0; i < out.size(); ++i) out[i] = x[i] > 0 ? x[i] : 0.0;
      break;
    }
    case OpKind::Sigmoid: {
      const Tensor& x = parent_val(0);
      out = Tensor(n.shape);
      for (std::int64_t i = 0; i < out.size(); ++i) out[i] = stable_sigmoid(x[i]);
      break;
    }
    case OpKind::MaxPool2x2: {
      const Tensor& x = parent_val(0);
      const int C = x.shape()[0], H = x.shape()[1], W = x.shape()[2];
      out = Tensor(n.shape);
      n.argmax.assign(static_cast<std::size_t>(out.size()), 0);
      std::int64_t o = 0;
      for (int c = 0; c < C; ++c)
        for (int y = 0; y < H; y += 2)
          for (int x2 = 0; x2 < W; x2 += 2) {
            // first max in scan order wins ties
            std::int64_t best = (static_cast<std::int64_t>(c) * H + y) * W + x2;
            double bv = x[best];
            for (int dy = 0; dy < 2; ++dy)
              for (int dx = 0; dx < 2; ++dx) {
                const std::int64_t idx =
                    (static_cast<std::int64_t>(c) * H + y + dy) * W + x2 + dx;
                if (x[idx] > bv) {
                  bv = x[idx];
                  best = idx;
                }
              }
            out[o] = bv;
            n.argmax[static_cast<std::size_t>(o)] = best;
            ++o;
          }
      break;
    }
    case OpKind::Mean: {
      const Tensor& x = parent_val(0);
      double acc = 0.0;
      for (std::int64_t i = 0; i < x.size(); ++i) acc += x[i];
      out = Tensor::scalar(acc / static_cast<double>(x.size()));
      break;
    }
    case OpKind::Sum: {
      const Tensor& x = parent_val(0);
      double acc = 0.0;
      for (std::int64_t i = 0; i < x.size(); ++i) acc += x[i];
      out = Tensor::scalar(acc);
      break;
    }
    case OpKind::Scale: {
      const Tensor& x = parent_val(0);
      out = Tensor(n.shape);
      for (std::int64_t i = 0; i < out.size(); ++i) out[i] = n.scalar * x[i];
      break;
    }
    case OpKind::Square: {
      const Tensor& x = parent_val(0);
      out = Tensor(n.shape);
      for (std::int64_t i = 0; i < out.size(); ++i) out[i] = x[i] * x[i];
      break;
    }
    case OpKind::SoftmaxCe: {
      const Tensor &z = parent_val(0), &t = parent_val(1);
      const int C = z.shape()[0], H = z.shape()[1], W = z.shape()[2];
      const std::int64_t pix = static_cast<std::int64_t>(H) * W;
      double total = 0.0;
      for (std::int64_t p = 0; p < pix; ++p) {
        double m = -1e300;
        for (int c = 0; c < C; ++c) m = std::max(m, z[c * pix + p]);
        double se = 0.0;
        for (int c = 0; c < C; ++c) se += std::exp(z[c * pix + p] - m);
        const double lse = m + std::log(se);
        for (int c = 0; c < C; ++c) {
          const double tc = t[c * pix + p];
          if (tc > 0) total += tc * (std::log(tc) - (z[c * pix + p] - lse));
        }
      }
      out = Tensor::scalar(total / static_cast<double>(pix));
      break;
    }
    case OpKind::WeightedBce: {
      const Tensor &z = parent_val(0), &y = parent_val(1), &w = parent_val(2);
      double total = 0.0;
      for (std::int64_t i = 0; i < z.size(); ++i) {
        const double zi = z[i];
        const double bce = std::max(zi, 0.0) - zi * y[i] + std::log1p(std::exp(-std::abs(zi)));
        total += w[i] * bce;
      }
      out = Tensor::scalar(total / static_cast<double>(z.size()));
      break;
    }
  }

  if (!out.all_finite())
    throw Error(std::string("non-finite value at node ") + std::to_string(id) + " (" +
                op_name(n.kind) + (n.name.empty() ? "" : " '" + n.name + "'") + ")");
}

const Tensor& CompGraph::evaluate(int target) {
  check_id(target);
  for (int id = 0; id < node_count(); ++id) forward_node(id);
  evaluated_ = true;
  return node(target).value;
}

void CompGraph::backward_node(int id) {
  Node& n = node(id);
  if (n.grad.size() == 0) return;  // unreachable from loss
  const Tensor& g = n.grad;
  auto parent_grad = [&](int i) -> Tensor& {
    Node& p = node(n.parents[static_cast<std::size_t>(i)]);
    if (p.grad.size() == 0) p.grad = Tensor(p.shape);
    return p.grad;
  };
  auto parent_val = [&](int i) -> const Tensor& {
    return node(n.parents[static_cast<std::size_t>(i)]).value;
  };

  switch (n.kind) {
    case OpKind::Const:
    case OpKind::Input:
      break;
    case OpKind::Add: {
      Tensor &ga = parent_grad(0), &gb = parent_grad(1);
      for (std::int64_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i];
        gb[i] += g[i];
      }
      break;
    }
    case OpKind::Sub: {
      Tensor &ga = parent_grad(0), &gb = parent_grad(1);
      for (std::int64_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i];
        gb[i] -= g[i];
      }
      break;
    }
    case OpKind::Mul: {
      const Tensor &a = parent_val(0), &b = parent_val(1);
      Tensor &ga = parent_grad(0), &gb = parent_grad(1);
      for (std::int64_t i = 0; i < g.size(); ++i) {
        ga[i] += g[i] * b[i];
        gb[i] += g[i] * a[i];
      }
      break;
    }
    case OpKind::MatMul: {
      const Tensor &a = parent_val(0), &b = parent_val(1);
      Tensor &ga = parent_grad(0), &gb = parent_grad(1);
      const int M = a.shape()[0], K = a.shape()[1], N = b.shape()[1];
      for (int i = 0; i < M; ++i)
        for (int k = 0; k < K; ++k) {
          double acc = 0.0;
          for (int j = 0; j < N; ++j) acc += g[i * N + j] * b[k * N + j];
          ga[i * K + k] += acc;
        }
      for (int k = 0; k < K; ++k)
        for (int j = 0; j < N; ++j) {
          double acc = 0.0;
          for (int i = 0; i < M; ++i) acc += a[i * K + k] * g[i * N + j];
          gb[k * N + j] += acc;
        }
      break;
    }
    case OpKind::Conv2d: {
      const Tensor &x = parent_val(0), &w = parent_val(1);
      auto d = conv_dims(x.shape(), w.shape(), n.stride, n.pad);
      Tensor gx(x.shape()), gw(w.shape());
      kernels::conv2d_backward_input(g.data(), w.data(), gx.data(), d);
      Tensor gb;
      double* gbp = nullptr;
      if (n.parents.size() == 3) {
        gb = Tensor(parent_val(2).shape());
        gbp = gb.data();
      }
      kernels::conv2d_backward_params(g.data(), x.data(), gw.data(), gbp, d);
      Tensor& pgx = parent_grad(0);
      for (std::int64_t i = 0; i < pgx.size(); ++i) pgx[i] += gx[i];
      Tensor& pgw = parent_grad(1);
      for (std::int64_t i = 0; i < pgw.size(); ++i) pgw[i] += gw[i];
      if (gbp) {
        Tensor& pgb = parent_grad(2);
        for (std::int64_t i = 0; i < pgb.size(); ++i) pgb[i] += gb[i];
      }
      break;
    }
    case OpKind::Relu: {
      const Tensor& x = parent_val(0);
      Tensor& gx = parent_grad(0);
      for (std::int64_t i = 0; i < g.size(); ++i)
        if (x[i] > 0) gx[i] += g[i];
      break;
    }
    case OpKind::Sigmoid: {
      Tensor& gx = parent_grad(0);
      for (std::int64_t i = 0; i < g.size(); ++i) {
        const double s = n.value[i];
        gx[i] += g[i] * s * (1.0 - s);
      }
      break;
    }
    case OpKind::MaxPool2x2: {
      Tensor& gx = parent_grad(0);
      for (std::int64_t o = 0; o < g.size(); ++o)
        gx[n.argmax[static_cast<std::size_t>(o)]] += g[o];
      break;
    }
    case OpKind::Mean: {
      Tensor& gx = parent_grad(0);
      const double gv = g[0] / static_cast<double>(gx.size());
      for (std::int64_t i = 0; i < gx.size(); ++i) gx[i] += gv;
      break;
    }
    case OpKind::Sum: {
      Tensor& gx = parent_grad(0);
      for (std::int64_t i = 0; i < gx.size(); ++i) gx[i] += g[0];
      break;
    }
    case OpKind::Scale: {
      Tensor& gx = parent_grad(0);
      for (std::int64_t i = 0; i < g.size(); ++i) gx[i] += n.scalar * g[i];
      break;
    }
    case OpKind::Square: {
      const Tensor& x = parent_val(0);
      Tensor& gx = parent_grad(0);
      for (std::int64_t i = 0; i < g.size(); ++i) gx[i] += 2.0 * x[i] * g[i];
      break;
    }
    case OpKind::SoftmaxCe: {
      const Tensor &z = parent_val(0), &t = parent_val(1);
      Tensor& gz = parent_grad(0);
      const int C = z.shape()[0], H = z.shape()[1], W = z.shape()[2];
      const std::int64_t pix = static_cast<std::int64_t>(H) * W;
      const double gv = g[0] / static_cast<double>(pix);
      for (std::int64_t p = 0; p < pix; ++p) {
        double m = -1e300;
        for (int c = 0; c < C; ++c) m = std::max(m, z[c * pix + p]);
        double se = 0.0;
        for (int c = 0; c < C; ++c) se += std::exp(z[c * pix + p] - m);
        for (int c = 0; c < C; ++c) {
          const double pc = std::exp(z[c * pix + p] - m) / se;
          gz[c * pix + p] += gv * (pc - t[c * pix + p]);
        }
      }
      break;
    }
    case OpKind::WeightedBce: {
      const Tensor &z = parent_val(0), &y = parent_val(1), &w = parent_val(2);
      Tensor& gz = parent_grad(0);
      const double gv = g[0] / static_cast<double>(z.size());
      for (std::int64_t i = 0; i < z.size(); ++i)
        gz[i] += gv * w[i] * (stable_sigmoid(z[i]) - y[i]);
      break;
    }
  }
}

void CompGraph::backward(int loss) {
  check_id(loss);
  if (!evaluated_) throw Error("backward before evaluate");
  if (node(loss).value.size() != 1) throw Error("loss must be scalar");
  for (Node& n : nodes_) n.grad = Tensor();
  node(loss).grad = Tensor::scalar(1.0);
  for (int id = loss; id >= 0; --id) backward_node(id);
  // nodes untouched by the sweep get zero gradients of their own shape
  for (Node& n : nodes_) {
    if (n.grad.size() == 0) n.grad = Tensor(n.shape);
    if (!n.grad.all_finite()) throw Error("non-finite gradient");
  }
}

const Tensor& CompGraph::output(int id) const {
  check_id(id);
  return node(id).value;
}

const Tensor& CompGraph::gradient(int id) const {
  check_id(id);
  return node(id).grad;
}

const std::vector<int>& CompGraph::node_shape(int id) const {
  check_id(id);
  return node(id).shape;
}

std::map<std::string, Tensor> CompGraph::param_gradients() const {
  std::map<std::string, Tensor> out;
  for (const Node& n : nodes_)
    if (n.kind == OpKind::Input && n.scalar != 0.0) {
      auto it = out.find(n.name);
      if (it == out.end()) {
        out.emplace(n.name, n.grad.size() ? n.grad : Tensor(n.shape));
      } else {
        for (std::int64_t i = 0; i < n.grad.size(); ++i) it->second[i] += n.grad[i];
      }
    }
  return out;
}

const Tensor& CompGraph::input_gradient(const std::string& name) const {
  for (const Node& n : nodes_)
    if (n.kind == OpKind::Input && n.name == name) return n.grad;
  throw Error("no input named '" + name + "'");
}

std::vector<std::string> CompGraph::grad_input_names() const {
  std::vector<std::string> out;
  for (const Node& n : nodes_)
    if (n.kind == OpKind::Input && n.scalar == 0.0 && n.want_grad)
      out.push_back(n.name);
  return out;
}

Tensor& CompGraph::mutable_input(const std::string& name) {
  for (Node& n : nodes_)
    if (n.kind == OpKind::Input && n.scalar == 0.0 && n.name == name) {
      if (!n.bound) throw Error("input '" + name + "' not bound");
      evaluated_ = false;
      return n.value;
    }
  throw Error("no input named '" + name + "'");
}

double grad_check(CompGraph& g, int loss, double eps) {
  if (eps <= 0 || eps > 1e-2) throw Error("grad_check: eps out of (0, 1e-2]");
  g.evaluate(loss);
  g.backward(loss);

  struct Probe {
    bool is_param;
    std::string name;
    Tensor analytic;
  };
  std::vector<Probe> probes;
  for (const auto& [name, grad] : g.param_gradients())
    probes.push_back({true, name, grad});
  for (const std::string& name : g.grad_input_names())
    probes.push_back({false, name, g.input_gradient(name)});

  double worst = 0.0;
  auto eval_loss = [&]() { return g.evaluate(loss)[0]; };
  for (const Probe& p : probes) {
    Tensor& w = p.is_param ? g.params()->get(p.name) : g.mutable_input(p.name);
    for (std::int64_t i = 0; i < w.size(); ++i) {
      const double keep = w[i];
      w[i] = keep + eps;
      const double fp = eval_loss();
      w[i] = keep - eps;
      const double fm = eval_loss();
      w[i] = keep;
      const double numeric = (fp - fm) / (2 * eps);
      const double rel = std::abs(p.analytic[i] - numeric) / std::max(1.0, std::abs(numeric));
      worst = std::max(worst, rel);
    }
  }
  g.evaluate(loss);  // restore cached values
  g.backward(loss);
  return worst;
}

}  // namespace agvc

#pragma once

#include <map>
#include <string>
#include <vector>

#include "agvc/params.hpp"
#include "agvc/tensor.hpp"

namespace agvc {

enum class OpKind {
  Const,
  Input,
  Add,
  Sub,
  Mul,
  MatMul,
  Conv2d,
  Relu,
  Sigmoid,
  MaxPool2x2,
  Mean,
  Sum,
  Scale,
  Square,
  SoftmaxCe,
  WeightedBce,
};

const char* op_name(OpKind k);

/// Reverse-mode autodiff over a fixed op set. Nodes are appended in
/// topological order (builders only reference existing ids). Scalars are
/// shape {1}. All shapes are resolved at build time; evaluate() checks
/// values, backward() fills gradients of identical shape per node.
///
/// SoftmaxCe and WeightedBce treat their target/label/weight parents as
/// constants: no gradient flows into them.
class CompGraph {
 public:
  explicit CompGraph(ParamStore* params = nullptr) : params_(params) {}

  int constant(Tensor value, std::string name = "");
  int input(std::string name, std::vector<int> shape, bool want_grad = false);
  /// Reads the named tensor from the bound ParamStore on every evaluate.
  int param(const std::string& name);

  int add(int a, int b);
  int sub(int a, int b);
  int mul(int a, int b);
  int matmul(int a, int b);                          // (M,K)x(K,N)
  int conv2d(int x, int w, int stride, int pad);     // x (C,H,W), w (OC,IC,KH,KW)
  int conv2d(int x, int w, int bias, int stride, int pad);  // bias (OC)
  int relu(int x);
  int sigmoid(int x);
  int maxpool2x2(int x);
  int mean(int x);
  int sum(int x);
  int scale(int x, double s);
  int square(int x);
  /// Mean over pixels of sum_c t_c*(log t_c - log softmax(z)_c); logits and
  /// target are (C,H,W), target rows are probability vectors. With one-hot
  /// targets this is the plain cross-entropy; with soft targets the KL
  /// divergence from the target distribution.
  int softmax_ce(int logits, int target);
  /// Mean over elements of w * bce_with_logits(z, y).
  int weighted_bce(int logits, int labels, int weights);

  void bind(const std::string& input_name, Tensor value);

  /// Forward pass over every node; returns the requested node's output.
  const Tensor& evaluate(int node);
  /// Populates gradients for every node reachable from the scalar loss.
  void backward(int loss);

  const Tensor& output(int node) const;
  const Tensor& gradient(int node) const;
  const std::vector<int>& node_shape(int node) const;
  int node_count() const { return static_cast<int>(nodes_.size()); }

  std::map<std::string, Tensor> param_gradients() const;
  const Tensor& input_gradient(const std::string& name) const;
  /// Plain inputs created with want_grad = true.
  std::vector<std::string> grad_input_names() const;
  Tensor& mutable_input(const std::string& name);

  ParamStore* params() { return params_; }

 private:
  struct Node {
    OpKind kind;
    std::string name;
    std::vector<int> parents;
    std::vector<int> shape;
    Tensor value;
    Tensor grad;
    double scalar = 0.0;
    int stride = 1, pad = 0;
    bool want_grad = false;
    bool bound = false;
    std::vector<std::int64_t> argmax;  // MaxPool2x2 routing
  };

  int push(Node n);
  int binary_same_shape(OpKind kind, int a, int b);
  int unary(OpKind kind, int x);
  Node& node(int id);
  const Node& node(int id) const;
  void forward_node(int id);
  void backward_node(int id);
  void check_id(int id) const;

  std::vector<Node> nodes_;
  ParamStore* params_;
  bool evaluated_ = false;
};

/// Central-difference check over every parameter coordinate and every
/// want_grad input coordinate. Returns max |analytic - numeric| /
/// max(1, |numeric|).
double grad_check(CompGraph& g, int loss, double eps);

}  // namespace agvc

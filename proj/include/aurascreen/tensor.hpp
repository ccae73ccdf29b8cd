#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "aurascreen/common.hpp"
#include "aurascreen/fingerprint.hpp"

namespace aura::nn {

struct Tensor {
  std::vector<int> shape;
  std::vector<double> v;

  Tensor() = default;
  explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
    v.assign(count(shape), 0.0);
  }
  Tensor(std::vector<int> s, std::vector<double> data) : shape(std::move(s)), v(std::move(data)) {}

  static size_t count(const std::vector<int>& s) {
    size_t n = 1;
    for (int d : s) n *= static_cast<size_t>(d);
    return n;
  }
  size_t size() const { return v.size(); }
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const { return shape.size() < 2 ? 1 : shape[1]; }
  double& at(int i, int j) { return v[static_cast<size_t>(i) * static_cast<size_t>(cols()) + static_cast<size_t>(j)]; }
  double at(int i, int j) const { return v[static_cast<size_t>(i) * static_cast<size_t>(cols()) + static_cast<size_t>(j)]; }
  bool finite() const;
};

using NodeId = int;

// Reverse-mode tape over a small op set. Forward calls record a backward
// closure per node; backward() replays them in reverse creation order.
// Everything is sequential and deterministic.
class Tape {
 public:
  NodeId leaf(Tensor value, bool needs_grad = false);
  NodeId constant(Tensor value) { return leaf(std::move(value), false); }

  const Tensor& value(NodeId id) const { return nodes_[static_cast<size_t>(id)].val; }
  const Tensor& grad(NodeId id) const { return nodes_[static_cast<size_t>(id)].grad; }

  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);  // elementwise
  NodeId scale(NodeId a, double c);
  NodeId add_const(NodeId a, Tensor c);
  NodeId mul_const(NodeId a, Tensor c);

  // x [..., k] * w [k, n] + b [n]; pass b = -1 to skip the bias
  NodeId linear(NodeId x, NodeId w, NodeId b);
  // sparse 0/1 row vector times w [width, n] + b [n]
  NodeId bits_linear(const fp::Fingerprint& bits, NodeId w, NodeId b);
  NodeId matmul(NodeId a, NodeId b);     // [m,k] x [k,n]
  NodeId matmul_nt(NodeId a, NodeId b);  // [m,k] x [n,k]^T -> [m,n]
  // u[(i,j), k] = a[i,k] * b[j,k]; a [m,k], b [m,k] -> [m*m, k]
  NodeId outer_rows(NodeId a, NodeId b);

  NodeId sigmoid(NodeId a);
  NodeId tanh_(NodeId a);
  NodeId gelu(NodeId a);  // tanh approximation

  // softmax over the last dimension of a 2D tensor, with max subtraction;
  // additive -inf style masking is applied by the caller via add_const
  NodeId softmax_rows(NodeId a);
  NodeId layernorm(NodeId x, NodeId gain, NodeId bias, double eps = 1e-5);

  NodeId row_sum(NodeId a);    // [m,n] -> [m]
  NodeId mean_rows(NodeId a);  // [m,n] -> [n]
  NodeId sum_all(NodeId a);    // -> [1]
  NodeId dot(NodeId a, NodeId b);
  NodeId reshape(NodeId a, std::vector<int> shape);
  NodeId concat_rows(const std::vector<NodeId>& rows);  // k x [n] -> [k,n]

  // Seeds the given outputs (scalar nodes get seed 1.0 unless a tensor seed
  // is supplied) and sweeps the whole tape once.
  void backward(NodeId output);
  void backward(const std::vector<std::pair<NodeId, Tensor>>& seeds);

  double scalar(NodeId id) const { return value(id).v.at(0); }
  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor val;
    Tensor grad;
    bool needs_grad = false;
    std::function<void(Tape&)> back;
  };

  Tensor& grad_mut(NodeId id) { return nodes_[static_cast<size_t>(id)].grad; }
  void ensure_grad(NodeId id);
  NodeId push(Tensor val, std::function<void(Tape&)> back);

  std::vector<Node> nodes_;
};

// Named parameter tensors with deterministic initialization.
class ParamStore {
 public:
  Tensor& at(const std::string& name) { return tensors_.at(name); }
  const Tensor& at(const std::string& name) const { return tensors_.at(name); }
  bool has(const std::string& name) const { return tensors_.count(name) > 0; }
  void put(const std::string& name, Tensor t) { tensors_[name] = std::move(t); }
  std::map<std::string, Tensor>& tensors() { return tensors_; }
  const std::map<std::string, Tensor>& tensors() const { return tensors_; }

 private:
  std::map<std::string, Tensor> tensors_;
};

// Lazily binds parameter tensors into a tape as differentiable leaves; each
// name is bound once per forward pass.
class Binder {
 public:
  Binder(Tape& tape, const ParamStore& params) : tape_(&tape), params_(&params) {}
  NodeId operator()(const std::string& name);
  const std::map<std::string, NodeId>& bound() const { return ids_; }

 private:
  Tape* tape_;
  const ParamStore* params_;
  std::map<std::string, NodeId> ids_;
};

}  // namespace aura::nn

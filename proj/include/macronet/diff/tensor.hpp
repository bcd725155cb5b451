#pragma once

#include "macronet/core.hpp"

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace macronet::diff {

namespace detail {
inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}
}  // namespace detail

inline bool grad_enabled() { return detail::grad_mode(); }

/// Disables tape recording on the current thread for the guard's lifetime.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode()) { detail::grad_mode() = false; }
  ~NoGradGuard() { detail::grad_mode() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <typename Scalar>
struct Node {
  Mat<Scalar> value;
  Mat<Scalar> grad;
  bool requires_grad = false;
  bool is_leaf = true;
  std::string name;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
};

template <typename Scalar, typename Derived>
void accumulate_grad(Node<Scalar>& node, const Eigen::MatrixBase<Derived>& g) {
  if (!node.requires_grad) return;
  if (node.grad.size() == 0) {
    node.grad = g;
  } else {
    node.grad += g;
  }
}

/// Dense rank-2 buffer (rows are batch records) taking part in the
/// reverse-mode tape. Scalars are 1 x 1. Copies share the same node.
template <typename Scalar>
class Tensor {
 public:
  using NodePtr = std::shared_ptr<Node<Scalar>>;
  using BackwardFn = std::function<void(Node<Scalar>&)>;

  Tensor() : node_(std::make_shared<Node<Scalar>>()) {}

  explicit Tensor(Mat<Scalar> value, bool requires_grad = false, std::string name = {})
      : node_(std::make_shared<Node<Scalar>>()) {
    if (!value.allFinite()) {
      throw NumericError("tensor '" + name + "' initialised with non-finite values");
    }
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
    node_->name = std::move(name);
  }

  static Tensor scalar(Scalar v) { return Tensor(Mat<Scalar>::Constant(1, 1, v)); }

  /// Builds the output of a differentiable op. Records a tape entry only
  /// when recording is enabled and some parent needs a gradient.
  static Tensor from_op(Mat<Scalar> value, std::initializer_list<Tensor> parents, BackwardFn fn,
                        const char* op) {
    if (!value.allFinite()) {
      throw NumericError(std::string(op) + " produced a non-finite value");
    }
    Tensor out;
    out.node_->value = std::move(value);
    out.node_->is_leaf = false;
    out.node_->name = op;
    if (!grad_enabled()) return out;
    bool needs = false;
    for (const auto& p : parents) needs = needs || p.requires_grad();
    if (!needs) return out;
    out.node_->requires_grad = true;
    out.node_->parents.reserve(parents.size());
    for (const auto& p : parents) out.node_->parents.push_back(p.node_);
    out.node_->backward = std::move(fn);
    return out;
  }

  const Mat<Scalar>& value() const { return node_->value; }
  /// Direct write access for optimizers and initialisers; bypasses the tape.
  Mat<Scalar>& mutable_value() { return node_->value; }

  bool requires_grad() const { return node_->requires_grad; }
  bool has_grad() const { return node_->grad.size() != 0; }
  const Mat<Scalar>& grad() const { return node_->grad; }
  Mat<Scalar>& mutable_grad() { return node_->grad; }
  void zero_grad() { node_->grad.resize(0, 0); }

  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  std::array<Index, 2> shape() const { return {rows(), cols()}; }
  const std::string& name() const { return node_->name; }

  Scalar item() const {
    if (rows() != 1 || cols() != 1) {
      throw ContractError("item() on non-scalar tensor " + shape_string(rows(), cols()));
    }
    return node_->value(0, 0);
  }

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

/// Reverse sweep from a scalar loss. Leaf tensors with requires_grad
/// accumulate into grad(); intermediate nodes are released afterwards.
template <typename Scalar>
void backward(const Tensor<Scalar>& loss) {
  if (loss.rows() != 1 || loss.cols() != 1) {
    throw ContractError("backward() requires a scalar loss, got " +
                        shape_string(loss.rows(), loss.cols()));
  }
  if (!loss.requires_grad()) {
    throw ContractError("backward() on a loss with no recorded tape");
  }

  using NodeT = Node<Scalar>;
  // Owning references: releasing a node's parents must not free nodes
  // still waiting in the sweep.
  std::vector<std::shared_ptr<NodeT>> order;
  std::unordered_set<NodeT*> visited;
  std::vector<std::pair<std::shared_ptr<NodeT>, std::size_t>> stack;
  stack.emplace_back(loss.node(), 0);
  visited.insert(loss.node().get());
  while (!stack.empty()) {
    auto& top = stack.back();
    if (top.second < top.first->parents.size()) {
      std::shared_ptr<NodeT> parent = top.first->parents[top.second++];
      if (parent->requires_grad && !parent->is_leaf && visited.insert(parent.get()).second) {
        stack.emplace_back(std::move(parent), 0);
      }
    } else {
      order.push_back(std::move(top.first));
      stack.pop_back();
    }
  }

  accumulate_grad(*loss.node(), Mat<Scalar>::Ones(1, 1));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    NodeT& node = **it;
    if (node.is_leaf) continue;
    if (node.backward && node.grad.size() != 0) node.backward(node);
    node.backward = nullptr;
    node.parents.clear();
    node.grad.resize(0, 0);
    node.requires_grad = false;
  }
}

}  // namespace macronet::diff

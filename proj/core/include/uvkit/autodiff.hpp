#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace uvkit::ad {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
};

/// Reverse-mode tape over dense matrices. Operations append nodes in
/// evaluation order; `backward` walks them in reverse, accumulating
/// vector-Jacobian products into each node's gradient.
class Tape {
 public:
  Var constant(Matrix value);
  /// Leaf whose gradient is read back after `backward`.
  Var leaf(Matrix value);

  [[nodiscard]] const Matrix& value(Var v) const { return nodes_[v.id].value; }
  /// Zero matrix of the right shape if no gradient reached `v`.
  [[nodiscard]] Matrix grad(Var v) const;
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var matmul_nt(Var a, Var b);  // a · bᵀ
  Var add(Var a, Var b);
  Var add_row(Var a, Var row);  // row is 1×cols, broadcast over rows
  Var scale(Var a, double s);
  Var silu(Var a);
  Var tanh(Var a);
  Var softmax_rows(Var a);
  Var layer_norm(Var a, Var gamma, Var beta, double eps = 1e-5);
  Var concat_cols(std::span<const Var> parts);
  Var slice_cols(Var a, int start, int count);
  /// Constant sparse operator applied from the left.
  Var spmm(std::shared_ptr<const SparseMatrix> m, Var a);

  /// Seeds ∂L/∂output and propagates to every node.
  void backward(Var output, const Matrix& seed);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool has_grad = false;
    std::function<void(Tape&, int)> backprop;
  };

  Var push(Matrix value, std::function<void(Tape&, int)> backprop);
  void accumulate(int id, const Matrix& g);
  Node& node(int id) { return nodes_[id]; }

  std::vector<Node> nodes_;
};

}  // namespace uvkit::ad

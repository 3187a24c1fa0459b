#include "uvkit/autodiff.hpp"

#include <cmath>

#include "uvkit/error.hpp"

namespace uvkit::ad {

namespace {

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require(bool ok, const char* what) {
  if (!ok) throw_invariant(std::string("autodiff shape mismatch in ") + what);
}

}  // namespace

Var Tape::push(Matrix value, std::function<void(Tape&, int)> backprop) {
  nodes_.push_back(Node{std::move(value), Matrix(), false, std::move(backprop)});
  return Var{static_cast<int>(nodes_.size()) - 1};
}

void Tape::accumulate(int id, const Matrix& g) {
  Node& n = nodes_[id];
  if (!n.has_grad) {
    n.grad = g;
    n.has_grad = true;
  } else {
    n.grad += g;
  }
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.has_grad) return n.grad;
  return Matrix::Zero(n.value.rows(), n.value.cols());
}

Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::leaf(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::matmul(Var a, Var b) {
  require(value(a).cols() == value(b).rows(), "matmul");
  return push(value(a) * value(b), [a, b](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    t.accumulate(a.id, g * t.value(b).transpose());
    t.accumulate(b.id, t.value(a).transpose() * g);
  });
}

Var Tape::matmul_nt(Var a, Var b) {
  require(value(a).cols() == value(b).cols(), "matmul_nt");
  return push(value(a) * value(b).transpose(), [a, b](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    t.accumulate(a.id, g * t.value(b));
    t.accumulate(b.id, g.transpose() * t.value(a));
  });
}

Var Tape::add(Var a, Var b) {
  require(value(a).rows() == value(b).rows() && value(a).cols() == value(b).cols(), "add");
  return push(value(a) + value(b), [a, b](Tape& t, int self) {
    const Matrix g = t.node(self).grad;
    t.accumulate(a.id, g);
    t.accumulate(b.id, g);
  });
}

Var Tape::add_row(Var a, Var row) {
  require(value(row).rows() == 1 && value(row).cols() == value(a).cols(), "add_row");
  Matrix out = value(a);
  out.rowwise() += value(row).row(0);
  return push(std::move(out), [a, row](Tape& t, int self) {
    const Matrix g = t.node(self).grad;
    t.accumulate(a.id, g);
    t.accumulate(row.id, g.colwise().sum());
  });
}

Var Tape::scale(Var a, double s) {
  return push(value(a) * s, [a, s](Tape& t, int self) { t.accumulate(a.id, t.node(self).grad * s); });
}

Var Tape::silu(Var a) {
  const Matrix& x = value(a);
  Matrix out = x.unaryExpr([](double v) { return v * logistic(v); });
  return push(std::move(out), [a](Tape& t, int self) {
    const Matrix& x = t.value(a);
    const Matrix d = x.unaryExpr([](double v) {
      const double s = logistic(v);
      return s * (1.0 + v * (1.0 - s));
    });
    t.accumulate(a.id, t.node(self).grad.cwiseProduct(d));
  });
}

Var Tape::tanh(Var a) {
  Matrix out = value(a).array().tanh().matrix();
  return push(std::move(out), [a](Tape& t, int self) {
    const Matrix& y = t.node(self).value;
    t.accumulate(a.id, t.node(self).grad.cwiseProduct((1.0 - y.array().square()).matrix()));
  });
}

Var Tape::softmax_rows(Var a) {
  const Matrix& x = value(a);
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mx = x.row(r).maxCoeff();
    out.row(r) = (x.row(r).array() - mx).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return push(std::move(out), [a](Tape& t, int self) {
    const Matrix& y = t.node(self).value;
    const Matrix& g = t.node(self).grad;
    const Eigen::VectorXd dot = (g.cwiseProduct(y)).rowwise().sum();
    Matrix d = g;
    d.colwise() -= dot;
    t.accumulate(a.id, d.cwiseProduct(y));
  });
}

Var Tape::layer_norm(Var a, Var gamma, Var beta, double eps) {
  const Matrix& x = value(a);
  const Eigen::Index cols = x.cols();
  require(value(gamma).rows() == 1 && value(gamma).cols() == cols, "layer_norm gamma");
  require(value(beta).rows() == 1 && value(beta).cols() == cols, "layer_norm beta");
  Matrix xhat(x.rows(), cols);
  Eigen::VectorXd inv_std(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double mean = x.row(r).mean();
    const auto centered = (x.row(r).array() - mean).matrix();
    const double var = centered.squaredNorm() / static_cast<double>(cols);
    inv_std[r] = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = centered * inv_std[r];
  }
  Matrix out = xhat;
  out.array().rowwise() *= value(gamma).row(0).array();
  out.rowwise() += value(beta).row(0);
  return push(std::move(out), [a, gamma, beta, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    const double n = static_cast<double>(xhat.cols());
    Matrix dxhat = g;
    dxhat.array().rowwise() *= t.value(gamma).row(0).array();
    const Eigen::VectorXd mean_d = dxhat.rowwise().sum() / n;
    const Eigen::VectorXd mean_dx = dxhat.cwiseProduct(xhat).rowwise().sum() / n;
    Matrix dx = dxhat;
    dx.colwise() -= mean_d;
    dx -= xhat.cwiseProduct(mean_dx.replicate(1, xhat.cols()));
    dx.array().colwise() *= inv_std.array();
    t.accumulate(a.id, dx);
    t.accumulate(gamma.id, g.cwiseProduct(xhat).colwise().sum());
    t.accumulate(beta.id, g.colwise().sum());
  });
}

Var Tape::concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols");
  const Eigen::Index rows = value(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    require(value(p).rows() == rows, "concat_cols");
    cols += value(p).cols();
  }
  Matrix out(rows, cols);
  Eigen::Index offset = 0;
  for (Var p : parts) {
    out.middleCols(offset, value(p).cols()) = value(p);
    offset += value(p).cols();
  }
  std::vector<Var> ids(parts.begin(), parts.end());
  return push(std::move(out), [ids = std::move(ids)](Tape& t, int self) {
    const Matrix& g = t.node(self).grad;
    Eigen::Index offset = 0;
    for (Var p : ids) {
      const Eigen::Index c = t.value(p).cols();
      t.accumulate(p.id, g.middleCols(offset, c));
      offset += c;
    }
  });
}

Var Tape::slice_cols(Var a, int start, int count) {
  require(start >= 0 && start + count <= value(a).cols(), "slice_cols");
  return push(value(a).middleCols(start, count), [a, start, count](Tape& t, int self) {
    Matrix g = Matrix::Zero(t.value(a).rows(), t.value(a).cols());
    g.middleCols(start, count) = t.node(self).grad;
    t.accumulate(a.id, g);
  });
}

Var Tape::spmm(std::shared_ptr<const SparseMatrix> m, Var a) {
  require(m->cols() == value(a).rows(), "spmm");
  Matrix out = (*m) * value(a);
  return push(std::move(out), [m = std::move(m), a](Tape& t, int self) {
    t.accumulate(a.id, m->transpose() * t.node(self).grad);
  });
}

void Tape::backward(Var output, const Matrix& seed) {
  for (Node& n : nodes_) {
    n.has_grad = false;
    n.grad.resize(0, 0);
  }
  require(seed.rows() == value(output).rows() && seed.cols() == value(output).cols(), "backward seed");
  accumulate(output.id, seed);
  for (int id = output.id; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.has_grad && n.backprop) n.backprop(*this, id);
  }
}

}  // namespace uvkit::ad

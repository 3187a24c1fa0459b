#include <gtest/gtest.h>

#include <functional>

#include "oracles.hpp"
#include "uvkit/autodiff.hpp"
#include "uvkit/error.hpp"

using namespace uvkit;
using ad::Matrix;
using ad::Tape;
using ad::Var;

namespace {

using Builder = std::function<Var(Tape&, std::vector<Var>&)>;

Matrix random_matrix(Rng& rng, int r, int c) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = rng.uniform(-1.0, 1.0);
  return m;
}

// Checks every leaf gradient of L = Σ seed ∘ f(leaves) against central
// differences.
void check_vjp(const std::vector<Matrix>& inputs, const Builder& build, double tol = 1e-7) {
  Rng rng(99);
  Matrix seed;
  {
    Tape t;
    std::vector<Var> leaves;
    for (const Matrix& m : inputs) leaves.push_back(t.leaf(m));
    const Var out = build(t, leaves);
    seed = random_matrix(rng, static_cast<int>(t.value(out).rows()), static_cast<int>(t.value(out).cols()));
    t.backward(out, seed);
    for (std::size_t k = 0; k < inputs.size(); ++k) {
      auto f = [&](const Matrix& x) {
        Tape t2;
        std::vector<Var> l2;
        for (std::size_t j = 0; j < inputs.size(); ++j) l2.push_back(t2.leaf(j == k ? x : inputs[j]));
        return t2.value(build(t2, l2)).cwiseProduct(seed).sum();
      };
      const Matrix fd = oracle::fd_gradient(f, inputs[k]);
      EXPECT_LT(oracle::max_rel_error(t.grad(leaves[k]), fd), tol) << "input " << k;
    }
  }
}

}  // namespace

TEST(Autodiff, Matmul) {
  Rng rng(1);
  check_vjp({random_matrix(rng, 3, 4), random_matrix(rng, 4, 2)},
            [](Tape& t, std::vector<Var>& v) { return t.matmul(v[0], v[1]); });
}

TEST(Autodiff, MatmulTransposed) {
  Rng rng(2);
  check_vjp({random_matrix(rng, 3, 4), random_matrix(rng, 5, 4)},
            [](Tape& t, std::vector<Var>& v) { return t.matmul_nt(v[0], v[1]); });
}

TEST(Autodiff, AddAndBroadcastRow) {
  Rng rng(3);
  check_vjp({random_matrix(rng, 3, 4), random_matrix(rng, 3, 4), random_matrix(rng, 1, 4)},
            [](Tape& t, std::vector<Var>& v) { return t.add_row(t.add(v[0], v[1]), v[2]); });
}

TEST(Autodiff, ScaleSiluTanh) {
  Rng rng(4);
  check_vjp({random_matrix(rng, 4, 3)}, [](Tape& t, std::vector<Var>& v) { return t.scale(v[0], -2.5); });
  check_vjp({random_matrix(rng, 4, 3)}, [](Tape& t, std::vector<Var>& v) { return t.silu(v[0]); });
  check_vjp({random_matrix(rng, 4, 3)}, [](Tape& t, std::vector<Var>& v) { return t.tanh(v[0]); });
}

TEST(Autodiff, SoftmaxRows) {
  Rng rng(5);
  check_vjp({random_matrix(rng, 4, 6)}, [](Tape& t, std::vector<Var>& v) { return t.softmax_rows(v[0]); });
}

TEST(Autodiff, LayerNorm) {
  Rng rng(6);
  check_vjp({random_matrix(rng, 5, 6), random_matrix(rng, 1, 6), random_matrix(rng, 1, 6)},
            [](Tape& t, std::vector<Var>& v) { return t.layer_norm(v[0], v[1], v[2]); }, 1e-6);
}

TEST(Autodiff, ConcatAndSlice) {
  Rng rng(7);
  check_vjp({random_matrix(rng, 3, 2), random_matrix(rng, 3, 4)}, [](Tape& t, std::vector<Var>& v) {
    const std::vector<Var> parts = {v[0], v[1]};
    return t.slice_cols(t.concat_cols(parts), 1, 4);
  });
}

TEST(Autodiff, SparseLeftMultiply) {
  Rng rng(8);
  auto s = std::make_shared<ad::SparseMatrix>(4, 3);
  s->insert(0, 1) = 0.5;
  s->insert(1, 0) = -1.0;
  s->insert(2, 2) = 2.0;
  s->insert(3, 1) = 0.25;
  s->insert(3, 2) = 0.75;
  s->makeCompressed();
  std::shared_ptr<const ad::SparseMatrix> cs = s;
  check_vjp({random_matrix(rng, 3, 2)}, [cs](Tape& t, std::vector<Var>& v) { return t.spmm(cs, v[0]); });
}

TEST(Autodiff, SharedSubexpressionAccumulates) {
  Rng rng(9);
  check_vjp({random_matrix(rng, 3, 3)}, [](Tape& t, std::vector<Var>& v) {
    const Var y = t.silu(v[0]);
    return t.add(t.matmul(y, y), t.scale(v[0], 3.0));
  });
}

TEST(Autodiff, LinearLayerExact) {
  // y = xW + b with L = Σ G∘y: ∂L/∂W = xᵀG, ∂L/∂b = 1ᵀG, ∂L/∂x = G Wᵀ.
  Rng rng(10);
  const Matrix x = random_matrix(rng, 4, 3);
  const Matrix w = random_matrix(rng, 3, 2);
  const Matrix b = random_matrix(rng, 1, 2);
  const Matrix g = random_matrix(rng, 4, 2);
  Tape t;
  const Var vx = t.leaf(x), vw = t.leaf(w), vb = t.leaf(b);
  const Var y = t.add_row(t.matmul(vx, vw), vb);
  t.backward(y, g);
  EXPECT_LT((t.grad(vw) - x.transpose() * g).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((t.grad(vb) - g.colwise().sum()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((t.grad(vx) - g * w.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Autodiff, ConstantsReceiveNoGradientAndShapesChecked) {
  Tape t;
  const Var c = t.constant(Matrix::Ones(2, 2));
  const Var l = t.leaf(Matrix::Ones(2, 3));
  EXPECT_THROW((void)t.matmul(l, c), Error);
  const Var y = t.matmul(c, l);
  t.backward(y, Matrix::Zero(2, 3));
  EXPECT_EQ(t.grad(l), Matrix::Zero(2, 3));
}

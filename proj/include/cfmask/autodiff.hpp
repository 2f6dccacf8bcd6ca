//
// Project cfmask - Copyright 2026 cfmask developers.
// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode automatic differentiation over dense matrices. A
// Tape records ops during the forward pass; backward() runs the adjoint
// sweep in reverse order. Desk-scale graphs only: no views, no broadcasting
// beyond what the listed ops provide.

#ifndef CFMASK_AUTODIFF_HPP
#define CFMASK_AUTODIFF_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfmask::ad {

struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

  static Matrix zeros(int r, int c) { return Matrix(r, c); }

  double& operator()(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

  std::size_t size() const { return v.size(); }
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::invalid_argument("matmul shape mismatch");
  Matrix c(a.rows, b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = &b.v[static_cast<std::size_t>(k) * b.cols];
      double* crow = &c.v[static_cast<std::size_t>(i) * c.cols];
      for (int j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

inline Matrix matmul_at_b(const Matrix& a, const Matrix& b) {  // a^T * b
  if (a.rows != b.rows) throw std::invalid_argument("matmul_at_b shape mismatch");
  Matrix c(a.cols, b.cols);
  for (int k = 0; k < a.rows; ++k) {
    const double* arow = &a.v[static_cast<std::size_t>(k) * a.cols];
    const double* brow = &b.v[static_cast<std::size_t>(k) * b.cols];
    for (int i = 0; i < a.cols; ++i) {
      double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = &c.v[static_cast<std::size_t>(i) * c.cols];
      for (int j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

inline Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {  // a * b^T
  if (a.cols != b.cols) throw std::invalid_argument("matmul_a_bt shape mismatch");
  Matrix c(a.rows, b.rows);
  for (int i = 0; i < a.rows; ++i) {
    const double* arow = &a.v[static_cast<std::size_t>(i) * a.cols];
    for (int j = 0; j < b.rows; ++j) {
      const double* brow = &b.v[static_cast<std::size_t>(j) * b.cols];
      double s = 0.0;
      for (int k = 0; k < a.cols; ++k) s += arow[k] * brow[k];
      c(i, j) = s;
    }
  }
  return c;
}

class Tape {
 public:
  using Id = int;

  enum class Op {
    Leaf,
    MatMul,
    Add,
    AddRowVec,   // (n x c) + (1 x c), bias broadcast down rows
    AddOuter,    // (n x 1), (m x 1) -> (n x m): S_ij = a_i + b_j
    Sub,
    Hadamard,
    MulCol,      // (n x c) * (n x 1), column vector broadcast across cols
    Scale,
    Relu,
    LeakyRelu,
    Sigmoid,
    RowMean,     // (n x c) -> (1 x c)
    RowSum,      // (n x c) -> (1 x c)
    TotalSum,    // (n x c) -> (1 x 1)
    MaskedRowSoftmax,
    ConcatCols,     // (n x ca), (n x cb) -> (n x ca+cb)
    BinaryEntropy,  // elementwise -[m ln m + (1-m) ln(1-m)]
    BceWithLogit,   // (1 x 1) logit vs scalar target
    MseLoss,
    SmoothL1Loss,
  };

  struct Node {
    Op op = Op::Leaf;
    Id a = -1;
    Id b = -1;
    double aux = 0.0;   // scale factor, slope, or loss target
    Matrix value;
    Matrix grad;
    Matrix mask;        // MaskedRowSoftmax only
  };

  std::vector<Node> nodes;

  Id leaf(Matrix value) {
    nodes.push_back({Op::Leaf, -1, -1, 0.0, std::move(value), {}, {}});
    return last();
  }

  Id matmul(Id a, Id b) { return push(Op::MatMul, a, b, ad::matmul(val(a), val(b))); }

  Id add(Id a, Id b) {
    check_same_shape(a, b);
    Matrix out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += val(b).v[i];
    return push(Op::Add, a, b, std::move(out));
  }

  Id add_rowvec(Id a, Id bias) {
    const Matrix& x = val(a);
    const Matrix& r = val(bias);
    if (r.rows != 1 || r.cols != x.cols) throw std::invalid_argument("add_rowvec shape");
    Matrix out = x;
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) out(i, j) += r(0, j);
    return push(Op::AddRowVec, a, bias, std::move(out));
  }

  Id add_outer(Id a, Id b) {
    const Matrix& x = val(a);
    const Matrix& y = val(b);
    if (x.cols != 1 || y.cols != 1) throw std::invalid_argument("add_outer expects columns");
    Matrix out(x.rows, y.rows);
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < y.rows; ++j) out(i, j) = x(i, 0) + y(j, 0);
    return push(Op::AddOuter, a, b, std::move(out));
  }

  Id sub(Id a, Id b) {
    check_same_shape(a, b);
    Matrix out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] -= val(b).v[i];
    return push(Op::Sub, a, b, std::move(out));
  }

  Id hadamard(Id a, Id b) {
    check_same_shape(a, b);
    Matrix out = val(a);
    for (std::size_t i = 0; i < out.size(); ++i) out.v[i] *= val(b).v[i];
    return push(Op::Hadamard, a, b, std::move(out));
  }

  Id mul_col(Id a, Id col) {
    const Matrix& x = val(a);
    const Matrix& m = val(col);
    if (m.cols != 1 || m.rows != x.rows) throw std::invalid_argument("mul_col shape");
    Matrix out = x;
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) out(i, j) *= m(i, 0);
    return push(Op::MulCol, a, col, std::move(out));
  }

  Id scale(Id a, double c) {
    Matrix out = val(a);
    for (double& x : out.v) x *= c;
    Id id = push(Op::Scale, a, -1, std::move(out));
    nodes[id].aux = c;
    return id;
  }

  Id relu(Id a) {
    Matrix out = val(a);
    for (double& x : out.v) x = x > 0.0 ? x : 0.0;
    return push(Op::Relu, a, -1, std::move(out));
  }

  Id leaky_relu(Id a, double slope) {
    Matrix out = val(a);
    for (double& x : out.v) x = x > 0.0 ? x : slope * x;
    Id id = push(Op::LeakyRelu, a, -1, std::move(out));
    nodes[id].aux = slope;
    return id;
  }

  Id sigmoid(Id a) {
    Matrix out = val(a);
    for (double& x : out.v) x = 1.0 / (1.0 + std::exp(-x));
    return push(Op::Sigmoid, a, -1, std::move(out));
  }

  Id row_mean(Id a) {
    const Matrix& x = val(a);
    Matrix out(1, x.cols);
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) out(0, j) += x(i, j);
    if (x.rows > 0)
      for (double& v : out.v) v /= x.rows;
    return push(Op::RowMean, a, -1, std::move(out));
  }

  Id row_sum(Id a) {
    const Matrix& x = val(a);
    Matrix out(1, x.cols);
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) out(0, j) += x(i, j);
    return push(Op::RowSum, a, -1, std::move(out));
  }

  Id total_sum(Id a) {
    const Matrix& x = val(a);
    Matrix out(1, 1);
    for (double v : x.v) out(0, 0) += v;
    return push(Op::TotalSum, a, -1, std::move(out));
  }

  // Row-wise softmax over entries where mask != 0; masked-out entries are 0.
  Id masked_row_softmax(Id a, Matrix mask) {
    const Matrix& x = val(a);
    if (mask.rows != x.rows || mask.cols != x.cols)
      throw std::invalid_argument("softmax mask shape");
    Matrix out(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i) {
      double mx = -1e300;
      for (int j = 0; j < x.cols; ++j)
        if (mask(i, j) != 0.0) mx = std::max(mx, x(i, j));
      double z = 0.0;
      for (int j = 0; j < x.cols; ++j)
        if (mask(i, j) != 0.0) z += std::exp(x(i, j) - mx);
      if (z <= 0.0) continue;  // fully masked row stays zero
      for (int j = 0; j < x.cols; ++j)
        if (mask(i, j) != 0.0) out(i, j) = std::exp(x(i, j) - mx) / z;
    }
    Id id = push(Op::MaskedRowSoftmax, a, -1, std::move(out));
    nodes[id].mask = std::move(mask);
    return id;
  }

  Id concat_cols(Id a, Id b) {
    const Matrix& x = val(a);
    const Matrix& y = val(b);
    if (x.rows != y.rows) throw std::invalid_argument("concat_cols row mismatch");
    Matrix out(x.rows, x.cols + y.cols);
    for (int i = 0; i < x.rows; ++i) {
      for (int j = 0; j < x.cols; ++j) out(i, j) = x(i, j);
      for (int j = 0; j < y.cols; ++j) out(i, x.cols + j) = y(i, j);
    }
    return push(Op::ConcatCols, a, b, std::move(out));
  }

  Id binary_entropy(Id a) {
    Matrix out = val(a);
    for (double& x : out.v) {
      double m = std::clamp(x, 1e-12, 1.0 - 1e-12);
      x = -(m * std::log(m) + (1.0 - m) * std::log(1.0 - m));
    }
    return push(Op::BinaryEntropy, a, -1, std::move(out));
  }

  Id bce_with_logit(Id logit, double target) {
    check_scalar(logit);
    double z = val(logit)(0, 0);
    Matrix out(1, 1);
    out(0, 0) = std::max(z, 0.0) - target * z + std::log1p(std::exp(-std::abs(z)));
    Id id = push(Op::BceWithLogit, logit, -1, std::move(out));
    nodes[id].aux = target;
    return id;
  }

  Id mse_loss(Id pred, double target) {
    check_scalar(pred);
    double e = val(pred)(0, 0) - target;
    Matrix out(1, 1);
    out(0, 0) = e * e;
    Id id = push(Op::MseLoss, pred, -1, std::move(out));
    nodes[id].aux = target;
    return id;
  }

  // Quadratic inside |e| < 1, linear outside (beta = 1).
  Id smooth_l1_loss(Id pred, double target) {
    check_scalar(pred);
    double e = val(pred)(0, 0) - target;
    Matrix out(1, 1);
    out(0, 0) = std::abs(e) < 1.0 ? 0.5 * e * e : std::abs(e) - 0.5;
    Id id = push(Op::SmoothL1Loss, pred, -1, std::move(out));
    nodes[id].aux = target;
    return id;
  }

  const Matrix& value(Id id) const { return nodes[id].value; }
  const Matrix& grad(Id id) const { return nodes[id].grad; }

  void backward(Id root) {
    check_scalar(root);
    for (Node& n : nodes) n.grad = Matrix(n.value.rows, n.value.cols);
    nodes[root].grad(0, 0) = 1.0;
    for (Id id = root; id >= 0; --id) propagate(id);
  }

 private:
  Id last() const { return static_cast<Id>(nodes.size()) - 1; }

  Id push(Op op, Id a, Id b, Matrix value) {
    nodes.push_back({op, a, b, 0.0, std::move(value), {}, {}});
    return last();
  }

  const Matrix& val(Id id) const { return nodes[id].value; }

  void check_same_shape(Id a, Id b) const {
    if (val(a).rows != val(b).rows || val(a).cols != val(b).cols)
      throw std::invalid_argument("shape mismatch");
  }

  void check_scalar(Id a) const {
    if (val(a).rows != 1 || val(a).cols != 1) throw std::invalid_argument("expected 1x1");
  }

  void propagate(Id id) {
    Node& n = nodes[id];
    const Matrix& g = n.grad;
    bool all_zero = true;
    for (double x : g.v)
      if (x != 0.0) {
        all_zero = false;
        break;
      }
    if (all_zero) return;
    switch (n.op) {
      case Op::Leaf: break;
      case Op::MatMul: {
        Matrix& ga = nodes[n.a].grad;
        Matrix da = matmul_a_bt(g, val(n.b));
        for (std::size_t i = 0; i < ga.size(); ++i) ga.v[i] += da.v[i];
        Matrix& gb = nodes[n.b].grad;
        Matrix db = matmul_at_b(val(n.a), g);
        for (std::size_t i = 0; i < gb.size(); ++i) gb.v[i] += db.v[i];
        break;
      }
      case Op::Add: {
        accum(n.a, g);
        accum(n.b, g);
        break;
      }
      case Op::AddRowVec: {
        accum(n.a, g);
        Matrix& gb = nodes[n.b].grad;
        for (int i = 0; i < g.rows; ++i)
          for (int j = 0; j < g.cols; ++j) gb(0, j) += g(i, j);
        break;
      }
      case Op::AddOuter: {
        Matrix& ga = nodes[n.a].grad;
        Matrix& gb = nodes[n.b].grad;
        for (int i = 0; i < g.rows; ++i)
          for (int j = 0; j < g.cols; ++j) {
            ga(i, 0) += g(i, j);
            gb(j, 0) += g(i, j);
          }
        break;
      }
      case Op::Sub: {
        accum(n.a, g);
        Matrix& gb = nodes[n.b].grad;
        for (std::size_t i = 0; i < gb.size(); ++i) gb.v[i] -= g.v[i];
        break;
      }
      case Op::Hadamard: {
        Matrix& ga = nodes[n.a].grad;
        Matrix& gb = nodes[n.b].grad;
        const Matrix& av = val(n.a);
        const Matrix& bv = val(n.b);
        for (std::size_t i = 0; i < ga.size(); ++i) {
          ga.v[i] += g.v[i] * bv.v[i];
          gb.v[i] += g.v[i] * av.v[i];
        }
        break;
      }
      case Op::MulCol: {
        Matrix& ga = nodes[n.a].grad;
        Matrix& gcol = nodes[n.b].grad;
        const Matrix& av = val(n.a);
        const Matrix& m = val(n.b);
        for (int i = 0; i < g.rows; ++i)
          for (int j = 0; j < g.cols; ++j) {
            ga(i, j) += g(i, j) * m(i, 0);
            gcol(i, 0) += g(i, j) * av(i, j);
          }
        break;
      }
      case Op::Scale: {
        Matrix& ga = nodes[n.a].grad;
        for (std::size_t i = 0; i < ga.size(); ++i) ga.v[i] += n.aux * g.v[i];
        break;
      }
      case Op::Relu: {
        Matrix& ga = nodes[n.a].grad;
        const Matrix& av = val(n.a);
        for (std::size_t i = 0; i < ga.size(); ++i) ga.v[i] += av.v[i] > 0.0 ? g.v[i] : 0.0;
        break;
      }
      case Op::LeakyRelu: {
        Matrix& ga = nodes[n.a].grad;
        const Matrix& av = val(n.a);
        for (std::size_t i = 0; i < ga.size(); ++i)
          ga.v[i] += av.v[i] > 0.0 ? g.v[i] : n.aux * g.v[i];
        break;
      }
      case Op::Sigmoid: {
        Matrix& ga = nodes[n.a].grad;
        for (std::size_t i = 0; i < ga.size(); ++i) {
          double s = n.value.v[i];
          ga.v[i] += g.v[i] * s * (1.0 - s);
        }
        break;
      }
      case Op::RowMean: {
        Matrix& ga = nodes[n.a].grad;
        double inv = ga.rows > 0 ? 1.0 / ga.rows : 0.0;
        for (int i = 0; i < ga.rows; ++i)
          for (int j = 0; j < ga.cols; ++j) ga(i, j) += g(0, j) * inv;
        break;
      }
      case Op::RowSum: {
        Matrix& ga = nodes[n.a].grad;
        for (int i = 0; i < ga.rows; ++i)
          for (int j = 0; j < ga.cols; ++j) ga(i, j) += g(0, j);
        break;
      }
      case Op::TotalSum: {
        Matrix& ga = nodes[n.a].grad;
        for (double& x : ga.v) x += g(0, 0);
        break;
      }
      case Op::ConcatCols: {
        Matrix& ga = nodes[n.a].grad;
        Matrix& gb = nodes[n.b].grad;
        for (int i = 0; i < g.rows; ++i) {
          for (int j = 0; j < ga.cols; ++j) ga(i, j) += g(i, j);
          for (int j = 0; j < gb.cols; ++j) gb(i, j) += g(i, ga.cols + j);
        }
        break;
      }
      case Op::MaskedRowSoftmax: {
        Matrix& ga = nodes[n.a].grad;
        const Matrix& p = n.value;
        for (int i = 0; i < p.rows; ++i) {
          double dot = 0.0;
          for (int j = 0; j < p.cols; ++j) dot += g(i, j) * p(i, j);
          for (int j = 0; j < p.cols; ++j)
            if (n.mask(i, j) != 0.0) ga(i, j) += p(i, j) * (g(i, j) - dot);
        }
        break;
      }
      case Op::BinaryEntropy: {
        Matrix& ga = nodes[n.a].grad;
        const Matrix& av = val(n.a);
        for (std::size_t i = 0; i < ga.size(); ++i) {
          double m = std::clamp(av.v[i], 1e-12, 1.0 - 1e-12);
          ga.v[i] += g.v[i] * (-std::log(m / (1.0 - m)));
        }
        break;
      }
      case Op::BceWithLogit: {
        double z = val(n.a)(0, 0);
        double s = 1.0 / (1.0 + std::exp(-z));
        nodes[n.a].grad(0, 0) += g(0, 0) * (s - n.aux);
        break;
      }
      case Op::MseLoss: {
        double e = val(n.a)(0, 0) - n.aux;
        nodes[n.a].grad(0, 0) += g(0, 0) * 2.0 * e;
        break;
      }
      case Op::SmoothL1Loss: {
        double e = val(n.a)(0, 0) - n.aux;
        nodes[n.a].grad(0, 0) += g(0, 0) * std::clamp(e, -1.0, 1.0);
        break;
      }
    }
  }

  void accum(Id target, const Matrix& g) {
    Matrix& t = nodes[target].grad;
    for (std::size_t i = 0; i < t.size(); ++i) t.v[i] += g.v[i];
  }
};

}  // namespace cfmask::ad

#endif  // CFMASK_AUTODIFF_HPP

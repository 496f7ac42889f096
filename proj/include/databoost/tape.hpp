// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Minimal reverse-mode differentiation over row-major matrices. It covers
// the transformer forward pass (training and cached decoding) and the
// guided-decoding reward: softmax, dot products, logs, sums, cosine
// similarity against a lexicon, and KL divergence. Nothing else.

#include <cstddef>
#include <functional>
#include <utility>
#include <vector>

#include "databoost/matrix.hpp"

namespace databoost::ad {

struct Var {
    std::size_t id = static_cast<std::size_t>(-1);
};

/// Half-open range of key rows visible to one query row.
struct KeyRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};

class Tape {
  public:
    /// With record = false no backward closures are kept (inference mode).
    explicit Tape(bool record = true) : record_(record) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    /// Value that never receives a gradient.
    Var constant(Matrix value);
    /// Constant that references caller-owned storage; must outlive the tape.
    Var constant_ref(const Matrix& value);
    /// Owned value whose gradient can be read back with grad().
    Var leaf(Matrix value);
    /// Caller-owned value; gradients accumulate into *grad_sink (if non-null).
    Var param(const Matrix& value, Matrix* grad_sink);

    const Matrix& value(Var v) const;
    /// Gradient of the last backward() output w.r.t. v (zeros if unreached).
    Matrix grad(Var v) const;
    std::size_t size() const { return nodes_.size(); }

    /// Reverse sweep seeded with d(out)/d(out) = 1; out must be 1x1.
    void backward(Var out);

    // ---- linear algebra
    Var matmul_nt(Var a, Var b);  // a (m x k) * b^T, b is n x k
    Var matmul_nn(Var a, Var b);  // a (m x k) * b, b is k x n
    Var add(Var a, Var b);
    Var add_row(Var a, Var row);  // broadcast a 1 x n row over a
    Var gather_rows(Var table, std::vector<std::size_t> rows);
    Var scale(Var x, double s);
    Var affine(Var x, double a, double b);  // a * x + b elementwise
    Var mul(Var a, Var b);                  // elementwise, same shape
    Var mul_const(Var x, std::vector<double> c);

    // ---- network layers
    Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);
    Var gelu(Var x);
    /// Multi-head scaled dot-product attention; query row i attends to key
    /// rows ranges[i].
    Var attention(Var q, Var k, Var v, std::size_t heads, std::vector<KeyRange> ranges);
    Var softmax_rows(Var x, double temperature);
    /// Mean negative log-likelihood of targets under row-wise softmax(logits).
    Var cross_entropy(Var logits, const std::vector<std::size_t>& targets);

    // ---- reductions and reward pieces
    Var log(Var x);
    Var sum(Var x);
    /// Entries of row 0 at `cols` as a 1 x n row.
    Var gather_cols(Var x, std::vector<std::size_t> cols);
    /// Cosine similarity of the 1 x d row x against each row of m (n x d).
    Var cosine_rows(Var x, Var m);
    /// sum_rows sum_j p log(p / max(q, floor)), with 0 log 0 = 0.
    Var kl(Var p, Var q, double floor);
    /// <x, c> over all entries.
    Var frobenius_dot(Var x, const Matrix& c);

  private:
    struct Node {
        Matrix value;
        const Matrix* external = nullptr;
        Matrix grad;
        Matrix* grad_sink = nullptr;
        bool needs_grad = false;
        std::function<void(Tape&, std::size_t)> backward;
    };

    Var push(Matrix value, bool needs_grad, std::function<void(Tape&, std::size_t)> backward);
    bool needs(Var v) const { return nodes_[v.id].needs_grad; }
    bool any_needs(std::initializer_list<Var> vs) const;
    /// Gradient accumulator for v, allocated on first use.
    Matrix& grad_ref(std::size_t id);
    const Matrix& out_grad(std::size_t id) const { return nodes_[id].grad; }

    std::vector<Node> nodes_;
    bool record_;
};

}  // namespace databoost::ad

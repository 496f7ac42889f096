// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "databoost/error.hpp"
#include "databoost/kernels.hpp"

namespace databoost::ad {

namespace kn = databoost::kernels;

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::kInvalidArgument, std::string("tape: ") + what);
}

}  // namespace

Var Tape::push(Matrix value, bool needs_grad, std::function<void(Tape&, std::size_t)> backward) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs_grad && record_;
    if (n.needs_grad) n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

bool Tape::any_needs(std::initializer_list<Var> vs) const {
    if (!record_) return false;
    for (Var v : vs) {
        if (nodes_[v.id].needs_grad) return true;
    }
    return false;
}

Matrix& Tape::grad_ref(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad_sink) return *n.grad_sink;
    if (n.grad.size() != value(Var{id}).size()) {
        const Matrix& v = value(Var{id});
        n.grad = Matrix(v.rows, v.cols);
    }
    return n.grad;
}

Var Tape::constant(Matrix value) { return push(std::move(value), false, nullptr); }

Var Tape::constant_ref(const Matrix& value) {
    Node n;
    n.external = &value;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::leaf(Matrix value) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = record_;
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::param(const Matrix& value, Matrix* grad_sink) {
    Node n;
    n.external = &value;
    n.grad_sink = grad_sink;
    n.needs_grad = record_ && grad_sink != nullptr;
    if (grad_sink) require(grad_sink->same_shape(value), "grad sink shape");
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

const Matrix& Tape::value(Var v) const {
    const Node& n = nodes_.at(v.id);
    return n.external ? *n.external : n.value;
}

Matrix Tape::grad(Var v) const {
    const Node& n = nodes_.at(v.id);
    const Matrix& val = value(v);
    if (n.grad.size() == val.size()) return n.grad;
    return Matrix(val.rows, val.cols);
}

void Tape::backward(Var out) {
    require(record_, "backward on a non-recording tape");
    require(value(out).size() == 1, "backward output must be scalar");
    for (auto& n : nodes_) {
        if (!n.grad_sink) n.grad = Matrix();
    }
    if (!nodes_[out.id].needs_grad) return;
    grad_ref(out.id).data[0] += 1.0;
    for (std::size_t id = out.id + 1; id-- > 0;) {
        Node& n = nodes_[id];
        if (!n.needs_grad || !n.backward || n.grad.size() == 0) continue;
        n.backward(*this, id);
    }
}

// ------------------------------------------------------------------ linear algebra

Var Tape::matmul_nt(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    require(A.cols == B.cols, "matmul_nt shape");
    Matrix out(A.rows, B.rows);
    kn::gemm_nt(A.data.data(), B.data.data(), out.data.data(), A.rows, B.rows, A.cols);
    return push(std::move(out), any_needs({a, b}), [a, b](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        const Matrix& A = t.value(a);
        const Matrix& B = t.value(b);
        if (t.needs(a)) kn::gemm_nn(g.data.data(), B.data.data(), t.grad_ref(a.id).data.data(), A.rows, A.cols, B.rows);
        if (t.needs(b)) kn::gemm_tn(g.data.data(), A.data.data(), t.grad_ref(b.id).data.data(), B.rows, A.cols, A.rows);
    });
}

Var Tape::matmul_nn(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    require(A.cols == B.rows, "matmul_nn shape");
    Matrix out(A.rows, B.cols);
    kn::gemm_nn(A.data.data(), B.data.data(), out.data.data(), A.rows, B.cols, A.cols);
    return push(std::move(out), any_needs({a, b}), [a, b](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        const Matrix& A = t.value(a);
        const Matrix& B = t.value(b);
        // dA = g * B^T, dB = A^T * g
        if (t.needs(a)) kn::gemm_nt(g.data.data(), B.data.data(), t.grad_ref(a.id).data.data(), A.rows, A.cols, B.cols);
        if (t.needs(b)) kn::gemm_tn(A.data.data(), g.data.data(), t.grad_ref(b.id).data.data(), A.cols, B.cols, A.rows);
    });
}

Var Tape::add(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    require(A.same_shape(B), "add shape");
    Matrix out = A;
    kn::active_table().axpy(1.0, B.data.data(), out.data.data(), out.size());
    return push(std::move(out), any_needs({a, b}), [a, b](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        for (Var v : {a, b}) {
            if (t.needs(v)) kn::active_table().axpy(1.0, g.data.data(), t.grad_ref(v.id).data.data(), g.size());
        }
    });
}

Var Tape::add_row(Var a, Var row) {
    const Matrix& A = value(a);
    const Matrix& R = value(row);
    require(R.rows == 1 && R.cols == A.cols, "add_row shape");
    Matrix out = A;
    for (std::size_t r = 0; r < out.rows; ++r) kn::active_table().axpy(1.0, R.data.data(), out.row(r).data(), out.cols);
    return push(std::move(out), any_needs({a, row}), [a, row](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        if (t.needs(a)) kn::active_table().axpy(1.0, g.data.data(), t.grad_ref(a.id).data.data(), g.size());
        if (t.needs(row)) {
            Matrix& gr = t.grad_ref(row.id);
            for (std::size_t r = 0; r < g.rows; ++r) kn::active_table().axpy(1.0, g.row(r).data(), gr.data.data(), g.cols);
        }
    });
}

Var Tape::gather_rows(Var table, std::vector<std::size_t> rows) {
    const Matrix& T = value(table);
    Matrix out(rows.size(), T.cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        require(rows[i] < T.rows, "gather_rows index");
        std::copy_n(T.row(rows[i]).data(), T.cols, out.row(i).data());
    }
    return push(std::move(out), any_needs({table}), [table, rows = std::move(rows)](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        Matrix& gt = t.grad_ref(table.id);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            kn::active_table().axpy(1.0, g.row(i).data(), gt.row(rows[i]).data(), g.cols);
        }
    });
}

Var Tape::scale(Var x, double s) { return affine(x, s, 0.0); }

Var Tape::affine(Var x, double a, double b) {
    Matrix out = value(x);
    for (double& v : out.data) v = a * v + b;
    return push(std::move(out), any_needs({x}), [x, a](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        kn::active_table().axpy(a, g.data.data(), t.grad_ref(x.id).data.data(), g.size());
    });
}

Var Tape::mul(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    require(A.same_shape(B), "mul shape");
    Matrix out(A.rows, A.cols);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = A.data[i] * B.data[i];
    return push(std::move(out), any_needs({a, b}), [a, b](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        const Matrix& A = t.value(a);
        const Matrix& B = t.value(b);
        if (t.needs(a)) {
            Matrix& ga = t.grad_ref(a.id);
            for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i] * B.data[i];
        }
        if (t.needs(b)) {
            Matrix& gb = t.grad_ref(b.id);
            for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i] * A.data[i];
        }
    });
}

Var Tape::mul_const(Var x, std::vector<double> c) {
    const Matrix& X = value(x);
    require(c.size() == X.size(), "mul_const shape");
    Matrix out(X.rows, X.cols);
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = X.data[i] * c[i];
    return push(std::move(out), any_needs({x}), [x, c = std::move(c)](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        Matrix& gx = t.grad_ref(x.id);
        for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += g.data[i] * c[i];
    });
}

// ------------------------------------------------------------------ layers

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
    const Matrix& X = value(x);
    const Matrix& G = value(gain);
    const Matrix& B = value(bias);
    require(G.size() == X.cols && B.size() == X.cols, "layer_norm shape");
    const std::size_t n = X.cols;
    Matrix out(X.rows, n);
    Matrix xhat(X.rows, n);
    std::vector<double> inv_std(X.rows);
    for (std::size_t r = 0; r < X.rows; ++r) {
        const auto xr = X.row(r);
        double mean = 0.0;
        for (double v : xr) mean += v;
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (double v : xr) var += (v - mean) * (v - mean);
        var /= static_cast<double>(n);
        inv_std[r] = 1.0 / std::sqrt(var + eps);
        for (std::size_t j = 0; j < n; ++j) {
            xhat(r, j) = (xr[j] - mean) * inv_std[r];
            out(r, j) = xhat(r, j) * G.data[j] + B.data[j];
        }
    }
    return push(std::move(out), any_needs({x, gain, bias}),
                [x, gain, bias, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape& t, std::size_t id) {
                    const Matrix& g = t.out_grad(id);
                    const Matrix& G = t.value(gain);
                    const std::size_t n = g.cols;
                    if (t.needs(gain)) {
                        Matrix& gg = t.grad_ref(gain.id);
                        for (std::size_t r = 0; r < g.rows; ++r)
                            for (std::size_t j = 0; j < n; ++j) gg.data[j] += g(r, j) * xhat(r, j);
                    }
                    if (t.needs(bias)) {
                        Matrix& gb = t.grad_ref(bias.id);
                        for (std::size_t r = 0; r < g.rows; ++r)
                            for (std::size_t j = 0; j < n; ++j) gb.data[j] += g(r, j);
                    }
                    if (t.needs(x)) {
                        Matrix& gx = t.grad_ref(x.id);
                        std::vector<double> dxhat(n);
                        for (std::size_t r = 0; r < g.rows; ++r) {
                            double mean_d = 0.0, mean_dx = 0.0;
                            for (std::size_t j = 0; j < n; ++j) {
                                dxhat[j] = g(r, j) * G.data[j];
                                mean_d += dxhat[j];
                                mean_dx += dxhat[j] * xhat(r, j);
                            }
                            mean_d /= static_cast<double>(n);
                            mean_dx /= static_cast<double>(n);
                            for (std::size_t j = 0; j < n; ++j) {
                                gx(r, j) += inv_std[r] * (dxhat[j] - mean_d - xhat(r, j) * mean_dx);
                            }
                        }
                    }
                });
}

Var Tape::gelu(Var x) {
    constexpr double kC = 0.7978845608028654;  // sqrt(2/pi)
    constexpr double kA = 0.044715;
    Matrix out = value(x);
    for (double& v : out.data) v = 0.5 * v * (1.0 + std::tanh(kC * (v + kA * v * v * v)));
    return push(std::move(out), any_needs({x}), [x](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        const Matrix& X = t.value(x);
        Matrix& gx = t.grad_ref(x.id);
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double v = X.data[i];
            const double th = std::tanh(kC * (v + kA * v * v * v));
            const double d = 0.5 * (1.0 + th) + 0.5 * v * (1.0 - th * th) * kC * (1.0 + 3.0 * kA * v * v);
            gx.data[i] += g.data[i] * d;
        }
    });
}

Var Tape::attention(Var q, Var k, Var v, std::size_t heads, std::vector<KeyRange> ranges) {
    const Matrix& Q = value(q);
    const Matrix& K = value(k);
    const Matrix& V = value(v);
    require(K.same_shape(V) && K.cols == Q.cols, "attention shape");
    require(heads > 0 && Q.cols % heads == 0, "attention heads");
    require(ranges.size() == Q.rows, "attention ranges");
    const std::size_t hd = Q.cols / heads;
    const double sc = 1.0 / std::sqrt(static_cast<double>(hd));
    const auto& kt = kn::active_table();
    Matrix out(Q.rows, Q.cols);
    // probs[(i * heads + h)] holds the softmax weights over ranges[i].
    std::vector<std::vector<double>> probs(Q.rows * heads);
    for (std::size_t i = 0; i < Q.rows; ++i) {
        const KeyRange rg = ranges[i];
        require(rg.begin < rg.end && rg.end <= K.rows, "attention key range");
        for (std::size_t h = 0; h < heads; ++h) {
            auto& p = probs[i * heads + h];
            p.resize(rg.end - rg.begin);
            const double* qi = Q.row(i).data() + h * hd;
            double mx = -INFINITY;
            for (std::size_t j = rg.begin; j < rg.end; ++j) {
                p[j - rg.begin] = sc * kt.dot(qi, K.row(j).data() + h * hd, hd);
                mx = std::max(mx, p[j - rg.begin]);
            }
            double z = 0.0;
            for (double& s : p) {
                s = std::exp(s - mx);
                z += s;
            }
            double* oi = out.row(i).data() + h * hd;
            for (std::size_t j = rg.begin; j < rg.end; ++j) {
                double& w = p[j - rg.begin];
                w /= z;
                kt.axpy(w, V.row(j).data() + h * hd, oi, hd);
            }
        }
    }
    return push(std::move(out), any_needs({q, k, v}),
                [q, k, v, heads, hd, sc, ranges = std::move(ranges), probs = std::move(probs)](Tape& t, std::size_t id) {
                    const Matrix& g = t.out_grad(id);
                    const Matrix& Q = t.value(q);
                    const Matrix& K = t.value(k);
                    const Matrix& V = t.value(v);
                    const auto& kt = kn::active_table();
                    Matrix* gq = t.needs(q) ? &t.grad_ref(q.id) : nullptr;
                    Matrix* gk = t.needs(k) ? &t.grad_ref(k.id) : nullptr;
                    Matrix* gv = t.needs(v) ? &t.grad_ref(v.id) : nullptr;
                    std::vector<double> ds;
                    for (std::size_t i = 0; i < Q.rows; ++i) {
                        const KeyRange rg = ranges[i];
                        for (std::size_t h = 0; h < heads; ++h) {
                            const auto& p = probs[i * heads + h];
                            const double* gi = g.row(i).data() + h * hd;
                            ds.assign(p.size(), 0.0);
                            double dot_pa = 0.0;
                            for (std::size_t j = rg.begin; j < rg.end; ++j) {
                                const double da = kt.dot(gi, V.row(j).data() + h * hd, hd);
                                ds[j - rg.begin] = da;
                                dot_pa += p[j - rg.begin] * da;
                                if (gv) kt.axpy(p[j - rg.begin], gi, gv->row(j).data() + h * hd, hd);
                            }
                            const double* qi = Q.row(i).data() + h * hd;
                            for (std::size_t j = rg.begin; j < rg.end; ++j) {
                                const double s = p[j - rg.begin] * (ds[j - rg.begin] - dot_pa) * sc;
                                if (s == 0.0) continue;
                                if (gq) kt.axpy(s, K.row(j).data() + h * hd, gq->row(i).data() + h * hd, hd);
                                if (gk) kt.axpy(s, qi, gk->row(j).data() + h * hd, hd);
                            }
                        }
                    }
                });
}

Var Tape::softmax_rows(Var x, double temperature) {
    require(temperature > 0.0, "softmax temperature must be > 0");
    const Matrix& X = value(x);
    Matrix out(X.rows, X.cols);
    for (std::size_t r = 0; r < X.rows; ++r) {
        const auto xr = X.row(r);
        auto o = out.row(r);
        const double mx = *std::max_element(xr.begin(), xr.end());
        double z = 0.0;
        for (std::size_t j = 0; j < xr.size(); ++j) {
            o[j] = std::exp((xr[j] - mx) / temperature);
            z += o[j];
        }
        for (double& v : o) v /= z;
    }
    Var y = push(std::move(out), any_needs({x}), nullptr);
    if (nodes_[y.id].needs_grad) {
        nodes_[y.id].backward = [x, temperature](Tape& t, std::size_t id) {
            const Matrix& g = t.out_grad(id);
            const Matrix& P = t.value(Var{id});
            Matrix& gx = t.grad_ref(x.id);
            for (std::size_t r = 0; r < g.rows; ++r) {
                const double s = kn::active_table().dot(g.row(r).data(), P.row(r).data(), g.cols);
                for (std::size_t j = 0; j < g.cols; ++j) gx(r, j) += P(r, j) * (g(r, j) - s) / temperature;
            }
        };
    }
    return y;
}

Var Tape::cross_entropy(Var logits, const std::vector<std::size_t>& targets) {
    const Matrix& L = value(logits);
    require(targets.size() == L.rows && L.rows > 0, "cross_entropy targets");
    Matrix probs(L.rows, L.cols);
    double total = 0.0;
    for (std::size_t r = 0; r < L.rows; ++r) {
        const auto lr = L.row(r);
        const double mx = *std::max_element(lr.begin(), lr.end());
        double z = 0.0;
        for (std::size_t j = 0; j < lr.size(); ++j) {
            probs(r, j) = std::exp(lr[j] - mx);
            z += probs(r, j);
        }
        for (std::size_t j = 0; j < lr.size(); ++j) probs(r, j) /= z;
        require(targets[r] < L.cols, "cross_entropy target index");
        total += (std::log(z) + mx) - lr[targets[r]];
    }
    const double n = static_cast<double>(L.rows);
    Matrix out(1, 1, total / n);
    return push(std::move(out), any_needs({logits}),
                [logits, targets, probs = std::move(probs), n](Tape& t, std::size_t id) {
                    const double g = t.out_grad(id).data[0] / n;
                    Matrix& gl = t.grad_ref(logits.id);
                    for (std::size_t r = 0; r < probs.rows; ++r) {
                        for (std::size_t j = 0; j < probs.cols; ++j) gl(r, j) += g * probs(r, j);
                        gl(r, targets[r]) -= g;
                    }
                });
}

// ------------------------------------------------------------------ reductions

Var Tape::log(Var x) {
    Matrix out = value(x);
    for (double& v : out.data) v = std::log(v);
    return push(std::move(out), any_needs({x}), [x](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        const Matrix& X = t.value(x);
        Matrix& gx = t.grad_ref(x.id);
        for (std::size_t i = 0; i < g.size(); ++i) gx.data[i] += g.data[i] / X.data[i];
    });
}

Var Tape::sum(Var x) {
    double s = 0.0;
    for (double v : value(x).data) s += v;
    return push(Matrix(1, 1, s), any_needs({x}), [x](Tape& t, std::size_t id) {
        const double g = t.out_grad(id).data[0];
        for (double& v : t.grad_ref(x.id).data) v += g;
    });
}

Var Tape::gather_cols(Var x, std::vector<std::size_t> cols) {
    const Matrix& X = value(x);
    Matrix out(1, cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i) {
        require(cols[i] < X.cols, "gather_cols index");
        out.data[i] = X.data[cols[i]];
    }
    return push(std::move(out), any_needs({x}), [x, cols = std::move(cols)](Tape& t, std::size_t id) {
        const Matrix& g = t.out_grad(id);
        Matrix& gx = t.grad_ref(x.id);
        for (std::size_t i = 0; i < cols.size(); ++i) gx.data[cols[i]] += g.data[i];
    });
}

Var Tape::cosine_rows(Var x, Var m) {
    const Matrix& X = value(x);
    const Matrix& M = value(m);
    require(X.rows == 1 && X.cols == M.cols, "cosine_rows shape");
    const auto& kt = kn::active_table();
    const std::size_t d = X.cols;
    const double xn = std::sqrt(kt.dot(X.data.data(), X.data.data(), d));
    std::vector<double> mn(M.rows);
    Matrix out(1, M.rows);
    for (std::size_t i = 0; i < M.rows; ++i) {
        mn[i] = std::sqrt(kt.dot(M.row(i).data(), M.row(i).data(), d));
        const double denom = xn * mn[i];
        out.data[i] = denom > 0.0 ? kt.dot(X.data.data(), M.row(i).data(), d) / denom : 0.0;
    }
    Var y = push(std::move(out), any_needs({x, m}), nullptr);
    if (nodes_[y.id].needs_grad) {
        nodes_[y.id].backward = [x, m, xn, mn = std::move(mn)](Tape& t, std::size_t id) {
            const Matrix& g = t.out_grad(id);
            const Matrix& C = t.value(Var{id});
            const Matrix& X = t.value(x);
            const Matrix& M = t.value(m);
            const auto& kt = kn::active_table();
            const std::size_t d = X.cols;
            Matrix* gx = t.needs(x) ? &t.grad_ref(x.id) : nullptr;
            Matrix* gm = t.needs(m) ? &t.grad_ref(m.id) : nullptr;
            for (std::size_t i = 0; i < M.rows; ++i) {
                const double denom = xn * mn[i];
                if (denom <= 0.0 || g.data[i] == 0.0) continue;
                // d cos / dx = m / (|x||m|) - cos * x / |x|^2
                if (gx) {
                    kt.axpy(g.data[i] / denom, M.row(i).data(), gx->data.data(), d);
                    kt.axpy(-g.data[i] * C.data[i] / (xn * xn), X.data.data(), gx->data.data(), d);
                }
                if (gm) {
                    kt.axpy(g.data[i] / denom, X.data.data(), gm->row(i).data(), d);
                    kt.axpy(-g.data[i] * C.data[i] / (mn[i] * mn[i]), M.row(i).data(), gm->row(i).data(), d);
                }
            }
        };
    }
    return y;
}

Var Tape::kl(Var p, Var q, double floor) {
    const Matrix& P = value(p);
    const Matrix& Q = value(q);
    require(P.same_shape(Q), "kl shape");
    double total = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        if (P.data[i] > 0.0) total += P.data[i] * std::log(P.data[i] / std::max(Q.data[i], floor));
    }
    return push(Matrix(1, 1, total), any_needs({p, q}), [p, q, floor](Tape& t, std::size_t id) {
        const double g = t.out_grad(id).data[0];
        const Matrix& P = t.value(p);
        const Matrix& Q = t.value(q);
        if (t.needs(p)) {
            Matrix& gp = t.grad_ref(p.id);
            for (std::size_t i = 0; i < P.size(); ++i) {
                if (P.data[i] > 0.0) gp.data[i] += g * (std::log(P.data[i] / std::max(Q.data[i], floor)) + 1.0);
            }
        }
        if (t.needs(q)) {
            Matrix& gq = t.grad_ref(q.id);
            for (std::size_t i = 0; i < P.size(); ++i) {
                if (P.data[i] > 0.0 && Q.data[i] >= floor) gq.data[i] -= g * P.data[i] / Q.data[i];
            }
        }
    });
}

Var Tape::frobenius_dot(Var x, const Matrix& c) {
    const Matrix& X = value(x);
    require(X.same_shape(c), "frobenius_dot shape");
    const double s = kn::active_table().dot(X.data.data(), c.data.data(), X.size());
    return push(Matrix(1, 1, s), any_needs({x}), [x, c](Tape& t, std::size_t id) {
        const double g = t.out_grad(id).data[0];
        kn::active_table().axpy(g, c.data.data(), t.grad_ref(x.id).data.data(), c.size());
    });
}

}  // namespace databoost::ad

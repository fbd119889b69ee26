#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <unordered_set>
#include <vector>

#include "seaflow/errors.hpp"
#include "seaflow/rng.hpp"

namespace seaflow {

// Dense 2-D double tensor participating in a reverse-mode graph. Value
// semantics on the handle; the node (data + backward record) is shared.
// Vectors are 1 x n rows; scalars are 1 x 1.
class Tensor {
public:
    struct Node {
        int rows = 0;
        int cols = 0;
        std::vector<double> val;
        std::vector<double> grad;
        bool requires_grad = false;
        std::vector<std::shared_ptr<Node>> parents;
        std::function<void(Node&)> backward;

        size_t numel() const { return val.size(); }
        void ensure_grad() {
            if (grad.size() != val.size()) grad.assign(val.size(), 0.0);
        }
    };

    Tensor() = default;

    static Tensor zeros(int rows, int cols, bool requires_grad = false) {
        Tensor t;
        t.node_ = std::make_shared<Node>();
        t.node_->rows = rows;
        t.node_->cols = cols;
        t.node_->val.assign(static_cast<size_t>(rows) * cols, 0.0);
        t.node_->requires_grad = requires_grad;
        return t;
    }

    static Tensor constant(int rows, int cols, std::vector<double> data) {
        Tensor t = zeros(rows, cols);
        if (data.size() != t.node_->numel())
            throw ShapeMismatchError("constant: data length does not match shape");
        t.node_->val = std::move(data);
        return t;
    }

    static Tensor scalar(double v) { return constant(1, 1, {v}); }

    static Tensor param(int rows, int cols, std::vector<double> data) {
        Tensor t = constant(rows, cols, std::move(data));
        t.node_->requires_grad = true;
        return t;
    }

    // Xavier-uniform weight init for a [out x in] matrix.
    static Tensor xavier(int out, int in, Rng& rng) {
        double limit = std::sqrt(6.0 / (in + out));
        std::vector<double> data(static_cast<size_t>(out) * in);
        for (auto& v : data) v = rng.uniform(-limit, limit);
        return param(out, in, std::move(data));
    }

    bool defined() const { return node_ != nullptr; }
    int rows() const { return node_->rows; }
    int cols() const { return node_->cols; }
    size_t numel() const { return node_->numel(); }
    bool requires_grad() const { return node_->requires_grad; }

    double at(int r, int c) const { return node_->val[static_cast<size_t>(r) * cols() + c]; }
    double item() const {
        if (numel() != 1) throw ShapeMismatchError("item() on non-scalar tensor");
        return node_->val[0];
    }

    std::vector<double>& values() { return node_->val; }
    const std::vector<double>& values() const { return node_->val; }
    const std::vector<double>& grad() const { return node_->grad; }
    double grad_at(int r, int c) const {
        return node_->grad.empty() ? 0.0 : node_->grad[static_cast<size_t>(r) * cols() + c];
    }

    void zero_grad() {
        if (!node_->grad.empty()) std::fill(node_->grad.begin(), node_->grad.end(), 0.0);
    }

    std::shared_ptr<Node> node() const { return node_; }

private:
    std::shared_ptr<Node> node_;
};

namespace tensor_ops {

inline Tensor make_result(int rows, int cols, std::vector<Tensor> parents) {
    Tensor y = Tensor::zeros(rows, cols);
    bool needs = false;
    for (const auto& p : parents) needs = needs || p.requires_grad();
    if (needs) {
        y.node()->requires_grad = true;
        for (const auto& p : parents) y.node()->parents.push_back(p.node());
    }
    return y;
}

inline void check(bool cond, const std::string& msg) {
    if (!cond) throw ShapeMismatchError(msg);
}

}  // namespace tensor_ops

inline Tensor add(const Tensor& a, const Tensor& b) {
    tensor_ops::check(a.rows() == b.rows() && a.cols() == b.cols(), "add: shape mismatch");
    Tensor y = tensor_ops::make_result(a.rows(), a.cols(), {a, b});
    auto& out = y.values();
    const auto& av = a.values();
    const auto& bv = b.values();
    for (size_t i = 0; i < out.size(); ++i) out[i] = av[i] + bv[i];
    if (y.requires_grad()) {
        auto an = a.node(), bn = b.node();
        y.node()->backward = [an, bn](Tensor::Node& self) {
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] += self.grad[i];
            }
        };
    }
    return y;
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
    tensor_ops::check(a.rows() == b.rows() && a.cols() == b.cols(), "sub: shape mismatch");
    Tensor y = tensor_ops::make_result(a.rows(), a.cols(), {a, b});
    for (size_t i = 0; i < y.numel(); ++i) y.values()[i] = a.values()[i] - b.values()[i];
    if (y.requires_grad()) {
        auto an = a.node(), bn = b.node();
        y.node()->backward = [an, bn](Tensor::Node& self) {
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] -= self.grad[i];
            }
        };
    }
    return y;
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
    tensor_ops::check(a.rows() == b.rows() && a.cols() == b.cols(), "mul: shape mismatch");
    Tensor y = tensor_ops::make_result(a.rows(), a.cols(), {a, b});
    for (size_t i = 0; i < y.numel(); ++i) y.values()[i] = a.values()[i] * b.values()[i];
    if (y.requires_grad()) {
        auto an = a.node(), bn = b.node();
        y.node()->backward = [an, bn](Tensor::Node& self) {
            if (an->requires_grad) {
                an->ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i)
                    an->grad[i] += self.grad[i] * bn->val[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (size_t i = 0; i < self.grad.size(); ++i)
                    bn->grad[i] += self.grad[i] * an->val[i];
            }
        };
    }
    return y;
}

inline Tensor scale(const Tensor& a, double c) {
    Tensor y = tensor_ops::make_result(a.rows(), a.cols(), {a});
    for (size_t i = 0; i < y.numel(); ++i) y.values()[i] = a.values()[i] * c;
    if (y.requires_grad()) {
        auto an = a.node();
        y.node()->backward = [an, c](Tensor::Node& self) {
            an->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * c;
        };
    }
    return y;
}

// y = a . b with a [m x k], b [k x n]
inline Tensor matmul(const Tensor& a, const Tensor& b) {
    tensor_ops::check(a.cols() == b.rows(), "matmul: inner dimensions disagree");
    int m = a.rows(), k = a.cols(), n = b.cols();
    Tensor y = tensor_ops::make_result(m, n, {a, b});
    const auto& av = a.values();
    const auto& bv = b.values();
    auto& ov = y.values();
    for (int i = 0; i < m; ++i)
        for (int p = 0; p < k; ++p) {
            double aip = av[static_cast<size_t>(i) * k + p];
            if (aip == 0.0) continue;
            for (int j = 0; j < n; ++j)
                ov[static_cast<size_t>(i) * n + j] += aip * bv[static_cast<size_t>(p) * n + j];
        }
    if (y.requires_grad()) {
        auto an = a.node(), bn = b.node();
        y.node()->backward = [an, bn, m, k, n](Tensor::Node& self) {
            if (an->requires_grad) {
                an->ensure_grad();
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < n; ++j) {
                        double g = self.grad[static_cast<size_t>(i) * n + j];
                        if (g == 0.0) continue;
                        for (int p = 0; p < k; ++p)
                            an->grad[static_cast<size_t>(i) * k + p] +=
                                g * bn->val[static_cast<size_t>(p) * n + j];
                    }
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (int i = 0; i < m; ++i)
                    for (int p = 0; p < k; ++p) {
                        double a_ip = an->val[static_cast<size_t>(i) * k + p];
                        if (a_ip == 0.0) continue;
                        for (int j = 0; j < n; ++j)
                            bn->grad[static_cast<size_t>(p) * n + j] +=
                                a_ip * self.grad[static_cast<size_t>(i) * n + j];
                    }
            }
        };
    }
    return y;
}

// y = a . b^T with a [m x k], b [n x k]
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
    tensor_ops::check(a.cols() == b.cols(), "matmul_nt: inner dimensions disagree");
    int m = a.rows(), k = a.cols(), n = b.rows();
    Tensor y = tensor_ops::make_result(m, n, {a, b});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int p = 0; p < k; ++p)
                s += a.values()[static_cast<size_t>(i) * k + p] *
                     b.values()[static_cast<size_t>(j) * k + p];
            y.values()[static_cast<size_t>(i) * n + j] = s;
        }
    if (y.requires_grad()) {
        auto an = a.node(), bn = b.node();
        y.node()->backward = [an, bn, m, k, n](Tensor::Node& self) {
            if (an->requires_grad) an->ensure_grad();
            if (bn->requires_grad) bn->ensure_grad();
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) {
                    double g = self.grad[static_cast<size_t>(i) * n + j];
                    if (g == 0.0) continue;
                    for (int p = 0; p < k; ++p) {
                        if (an->requires_grad)
                            an->grad[static_cast<size_t>(i) * k + p] +=
                                g * bn->val[static_cast<size_t>(j) * k + p];
                        if (bn->requires_grad)
                            bn->grad[static_cast<size_t>(j) * k + p] +=
                                g * an->val[static_cast<size_t>(i) * k + p];
                    }
                }
        };
    }
    return y;
}

// y = x . W^T + b with x [N x in], W [out x in], b [1 x out]
inline Tensor linear(const Tensor& x, const Tensor& W, const Tensor& b) {
    tensor_ops::check(x.cols() == W.cols(), "linear: input width does not match weight");
    tensor_ops::check(b.rows() == 1 && b.cols() == W.rows(), "linear: bias width mismatch");
    int N = x.rows(), in = x.cols(), out = W.rows();
    Tensor y = tensor_ops::make_result(N, out, {x, W, b});
    for (int i = 0; i < N; ++i)
        for (int o = 0; o < out; ++o) {
            double s = b.values()[o];
            for (int k = 0; k < in; ++k)
                s += x.values()[static_cast<size_t>(i) * in + k] *
                     W.values()[static_cast<size_t>(o) * in + k];
            y.values()[static_cast<size_t>(i) * out + o] = s;
        }
    if (y.requires_grad()) {
        auto xn = x.node(), Wn = W.node(), bn = b.node();
        y.node()->backward = [xn, Wn, bn, N, in, out](Tensor::Node& self) {
            if (xn->requires_grad) xn->ensure_grad();
            if (Wn->requires_grad) Wn->ensure_grad();
            if (bn->requires_grad) bn->ensure_grad();
            for (int i = 0; i < N; ++i)
                for (int o = 0; o < out; ++o) {
                    double g = self.grad[static_cast<size_t>(i) * out + o];
                    if (g == 0.0) continue;
                    if (bn->requires_grad) bn->grad[o] += g;
                    for (int k = 0; k < in; ++k) {
                        if (xn->requires_grad)
                            xn->grad[static_cast<size_t>(i) * in + k] +=
                                g * Wn->val[static_cast<size_t>(o) * in + k];
                        if (Wn->requires_grad)
                            Wn->grad[static_cast<size_t>(o) * in + k] +=
                                g * xn->val[static_cast<size_t>(i) * in + k];
                    }
                }
        };
    }
    return y;
}

inline Tensor leaky_relu(const Tensor& x, double slope) {
    Tensor y = tensor_ops::make_result(x.rows(), x.cols(), {x});
    for (size_t i = 0; i < y.numel(); ++i) {
        double v = x.values()[i];
        y.values()[i] = v > 0.0 ? v : slope * v;
    }
    if (y.requires_grad()) {
        auto xn = x.node();
        y.node()->backward = [xn, slope](Tensor::Node& self) {
            xn->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                xn->grad[i] += self.grad[i] * (xn->val[i] > 0.0 ? 1.0 : slope);
        };
    }
    return y;
}

inline Tensor relu(const Tensor& x) { return leaky_relu(x, 0.0); }

// Row-wise softmax with max subtraction; each output row sums to 1.
inline Tensor softmax_rows(const Tensor& x) {
    int R = x.rows(), C = x.cols();
    Tensor y = tensor_ops::make_result(R, C, {x});
    for (int r = 0; r < R; ++r) {
        const double* in = x.values().data() + static_cast<size_t>(r) * C;
        double* out = y.values().data() + static_cast<size_t>(r) * C;
        double mx = in[0];
        for (int c = 1; c < C; ++c) mx = std::max(mx, in[c]);
        double sum = 0.0;
        for (int c = 0; c < C; ++c) {
            out[c] = std::exp(in[c] - mx);
            sum += out[c];
        }
        for (int c = 0; c < C; ++c) out[c] /= sum;
    }
    if (y.requires_grad()) {
        auto xn = x.node();
        y.node()->backward = [xn, R, C](Tensor::Node& self) {
            xn->ensure_grad();
            for (int r = 0; r < R; ++r) {
                const double* s = self.val.data() + static_cast<size_t>(r) * C;
                const double* g = self.grad.data() + static_cast<size_t>(r) * C;
                double dot = 0.0;
                for (int c = 0; c < C; ++c) dot += g[c] * s[c];
                double* dx = xn->grad.data() + static_cast<size_t>(r) * C;
                for (int c = 0; c < C; ++c) dx[c] += s[c] * (g[c] - dot);
            }
        };
    }
    return y;
}

inline Tensor log_softmax_rows(const Tensor& x) {
    int R = x.rows(), C = x.cols();
    Tensor y = tensor_ops::make_result(R, C, {x});
    for (int r = 0; r < R; ++r) {
        const double* in = x.values().data() + static_cast<size_t>(r) * C;
        double* out = y.values().data() + static_cast<size_t>(r) * C;
        double mx = in[0];
        for (int c = 1; c < C; ++c) mx = std::max(mx, in[c]);
        double sum = 0.0;
        for (int c = 0; c < C; ++c) sum += std::exp(in[c] - mx);
        double lse = mx + std::log(sum);
        for (int c = 0; c < C; ++c) out[c] = in[c] - lse;
    }
    if (y.requires_grad()) {
        auto xn = x.node();
        y.node()->backward = [xn, R, C](Tensor::Node& self) {
            xn->ensure_grad();
            for (int r = 0; r < R; ++r) {
                const double* ls = self.val.data() + static_cast<size_t>(r) * C;
                const double* g = self.grad.data() + static_cast<size_t>(r) * C;
                double gsum = 0.0;
                for (int c = 0; c < C; ++c) gsum += g[c];
                double* dx = xn->grad.data() + static_cast<size_t>(r) * C;
                for (int c = 0; c < C; ++c) dx[c] += g[c] - std::exp(ls[c]) * gsum;
            }
        };
    }
    return y;
}

// y = alpha * (x - mu) / sqrt(var + eps) + beta, per row; biased variance.
inline Tensor layer_norm(const Tensor& x, const Tensor& alpha, const Tensor& beta,
                         double eps = 1e-5) {
    int R = x.rows(), C = x.cols();
    tensor_ops::check(C >= 1, "layer_norm: feature dimension must be >= 1");
    tensor_ops::check(alpha.rows() == 1 && alpha.cols() == C, "layer_norm: alpha width mismatch");
    tensor_ops::check(beta.rows() == 1 && beta.cols() == C, "layer_norm: beta width mismatch");
    Tensor y = tensor_ops::make_result(R, C, {x, alpha, beta});
    std::vector<double> xhat(static_cast<size_t>(R) * C);
    std::vector<double> inv_sigma(R);
    for (int r = 0; r < R; ++r) {
        const double* in = x.values().data() + static_cast<size_t>(r) * C;
        double mu = 0.0;
        for (int c = 0; c < C; ++c) mu += in[c];
        mu /= C;
        double var = 0.0;
        for (int c = 0; c < C; ++c) var += (in[c] - mu) * (in[c] - mu);
        var /= C;
        double is = 1.0 / std::sqrt(var + eps);
        inv_sigma[r] = is;
        for (int c = 0; c < C; ++c) {
            double xh = (in[c] - mu) * is;
            xhat[static_cast<size_t>(r) * C + c] = xh;
            y.values()[static_cast<size_t>(r) * C + c] = alpha.values()[c] * xh + beta.values()[c];
        }
    }
    if (y.requires_grad()) {
        auto xn = x.node(), an = alpha.node(), bn = beta.node();
        y.node()->backward = [xn, an, bn, R, C, xhat, inv_sigma](Tensor::Node& self) {
            if (xn->requires_grad) xn->ensure_grad();
            if (an->requires_grad) an->ensure_grad();
            if (bn->requires_grad) bn->ensure_grad();
            for (int r = 0; r < R; ++r) {
                const double* g = self.grad.data() + static_cast<size_t>(r) * C;
                const double* xh = xhat.data() + static_cast<size_t>(r) * C;
                if (an->requires_grad || bn->requires_grad) {
                    for (int c = 0; c < C; ++c) {
                        if (an->requires_grad) an->grad[c] += g[c] * xh[c];
                        if (bn->requires_grad) bn->grad[c] += g[c];
                    }
                }
                if (xn->requires_grad) {
                    double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                    for (int c = 0; c < C; ++c) {
                        double dxh = g[c] * an->val[c];
                        mean_dxh += dxh;
                        mean_dxh_xh += dxh * xh[c];
                    }
                    mean_dxh /= C;
                    mean_dxh_xh /= C;
                    double* dx = xn->grad.data() + static_cast<size_t>(r) * C;
                    for (int c = 0; c < C; ++c) {
                        double dxh = g[c] * an->val[c];
                        dx[c] += inv_sigma[r] * (dxh - mean_dxh - xh[c] * mean_dxh_xh);
                    }
                }
            }
        };
    }
    return y;
}

enum class DropoutMode { train, eval };

// Deterministic core: apply a fixed 0/1 mask with survivor scaling.
inline Tensor dropout_mask(const Tensor& x, std::vector<double> mask, double keep_scale) {
    tensor_ops::check(mask.size() == x.numel(), "dropout_mask: mask length mismatch");
    Tensor y = tensor_ops::make_result(x.rows(), x.cols(), {x});
    for (size_t i = 0; i < y.numel(); ++i)
        y.values()[i] = x.values()[i] * mask[i] * keep_scale;
    if (y.requires_grad()) {
        auto xn = x.node();
        y.node()->backward = [xn, mask = std::move(mask), keep_scale](Tensor::Node& self) {
            xn->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                xn->grad[i] += self.grad[i] * mask[i] * keep_scale;
        };
    }
    return y;
}

// Inverted dropout: zero with probability p, scale survivors by 1/(1-p).
// Identity in eval mode or at p = 0.
inline Tensor dropout(const Tensor& x, double p, DropoutMode mode, Rng& rng) {
    if (!(p >= 0.0 && p < 1.0)) throw BadParamsError("dropout probability must be in [0,1)");
    if (mode == DropoutMode::eval || p == 0.0) return x;
    std::vector<double> mask(x.numel());
    for (auto& m : mask) m = rng.uniform01() < p ? 0.0 : 1.0;
    return dropout_mask(x, std::move(mask), 1.0 / (1.0 - p));
}

inline Tensor slice_cols(const Tensor& x, int c0, int len) {
    tensor_ops::check(c0 >= 0 && len > 0 && c0 + len <= x.cols(), "slice_cols: out of range");
    int R = x.rows(), C = x.cols();
    Tensor y = tensor_ops::make_result(R, len, {x});
    for (int r = 0; r < R; ++r)
        for (int c = 0; c < len; ++c)
            y.values()[static_cast<size_t>(r) * len + c] =
                x.values()[static_cast<size_t>(r) * C + c0 + c];
    if (y.requires_grad()) {
        auto xn = x.node();
        y.node()->backward = [xn, R, C, c0, len](Tensor::Node& self) {
            xn->ensure_grad();
            for (int r = 0; r < R; ++r)
                for (int c = 0; c < len; ++c)
                    xn->grad[static_cast<size_t>(r) * C + c0 + c] +=
                        self.grad[static_cast<size_t>(r) * len + c];
        };
    }
    return y;
}

inline Tensor concat_cols(const std::vector<Tensor>& parts) {
    tensor_ops::check(!parts.empty(), "concat_cols: empty input");
    int R = parts[0].rows();
    int C = 0;
    for (const auto& p : parts) {
        tensor_ops::check(p.rows() == R, "concat_cols: row count mismatch");
        C += p.cols();
    }
    Tensor y = tensor_ops::make_result(R, C, parts);
    int off = 0;
    for (const auto& p : parts) {
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < p.cols(); ++c)
                y.values()[static_cast<size_t>(r) * C + off + c] =
                    p.values()[static_cast<size_t>(r) * p.cols() + c];
        off += p.cols();
    }
    if (y.requires_grad()) {
        std::vector<std::shared_ptr<Tensor::Node>> nodes;
        for (const auto& p : parts) nodes.push_back(p.node());
        y.node()->backward = [nodes, R, C](Tensor::Node& self) {
            int off = 0;
            for (const auto& n : nodes) {
                int pc = n->cols;
                if (n->requires_grad) {
                    n->ensure_grad();
                    for (int r = 0; r < R; ++r)
                        for (int c = 0; c < pc; ++c)
                            n->grad[static_cast<size_t>(r) * pc + c] +=
                                self.grad[static_cast<size_t>(r) * C + off + c];
                }
                off += pc;
            }
        };
    }
    return y;
}

inline Tensor reshape(const Tensor& x, int rows, int cols) {
    tensor_ops::check(static_cast<size_t>(rows) * cols == x.numel(),
                      "reshape: element count mismatch");
    Tensor y = tensor_ops::make_result(rows, cols, {x});
    y.values() = x.values();
    if (y.requires_grad()) {
        auto xn = x.node();
        y.node()->backward = [xn](Tensor::Node& self) {
            xn->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) xn->grad[i] += self.grad[i];
        };
    }
    return y;
}

inline Tensor sum_all(const Tensor& x) {
    Tensor y = tensor_ops::make_result(1, 1, {x});
    double s = 0.0;
    for (double v : x.values()) s += v;
    y.values()[0] = s;
    if (y.requires_grad()) {
        auto xn = x.node();
        y.node()->backward = [xn](Tensor::Node& self) {
            xn->ensure_grad();
            for (size_t i = 0; i < xn->grad.size(); ++i) xn->grad[i] += self.grad[0];
        };
    }
    return y;
}

// Reverse-mode sweep from a scalar loss. Gradients accumulate into every
// reachable tensor with requires_grad set; zeroing is the caller's job.
inline void backward(const Tensor& loss) {
    if (loss.numel() != 1) throw NonScalarLossError("backward() requires a scalar loss");
    std::vector<Tensor::Node*> order;
    std::unordered_set<Tensor::Node*> visited;
    // iterative post-order DFS
    std::vector<std::pair<Tensor::Node*, size_t>> stack{{loss.node().get(), 0}};
    visited.insert(loss.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Tensor::Node* p = node->parents[next++].get();
            if (!visited.count(p)) {
                visited.insert(p);
                stack.push_back({p, 0});
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    loss.node()->ensure_grad();
    loss.node()->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Tensor::Node* n = *it;
        if (n->backward && n->requires_grad) {
            n->ensure_grad();
            n->backward(*n);
        }
    }
}

// Multi-head self-attention parameters; all projections carry biases.
struct MhaParams {
    Tensor Wq, bq, Wk, bk, Wv, bv, Wc, bc;

    static MhaParams init(int d, Rng& rng) {
        MhaParams p;
        p.Wq = Tensor::xavier(d, d, rng);
        p.bq = Tensor::param(1, d, std::vector<double>(d, 0.0));
        p.Wk = Tensor::xavier(d, d, rng);
        p.bk = Tensor::param(1, d, std::vector<double>(d, 0.0));
        p.Wv = Tensor::xavier(d, d, rng);
        p.bv = Tensor::param(1, d, std::vector<double>(d, 0.0));
        p.Wc = Tensor::xavier(d, d, rng);
        p.bc = Tensor::param(1, d, std::vector<double>(d, 0.0));
        return p;
    }
};

// softmax(Q K^T / sqrt(d_k)) V per head, heads concatenated and projected.
// No positional encoding: destination order carries no meaning, so the op
// stays permutation-equivariant over rows.
inline Tensor multi_head_attention(const Tensor& Z, const MhaParams& p, int heads) {
    int d = Z.cols();
    tensor_ops::check(heads >= 1 && d % heads == 0,
                      "multi_head_attention: d must be divisible by head count");
    int dk = d / heads;
    Tensor Q = linear(Z, p.Wq, p.bq);
    Tensor K = linear(Z, p.Wk, p.bk);
    Tensor V = linear(Z, p.Wv, p.bv);
    std::vector<Tensor> outs;
    outs.reserve(heads);
    double inv_sqrt_dk = 1.0 / std::sqrt(static_cast<double>(dk));
    for (int h = 0; h < heads; ++h) {
        Tensor Qh = slice_cols(Q, h * dk, dk);
        Tensor Kh = slice_cols(K, h * dk, dk);
        Tensor Vh = slice_cols(V, h * dk, dk);
        Tensor scores = scale(matmul_nt(Qh, Kh), inv_sqrt_dk);
        Tensor attn = softmax_rows(scores);
        outs.push_back(matmul(attn, Vh));
    }
    Tensor H = heads == 1 ? outs[0] : concat_cols(outs);
    return linear(H, p.Wc, p.bc);
}

}  // namespace seaflow

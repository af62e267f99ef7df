#include "lmrl/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "lmrl/errors.hpp"
#include "lmrl/kernels.hpp"

namespace lmrl {

namespace {

using detail::TensorNode;
using Node = std::shared_ptr<TensorNode>;

void check_2d(const Tensor& t, const char* what) {
    if (!t.defined() || t.ndim() != 2)
        throw ShapeError(std::string(what) + " must be 2-d, got " +
                         (t.defined() ? t.shape_str() : "(undefined)"));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
    check_2d(a, "matmul lhs");
    check_2d(b, "matmul rhs");
    const int n = a.rows(), k = a.cols(), m = b.cols();
    if (b.rows() != k)
        throw ShapeError("matmul inner dimensions disagree: " + a.shape_str() + " vs " +
                         b.shape_str());
    Tensor out = Tensor::zeros({n, m});
    kernels::gemm(a.data().data(), b.data().data(), out.data().data(), n, k, m);
    Node an = a.handle(), bn = b.handle(), on = out.handle();
    attach_backward(out, {a, b}, [an, bn, on, n, k, m] {
        const double* go = on->grad.data();
        if (an->requires_grad) {
            an->ensure_grad();
            // dA = dC * B^T
            kernels::gemm_nt(go, bn->value.data(), an->grad.data(), n, m, k, true);
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            // dB = A^T * dC
            kernels::gemm_tn(an->value.data(), go, bn->grad.data(), k, n, m, true);
        }
    });
    return out;
}

Tensor transpose(const Tensor& a) {
    check_2d(a, "transpose input");
    const int n = a.rows(), m = a.cols();
    Tensor out = Tensor::zeros({m, n});
    const auto& av = a.data();
    auto& ov = out.data();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) ov[static_cast<long>(j) * n + i] = av[static_cast<long>(i) * m + j];
    Node an = a.handle(), on = out.handle();
    attach_backward(out, {a}, [an, on, n, m] {
        an->ensure_grad();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                an->grad[static_cast<long>(i) * m + j] += on->grad[static_cast<long>(j) * n + i];
    });
    return out;
}

Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias) {
    check_2d(x, "linear input");
    check_2d(weight, "linear weight");
    const int n = x.rows(), a = x.cols(), b = weight.cols();
    if (weight.rows() != a)
        throw ShapeError("linear shapes disagree: input " + x.shape_str() + " vs weight " +
                         weight.shape_str());
    if (bias.defined() && bias.size() != b)
        throw ShapeError("linear bias " + bias.shape_str() + " does not match weight " +
                         weight.shape_str());
    Tensor out = Tensor::zeros({n, b});
    kernels::gemm(x.data().data(), weight.data().data(), out.data().data(), n, a, b);
    if (bias.defined()) {
        auto& ov = out.data();
        const auto& bv = bias.data();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < b; ++j) ov[static_cast<long>(i) * b + j] += bv[j];
    }
    std::vector<Tensor> parents{x, weight};
    if (bias.defined()) parents.push_back(bias);
    Node xn = x.handle(), wn = weight.handle(), on = out.handle();
    Node biasn = bias.defined() ? bias.handle() : nullptr;
    attach_backward(out, std::move(parents), [xn, wn, biasn, on, n, a, b] {
        const double* go = on->grad.data();
        if (xn->requires_grad) {
            xn->ensure_grad();
            kernels::gemm_nt(go, wn->value.data(), xn->grad.data(), n, b, a, true);
        }
        if (wn->requires_grad) {
            wn->ensure_grad();
            kernels::gemm_tn(xn->value.data(), go, wn->grad.data(), a, n, b, true);
        }
        if (biasn && biasn->requires_grad) {
            biasn->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < b; ++j) biasn->grad[j] += go[static_cast<long>(i) * b + j];
        }
    });
    return out;
}

Tensor conv1d(const Tensor& x, const Tensor& kernel, const Tensor& bias, int dilation) {
    check_2d(x, "conv1d input");
    if (!kernel.defined() || kernel.ndim() != 3)
        throw ShapeError("conv1d kernel must be [k x c_in x c_out], got " +
                         (kernel.defined() ? kernel.shape_str() : "(undefined)"));
    const int len = x.rows(), c_in = x.cols();
    const int k = kernel.dim(0), c_out = kernel.dim(2);
    if (k % 2 == 0) throw ConfigError("conv1d kernel size must be odd, got " + std::to_string(k));
    if (dilation < 1) throw ConfigError("conv1d dilation must be >= 1");
    if (kernel.dim(1) != c_in)
        throw ShapeError("conv1d channel mismatch: input " + x.shape_str() + " vs kernel " +
                         kernel.shape_str());
    if (bias.defined() && bias.size() != c_out)
        throw ShapeError("conv1d bias " + bias.shape_str() + " does not match kernel " +
                         kernel.shape_str());

    Tensor out = Tensor::zeros({len, c_out});
    kernels::conv1d_forward(x.data().data(), kernel.data().data(),
                            bias.defined() ? bias.data().data() : nullptr, out.data().data(),
                            len, c_in, c_out, k, dilation);
    std::vector<Tensor> parents{x, kernel};
    if (bias.defined()) parents.push_back(bias);
    Node xn = x.handle(), kn = kernel.handle(), on = out.handle();
    Node biasn = bias.defined() ? bias.handle() : nullptr;
    attach_backward(out, std::move(parents), [xn, kn, biasn, on, len, c_in, c_out, k, dilation] {
        const double* go = on->grad.data();
        if (xn->requires_grad) {
            xn->ensure_grad();
            kernels::conv1d_grad_input(go, kn->value.data(), xn->grad.data(), len, c_in, c_out,
                                       k, dilation);
        }
        const bool want_kernel = kn->requires_grad;
        const bool want_bias = biasn && biasn->requires_grad;
        if (want_kernel || want_bias) {
            if (want_kernel) kn->ensure_grad();
            if (want_bias) biasn->ensure_grad();
            kernels::conv1d_grad_params(xn->value.data(), go,
                                        want_kernel ? kn->grad.data() : nullptr,
                                        want_bias ? biasn->grad.data() : nullptr, len, c_in,
                                        c_out, k, dilation);
        }
    });
    return out;
}

Tensor conv2d(const Tensor& x, const Tensor& kernel, const Tensor& bias, int dilation) {
    if (!x.defined() || x.ndim() != 3)
        throw ShapeError("conv2d input must be [h x w x c_in], got " +
                         (x.defined() ? x.shape_str() : "(undefined)"));
    if (!kernel.defined() || kernel.ndim() != 4)
        throw ShapeError("conv2d kernel must be [kh x kw x c_in x c_out], got " +
                         (kernel.defined() ? kernel.shape_str() : "(undefined)"));
    const int h = x.dim(0), w = x.dim(1), c_in = x.dim(2);
    const int kh = kernel.dim(0), kw = kernel.dim(1), c_out = kernel.dim(3);
    if (kh % 2 == 0 || kw % 2 == 0)
        throw ConfigError("conv2d kernel sides must be odd, got " + kernel.shape_str());
    if (dilation < 1) throw ConfigError("conv2d dilation must be >= 1");
    if (kernel.dim(2) != c_in)
        throw ShapeError("conv2d channel mismatch: input " + x.shape_str() + " vs kernel " +
                         kernel.shape_str());
    if (bias.defined() && bias.size() != c_out)
        throw ShapeError("conv2d bias " + bias.shape_str() + " does not match kernel " +
                         kernel.shape_str());

    Tensor out = Tensor::zeros({h, w, c_out});
    kernels::conv2d_forward(x.data().data(), kernel.data().data(),
                            bias.defined() ? bias.data().data() : nullptr, out.data().data(),
                            h, w, c_in, c_out, kh, kw, dilation);
    std::vector<Tensor> parents{x, kernel};
    if (bias.defined()) parents.push_back(bias);
    Node xn = x.handle(), kn = kernel.handle(), on = out.handle();
    Node biasn = bias.defined() ? bias.handle() : nullptr;
    attach_backward(out, std::move(parents),
                    [xn, kn, biasn, on, h, w, c_in, c_out, kh, kw, dilation] {
                        const double* go = on->grad.data();
                        if (xn->requires_grad) {
                            xn->ensure_grad();
                            kernels::conv2d_grad_input(go, kn->value.data(), xn->grad.data(), h, w,
                                                       c_in, c_out, kh, kw, dilation);
                        }
                        const bool want_kernel = kn->requires_grad;
                        const bool want_bias = biasn && biasn->requires_grad;
                        if (want_kernel || want_bias) {
                            if (want_kernel) kn->ensure_grad();
                            if (want_bias) biasn->ensure_grad();
                            kernels::conv2d_grad_params(xn->value.data(), go,
                                                        want_kernel ? kn->grad.data() : nullptr,
                                                        want_bias ? biasn->grad.data() : nullptr,
                                                        h, w, c_in, c_out, kh, kw, dilation);
                        }
                    });
    return out;
}

Tensor max_pool2d(const Tensor& x, int window, int stride) {
    check_2d(x, "max_pool2d input");
    const int n = x.rows();
    if (x.cols() != n)
        throw ShapeError("max_pool2d input must be square, got " + x.shape_str());
    if (window < 1) throw ConfigError("max_pool2d window must be positive");
    if (stride != window)
        throw ConfigError("max_pool2d stride must equal window (non-overlapping pooling)");
    if (window > n)
        throw ConfigError("max_pool2d window " + std::to_string(window) + " exceeds map size " +
                          std::to_string(n));
    const int m = (n + window - 1) / window;
    Tensor out = Tensor::zeros({m, m});
    auto argmax = std::make_shared<std::vector<int64_t>>(static_cast<size_t>(m) * m);
    kernels::maxpool2d_forward(x.data().data(), out.data().data(), argmax->data(), n, window);
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on, argmax, m] {
        xn->ensure_grad();
        for (long i = 0; i < static_cast<long>(m) * m; ++i)
            xn->grad[(*argmax)[i]] += on->grad[i];
    });
    return out;
}

Tensor softmax_rows(const Tensor& x) {
    check_2d(x, "softmax input");
    const int n = x.rows(), m = x.cols();
    Tensor out = Tensor::zeros({n, m});
    kernels::softmax_rows(x.data().data(), out.data().data(), n, m);
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on, n, m] {
        xn->ensure_grad();
        kernels::softmax_rows_grad(on->value.data(), on->grad.data(), xn->grad.data(), n, m);
    });
    return out;
}

Tensor self_attention(const Tensor& x, int heads, const AttentionParams& params,
                      std::vector<Tensor>* attn_weights) {
    check_2d(x, "attention input");
    const int c = x.cols();
    if (heads < 1) throw ConfigError("attention heads must be >= 1");
    if (c % heads != 0)
        throw ConfigError("attention channels " + std::to_string(c) + " not divisible by " +
                          std::to_string(heads) + " heads");
    const int d = c / heads;
    Tensor q = linear(x, params.wq, params.bq);
    Tensor k = linear(x, params.wk, params.bk);
    Tensor v = linear(x, params.wv, params.bv);
    const double s = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<Tensor> outs;
    outs.reserve(static_cast<size_t>(heads));
    for (int h = 0; h < heads; ++h) {
        Tensor qh = slice_cols(q, h * d, (h + 1) * d);
        Tensor kh = slice_cols(k, h * d, (h + 1) * d);
        Tensor vh = slice_cols(v, h * d, (h + 1) * d);
        Tensor attn = softmax_rows(scale(matmul(qh, transpose(kh)), s));
        if (attn_weights) attn_weights->push_back(attn);
        outs.push_back(matmul(attn, vh));
    }
    return linear(concat_cols(outs), params.wo, params.bo);
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps) {
    check_2d(x, "layer_norm input");
    if (eps <= 0) throw ConfigError("layer_norm eps must be positive");
    const int n = x.rows(), c = x.cols();
    if (gain.size() != c || shift.size() != c)
        throw ShapeError("layer_norm affine shapes " + gain.shape_str() + "/" + shift.shape_str() +
                         " do not match input " + x.shape_str());
    Tensor out = Tensor::zeros({n, c});
    auto xhat = std::make_shared<std::vector<double>>(static_cast<size_t>(n) * c);
    auto inv_std = std::make_shared<std::vector<double>>(static_cast<size_t>(n));
    const auto& xv = x.data();
    const auto& gv = gain.data();
    const auto& sv = shift.data();
    auto& ov = out.data();
    for (int i = 0; i < n; ++i) {
        const double* row = xv.data() + static_cast<long>(i) * c;
        double mean = 0.0;
        for (int j = 0; j < c; ++j) mean += row[j];
        mean /= c;
        double var = 0.0;
        for (int j = 0; j < c; ++j) var += (row[j] - mean) * (row[j] - mean);
        var /= c;
        const double inv = 1.0 / std::sqrt(var + eps);
        (*inv_std)[i] = inv;
        for (int j = 0; j < c; ++j) {
            const double xh = (row[j] - mean) * inv;
            (*xhat)[static_cast<long>(i) * c + j] = xh;
            ov[static_cast<long>(i) * c + j] = gv[j] * xh + sv[j];
        }
    }
    Node xn = x.handle(), gn = gain.handle(), sn = shift.handle(), on = out.handle();
    attach_backward(out, {x, gain, shift}, [xn, gn, sn, on, xhat, inv_std, n, c] {
        const double* go = on->grad.data();
        if (gn->requires_grad) gn->ensure_grad();
        if (sn->requires_grad) sn->ensure_grad();
        if (xn->requires_grad) xn->ensure_grad();
        for (int i = 0; i < n; ++i) {
            const double* grow = go + static_cast<long>(i) * c;
            const double* xh = xhat->data() + static_cast<long>(i) * c;
            if (gn->requires_grad || sn->requires_grad) {
                for (int j = 0; j < c; ++j) {
                    if (gn->requires_grad) gn->grad[j] += grow[j] * xh[j];
                    if (sn->requires_grad) sn->grad[j] += grow[j];
                }
            }
            if (xn->requires_grad) {
                // dxhat = go * gain; dx = (dxhat - mean(dxhat) - xhat*mean(dxhat*xhat)) * inv
                double m1 = 0.0, m2 = 0.0;
                for (int j = 0; j < c; ++j) {
                    const double dxh = grow[j] * gn->value[j];
                    m1 += dxh;
                    m2 += dxh * xh[j];
                }
                m1 /= c;
                m2 /= c;
                const double inv = (*inv_std)[i];
                for (int j = 0; j < c; ++j) {
                    const double dxh = grow[j] * gn->value[j];
                    xn->grad[static_cast<long>(i) * c + j] += (dxh - m1 - xh[j] * m2) * inv;
                }
            }
        }
    });
    return out;
}

Tensor relu(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const auto& xv = x.data();
    auto& ov = out.data();
    for (long i = 0; i < x.size(); ++i) ov[i] = xv[i] > 0.0 ? xv[i] : 0.0;
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on] {
        xn->ensure_grad();
        for (size_t i = 0; i < xn->value.size(); ++i)
            if (xn->value[i] > 0.0) xn->grad[i] += on->grad[i];
    });
    return out;
}

namespace {
void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + " shape mismatch: " + a.shape_str() + " vs " +
                         b.shape_str());
}
}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out = Tensor::zeros(a.shape());
    const auto& av = a.data();
    const auto& bv = b.data();
    auto& ov = out.data();
    for (long i = 0; i < a.size(); ++i) ov[i] = av[i] + bv[i];
    Node an = a.handle(), bn = b.handle(), on = out.handle();
    attach_backward(out, {a, b}, [an, bn, on] {
        for (const Node& p : {an, bn}) {
            if (p->requires_grad) {
                p->ensure_grad();
                for (size_t i = 0; i < on->grad.size(); ++i) p->grad[i] += on->grad[i];
            }
        }
    });
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out = Tensor::zeros(a.shape());
    const auto& av = a.data();
    const auto& bv = b.data();
    auto& ov = out.data();
    for (long i = 0; i < a.size(); ++i) ov[i] = av[i] - bv[i];
    Node an = a.handle(), bn = b.handle(), on = out.handle();
    attach_backward(out, {a, b}, [an, bn, on] {
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] -= on->grad[i];
        }
    });
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    Tensor out = Tensor::zeros(a.shape());
    const auto& av = a.data();
    const auto& bv = b.data();
    auto& ov = out.data();
    for (long i = 0; i < a.size(); ++i) ov[i] = av[i] * bv[i];
    Node an = a.handle(), bn = b.handle(), on = out.handle();
    attach_backward(out, {a, b}, [an, bn, on] {
        if (an->requires_grad) {
            an->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) an->grad[i] += on->grad[i] * bn->value[i];
        }
        if (bn->requires_grad) {
            bn->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) bn->grad[i] += on->grad[i] * an->value[i];
        }
    });
    return out;
}

Tensor mul_scalar(const Tensor& x, const Tensor& s) {
    if (s.size() != 1)
        throw ShapeError("mul_scalar expects a size-1 scale, got " + s.shape_str());
    const double sv = s.data()[0];
    Tensor out = Tensor::zeros(x.shape());
    const auto& xv = x.data();
    auto& ov = out.data();
    for (long i = 0; i < x.size(); ++i) ov[i] = xv[i] * sv;
    Node xn = x.handle(), sn = s.handle(), on = out.handle();
    attach_backward(out, {x, s}, [xn, sn, on] {
        if (xn->requires_grad) {
            xn->ensure_grad();
            const double sc = sn->value[0];
            for (size_t i = 0; i < on->grad.size(); ++i) xn->grad[i] += on->grad[i] * sc;
        }
        if (sn->requires_grad) {
            sn->ensure_grad();
            double acc = 0.0;
            for (size_t i = 0; i < on->grad.size(); ++i) acc += on->grad[i] * xn->value[i];
            sn->grad[0] += acc;
        }
    });
    return out;
}

Tensor add_rowvec(const Tensor& x, const Tensor& v) {
    check_2d(x, "add_rowvec input");
    const int n = x.rows(), m = x.cols();
    if (v.size() != m)
        throw ShapeError("add_rowvec vector " + v.shape_str() + " does not match " + x.shape_str());
    Tensor out = Tensor::zeros({n, m});
    const auto& xv = x.data();
    const auto& vv = v.data();
    auto& ov = out.data();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j)
            ov[static_cast<long>(i) * m + j] = xv[static_cast<long>(i) * m + j] + vv[j];
    Node xn = x.handle(), vn = v.handle(), on = out.handle();
    attach_backward(out, {x, v}, [xn, vn, on, n, m] {
        if (xn->requires_grad) {
            xn->ensure_grad();
            for (size_t i = 0; i < on->grad.size(); ++i) xn->grad[i] += on->grad[i];
        }
        if (vn->requires_grad) {
            vn->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) vn->grad[j] += on->grad[static_cast<long>(i) * m + j];
        }
    });
    return out;
}

Tensor scale(const Tensor& x, double c) {
    Tensor out = Tensor::zeros(x.shape());
    const auto& xv = x.data();
    auto& ov = out.data();
    for (long i = 0; i < x.size(); ++i) ov[i] = xv[i] * c;
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on, c] {
        xn->ensure_grad();
        for (size_t i = 0; i < on->grad.size(); ++i) xn->grad[i] += on->grad[i] * c;
    });
    return out;
}

Tensor add_const(const Tensor& x, double c) {
    Tensor out = Tensor::zeros(x.shape());
    const auto& xv = x.data();
    auto& ov = out.data();
    for (long i = 0; i < x.size(); ++i) ov[i] = xv[i] + c;
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on] {
        xn->ensure_grad();
        for (size_t i = 0; i < on->grad.size(); ++i) xn->grad[i] += on->grad[i];
    });
    return out;
}

Tensor neg(const Tensor& x) { return scale(x, -1.0); }

Tensor square(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const auto& xv = x.data();
    auto& ov = out.data();
    for (long i = 0; i < x.size(); ++i) ov[i] = xv[i] * xv[i];
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on] {
        xn->ensure_grad();
        for (size_t i = 0; i < on->grad.size(); ++i) xn->grad[i] += 2.0 * xn->value[i] * on->grad[i];
    });
    return out;
}

Tensor abs_val(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const auto& xv = x.data();
    auto& ov = out.data();
    for (long i = 0; i < x.size(); ++i) ov[i] = std::fabs(xv[i]);
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on] {
        xn->ensure_grad();
        for (size_t i = 0; i < on->grad.size(); ++i) {
            const double s = xn->value[i] > 0.0 ? 1.0 : (xn->value[i] < 0.0 ? -1.0 : 0.0);
            xn->grad[i] += s * on->grad[i];
        }
    });
    return out;
}

Tensor log_clamped(const Tensor& x, double floor_val) {
    if (floor_val <= 0) throw ConfigError("log_clamped floor must be positive");
    Tensor out = Tensor::zeros(x.shape());
    const auto& xv = x.data();
    auto& ov = out.data();
    for (long i = 0; i < x.size(); ++i) ov[i] = std::log(std::max(xv[i], floor_val));
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on, floor_val] {
        xn->ensure_grad();
        for (size_t i = 0; i < on->grad.size(); ++i)
            if (xn->value[i] > floor_val) xn->grad[i] += on->grad[i] / xn->value[i];
    });
    return out;
}

Tensor sqrt_guarded(const Tensor& x) {
    Tensor out = Tensor::zeros(x.shape());
    const auto& xv = x.data();
    auto& ov = out.data();
    for (long i = 0; i < x.size(); ++i) ov[i] = std::sqrt(std::max(xv[i], 0.0));
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on] {
        xn->ensure_grad();
        for (size_t i = 0; i < on->grad.size(); ++i)
            xn->grad[i] += on->grad[i] / (2.0 * std::max(on->value[i], 1e-12));
    });
    return out;
}

Tensor sum_all(const Tensor& x) {
    double acc = 0.0;
    for (const double v : x.data()) acc += v;
    Tensor out = Tensor::scalar(acc);
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on] {
        xn->ensure_grad();
        const double g = on->grad[0];
        for (auto& gv : xn->grad) gv += g;
    });
    return out;
}

Tensor mean_all(const Tensor& x) { return scale(sum_all(x), 1.0 / static_cast<double>(x.size())); }

Tensor sum_rows(const Tensor& x) {
    check_2d(x, "sum_rows input");
    const int n = x.rows(), m = x.cols();
    Tensor out = Tensor::zeros({n});
    const auto& xv = x.data();
    auto& ov = out.data();
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j < m; ++j) acc += xv[static_cast<long>(i) * m + j];
        ov[i] = acc;
    }
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on, n, m] {
        xn->ensure_grad();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j) xn->grad[static_cast<long>(i) * m + j] += on->grad[i];
    });
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw UsageError("concat_cols needs at least one tensor");
    const int n = parts.front().rows();
    int total = 0;
    for (const auto& p : parts) {
        check_2d(p, "concat_cols part");
        if (p.rows() != n)
            throw ShapeError("concat_cols row mismatch: " + parts.front().shape_str() + " vs " +
                             p.shape_str());
        total += p.cols();
    }
    Tensor out = Tensor::zeros({n, total});
    auto& ov = out.data();
    int off = 0;
    for (const auto& p : parts) {
        const int m = p.cols();
        const auto& pv = p.data();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < m; ++j)
                ov[static_cast<long>(i) * total + off + j] = pv[static_cast<long>(i) * m + j];
        off += m;
    }
    std::vector<Node> nodes;
    nodes.reserve(parts.size());
    for (const auto& p : parts) nodes.push_back(p.handle());
    Node on = out.handle();
    attach_backward(out, parts, [nodes, on, n, total] {
        int off2 = 0;
        for (const auto& pn : nodes) {
            const int m = pn->shape[1];
            if (pn->requires_grad) {
                pn->ensure_grad();
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < m; ++j)
                        pn->grad[static_cast<long>(i) * m + j] +=
                            on->grad[static_cast<long>(i) * total + off2 + j];
            }
            off2 += m;
        }
    });
    return out;
}

Tensor slice_cols(const Tensor& x, int c0, int c1) {
    check_2d(x, "slice_cols input");
    const int n = x.rows(), m = x.cols();
    if (c0 < 0 || c1 > m || c0 >= c1)
        throw ShapeError("slice_cols range [" + std::to_string(c0) + ", " + std::to_string(c1) +
                         ") invalid for " + x.shape_str());
    const int w = c1 - c0;
    Tensor out = Tensor::zeros({n, w});
    const auto& xv = x.data();
    auto& ov = out.data();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < w; ++j)
            ov[static_cast<long>(i) * w + j] = xv[static_cast<long>(i) * m + c0 + j];
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on, n, m, w, c0] {
        xn->ensure_grad();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < w; ++j)
                xn->grad[static_cast<long>(i) * m + c0 + j] += on->grad[static_cast<long>(i) * w + j];
    });
    return out;
}

Tensor slice_rows(const Tensor& x, int r0, int r1) {
    check_2d(x, "slice_rows input");
    const int n = x.rows(), m = x.cols();
    if (r0 < 0 || r1 > n || r0 >= r1)
        throw ShapeError("slice_rows range [" + std::to_string(r0) + ", " + std::to_string(r1) +
                         ") invalid for " + x.shape_str());
    const int h = r1 - r0;
    Tensor out = Tensor::zeros({h, m});
    const auto& xv = x.data();
    auto& ov = out.data();
    std::copy(xv.begin() + static_cast<long>(r0) * m, xv.begin() + static_cast<long>(r1) * m,
              ov.begin());
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on, r0, h, m] {
        xn->ensure_grad();
        for (int i = 0; i < h; ++i)
            for (int j = 0; j < m; ++j)
                xn->grad[static_cast<long>(r0 + i) * m + j] += on->grad[static_cast<long>(i) * m + j];
    });
    return out;
}

Tensor gather_rows(const Tensor& x, const std::vector<int>& rows) {
    check_2d(x, "gather_rows input");
    const int n = x.rows(), m = x.cols();
    for (const int r : rows)
        if (r < 0 || r >= n)
            throw ShapeError("gather_rows index " + std::to_string(r) + " out of range for " +
                             x.shape_str());
    const int h = static_cast<int>(rows.size());
    if (h == 0) throw UsageError("gather_rows needs at least one index");
    Tensor out = Tensor::zeros({h, m});
    const auto& xv = x.data();
    auto& ov = out.data();
    for (int i = 0; i < h; ++i)
        std::copy(xv.begin() + static_cast<long>(rows[i]) * m,
                  xv.begin() + static_cast<long>(rows[i] + 1) * m, ov.begin() + static_cast<long>(i) * m);
    Node xn = x.handle(), on = out.handle();
    auto idx = std::make_shared<std::vector<int>>(rows);
    attach_backward(out, {x}, [xn, on, idx, m] {
        xn->ensure_grad();
        for (size_t i = 0; i < idx->size(); ++i)
            for (int j = 0; j < m; ++j)
                xn->grad[static_cast<long>((*idx)[i]) * m + j] += on->grad[i * m + j];
    });
    return out;
}

Tensor reshape(const Tensor& x, std::vector<int> new_shape) {
    long n = 1;
    for (const int d : new_shape) n *= d;
    if (n != x.size())
        throw ShapeError("reshape to incompatible size: " + x.shape_str());
    Tensor out = Tensor::from(std::move(new_shape), x.data());
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on] {
        xn->ensure_grad();
        for (size_t i = 0; i < on->grad.size(); ++i) xn->grad[i] += on->grad[i];
    });
    return out;
}

Tensor interp_linear_rows(const Tensor& x, int out_len) {
    if (!x.defined() || (x.ndim() != 1 && !(x.ndim() == 2 && x.cols() == 1)))
        throw ShapeError("interp_linear_rows expects [m] or [m x 1], got " +
                         (x.defined() ? x.shape_str() : "(undefined)"));
    if (out_len < 1) throw ConfigError("interp_linear_rows output length must be positive");
    const int m = x.dim(0);
    Tensor out = Tensor::zeros({out_len, 1});
    auto lo = std::make_shared<std::vector<int>>(static_cast<size_t>(out_len));
    auto w = std::make_shared<std::vector<double>>(static_cast<size_t>(out_len));
    const auto& xv = x.data();
    auto& ov = out.data();
    for (int t = 0; t < out_len; ++t) {
        double u = 0.0;
        if (out_len > 1 && m > 1)
            u = static_cast<double>(t) * (m - 1) / static_cast<double>(out_len - 1);
        int i0 = static_cast<int>(u);
        if (i0 >= m - 1) i0 = m - 1;
        const double frac = u - i0;
        (*lo)[t] = i0;
        (*w)[t] = frac;
        const double v0 = xv[i0];
        const double v1 = xv[std::min(i0 + 1, m - 1)];
        ov[t] = (1.0 - frac) * v0 + frac * v1;
    }
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on, lo, w, m, out_len] {
        xn->ensure_grad();
        for (int t = 0; t < out_len; ++t) {
            const int i0 = (*lo)[t];
            const int i1 = std::min(i0 + 1, m - 1);
            const double frac = (*w)[t];
            xn->grad[i0] += (1.0 - frac) * on->grad[t];
            xn->grad[i1] += frac * on->grad[t];
        }
    });
    return out;
}

Tensor neg_sqdist_matrix(const Tensor& x) {
    check_2d(x, "neg_sqdist_matrix input");
    const int n = x.rows(), c = x.cols();
    Tensor out = Tensor::zeros({n, n});
    const auto& xv = x.data();
    auto& ov = out.data();
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int ch = 0; ch < c; ++ch) {
                const double d = xv[static_cast<long>(i) * c + ch] - xv[static_cast<long>(j) * c + ch];
                acc += d * d;
            }
            ov[static_cast<long>(i) * n + j] = -acc;
        }
    }
    Node xn = x.handle(), on = out.handle();
    attach_backward(out, {x}, [xn, on, n, c] {
        xn->ensure_grad();
        for (int i = 0; i < n; ++i) {
            for (int ch = 0; ch < c; ++ch) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double g = on->grad[static_cast<long>(i) * n + j] +
                                     on->grad[static_cast<long>(j) * n + i];
                    acc += g * (xn->value[static_cast<long>(i) * c + ch] -
                                xn->value[static_cast<long>(j) * c + ch]);
                }
                xn->grad[static_cast<long>(i) * c + ch] += -2.0 * acc;
            }
        }
    });
    return out;
}

}  // namespace lmrl

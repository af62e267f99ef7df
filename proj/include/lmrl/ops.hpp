#pragma once

#include <vector>

#include "lmrl/tensor.hpp"

namespace lmrl {

// Differentiable operations. Each op validates shapes, computes the forward
// value (heavy loops delegate to lmrl::kernels), and records a backward
// closure while grad recording is enabled.

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// out[i,j] = sum_a x[i,a] * weight[a,j] + bias[j]
Tensor linear(const Tensor& x, const Tensor& weight, const Tensor& bias);

// x [len x c_in], kernel [k x c_in x c_out] with k odd, zero "same" padding,
// taps spaced `dilation` apart. bias optional (pass an undefined Tensor).
Tensor conv1d(const Tensor& x, const Tensor& kernel, const Tensor& bias, int dilation);

// x [h x w x c_in], kernel [kh x kw x c_in x c_out], zero "same" padding.
Tensor conv2d(const Tensor& x, const Tensor& kernel, const Tensor& bias, int dilation);

// Non-overlapping max pool over a square map; ceil semantics at the border,
// backward routes to the first-occurrence argmax of each window.
Tensor max_pool2d(const Tensor& x, int window, int stride);

struct AttentionParams {
    Tensor wq, bq, wk, bk, wv, bv, wo, bo;
};

// Standard scaled dot-product multi-head self-attention with output
// projection. When attn_weights is non-null it receives the per-head
// attention matrices (rows sum to 1).
Tensor self_attention(const Tensor& x, int heads, const AttentionParams& params,
                      std::vector<Tensor>* attn_weights = nullptr);

// Per-row zero-mean unit-variance normalization followed by affine.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& shift, double eps);

Tensor softmax_rows(const Tensor& x);
Tensor relu(const Tensor& x);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// x scaled by a learnable size-1 tensor.
Tensor mul_scalar(const Tensor& x, const Tensor& s);
Tensor add_rowvec(const Tensor& x, const Tensor& v);
Tensor scale(const Tensor& x, double c);
Tensor add_const(const Tensor& x, double c);
Tensor neg(const Tensor& x);
Tensor square(const Tensor& x);
Tensor abs_val(const Tensor& x);
// log(max(x, floor)); gradient is zero on the clamped branch.
Tensor log_clamped(const Tensor& x, double floor_val);
// sqrt with a guarded backward (finite at 0).
Tensor sqrt_guarded(const Tensor& x);

Tensor sum_all(const Tensor& x);
Tensor mean_all(const Tensor& x);
// [n x m] -> [n], summing along the second axis.
Tensor sum_rows(const Tensor& x);

Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, int c0, int c1);
Tensor slice_rows(const Tensor& x, int r0, int r1);
Tensor gather_rows(const Tensor& x, const std::vector<int>& rows);
Tensor reshape(const Tensor& x, std::vector<int> new_shape);

// Length-M column vector ([m] or [m x 1]) resampled to [out_len x 1] by
// linear interpolation over the index axis.
Tensor interp_linear_rows(const Tensor& x, int out_len);

// out[i,j] = -||x_i - x_j||^2 over rows of x.
Tensor neg_sqdist_matrix(const Tensor& x);

}  // namespace lmrl

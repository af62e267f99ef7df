#pragma once

#include <cstdint>

namespace lmrl::kernels {

// Runtime switch for the OpenMP paths. Every parallel kernel computes each
// output element on exactly one thread with the same inner-loop order as the
// serial reference, so results are bit-identical regardless of thread count.
// The serial implementations are kept as the reference the tests compare
// against (and as the fallback when OpenMP is unavailable).
struct Config {
    bool parallel = true;
    // Minimum number of multiply-accumulates before a kernel bothers
    // spawning a parallel region.
    long grain = 1 << 14;
};

Config& config();
int hardware_threads();

// ---- GEMM family (row-major) ----
// c[n x m] = a[n x k] * b[k x m]; accumulate adds into c instead.
void gemm(const double* a, const double* b, double* c, int n, int k, int m,
          bool accumulate = false);
void gemm_serial(const double* a, const double* b, double* c, int n, int k, int m,
                 bool accumulate = false);
void gemm_parallel(const double* a, const double* b, double* c, int n, int k, int m,
                   bool accumulate = false);

// c[n x m] = a[n x k] * b[m x k]^T
void gemm_nt(const double* a, const double* b, double* c, int n, int k, int m,
             bool accumulate = false);
void gemm_nt_serial(const double* a, const double* b, double* c, int n, int k, int m,
                    bool accumulate = false);
void gemm_nt_parallel(const double* a, const double* b, double* c, int n, int k, int m,
                      bool accumulate = false);

// c[n x m] = a[k x n]^T * b[k x m]
void gemm_tn(const double* a, const double* b, double* c, int n, int k, int m,
             bool accumulate = false);
void gemm_tn_serial(const double* a, const double* b, double* c, int n, int k, int m,
                    bool accumulate = false);
void gemm_tn_parallel(const double* a, const double* b, double* c, int n, int k, int m,
                      bool accumulate = false);

// ---- 1-d dilated convolution over [len x c_in], kernel [k x c_in x c_out],
// zero "same" padding of (k-1)*dilation/2 per side (k odd). bias may be null.
void conv1d_forward(const double* x, const double* w, const double* bias,
                    double* y, int len, int c_in, int c_out, int k, int dilation);
void conv1d_forward_serial(const double* x, const double* w, const double* bias,
                           double* y, int len, int c_in, int c_out, int k, int dilation);
void conv1d_forward_parallel(const double* x, const double* w, const double* bias,
                             double* y, int len, int c_in, int c_out, int k, int dilation);
// Gradients accumulate (+=) into gx / gw / gb.
void conv1d_grad_input(const double* gy, const double* w, double* gx,
                       int len, int c_in, int c_out, int k, int dilation);
void conv1d_grad_params(const double* x, const double* gy, double* gw, double* gb,
                        int len, int c_in, int c_out, int k, int dilation);

// ---- 2-d dilated convolution over [h x w x c_in], kernel [kh x kw x c_in x c_out],
// zero "same" padding (kh, kw odd). bias may be null.
void conv2d_forward(const double* x, const double* w, const double* bias,
                    double* y, int h, int wd, int c_in, int c_out, int kh, int kw,
                    int dilation);
void conv2d_forward_serial(const double* x, const double* w, const double* bias,
                           double* y, int h, int wd, int c_in, int c_out, int kh, int kw,
                           int dilation);
void conv2d_forward_parallel(const double* x, const double* w, const double* bias,
                             double* y, int h, int wd, int c_in, int c_out, int kh, int kw,
                             int dilation);
void conv2d_grad_input(const double* gy, const double* w, double* gx,
                       int h, int wd, int c_in, int c_out, int kh, int kw, int dilation);
void conv2d_grad_params(const double* x, const double* gy, double* gw, double* gb,
                        int h, int wd, int c_in, int c_out, int kh, int kw, int dilation);

// ---- Non-overlapping 2-d max pooling with ceil semantics; the final partial
// window covers its actual extent. argmax records the flat input index of the
// winning cell (first occurrence in row-major order on ties).
void maxpool2d_forward(const double* x, double* y, int64_t* argmax, int n, int window);

// ---- Row-wise softmax over [rows x cols] (max-subtracted).
void softmax_rows(const double* x, double* y, int rows, int cols);
void softmax_rows_serial(const double* x, double* y, int rows, int cols);
void softmax_rows_parallel(const double* x, double* y, int rows, int cols);
// gx += y * (gy - sum_j(gy_j * y_j)) per row.
void softmax_rows_grad(const double* y, const double* gy, double* gx, int rows, int cols);

// ---- Adam update, element-wise over n values. Gradient buffer is left as-is.
void adam_update(double* w, const double* g, double* m, double* v, int64_t n,
                 double lr, double beta1, double beta2, double eps,
                 double bias_corr1, double bias_corr2);

}  // namespace lmrl::kernels

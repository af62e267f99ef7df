#include "lmrl/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace lmrl::kernels {

Config& config() {
    static Config cfg;
    return cfg;
}

int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace {
bool use_parallel(long work) {
#ifdef _OPENMP
    return config().parallel && work >= config().grain && omp_get_max_threads() > 1;
#else
    (void)work;
    return false;
#endif
}
}  // namespace

// ---------------------------------------------------------------- gemm

void gemm_serial(const double* a, const double* b, double* c, int n, int k, int m,
                 bool accumulate) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[p * m + j];
            if (accumulate)
                c[i * m + j] += acc;
            else
                c[i * m + j] = acc;
        }
    }
}

void gemm_parallel(const double* a, const double* b, double* c, int n, int k, int m,
                   bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[p * m + j];
            if (accumulate)
                c[i * m + j] += acc;
            else
                c[i * m + j] = acc;
        }
    }
}

void gemm(const double* a, const double* b, double* c, int n, int k, int m,
          bool accumulate) {
    if (use_parallel(static_cast<long>(n) * k * m))
        gemm_parallel(a, b, c, n, k, m, accumulate);
    else
        gemm_serial(a, b, c, n, k, m, accumulate);
}

void gemm_nt_serial(const double* a, const double* b, double* c, int n, int k, int m,
                    bool accumulate) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
            if (accumulate)
                c[i * m + j] += acc;
            else
                c[i * m + j] = acc;
        }
    }
}

void gemm_nt_parallel(const double* a, const double* b, double* c, int n, int k, int m,
                      bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[i * k + p] * b[j * k + p];
            if (accumulate)
                c[i * m + j] += acc;
            else
                c[i * m + j] = acc;
        }
    }
}

void gemm_nt(const double* a, const double* b, double* c, int n, int k, int m,
             bool accumulate) {
    if (use_parallel(static_cast<long>(n) * k * m))
        gemm_nt_parallel(a, b, c, n, k, m, accumulate);
    else
        gemm_nt_serial(a, b, c, n, k, m, accumulate);
}

void gemm_tn_serial(const double* a, const double* b, double* c, int n, int k, int m,
                    bool accumulate) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[p * n + i] * b[p * m + j];
            if (accumulate)
                c[i * m + j] += acc;
            else
                c[i * m + j] = acc;
        }
    }
}

void gemm_tn_parallel(const double* a, const double* b, double* c, int n, int k, int m,
                      bool accumulate) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += a[p * n + i] * b[p * m + j];
            if (accumulate)
                c[i * m + j] += acc;
            else
                c[i * m + j] = acc;
        }
    }
}

void gemm_tn(const double* a, const double* b, double* c, int n, int k, int m,
             bool accumulate) {
    if (use_parallel(static_cast<long>(n) * k * m))
        gemm_tn_parallel(a, b, c, n, k, m, accumulate);
    else
        gemm_tn_serial(a, b, c, n, k, m, accumulate);
}

// ---------------------------------------------------------------- conv1d

namespace {
inline double conv1d_cell(const double* x, const double* w, const double* bias,
                          int t, int co, int len, int c_in, int c_out, int k,
                          int dilation) {
    const int half = (k - 1) / 2;
    double acc = bias ? bias[co] : 0.0;
    for (int tap = 0; tap < k; ++tap) {
        const int src = t + (tap - half) * dilation;
        if (src < 0 || src >= len) continue;
        const double* wt = w + (tap * c_in) * c_out;
        for (int ci = 0; ci < c_in; ++ci) acc += x[src * c_in + ci] * wt[ci * c_out + co];
    }
    return acc;
}
}  // namespace

void conv1d_forward_serial(const double* x, const double* w, const double* bias,
                           double* y, int len, int c_in, int c_out, int k, int dilation) {
    for (int t = 0; t < len; ++t)
        for (int co = 0; co < c_out; ++co)
            y[t * c_out + co] = conv1d_cell(x, w, bias, t, co, len, c_in, c_out, k, dilation);
}

void conv1d_forward_parallel(const double* x, const double* w, const double* bias,
                             double* y, int len, int c_in, int c_out, int k, int dilation) {
#pragma omp parallel for schedule(static)
    for (int t = 0; t < len; ++t)
        for (int co = 0; co < c_out; ++co)
            y[t * c_out + co] = conv1d_cell(x, w, bias, t, co, len, c_in, c_out, k, dilation);
}

void conv1d_forward(const double* x, const double* w, const double* bias,
                    double* y, int len, int c_in, int c_out, int k, int dilation) {
    if (use_parallel(static_cast<long>(len) * c_in * c_out * k))
        conv1d_forward_parallel(x, w, bias, y, len, c_in, c_out, k, dilation);
    else
        conv1d_forward_serial(x, w, bias, y, len, c_in, c_out, k, dilation);
}

void conv1d_grad_input(const double* gy, const double* w, double* gx,
                       int len, int c_in, int c_out, int k, int dilation) {
    // Gather form: each gx cell is owned by one iteration, so the loop can be
    // parallelized without races. y[t] reads x[t + (tap-half)*d], hence
    // x[s] feeds y[s - (tap-half)*d].
    const int half = (k - 1) / 2;
    const long work = static_cast<long>(len) * c_in * c_out * k;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (use_parallel(work))
#else
    (void)work;
#endif
    for (int s = 0; s < len; ++s) {
        for (int ci = 0; ci < c_in; ++ci) {
            double acc = 0.0;
            for (int tap = 0; tap < k; ++tap) {
                const int t = s - (tap - half) * dilation;
                if (t < 0 || t >= len) continue;
                const double* wt = w + (tap * c_in + ci) * c_out;
                for (int co = 0; co < c_out; ++co) acc += gy[t * c_out + co] * wt[co];
            }
            gx[s * c_in + ci] += acc;
        }
    }
}

void conv1d_grad_params(const double* x, const double* gy, double* gw, double* gb,
                        int len, int c_in, int c_out, int k, int dilation) {
    const int half = (k - 1) / 2;
    for (int tap = 0; tap < k; ++tap) {
        for (int ci = 0; ci < c_in; ++ci) {
            for (int co = 0; co < c_out; ++co) {
                double acc = 0.0;
                for (int t = 0; t < len; ++t) {
                    const int src = t + (tap - half) * dilation;
                    if (src < 0 || src >= len) continue;
                    acc += x[src * c_in + ci] * gy[t * c_out + co];
                }
                gw[(tap * c_in + ci) * c_out + co] += acc;
            }
        }
    }
    if (gb) {
        for (int co = 0; co < c_out; ++co) {
            double acc = 0.0;
            for (int t = 0; t < len; ++t) acc += gy[t * c_out + co];
            gb[co] += acc;
        }
    }
}

// ---------------------------------------------------------------- conv2d

namespace {
inline double conv2d_cell(const double* x, const double* w, const double* bias,
                          int r, int cc, int co, int h, int wd, int c_in, int c_out,
                          int kh, int kw, int dilation) {
    const int hh = (kh - 1) / 2;
    const int hw = (kw - 1) / 2;
    double acc = bias ? bias[co] : 0.0;
    for (int ta = 0; ta < kh; ++ta) {
        const int sr = r + (ta - hh) * dilation;
        if (sr < 0 || sr >= h) continue;
        for (int tb = 0; tb < kw; ++tb) {
            const int sc = cc + (tb - hw) * dilation;
            if (sc < 0 || sc >= wd) continue;
            const double* xt = x + (sr * wd + sc) * c_in;
            const double* wt = w + ((ta * kw + tb) * c_in) * c_out;
            for (int ci = 0; ci < c_in; ++ci) acc += xt[ci] * wt[ci * c_out + co];
        }
    }
    return acc;
}
}  // namespace

void conv2d_forward_serial(const double* x, const double* w, const double* bias,
                           double* y, int h, int wd, int c_in, int c_out, int kh, int kw,
                           int dilation) {
    for (int r = 0; r < h; ++r)
        for (int cc = 0; cc < wd; ++cc)
            for (int co = 0; co < c_out; ++co)
                y[(r * wd + cc) * c_out + co] =
                    conv2d_cell(x, w, bias, r, cc, co, h, wd, c_in, c_out, kh, kw, dilation);
}

void conv2d_forward_parallel(const double* x, const double* w, const double* bias,
                             double* y, int h, int wd, int c_in, int c_out, int kh, int kw,
                             int dilation) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < h; ++r)
        for (int cc = 0; cc < wd; ++cc)
            for (int co = 0; co < c_out; ++co)
                y[(r * wd + cc) * c_out + co] =
                    conv2d_cell(x, w, bias, r, cc, co, h, wd, c_in, c_out, kh, kw, dilation);
}

void conv2d_forward(const double* x, const double* w, const double* bias,
                    double* y, int h, int wd, int c_in, int c_out, int kh, int kw,
                    int dilation) {
    if (use_parallel(static_cast<long>(h) * wd * c_in * c_out * kh * kw))
        conv2d_forward_parallel(x, w, bias, y, h, wd, c_in, c_out, kh, kw, dilation);
    else
        conv2d_forward_serial(x, w, bias, y, h, wd, c_in, c_out, kh, kw, dilation);
}

void conv2d_grad_input(const double* gy, const double* w, double* gx,
                       int h, int wd, int c_in, int c_out, int kh, int kw, int dilation) {
    const int hh = (kh - 1) / 2;
    const int hw = (kw - 1) / 2;
    const long work = static_cast<long>(h) * wd * c_in * c_out * kh * kw;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (use_parallel(work))
#else
    (void)work;
#endif
    for (int sr = 0; sr < h; ++sr) {
        for (int sc = 0; sc < wd; ++sc) {
            for (int ci = 0; ci < c_in; ++ci) {
                double acc = 0.0;
                for (int ta = 0; ta < kh; ++ta) {
                    const int r = sr - (ta - hh) * dilation;
                    if (r < 0 || r >= h) continue;
                    for (int tb = 0; tb < kw; ++tb) {
                        const int cc = sc - (tb - hw) * dilation;
                        if (cc < 0 || cc >= wd) continue;
                        const double* gt = gy + (r * wd + cc) * c_out;
                        const double* wt = w + ((ta * kw + tb) * c_in + ci) * c_out;
                        for (int co = 0; co < c_out; ++co) acc += gt[co] * wt[co];
                    }
                }
                gx[(sr * wd + sc) * c_in + ci] += acc;
            }
        }
    }
}

void conv2d_grad_params(const double* x, const double* gy, double* gw, double* gb,
                        int h, int wd, int c_in, int c_out, int kh, int kw, int dilation) {
    const int hh = (kh - 1) / 2;
    const int hw = (kw - 1) / 2;
    for (int ta = 0; ta < kh; ++ta) {
        for (int tb = 0; tb < kw; ++tb) {
            for (int ci = 0; ci < c_in; ++ci) {
                for (int co = 0; co < c_out; ++co) {
                    double acc = 0.0;
                    for (int r = 0; r < h; ++r) {
                        const int sr = r + (ta - hh) * dilation;
                        if (sr < 0 || sr >= h) continue;
                        for (int cc = 0; cc < wd; ++cc) {
                            const int sc = cc + (tb - hw) * dilation;
                            if (sc < 0 || sc >= wd) continue;
                            acc += x[(sr * wd + sc) * c_in + ci] * gy[(r * wd + cc) * c_out + co];
                        }
                    }
                    gw[((ta * kw + tb) * c_in + ci) * c_out + co] += acc;
                }
            }
        }
    }
    if (gb) {
        for (int co = 0; co < c_out; ++co) {
            double acc = 0.0;
            for (int i = 0; i < h * wd; ++i) acc += gy[i * c_out + co];
            gb[co] += acc;
        }
    }
}

// ---------------------------------------------------------------- maxpool

void maxpool2d_forward(const double* x, double* y, int64_t* argmax, int n, int window) {
    const int m = (n + window - 1) / window;
    const long work = static_cast<long>(n) * n;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (use_parallel(work))
#else
    (void)work;
#endif
    for (int br = 0; br < m; ++br) {
        for (int bc = 0; bc < m; ++bc) {
            const int r0 = br * window, r1 = std::min(n, r0 + window);
            const int c0 = bc * window, c1 = std::min(n, c0 + window);
            double best = x[r0 * n + c0];
            int64_t best_idx = static_cast<int64_t>(r0) * n + c0;
            for (int r = r0; r < r1; ++r) {
                for (int c = c0; c < c1; ++c) {
                    const double v = x[r * n + c];
                    if (v > best) {  // strict: first occurrence wins ties
                        best = v;
                        best_idx = static_cast<int64_t>(r) * n + c;
                    }
                }
            }
            y[br * m + bc] = best;
            if (argmax) argmax[br * m + bc] = best_idx;
        }
    }
}

// ---------------------------------------------------------------- softmax

void softmax_rows_serial(const double* x, double* y, int rows, int cols) {
    for (int r = 0; r < rows; ++r) {
        const double* xr = x + static_cast<long>(r) * cols;
        double* yr = y + static_cast<long>(r) * cols;
        double mx = xr[0];
        for (int c = 1; c < cols; ++c) mx = std::max(mx, xr[c]);
        double sum = 0.0;
        for (int c = 0; c < cols; ++c) {
            yr[c] = std::exp(xr[c] - mx);
            sum += yr[c];
        }
        const double inv = 1.0 / sum;
        for (int c = 0; c < cols; ++c) yr[c] *= inv;
    }
}

void softmax_rows_parallel(const double* x, double* y, int rows, int cols) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rows; ++r) softmax_rows_serial(x + static_cast<long>(r) * cols,
                                                       y + static_cast<long>(r) * cols, 1, cols);
}

void softmax_rows(const double* x, double* y, int rows, int cols) {
    if (use_parallel(static_cast<long>(rows) * cols * 4))
        softmax_rows_parallel(x, y, rows, cols);
    else
        softmax_rows_serial(x, y, rows, cols);
}

void softmax_rows_grad(const double* y, const double* gy, double* gx, int rows, int cols) {
    const long work = static_cast<long>(rows) * cols * 4;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (use_parallel(work))
#else
    (void)work;
#endif
    for (int r = 0; r < rows; ++r) {
        const double* yr = y + static_cast<long>(r) * cols;
        const double* gr = gy + static_cast<long>(r) * cols;
        double dot = 0.0;
        for (int c = 0; c < cols; ++c) dot += gr[c] * yr[c];
        double* out = gx + static_cast<long>(r) * cols;
        for (int c = 0; c < cols; ++c) out[c] += yr[c] * (gr[c] - dot);
    }
}

// ---------------------------------------------------------------- adam

void adam_update(double* w, const double* g, double* m, double* v, int64_t n,
                 double lr, double beta1, double beta2, double eps,
                 double bias_corr1, double bias_corr2) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (use_parallel(n * 8))
#endif
    for (int64_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        const double mh = m[i] / bias_corr1;
        const double vh = v[i] / bias_corr2;
        w[i] -= lr * mh / (std::sqrt(vh) + eps);
    }
}

}  // namespace lmrl::kernels

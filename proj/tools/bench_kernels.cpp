#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "lmrl/kernels.hpp"
#include "lmrl/rng.hpp"

namespace {

using namespace lmrl;

std::vector<double> random_vec(long n, uint64_t seed) {
    Rng rng(seed);
    std::vector<double> v(static_cast<size_t>(n));
    for (auto& x : v) x = rng.normal(0.0, 1.0);
    return v;
}

void bm_gemm_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto a = random_vec(static_cast<long>(n) * n, 1);
    const auto b = random_vec(static_cast<long>(n) * n, 2);
    std::vector<double> c(static_cast<size_t>(n) * n);
    for (auto _ : state) {
        kernels::gemm_serial(a.data(), b.data(), c.data(), n, n, n);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * n * n);
}

void bm_gemm_parallel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto a = random_vec(static_cast<long>(n) * n, 1);
    const auto b = random_vec(static_cast<long>(n) * n, 2);
    std::vector<double> c(static_cast<size_t>(n) * n);
    for (auto _ : state) {
        kernels::gemm_parallel(a.data(), b.data(), c.data(), n, n, n);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(n) * n * n);
}

void bm_conv1d_serial(benchmark::State& state) {
    const int len = static_cast<int>(state.range(0));
    const int ch = 32, k = 3;
    const auto x = random_vec(static_cast<long>(len) * ch, 3);
    const auto w = random_vec(static_cast<long>(k) * ch * ch, 4);
    const auto b = random_vec(ch, 5);
    std::vector<double> y(static_cast<size_t>(len) * ch);
    for (auto _ : state) {
        kernels::conv1d_forward_serial(x.data(), w.data(), b.data(), y.data(), len, ch, ch, k, 2);
        benchmark::DoNotOptimize(y.data());
    }
}

void bm_conv1d_parallel(benchmark::State& state) {
    const int len = static_cast<int>(state.range(0));
    const int ch = 32, k = 3;
    const auto x = random_vec(static_cast<long>(len) * ch, 3);
    const auto w = random_vec(static_cast<long>(k) * ch * ch, 4);
    const auto b = random_vec(ch, 5);
    std::vector<double> y(static_cast<size_t>(len) * ch);
    for (auto _ : state) {
        kernels::conv1d_forward_parallel(x.data(), w.data(), b.data(), y.data(), len, ch, ch, k,
                                         2);
        benchmark::DoNotOptimize(y.data());
    }
}

void bm_conv2d_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int ch = 8;
    const auto x = random_vec(static_cast<long>(n) * n * ch, 6);
    const auto w = random_vec(3L * 3 * ch * ch, 7);
    const auto b = random_vec(ch, 8);
    std::vector<double> y(static_cast<size_t>(n) * n * ch);
    for (auto _ : state) {
        kernels::conv2d_forward_serial(x.data(), w.data(), b.data(), y.data(), n, n, ch, ch, 3, 3,
                                       2);
        benchmark::DoNotOptimize(y.data());
    }
}

void bm_conv2d_parallel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const int ch = 8;
    const auto x = random_vec(static_cast<long>(n) * n * ch, 6);
    const auto w = random_vec(3L * 3 * ch * ch, 7);
    const auto b = random_vec(ch, 8);
    std::vector<double> y(static_cast<size_t>(n) * n * ch);
    for (auto _ : state) {
        kernels::conv2d_forward_parallel(x.data(), w.data(), b.data(), y.data(), n, n, ch, ch, 3,
                                         3, 2);
        benchmark::DoNotOptimize(y.data());
    }
}

void bm_softmax_serial(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto x = random_vec(static_cast<long>(n) * n, 9);
    std::vector<double> y(static_cast<size_t>(n) * n);
    for (auto _ : state) {
        kernels::softmax_rows_serial(x.data(), y.data(), n, n);
        benchmark::DoNotOptimize(y.data());
    }
}

void bm_softmax_parallel(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    const auto x = random_vec(static_cast<long>(n) * n, 9);
    std::vector<double> y(static_cast<size_t>(n) * n);
    for (auto _ : state) {
        kernels::softmax_rows_parallel(x.data(), y.data(), n, n);
        benchmark::DoNotOptimize(y.data());
    }
}

BENCHMARK(bm_gemm_serial)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_gemm_parallel)->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(bm_conv1d_serial)->Arg(64)->Arg(512)->Arg(4096);
BENCHMARK(bm_conv1d_parallel)->Arg(64)->Arg(512)->Arg(4096);
BENCHMARK(bm_conv2d_serial)->Arg(64)->Arg(128);
BENCHMARK(bm_conv2d_parallel)->Arg(64)->Arg(128);
BENCHMARK(bm_softmax_serial)->Arg(64)->Arg(512);
BENCHMARK(bm_softmax_parallel)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();

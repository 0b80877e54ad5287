#include <benchmark/benchmark.h>

#include <vector>

#include "logicere/kernels.hpp"
#include "logicere/tensor.hpp"

using namespace logicere;
namespace k = logicere::kernels;

namespace {

std::vector<double> data(std::size_t n, std::uint64_t key) { return random_uniform({1, n}, 1.0, key).values(); }

template <bool Parallel>
void BM_Matmul(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto a = data(n * n, 1), b = data(n * n, 2);
    std::vector<double> c(n * n);
    for (auto _ : state) {
        if constexpr (Parallel) k::parallel::matmul(a, b, c, n, n, n);
        else k::serial::matmul(a, b, c, n, n, n);
        benchmark::DoNotOptimize(c.data());
    }
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n * n * n));
}

template <bool Parallel>
void BM_MatmulTN(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    auto a = data(n * n, 3), b = data(n * n, 4);
    std::vector<double> c(n * n, 0.0);
    for (auto _ : state) {
        if constexpr (Parallel) k::parallel::matmul_tn_acc(a, b, c, n, n, n);
        else k::serial::matmul_tn_acc(a, b, c, n, n, n);
        benchmark::DoNotOptimize(c.data());
    }
}

template <bool Parallel>
void BM_MaskedSoftmax(benchmark::State& state) {
    // Attention-shaped: N x N scores with a sparse neighbor mask.
    const auto n = static_cast<std::size_t>(state.range(0));
    auto x = data(n * n, 5);
    std::vector<unsigned char> mask(n * n);
    for (std::size_t i = 0; i < n * n; ++i) mask[i] = (i * 2654435761u) % 7 < 2;
    std::vector<double> out(n * n);
    for (auto _ : state) {
        if constexpr (Parallel) k::parallel::softmax_rows(x, mask, out, n, n, k::EmptyRow::Zero);
        else k::serial::softmax_rows(x, mask, out, n, n, k::EmptyRow::Zero);
        benchmark::DoNotOptimize(out.data());
    }
}

template <bool Parallel>
void BM_LayerNorm(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const std::size_t w = 32;
    auto x = data(n * w, 6), g = data(w, 7), b = data(w, 8);
    std::vector<double> out(n * w), xhat(n * w), inv(n);
    for (auto _ : state) {
        if constexpr (Parallel) k::parallel::layer_norm_rows(x, g, b, 1e-5, out, xhat, inv, n, w);
        else k::serial::layer_norm_rows(x, g, b, 1e-5, out, xhat, inv, n, w);
        benchmark::DoNotOptimize(out.data());
    }
}

}  // namespace

BENCHMARK(BM_Matmul<false>)->Name("matmul/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_Matmul<true>)->Name("matmul/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_MatmulTN<false>)->Name("matmul_tn/serial")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_MatmulTN<true>)->Name("matmul_tn/parallel")->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_MaskedSoftmax<false>)->Name("softmax/serial")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_MaskedSoftmax<true>)->Name("softmax/parallel")->RangeMultiplier(2)->Range(64, 512);
BENCHMARK(BM_LayerNorm<false>)->Name("layer_norm/serial")->RangeMultiplier(4)->Range(64, 4096);
BENCHMARK(BM_LayerNorm<true>)->Name("layer_norm/parallel")->RangeMultiplier(4)->Range(64, 4096);

BENCHMARK_MAIN();

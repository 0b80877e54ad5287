#pragma once

// Dense row-wise kernels. Every kernel exists twice: a plain serial reference and an
// OpenMP version that splits the outer row loop across threads. Per-element reduction
// order is identical in both, so results agree bit for bit regardless of thread count.

#include <cstddef>
#include <span>

namespace logicere::kernels {

/// Rows of a softmax that have no unmasked entry. Throw or produce zeros.
enum class EmptyRow { Throw, Zero };

namespace serial {

// C[m x n] = A[m x k] * B[k x n]
void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n);
// C[m x n] += A[k x m]^T * B[k x n]
void matmul_tn_acc(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n);
// C[m x n] += A[m x k] * B[n x k]^T
void matmul_nt_acc(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n);

// mask may be empty (all entries live); nonzero bytes mark live entries.
void softmax_rows(std::span<const double> x, std::span<const unsigned char> mask,
                  std::span<double> out, std::size_t m, std::size_t n, EmptyRow empty);
void log_softmax_rows(std::span<const double> x, std::span<double> out, std::size_t m,
                      std::size_t n);

// Writes normalized rows to xhat and 1/sqrt(var+eps) per row to inv_std.
void layer_norm_rows(std::span<const double> x, std::span<const double> gain,
                     std::span<const double> bias, double eps, std::span<double> out,
                     std::span<double> xhat, std::span<double> inv_std, std::size_t m,
                     std::size_t n);

}  // namespace serial

namespace parallel {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n);
void matmul_tn_acc(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n);
void matmul_nt_acc(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n);
void softmax_rows(std::span<const double> x, std::span<const unsigned char> mask,
                  std::span<double> out, std::size_t m, std::size_t n, EmptyRow empty);
void log_softmax_rows(std::span<const double> x, std::span<double> out, std::size_t m,
                      std::size_t n);
void layer_norm_rows(std::span<const double> x, std::span<const double> gain,
                     std::span<const double> bias, double eps, std::span<double> out,
                     std::span<double> xhat, std::span<double> inv_std, std::size_t m,
                     std::size_t n);

}  // namespace parallel

/// Work (in multiply-adds) below which the parallel kernels stay on one thread.
inline constexpr std::size_t kParallelThreshold = 1u << 15;

int max_threads();

}  // namespace logicere::kernels

#include "logicere/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace logicere::kernels {

namespace {

// Row bodies shared by the serial and parallel drivers.

inline void matmul_row(const double* a_row, const double* b, double* c_row, std::size_t k,
                       std::size_t n) {
    std::fill(c_row, c_row + n, 0.0);
    for (std::size_t p = 0; p < k; ++p) {
        const double av = a_row[p];
        const double* b_row = b + p * n;
        for (std::size_t j = 0; j < n; ++j) c_row[j] += av * b_row[j];
    }
}

// Row i of A^T B, where A is k x m.
inline void matmul_tn_row(const double* a, const double* b, double* c_row, std::size_t i,
                          std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t p = 0; p < k; ++p) {
        const double av = a[p * m + i];
        if (av == 0.0) continue;
        const double* b_row = b + p * n;
        for (std::size_t j = 0; j < n; ++j) c_row[j] += av * b_row[j];
    }
}

inline void matmul_nt_row(const double* a_row, const double* b, double* c_row, std::size_t k,
                          std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        const double* b_row = b + j * k;
        double s = 0.0;
        for (std::size_t p = 0; p < k; ++p) s += a_row[p] * b_row[p];
        c_row[j] += s;
    }
}

inline void softmax_row(const double* x, const unsigned char* mask, double* out, std::size_t n,
                        EmptyRow empty) {
    double mx = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
        if (mask && !mask[j]) continue;
        mx = std::max(mx, x[j]);
        any = true;
    }
    if (!any) {
        if (empty == EmptyRow::Throw) throw std::invalid_argument("softmax_rows: fully masked row");
        std::fill(out, out + n, 0.0);
        return;
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (mask && !mask[j]) {
            out[j] = 0.0;
            continue;
        }
        out[j] = std::exp(x[j] - mx);
        sum += out[j];
    }
    const double inv = 1.0 / sum;
    for (std::size_t j = 0; j < n; ++j) out[j] *= inv;
}

inline void log_softmax_row(const double* x, double* out, std::size_t n) {
    double mx = *std::max_element(x, x + n);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += std::exp(x[j] - mx);
    const double lse = mx + std::log(sum);
    for (std::size_t j = 0; j < n; ++j) out[j] = x[j] - lse;
}

inline void layer_norm_row(const double* x, const double* gain, const double* bias, double eps,
                           double* out, double* xhat, double* inv_std, std::size_t n) {
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += x[j];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double d = x[j] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    const double is = 1.0 / std::sqrt(var + eps);
    *inv_std = is;
    for (std::size_t j = 0; j < n; ++j) {
        xhat[j] = (x[j] - mean) * is;
        out[j] = xhat[j] * gain[j] + bias[j];
    }
}

const unsigned char* mask_row(std::span<const unsigned char> mask, std::size_t i, std::size_t n) {
    return mask.empty() ? nullptr : mask.data() + i * n;
}

}  // namespace

namespace serial {

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_row(a.data() + i * k, b.data(), c.data() + i * n, k, n);
}

void matmul_tn_acc(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_tn_row(a.data(), b.data(), c.data() + i * n, i, m, k, n);
}

void matmul_nt_acc(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) matmul_nt_row(a.data() + i * k, b.data(), c.data() + i * n, k, n);
}

void softmax_rows(std::span<const double> x, std::span<const unsigned char> mask,
                  std::span<double> out, std::size_t m, std::size_t n, EmptyRow empty) {
    for (std::size_t i = 0; i < m; ++i) {
        softmax_row(x.data() + i * n, mask_row(mask, i, n), out.data() + i * n, n, empty);
    }
}

void log_softmax_rows(std::span<const double> x, std::span<double> out, std::size_t m,
                      std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) log_softmax_row(x.data() + i * n, out.data() + i * n, n);
}

void layer_norm_rows(std::span<const double> x, std::span<const double> gain,
                     std::span<const double> bias, double eps, std::span<double> out,
                     std::span<double> xhat, std::span<double> inv_std, std::size_t m,
                     std::size_t n) {
    for (std::size_t i = 0; i < m; ++i) {
        layer_norm_row(x.data() + i * n, gain.data(), bias.data(), eps, out.data() + i * n,
                       xhat.data() + i * n, inv_std.data() + i, n);
    }
}

}  // namespace serial

namespace parallel {

namespace {
inline bool worth_it(std::size_t work) { return work >= kParallelThreshold; }
}  // namespace

void matmul(std::span<const double> a, std::span<const double> b, std::span<double> c,
            std::size_t m, std::size_t k, std::size_t n) {
    const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (worth_it(m * k * n))
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        matmul_row(a.data() + i * k, b.data(), c.data() + i * n, k, n);
    }
}

void matmul_tn_acc(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n) {
    const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (worth_it(m * k * n))
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        matmul_tn_row(a.data(), b.data(), c.data() + i * n, static_cast<std::size_t>(i), m, k, n);
    }
}

void matmul_nt_acc(std::span<const double> a, std::span<const double> b, std::span<double> c,
                   std::size_t m, std::size_t k, std::size_t n) {
    const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (worth_it(m * k * n))
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        matmul_nt_row(a.data() + i * k, b.data(), c.data() + i * n, k, n);
    }
}

void softmax_rows(std::span<const double> x, std::span<const unsigned char> mask,
                  std::span<double> out, std::size_t m, std::size_t n, EmptyRow empty) {
    // Exceptions cannot leave an OpenMP region; validate up front.
    if (empty == EmptyRow::Throw && !mask.empty()) {
        for (std::size_t i = 0; i < m; ++i) {
            const auto* row = mask.data() + i * n;
            if (std::none_of(row, row + n, [](unsigned char v) { return v != 0; })) {
                throw std::invalid_argument("softmax_rows: fully masked row");
            }
        }
    }
    const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (worth_it(m * n * 8))
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        softmax_row(x.data() + i * n, mask_row(mask, static_cast<std::size_t>(i), n),
                    out.data() + i * n, n, EmptyRow::Zero);
    }
}

void log_softmax_rows(std::span<const double> x, std::span<double> out, std::size_t m,
                      std::size_t n) {
    const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (worth_it(m * n * 8))
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        log_softmax_row(x.data() + i * n, out.data() + i * n, n);
    }
}

void layer_norm_rows(std::span<const double> x, std::span<const double> gain,
                     std::span<const double> bias, double eps, std::span<double> out,
                     std::span<double> xhat, std::span<double> inv_std, std::size_t m,
                     std::size_t n) {
    const auto rows = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(static) if (worth_it(m * n * 4))
    for (std::ptrdiff_t i = 0; i < rows; ++i) {
        layer_norm_row(x.data() + i * n, gain.data(), bias.data(), eps, out.data() + i * n,
                       xhat.data() + i * n, inv_std.data() + i, n);
    }
}

}  // namespace parallel

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace logicere::kernels

#include "mmf/kernels.hpp"

#include <bit>
#include <cstring>

namespace mmf::kernels::detail {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void matmul_scalar(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = a + i * k;
        double* crow = c + i * n;
        for (std::size_t l = 0; l < k; ++l) {
            axpy_scalar(arow[l], b + l * n, crow, n);
        }
    }
}

std::uint64_t popcount_and_scalar(const std::uint64_t* a, const std::uint64_t* b,
                                  std::size_t nwords) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < nwords; ++i) s += std::popcount(a[i] & b[i]);
    return s;
}

std::uint64_t popcount_or_scalar(const std::uint64_t* a, const std::uint64_t* b,
                                 std::size_t nwords) {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < nwords; ++i) s += std::popcount(a[i] | b[i]);
    return s;
}

}  // namespace mmf::kernels::detail

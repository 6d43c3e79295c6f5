#include "mmf/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace mmf::kernels {
namespace {

bool avx2_supported() {
#if defined(__x86_64__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<bool> g_force_scalar{false};

bool scalar_forced() {
    static const bool env_forced = std::getenv("MMF_FORCE_SCALAR") != nullptr;
    return env_forced || g_force_scalar.load(std::memory_order_relaxed);
}

bool use_avx2() { return avx2_supported() && !scalar_forced(); }

}  // namespace

bool using_avx2() { return use_avx2(); }

void force_scalar(bool on) { g_force_scalar.store(on, std::memory_order_relaxed); }

double dot(const double* a, const double* b, std::size_t n) {
#if defined(__x86_64__)
    if (use_avx2()) return detail::dot_avx2(a, b, n);
#endif
    return detail::dot_scalar(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
#if defined(__x86_64__)
    if (use_avx2()) return detail::axpy_avx2(alpha, x, y, n);
#endif
    detail::axpy_scalar(alpha, x, y, n);
}

void hadamard(const double* a, const double* b, double* out, std::size_t n) {
#if defined(__x86_64__)
    if (use_avx2()) return detail::hadamard_avx2(a, b, out, n);
#endif
    detail::hadamard_scalar(a, b, out, n);
}

void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n) {
#if defined(__x86_64__)
    if (use_avx2()) return detail::matmul_avx2(a, b, c, m, k, n);
#endif
    detail::matmul_scalar(a, b, c, m, k, n);
}

std::uint64_t popcount_and(const std::uint64_t* a, const std::uint64_t* b,
                           std::size_t nwords) {
    return detail::popcount_and_scalar(a, b, nwords);
}

std::uint64_t popcount_or(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t nwords) {
    return detail::popcount_or_scalar(a, b, nwords);
}

}  // namespace mmf::kernels

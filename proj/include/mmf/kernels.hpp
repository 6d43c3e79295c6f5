#pragma once

#include <cstddef>
#include <cstdint>

// Low-level dense kernels. Scalar reference implementations always exist;
// AVX2 variants are selected at runtime when the CPU supports them.
// force_scalar() pins the dispatch to the reference path (used by the
// equivalence tests and the MMF_FORCE_SCALAR environment variable).
namespace mmf::kernels {

double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// out = a ⊙ b
void hadamard(const double* a, const double* b, double* out, std::size_t n);

// C = A(m×k) * B(k×n), all row-major. C is overwritten.
void matmul(const double* a, const double* b, double* c,
            std::size_t m, std::size_t k, std::size_t n);

std::uint64_t popcount_and(const std::uint64_t* a, const std::uint64_t* b,
                           std::size_t nwords);
std::uint64_t popcount_or(const std::uint64_t* a, const std::uint64_t* b,
                          std::size_t nwords);

bool using_avx2();
void force_scalar(bool on);

namespace detail {
double dot_scalar(const double* a, const double* b, std::size_t n);
void axpy_scalar(double alpha, const double* x, double* y, std::size_t n);
void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n);
void matmul_scalar(const double* a, const double* b, double* c,
                   std::size_t m, std::size_t k, std::size_t n);
std::uint64_t popcount_and_scalar(const std::uint64_t* a, const std::uint64_t* b,
                                  std::size_t nwords);
std::uint64_t popcount_or_scalar(const std::uint64_t* a, const std::uint64_t* b,
                                 std::size_t nwords);

#if defined(__x86_64__)
double dot_avx2(const double* a, const double* b, std::size_t n);
void axpy_avx2(double alpha, const double* x, double* y, std::size_t n);
void hadamard_avx2(const double* a, const double* b, double* out, std::size_t n);
void matmul_avx2(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n);
#endif
}  // namespace detail

}  // namespace mmf::kernels

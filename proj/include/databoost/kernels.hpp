// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense double-precision inner loops used by the transformer, the tape and
// the classifiers. Each primitive has a portable scalar reference and an
// AVX2+FMA variant; the variant is chosen once at startup from CPUID and can
// be pinned with DATABOOST_SIMD=scalar|avx2 or set_active_isa().

#include <cstddef>
#include <span>
#include <string_view>

namespace databoost::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y += alpha * x
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    // y *= alpha
    void (*scale)(double alpha, double* y, std::size_t n);
};

bool isa_supported(Isa isa);
Isa detect_isa();
Isa active_isa();
void set_active_isa(Isa isa);
std::string_view isa_name(Isa isa);

/// Kernel table for a specific ISA; must be supported on this CPU.
const KernelTable& table_for(Isa isa);
const KernelTable& active_table();

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
void scale(double alpha, double* y, std::size_t n);
}  // namespace avx2
#endif

inline double dot(std::span<const double> a, std::span<const double> b) {
    return active_table().dot(a.data(), b.data(), a.size());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    active_table().axpy(alpha, x.data(), y.data(), x.size());
}

// Row-major matrix products; all accumulate into c.
// c (m x n) += a (m x k) * b^T, with b stored n x k.
void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k);
// c (m x n) += a (m x k) * b, with b stored k x n.
void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k);
// c (m x n) += a^T * b, with a stored k x m and b stored k x n.
void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k);

}  // namespace databoost::kernels

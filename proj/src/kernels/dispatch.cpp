// Copyright 2026 The databoost Authors
// SPDX-License-Identifier: Apache-2.0

#include "databoost/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "databoost/error.hpp"

namespace databoost::kernels {
namespace {

constexpr KernelTable kScalarTable{&scalar::dot, &scalar::axpy, &scalar::scale};
#if defined(__x86_64__) || defined(_M_X64)
constexpr KernelTable kAvx2Table{&avx2::dot, &avx2::axpy, &avx2::scale};
#endif

const KernelTable* initial_table() {
    Isa isa = detect_isa();
    if (const char* env = std::getenv("DATABOOST_SIMD")) {
        const std::string v(env);
        if (v == "scalar") isa = Isa::kScalar;
        else if (v == "avx2" && isa_supported(Isa::kAvx2)) isa = Isa::kAvx2;
    }
    return &table_for(isa);
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{initial_table()};
    return slot;
}

}  // namespace

bool isa_supported(Isa isa) {
    switch (isa) {
        case Isa::kScalar: return true;
        case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
    }
    return false;
}

Isa detect_isa() { return isa_supported(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar; }

const KernelTable& table_for(Isa isa) {
    if (!isa_supported(isa)) {
        throw Error(ErrorCode::kInvalidArgument, std::string("ISA not supported: ") + std::string(isa_name(isa)));
    }
#if defined(__x86_64__) || defined(_M_X64)
    if (isa == Isa::kAvx2) return kAvx2Table;
#endif
    return kScalarTable;
}

const KernelTable& active_table() { return *active_slot().load(std::memory_order_relaxed); }

Isa active_isa() { return &active_table() == &kScalarTable ? Isa::kScalar : Isa::kAvx2; }

void set_active_isa(Isa isa) { active_slot().store(&table_for(isa), std::memory_order_relaxed); }

std::string_view isa_name(Isa isa) { return isa == Isa::kAvx2 ? "avx2" : "scalar"; }

void gemm_nt(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
    const auto dotk = active_table().dot;
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t j = 0; j < n; ++j) ci[j] += dotk(ai, b + j * k, k);
    }
}

void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
    const auto axpyk = active_table().axpy;
    for (std::size_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            if (ai[p] != 0.0) axpyk(ai[p], b + p * n, ci, n);
        }
    }
}

void gemm_tn(const double* a, const double* b, double* c, std::size_t m, std::size_t n, std::size_t k) {
    const auto axpyk = active_table().axpy;
    for (std::size_t p = 0; p < k; ++p) {
        const double* ap = a + p * m;
        const double* bp = b + p * n;
        for (std::size_t i = 0; i < m; ++i) {
            if (ap[i] != 0.0) axpyk(ap[i], bp, c + i * n, n);
        }
    }
}

}  // namespace databoost::kernels

#pragma once

// Runtime-dispatched float kernels. Each instruction-set variant fills a
// KernelTable; active() picks the widest one the CPU supports (override
// with the VIN_SIMD environment variable: "scalar", "avx2", "neon").
//
// The double-precision path used by the finite-difference oracles never
// goes through this table; it calls the scalar references directly.

#include <cstddef>
#include <string>
#include <vector>

#include "vin/kernels/kernels_ref.hpp"

namespace vin::kernels {

struct KernelTable {
    const char* name;
    void (*axpy)(std::size_t n, float a, const float* x, float* y);
    float (*dot)(std::size_t n, const float* x, const float* y);
    void (*gemm_nn)(std::size_t m, std::size_t k, std::size_t n,
                    const float* a, const float* b, float* c);
    void (*gemm_tn)(std::size_t m, std::size_t k, std::size_t n,
                    const float* a, const float* b, float* c);
    void (*gemm_nt)(std::size_t m, std::size_t k, std::size_t n,
                    const float* a, const float* b, float* c);
    void (*relu_fwd)(std::size_t n, const float* x, float* y);
    void (*relu_bwd)(std::size_t n, const float* x, const float* dy, float* dx);
    void (*adam_update)(std::size_t n, float* p, const float* g, float* m,
                        float* v, float lr, float beta1, float beta2,
                        float eps, float bc1, float bc2);
    void (*disc_claim)(std::size_t n, const float* xs, float y, float cx,
                       float cy, float r2, float rank, float* owner);
};

const KernelTable& scalar_table();
#if defined(__x86_64__) || defined(_M_X64)
bool avx2_supported();
const KernelTable& avx2_table();
#endif
#if defined(__aarch64__)
const KernelTable& neon_table();
#endif

// Every table that can run on this machine (scalar first).
std::vector<const KernelTable*> available_tables();

// The table selected at startup; stable for the lifetime of the process.
const KernelTable& active();

// Dispatch helpers used by the tensor ops: float goes through the active
// table, every other scalar type through the reference templates.
template <class T>
inline void gemm_nn(std::size_t m, std::size_t k, std::size_t n,
                    const T* a, const T* b, T* c) {
    if constexpr (std::is_same_v<T, float>) active().gemm_nn(m, k, n, a, b, c);
    else ref::gemm_nn(m, k, n, a, b, c);
}

template <class T>
inline void gemm_tn(std::size_t m, std::size_t k, std::size_t n,
                    const T* a, const T* b, T* c) {
    if constexpr (std::is_same_v<T, float>) active().gemm_tn(m, k, n, a, b, c);
    else ref::gemm_tn(m, k, n, a, b, c);
}

template <class T>
inline void gemm_nt(std::size_t m, std::size_t k, std::size_t n,
                    const T* a, const T* b, T* c) {
    if constexpr (std::is_same_v<T, float>) active().gemm_nt(m, k, n, a, b, c);
    else ref::gemm_nt(m, k, n, a, b, c);
}

template <class T>
inline void axpy(std::size_t n, T a, const T* x, T* y) {
    if constexpr (std::is_same_v<T, float>) active().axpy(n, a, x, y);
    else ref::axpy(n, a, x, y);
}

template <class T>
inline void relu_fwd(std::size_t n, const T* x, T* y) {
    if constexpr (std::is_same_v<T, float>) active().relu_fwd(n, x, y);
    else ref::relu_fwd(n, x, y);
}

template <class T>
inline void relu_bwd(std::size_t n, const T* x, const T* dy, T* dx) {
    if constexpr (std::is_same_v<T, float>) active().relu_bwd(n, x, dy, dx);
    else ref::relu_bwd(n, x, dy, dx);
}

template <class T>
inline void adam_update(std::size_t n, T* p, const T* g, T* m, T* v, T lr,
                        T beta1, T beta2, T eps, T bc1, T bc2) {
    if constexpr (std::is_same_v<T, float>)
        active().adam_update(n, p, g, m, v, lr, beta1, beta2, eps, bc1, bc2);
    else
        ref::adam_update(n, p, g, m, v, lr, beta1, beta2, eps, bc1, bc2);
}

}  // namespace vin::kernels

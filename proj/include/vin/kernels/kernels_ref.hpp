#pragma once

// Scalar reference kernels. These are the semantic ground truth for every
// data-parallel inner loop in the project: the SIMD variants in
// src/kernels/ must agree with them (bit-exact for the predicate kernels,
// within accumulation tolerance for the reductions).
//
// Templated so the float production path and the double test oracles share
// one definition. Matrices are row-major.

#include <cstddef>
#include <cstdint>
#include <cmath>

namespace vin::kernels::ref {

// y += a * x
template <class T>
inline void axpy(std::size_t n, T a, const T* x, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

template <class T>
inline T dot(std::size_t n, const T* x, const T* y) {
    T acc = T(0);
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

// C[MxN] += A[MxK] * B[KxN]
template <class T>
inline void gemm_nn(std::size_t m, std::size_t k, std::size_t n,
                    const T* a, const T* b, T* c) {
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
            const T av = a[i * k + p];
            if (av == T(0)) continue;
            const T* brow = b + p * n;
            T* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[KxN] += A^T * B, with A stored [MxK] and B stored [MxN]
template <class T>
inline void gemm_tn(std::size_t m, std::size_t k, std::size_t n,
                    const T* a, const T* b, T* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* arow = a + i * k;
        const T* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            const T av = arow[p];
            if (av == T(0)) continue;
            T* crow = c + p * n;
            for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
        }
    }
}

// C[MxK] += A * B^T, with A stored [MxN] and B stored [KxN]
template <class T>
inline void gemm_nt(std::size_t m, std::size_t k, std::size_t n,
                    const T* a, const T* b, T* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const T* arow = a + i * n;
        T* crow = c + i * k;
        for (std::size_t p = 0; p < k; ++p) {
            crow[p] += dot(n, arow, b + p * n);
        }
    }
}

template <class T>
inline void relu_fwd(std::size_t n, const T* x, T* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i] > T(0) ? x[i] : T(0);
}

// dx += dy where x > 0
template <class T>
inline void relu_bwd(std::size_t n, const T* x, const T* dy, T* dx) {
    for (std::size_t i = 0; i < n; ++i)
        if (x[i] > T(0)) dx[i] += dy[i];
}

// One fused Adam update. bc1/bc2 are the precomputed bias corrections
// 1/(1-beta1^t) and 1/(1-beta2^t).
template <class T>
inline void adam_update(std::size_t n, T* p, const T* g, T* m, T* v,
                        T lr, T beta1, T beta2, T eps, T bc1, T bc2) {
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = beta1 * m[i] + (T(1) - beta1) * g[i];
        v[i] = beta2 * v[i] + (T(1) - beta2) * g[i] * g[i];
        const T mhat = m[i] * bc1;
        const T vhat = v[i] * bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

// Disc-coverage claim over one row of supersample x positions: any slot
// still unclaimed (== none) whose point lies inside the disc is claimed
// with `rank`. Pure mul/add/compare so SIMD variants match bit-exactly.
inline constexpr float kOwnerNone = 1.0e9f;

template <class T>
inline void disc_claim(std::size_t n, const T* xs, T y, T cx, T cy, T r2,
                       T rank, T* owner) {
    const T dy = y - cy;
    const T dy2 = dy * dy;
    for (std::size_t i = 0; i < n; ++i) {
        const T dx = xs[i] - cx;
        if (dx * dx + dy2 <= r2 && owner[i] == T(kOwnerNone)) owner[i] = rank;
    }
}

}  // namespace vin::kernels::ref

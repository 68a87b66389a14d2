// AVX2 + FMA variants of the float kernels. This translation unit is the
// only one compiled with -mavx2 -mfma; nothing here runs unless
// avx2_supported() returned true at dispatch time.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <vector>

#include "vin/kernels/kernels.hpp"

namespace vin::kernels {

namespace {

void axpy_avx2(std::size_t n, float a, const float* x, float* y) {
    const __m256 av = _mm256_set1_ps(a);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256 yv = _mm256_loadu_ps(y + i);
        yv = _mm256_fmadd_ps(av, _mm256_loadu_ps(x + i), yv);
        _mm256_storeu_ps(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

float dot_avx2(std::size_t n, const float* x, const float* y) {
    __m256 acc0 = _mm256_setzero_ps();
    __m256 acc1 = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i),
                               _mm256_loadu_ps(y + i), acc0);
        acc1 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i + 8),
                               _mm256_loadu_ps(y + i + 8), acc1);
    }
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_ps(_mm256_loadu_ps(x + i),
                               _mm256_loadu_ps(y + i), acc0);
    }
    acc0 = _mm256_add_ps(acc0, acc1);
    __m128 lo = _mm256_castps256_ps128(acc0);
    __m128 hi = _mm256_extractf128_ps(acc0, 1);
    lo = _mm_add_ps(lo, hi);
    lo = _mm_add_ps(lo, _mm_movehl_ps(lo, lo));
    lo = _mm_add_ss(lo, _mm_shuffle_ps(lo, lo, 1));
    float acc = _mm_cvtss_f32(lo);
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

// Wide-N path: stream B rows, keep a C row hot, unroll k by 4.
void gemm_nn_wide(std::size_t m, std::size_t k, std::size_t n,
                  const float* a, const float* b, float* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * k;
        float* crow = c + i * n;
        std::size_t p = 0;
        for (; p + 4 <= k; p += 4) {
            const __m256 a0 = _mm256_set1_ps(arow[p]);
            const __m256 a1 = _mm256_set1_ps(arow[p + 1]);
            const __m256 a2 = _mm256_set1_ps(arow[p + 2]);
            const __m256 a3 = _mm256_set1_ps(arow[p + 3]);
            const float* b0 = b + p * n;
            const float* b1 = b0 + n;
            const float* b2 = b1 + n;
            const float* b3 = b2 + n;
            std::size_t j = 0;
            for (; j + 8 <= n; j += 8) {
                __m256 acc = _mm256_loadu_ps(crow + j);
                acc = _mm256_fmadd_ps(a0, _mm256_loadu_ps(b0 + j), acc);
                acc = _mm256_fmadd_ps(a1, _mm256_loadu_ps(b1 + j), acc);
                acc = _mm256_fmadd_ps(a2, _mm256_loadu_ps(b2 + j), acc);
                acc = _mm256_fmadd_ps(a3, _mm256_loadu_ps(b3 + j), acc);
                _mm256_storeu_ps(crow + j, acc);
            }
            for (; j < n; ++j) {
                crow[j] += arow[p] * b0[j] + arow[p + 1] * b1[j] +
                           arow[p + 2] * b2[j] + arow[p + 3] * b3[j];
            }
        }
        for (; p < k; ++p) axpy_avx2(n, arow[p], b + p * n, crow);
    }
}

void gemm_nn_avx2(std::size_t m, std::size_t k, std::size_t n,
                  const float* a, const float* b, float* c) {
    if (n >= 8) {
        gemm_nn_wide(m, k, n, a, b, c);
        return;
    }
    // Narrow output (e.g. 4-channel convolutions): transpose B once and
    // run dot products along k instead.
    thread_local std::vector<float> bt;
    bt.resize(k * n);
    for (std::size_t p = 0; p < k; ++p)
        for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * k;
        float* crow = c + i * n;
        for (std::size_t j = 0; j < n; ++j)
            crow[j] += dot_avx2(k, arow, bt.data() + j * k);
    }
}

void gemm_tn_avx2(std::size_t m, std::size_t k, std::size_t n,
                  const float* a, const float* b, float* c) {
    if (n < 8 || n * 4 <= k) {
        // Narrow outputs: accumulate C^T so the vector axis is k, then
        // transpose-add once at the end.
        thread_local std::vector<float> ct;
        ct.assign(n * k, 0.0f);
        for (std::size_t i = 0; i < m; ++i) {
            const float* arow = a + i * k;
            const float* brow = b + i * n;
            for (std::size_t j = 0; j < n; ++j)
                if (brow[j] != 0.0f)
                    axpy_avx2(k, brow[j], arow, ct.data() + j * k);
        }
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t j = 0; j < n; ++j) c[p * n + j] += ct[j * k + p];
        return;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * k;
        const float* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p) {
            if (arow[p] != 0.0f) axpy_avx2(n, arow[p], brow, c + p * n);
        }
    }
}

void gemm_nt_avx2(std::size_t m, std::size_t k, std::size_t n,
                  const float* a, const float* b, float* c) {
    if (n < 8 || n * 4 <= k) {
        // Narrow inner dimension: transpose B once and run k-long axpys.
        thread_local std::vector<float> bt;
        bt.resize(n * k);
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
        for (std::size_t i = 0; i < m; ++i) {
            const float* arow = a + i * n;
            float* crow = c + i * k;
            for (std::size_t j = 0; j < n; ++j)
                if (arow[j] != 0.0f)
                    axpy_avx2(k, arow[j], bt.data() + j * k, crow);
        }
        return;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * n;
        float* crow = c + i * k;
        for (std::size_t p = 0; p < k; ++p)
            crow[p] += dot_avx2(n, arow, b + p * n);
    }
}

void relu_fwd_avx2(std::size_t n, const float* x, float* y) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8)
        _mm256_storeu_ps(y + i, _mm256_max_ps(_mm256_loadu_ps(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd_avx2(std::size_t n, const float* x, const float* dy, float* dx) {
    const __m256 zero = _mm256_setzero_ps();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 mask = _mm256_cmp_ps(_mm256_loadu_ps(x + i), zero, _CMP_GT_OQ);
        const __m256 add = _mm256_and_ps(mask, _mm256_loadu_ps(dy + i));
        _mm256_storeu_ps(dx + i, _mm256_add_ps(_mm256_loadu_ps(dx + i), add));
    }
    for (; i < n; ++i)
        if (x[i] > 0.0f) dx[i] += dy[i];
}

void adam_update_avx2(std::size_t n, float* p, const float* g, float* m,
                      float* v, float lr, float beta1, float beta2, float eps,
                      float bc1, float bc2) {
    const __m256 b1 = _mm256_set1_ps(beta1);
    const __m256 b2 = _mm256_set1_ps(beta2);
    const __m256 ob1 = _mm256_set1_ps(1.0f - beta1);
    const __m256 ob2 = _mm256_set1_ps(1.0f - beta2);
    const __m256 lrv = _mm256_set1_ps(lr);
    const __m256 epsv = _mm256_set1_ps(eps);
    const __m256 bc1v = _mm256_set1_ps(bc1);
    const __m256 bc2v = _mm256_set1_ps(bc2);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 gv = _mm256_loadu_ps(g + i);
        // Plain mul/add (no FMA) so the scalar reference matches bit-exactly.
        __m256 mv = _mm256_add_ps(_mm256_mul_ps(b1, _mm256_loadu_ps(m + i)),
                                  _mm256_mul_ps(ob1, gv));
        __m256 vv = _mm256_add_ps(
            _mm256_mul_ps(b2, _mm256_loadu_ps(v + i)),
            _mm256_mul_ps(ob2, _mm256_mul_ps(gv, gv)));
        _mm256_storeu_ps(m + i, mv);
        _mm256_storeu_ps(v + i, vv);
        const __m256 mhat = _mm256_mul_ps(mv, bc1v);
        const __m256 vhat = _mm256_mul_ps(vv, bc2v);
        const __m256 denom = _mm256_add_ps(_mm256_sqrt_ps(vhat), epsv);
        const __m256 step = _mm256_div_ps(_mm256_mul_ps(lrv, mhat), denom);
        _mm256_storeu_ps(p + i, _mm256_sub_ps(_mm256_loadu_ps(p + i), step));
    }
    if (i < n)
        ref::adam_update(n - i, p + i, g + i, m + i, v + i, lr, beta1, beta2,
                         eps, bc1, bc2);
}

void disc_claim_avx2(std::size_t n, const float* xs, float y, float cx,
                     float cy, float r2, float rank, float* owner) {
    const float dy = y - cy;
    const float dy2s = dy * dy;
    const __m256 dy2 = _mm256_set1_ps(dy2s);
    const __m256 cxv = _mm256_set1_ps(cx);
    const __m256 r2v = _mm256_set1_ps(r2);
    const __m256 none = _mm256_set1_ps(ref::kOwnerNone);
    const __m256 rankv = _mm256_set1_ps(rank);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256 dx = _mm256_sub_ps(_mm256_loadu_ps(xs + i), cxv);
        const __m256 d2 = _mm256_add_ps(_mm256_mul_ps(dx, dx), dy2);
        const __m256 ov = _mm256_loadu_ps(owner + i);
        const __m256 inside = _mm256_cmp_ps(d2, r2v, _CMP_LE_OQ);
        const __m256 free_ = _mm256_cmp_ps(ov, none, _CMP_EQ_OQ);
        const __m256 claim = _mm256_and_ps(inside, free_);
        _mm256_storeu_ps(owner + i, _mm256_blendv_ps(ov, rankv, claim));
    }
    for (; i < n; ++i) {
        const float dx = xs[i] - cx;
        if (dx * dx + dy2s <= r2 && owner[i] == ref::kOwnerNone)
            owner[i] = rank;
    }
}

}  // namespace

const KernelTable& avx2_table() {
    static const KernelTable table = {
        "avx2",
        axpy_avx2,
        dot_avx2,
        gemm_nn_avx2,
        gemm_tn_avx2,
        gemm_nt_avx2,
        relu_fwd_avx2,
        relu_bwd_avx2,
        adam_update_avx2,
        disc_claim_avx2,
    };
    return table;
}

}  // namespace vin::kernels

#endif  // x86_64

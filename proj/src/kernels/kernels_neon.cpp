// NEON variants of the float kernels (AArch64 baseline). Kept deliberately
// close to the scalar references; 4-wide where the AVX2 file is 8-wide.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>
#include <vector>

#include "vin/kernels/kernels.hpp"

namespace vin::kernels {

namespace {

void axpy_neon(std::size_t n, float a, const float* x, float* y) {
    const float32x4_t av = vdupq_n_f32(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float32x4_t yv = vld1q_f32(y + i);
        yv = vfmaq_f32(yv, av, vld1q_f32(x + i));
        vst1q_f32(y + i, yv);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

float dot_neon(std::size_t n, const float* x, const float* y) {
    float32x4_t acc0 = vdupq_n_f32(0.0f);
    float32x4_t acc1 = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = vfmaq_f32(acc0, vld1q_f32(x + i), vld1q_f32(y + i));
        acc1 = vfmaq_f32(acc1, vld1q_f32(x + i + 4), vld1q_f32(y + i + 4));
    }
    for (; i + 4 <= n; i += 4)
        acc0 = vfmaq_f32(acc0, vld1q_f32(x + i), vld1q_f32(y + i));
    float acc = vaddvq_f32(vaddq_f32(acc0, acc1));
    for (; i < n; ++i) acc += x[i] * y[i];
    return acc;
}

void gemm_nn_neon(std::size_t m, std::size_t k, std::size_t n,
                  const float* a, const float* b, float* c) {
    if (n < 4) {
        thread_local std::vector<float> bt;
        bt.resize(k * n);
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t j = 0; j < n; ++j) bt[j * k + p] = b[p * n + j];
        for (std::size_t i = 0; i < m; ++i) {
            const float* arow = a + i * k;
            float* crow = c + i * n;
            for (std::size_t j = 0; j < n; ++j)
                crow[j] += dot_neon(k, arow, bt.data() + j * k);
        }
        return;
    }
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * k;
        float* crow = c + i * n;
        for (std::size_t p = 0; p < k; ++p)
            if (arow[p] != 0.0f) axpy_neon(n, arow[p], b + p * n, crow);
    }
}

void gemm_tn_neon(std::size_t m, std::size_t k, std::size_t n,
                  const float* a, const float* b, float* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * k;
        const float* brow = b + i * n;
        for (std::size_t p = 0; p < k; ++p)
            if (arow[p] != 0.0f) axpy_neon(n, arow[p], brow, c + p * n);
    }
}

void gemm_nt_neon(std::size_t m, std::size_t k, std::size_t n,
                  const float* a, const float* b, float* c) {
    for (std::size_t i = 0; i < m; ++i) {
        const float* arow = a + i * n;
        float* crow = c + i * k;
        for (std::size_t p = 0; p < k; ++p)
            crow[p] += dot_neon(n, arow, b + p * n);
    }
}

void relu_fwd_neon(std::size_t n, const float* x, float* y) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        vst1q_f32(y + i, vmaxq_f32(vld1q_f32(x + i), zero));
    for (; i < n; ++i) y[i] = x[i] > 0.0f ? x[i] : 0.0f;
}

void relu_bwd_neon(std::size_t n, const float* x, const float* dy, float* dx) {
    const float32x4_t zero = vdupq_n_f32(0.0f);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const uint32x4_t mask = vcgtq_f32(vld1q_f32(x + i), zero);
        const float32x4_t add = vreinterpretq_f32_u32(
            vandq_u32(mask, vreinterpretq_u32_f32(vld1q_f32(dy + i))));
        vst1q_f32(dx + i, vaddq_f32(vld1q_f32(dx + i), add));
    }
    for (; i < n; ++i)
        if (x[i] > 0.0f) dx[i] += dy[i];
}

void adam_update_neon(std::size_t n, float* p, const float* g, float* m,
                      float* v, float lr, float beta1, float beta2, float eps,
                      float bc1, float bc2) {
    // sqrt/div lane counts are low enough that scalar keeps this simple and
    // bit-identical to the reference.
    ref::adam_update(n, p, g, m, v, lr, beta1, beta2, eps, bc1, bc2);
}

void disc_claim_neon(std::size_t n, const float* xs, float y, float cx,
                     float cy, float r2, float rank, float* owner) {
    const float dys = y - cy;
    const float dy2s = dys * dys;
    const float32x4_t dy2 = vdupq_n_f32(dy2s);
    const float32x4_t cxv = vdupq_n_f32(cx);
    const float32x4_t r2v = vdupq_n_f32(r2);
    const float32x4_t none = vdupq_n_f32(ref::kOwnerNone);
    const float32x4_t rankv = vdupq_n_f32(rank);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const float32x4_t dx = vsubq_f32(vld1q_f32(xs + i), cxv);
        const float32x4_t d2 = vaddq_f32(vmulq_f32(dx, dx), dy2);
        const float32x4_t ov = vld1q_f32(owner + i);
        const uint32x4_t claim =
            vandq_u32(vcleq_f32(d2, r2v), vceqq_f32(ov, none));
        vst1q_f32(owner + i, vbslq_f32(claim, rankv, ov));
    }
    for (; i < n; ++i) {
        const float dx = xs[i] - cx;
        if (dx * dx + dy2s <= r2 && owner[i] == ref::kOwnerNone)
            owner[i] = rank;
    }
}

}  // namespace

const KernelTable& neon_table() {
    static const KernelTable table = {
        "neon",
        axpy_neon,
        dot_neon,
        gemm_nn_neon,
        gemm_tn_neon,
        gemm_nt_neon,
        relu_fwd_neon,
        relu_bwd_neon,
        adam_update_neon,
        disc_claim_neon,
    };
    return table;
}

}  // namespace vin::kernels

#endif  // __aarch64__

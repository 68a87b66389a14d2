#include "vin/kernels/kernels.hpp"

namespace vin::kernels {

namespace {

void axpy_scalar(std::size_t n, float a, const float* x, float* y) {
    ref::axpy(n, a, x, y);
}
float dot_scalar(std::size_t n, const float* x, const float* y) {
    return ref::dot(n, x, y);
}
void gemm_nn_scalar(std::size_t m, std::size_t k, std::size_t n,
                    const float* a, const float* b, float* c) {
    ref::gemm_nn(m, k, n, a, b, c);
}
void gemm_tn_scalar(std::size_t m, std::size_t k, std::size_t n,
                    const float* a, const float* b, float* c) {
    ref::gemm_tn(m, k, n, a, b, c);
}
void gemm_nt_scalar(std::size_t m, std::size_t k, std::size_t n,
                    const float* a, const float* b, float* c) {
    ref::gemm_nt(m, k, n, a, b, c);
}
void relu_fwd_scalar(std::size_t n, const float* x, float* y) {
    ref::relu_fwd(n, x, y);
}
void relu_bwd_scalar(std::size_t n, const float* x, const float* dy, float* dx) {
    ref::relu_bwd(n, x, dy, dx);
}
void adam_update_scalar(std::size_t n, float* p, const float* g, float* m,
                        float* v, float lr, float beta1, float beta2,
                        float eps, float bc1, float bc2) {
    ref::adam_update(n, p, g, m, v, lr, beta1, beta2, eps, bc1, bc2);
}
void disc_claim_scalar(std::size_t n, const float* xs, float y, float cx,
                       float cy, float r2, float rank, float* owner) {
    ref::disc_claim(n, xs, y, cx, cy, r2, rank, owner);
}

}  // namespace

const KernelTable& scalar_table() {
    static const KernelTable table = {
        "scalar",
        axpy_scalar,
        dot_scalar,
        gemm_nn_scalar,
        gemm_tn_scalar,
        gemm_nt_scalar,
        relu_fwd_scalar,
        relu_bwd_scalar,
        adam_update_scalar,
        disc_claim_scalar,
    };
    return table;
}

}  // namespace vin::kernels

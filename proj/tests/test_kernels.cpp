// Equivalence tests: every SIMD kernel variant against the scalar reference.
// Predicate kernels (disc_claim) and the pure elementwise kernels must match
// bit-for-bit; reductions and gemms may reassociate, so those compare within
// a relative tolerance.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "vin/kernels/kernels.hpp"

using vin::kernels::KernelTable;

namespace {

std::vector<float> random_vec(std::mt19937_64& rng, std::size_t n,
                              float lo = -1.0f, float hi = 1.0f) {
    std::uniform_real_distribution<float> dist(lo, hi);
    std::vector<float> v(n);
    for (float& x : v) x = dist(rng);
    return v;
}

double max_rel_diff(const std::vector<float>& a, const std::vector<float>& b) {
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double mag = std::max({std::abs(double(a[i])),
                                     std::abs(double(b[i])), 1e-6});
        worst = std::max(worst, std::abs(double(a[i]) - double(b[i])) / mag);
    }
    return worst;
}

}  // namespace

TEST_CASE("active table is one of the available tables") {
    const auto tables = vin::kernels::available_tables();
    REQUIRE(!tables.empty());
    CHECK(tables[0]->name == std::string("scalar"));
    bool found = false;
    for (const KernelTable* t : tables)
        if (t == &vin::kernels::active()) found = true;
    CHECK(found);
}

TEST_CASE("axpy matches scalar reference") {
    std::mt19937_64 rng(11);
    for (const KernelTable* t : vin::kernels::available_tables()) {
        for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 64u, 131u}) {
            auto x = random_vec(rng, n);
            auto y0 = random_vec(rng, n);
            auto y1 = y0;
            vin::kernels::scalar_table().axpy(n, 0.37f, x.data(), y0.data());
            t->axpy(n, 0.37f, x.data(), y1.data());
            CHECK(max_rel_diff(y0, y1) < 1e-6);
        }
    }
}

TEST_CASE("dot matches scalar reference within accumulation tolerance") {
    std::mt19937_64 rng(12);
    for (const KernelTable* t : vin::kernels::available_tables()) {
        for (std::size_t n : {1u, 15u, 16u, 17u, 255u, 1024u}) {
            auto x = random_vec(rng, n);
            auto y = random_vec(rng, n);
            const float ref = vin::kernels::scalar_table().dot(n, x.data(), y.data());
            const float got = t->dot(n, x.data(), y.data());
            CHECK(std::abs(ref - got) <=
                  1e-5f * std::max({std::abs(ref), 1.0f}));
        }
    }
}

// Reassociated float sums differ by O(len * eps * |products|); compare on
// that scale rather than against the (possibly cancelling) result value.
namespace {
void check_accumulation_close(const std::vector<float>& c0,
                              const std::vector<float>& c1,
                              std::size_t acc_len) {
    REQUIRE(c0.size() == c1.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < c0.size(); ++i)
        worst = std::max(worst, std::abs(double(c0[i]) - double(c1[i])));
    CHECK(worst <= 1e-6 * double(acc_len));
}
}  // namespace

TEST_CASE("gemm variants match scalar reference") {
    std::mt19937_64 rng(13);
    struct Dims { std::size_t m, k, n; };
    // Narrow-N exercises the dot-product path (4-channel convolutions).
    const Dims sizes[] = {{3, 5, 4}, {7, 9, 3}, {16, 33, 17}, {25, 600, 4},
                          {64, 90, 16}, {1, 64, 64}};
    for (const KernelTable* t : vin::kernels::available_tables()) {
        for (const Dims& d : sizes) {
            auto a = random_vec(rng, d.m * d.k);
            auto b = random_vec(rng, d.k * d.n);
            std::vector<float> c0(d.m * d.n, 0.5f), c1 = c0;
            vin::kernels::scalar_table().gemm_nn(d.m, d.k, d.n, a.data(),
                                                 b.data(), c0.data());
            t->gemm_nn(d.m, d.k, d.n, a.data(), b.data(), c1.data());
            check_accumulation_close(c0, c1, d.k);

            auto bt = random_vec(rng, d.m * d.n);
            std::vector<float> ct0(d.k * d.n, 0.0f), ct1 = ct0;
            vin::kernels::scalar_table().gemm_tn(d.m, d.k, d.n, a.data(),
                                                 bt.data(), ct0.data());
            t->gemm_tn(d.m, d.k, d.n, a.data(), bt.data(), ct1.data());
            check_accumulation_close(ct0, ct1, d.m);

            auto an = random_vec(rng, d.m * d.n);
            auto bn = random_vec(rng, d.k * d.n);
            std::vector<float> cn0(d.m * d.k, 0.0f), cn1 = cn0;
            vin::kernels::scalar_table().gemm_nt(d.m, d.k, d.n, an.data(),
                                                 bn.data(), cn0.data());
            t->gemm_nt(d.m, d.k, d.n, an.data(), bn.data(), cn1.data());
            check_accumulation_close(cn0, cn1, d.n);
        }
    }
}

TEST_CASE("relu forward/backward match bit-exactly") {
    std::mt19937_64 rng(14);
    for (const KernelTable* t : vin::kernels::available_tables()) {
        const std::size_t n = 203;
        auto x = random_vec(rng, n);
        auto dy = random_vec(rng, n);
        std::vector<float> y0(n), y1(n);
        vin::kernels::scalar_table().relu_fwd(n, x.data(), y0.data());
        t->relu_fwd(n, x.data(), y1.data());
        CHECK(y0 == y1);
        std::vector<float> dx0(n, 0.25f), dx1 = dx0;
        vin::kernels::scalar_table().relu_bwd(n, x.data(), dy.data(), dx0.data());
        t->relu_bwd(n, x.data(), dy.data(), dx1.data());
        CHECK(dx0 == dx1);
    }
}

TEST_CASE("adam_update matches bit-exactly across variants") {
    std::mt19937_64 rng(15);
    for (const KernelTable* t : vin::kernels::available_tables()) {
        const std::size_t n = 77;
        auto g = random_vec(rng, n);
        auto p0 = random_vec(rng, n);
        auto m0 = random_vec(rng, n, 0.0f, 0.1f);
        auto v0 = random_vec(rng, n, 0.0f, 0.1f);
        auto p1 = p0, m1 = m0, v1 = v0;
        vin::kernels::scalar_table().adam_update(
            n, p0.data(), g.data(), m0.data(), v0.data(), 1e-3f, 0.9f, 0.999f,
            1e-8f, 10.0f, 1000.0f);
        t->adam_update(n, p1.data(), g.data(), m1.data(), v1.data(), 1e-3f,
                       0.9f, 0.999f, 1e-8f, 10.0f, 1000.0f);
        CHECK(p0 == p1);
        CHECK(m0 == m1);
        CHECK(v0 == v1);
    }
}

TEST_CASE("disc_claim matches bit-exactly across variants") {
    std::mt19937_64 rng(16);
    std::uniform_real_distribution<float> pos(0.0f, 1.0f);
    for (const KernelTable* t : vin::kernels::available_tables()) {
        for (int trial = 0; trial < 50; ++trial) {
            const std::size_t n = 480;
            std::vector<float> xs(n);
            for (std::size_t i = 0; i < n; ++i)
                xs[i] = (float(i) + 0.5f) / float(n);
            std::vector<float> owner0(n, vin::kernels::ref::kOwnerNone);
            // Pre-claim a random stretch so the "already claimed" branch runs.
            for (std::size_t i = 100; i < 160; ++i) owner0[i] = 2.0f;
            auto owner1 = owner0;
            const float y = pos(rng), cx = pos(rng), cy = pos(rng);
            const float r = 0.01f + 0.2f * pos(rng);
            vin::kernels::scalar_table().disc_claim(n, xs.data(), y, cx, cy,
                                                    r * r, 0.0f, owner0.data());
            t->disc_claim(n, xs.data(), y, cx, cy, r * r, 0.0f, owner1.data());
            CHECK(owner0 == owner1);
        }
    }
}

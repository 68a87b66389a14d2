#include "vin/kernels/kernels.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace vin::kernels {

#if defined(__x86_64__) || defined(_M_X64)
bool avx2_supported() {
#if defined(__GNUC__) || defined(__clang__)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}
#endif

std::vector<const KernelTable*> available_tables() {
    std::vector<const KernelTable*> tables{&scalar_table()};
#if defined(__x86_64__) || defined(_M_X64)
    if (avx2_supported()) tables.push_back(&avx2_table());
#endif
#if defined(__aarch64__)
    tables.push_back(&neon_table());
#endif
    return tables;
}

namespace {

const KernelTable& select() {
    if (const char* force = std::getenv("VIN_SIMD")) {
        for (const KernelTable* t : available_tables())
            if (std::strcmp(force, t->name) == 0) return *t;
        throw std::runtime_error(std::string("VIN_SIMD=") + force +
                                 " is not available on this machine");
    }
    return *available_tables().back();
}

}  // namespace

const KernelTable& active() {
    static const KernelTable& table = select();
    return table;
}

}  // namespace vin::kernels

#pragma once

// Dataset generation: simulate, render, persist. Train and test splits get
// disjoint seed streams and background pools; individual simulations are
// independent and generated concurrently.

#include <cstdint>
#include <string>

#include "vin/phys/types.hpp"

namespace vin::data {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

struct GenOptions {
    int train_sims = 64;
    int test_sims = 16;
    int threads = 0;  // 0: hardware concurrency
};

// Writes <out_dir>/train and <out_dir>/test.
void generate_dataset(const phys::SimSpec& spec, const std::string& out_dir,
                      const GenOptions& options);

// Single split; the spec's seed field is the split seed.
void generate_split(const phys::SimSpec& spec, const std::string& dir,
                    const std::string& split, int sims, int threads);

}  // namespace vin::data

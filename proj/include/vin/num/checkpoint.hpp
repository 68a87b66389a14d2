#pragma once

// Checkpoint container: a text manifest (metadata plus one line per tensor,
// name and shape, in order) followed by the raw parameter blobs as 32-bit
// little-endian floats in the same order. Round trips are bit-exact.

#include <map>
#include <string>
#include <vector>

#include "vin/num/tensor.hpp"

namespace vin::num {

struct Checkpoint {
    std::map<std::string, std::string> meta;
    std::vector<std::pair<std::string, Tensor<float>>> tensors;

    const Tensor<float>* find(const std::string& name) const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace vin::num

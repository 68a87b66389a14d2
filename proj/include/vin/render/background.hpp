#pragma once

// Background image sources: CIFAR-10 binary files, seeded procedural noise
// fields, or a solid color. A source is fixed per dataset split; one image
// is drawn per simulation and stays static within it.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vin/phys/types.hpp"
#include "vin/render/renderer.hpp"

namespace vin::render {

// CIFAR-10 binary records: 1 label byte + 3072 channel-planar pixel bytes.
constexpr std::size_t kCifarRecordBytes = 3073;

std::vector<Frame> load_cifar_file(const std::string& path);
Frame decode_cifar_record(const std::uint8_t* record);
void encode_cifar_record(const Frame& frame, std::uint8_t label,
                         std::uint8_t* record);

// Smooth random field (bilinear upsample of a coarse random grid).
Frame procedural_background(std::mt19937_64& rng);

class BackgroundSource {
public:
    enum class Kind { kCifar, kProcedural, kSolid };

    static BackgroundSource cifar(const std::string& path);
    static BackgroundSource procedural();
    static BackgroundSource solid(Rgb color);

    // Resolves the configured source for a split ("train" or "test").
    // A configured CIFAR source with no usable file falls back to
    // procedural noise; a present-but-malformed file is an error.
    static BackgroundSource open(const phys::RenderSettings& settings,
                                 const std::string& split);

    Kind kind() const { return kind_; }
    std::size_t pool_size() const { return pool_.size(); }

    Frame sample(std::mt19937_64& rng) const;

private:
    Kind kind_ = Kind::kSolid;
    std::vector<Frame> pool_;  // cifar images
    Rgb color_{};
};

}  // namespace vin::render

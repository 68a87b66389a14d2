#pragma once

// Rasterizes system states into 32x32 RGB frames: each visible object is a
// filled disc, each output pixel averages a 15x15 supersample grid, and
// overlaps resolve by the dataset-fixed color order (lower palette index is
// drawn in front). The per-row supersample claims run through the
// disc_claim kernel, so the SIMD and scalar paths produce identical bytes.

#include <array>
#include <cstdint>

#include "vin/phys/types.hpp"

namespace vin::render {

constexpr int kFrameSize = 32;
constexpr int kSupersample = 15;
constexpr int kFrameBytes = kFrameSize * kFrameSize * 3;

struct Frame {
    std::array<std::uint8_t, kFrameBytes> rgb{};

    std::uint8_t* data() { return rgb.data(); }
    const std::uint8_t* data() const { return rgb.data(); }
    std::uint8_t& at(int row, int col, int ch) {
        return rgb[std::size_t((row * kFrameSize + col) * 3 + ch)];
    }
    std::uint8_t at(int row, int col, int ch) const {
        return rgb[std::size_t((row * kFrameSize + col) * 3 + ch)];
    }
    bool operator==(const Frame&) const = default;
};

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
};

// Six saturated colors; palette index doubles as the occlusion rank.
using Palette = std::array<Rgb, 6>;
const Palette& default_palette();

Frame render_frame(const phys::SystemState& state, const Frame& background,
                   const Palette& palette = default_palette());

}  // namespace vin::render

#include "vin/render/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vin/kernels/kernels.hpp"

namespace vin::render {

const Palette& default_palette() {
    static const Palette palette = {{{228, 26, 28},
                                     {55, 126, 184},
                                     {77, 175, 74},
                                     {152, 78, 163},
                                     {255, 127, 0},
                                     {255, 255, 51}}};
    return palette;
}

namespace {

constexpr int kSub = kSupersample;
constexpr int kSubRow = kFrameSize * kSub;  // 480 supersample columns

// Supersample center coordinates, shared by x and y.
const float* sub_coords() {
    static const std::array<float, kSubRow> coords = [] {
        std::array<float, kSubRow> c{};
        for (int i = 0; i < kSubRow; ++i)
            c[std::size_t(i)] = (float(i) + 0.5f) / float(kSubRow);
        return c;
    }();
    return coords.data();
}

struct Disc {
    float cx, cy, r2;
    std::uint8_t rank;
    int col_begin, col_end;  // pixel bbox, [begin, end)
    int row_begin, row_end;
};

}  // namespace

Frame render_frame(const phys::SystemState& state, const Frame& background,
                   const Palette& palette) {
    Frame out = background;

    std::vector<Disc> discs;
    discs.reserve(state.size());
    for (const phys::ObjectState& o : state) {
        if (!o.visible) continue;
        if (o.color_index < 0 ||
            o.color_index >= static_cast<int>(palette.size()))
            throw std::invalid_argument(
                "render_frame: color index outside the palette");
        Disc d;
        d.cx = float(o.pos.x);
        d.cy = float(o.pos.y);
        d.r2 = float(o.radius * o.radius);
        d.rank = std::uint8_t(o.color_index);
        const double r = o.radius;
        d.col_begin = std::clamp(int(std::floor((o.pos.x - r) * kFrameSize)), 0,
                                 kFrameSize);
        d.col_end = std::clamp(int(std::ceil((o.pos.x + r) * kFrameSize)), 0,
                               kFrameSize);
        d.row_begin = std::clamp(int(std::floor((o.pos.y - r) * kFrameSize)), 0,
                                 kFrameSize);
        d.row_end = std::clamp(int(std::ceil((o.pos.y + r) * kFrameSize)), 0,
                               kFrameSize);
        if (d.col_begin < d.col_end && d.row_begin < d.row_end)
            discs.push_back(d);
    }
    if (discs.empty()) return out;
    // Fixed occlusion order: lowest palette index claims first (foreground).
    std::stable_sort(discs.begin(), discs.end(),
                     [](const Disc& a, const Disc& b) { return a.rank < b.rank; });

    const float* xs = sub_coords();
    const auto& claim = kernels::active().disc_claim;
    std::array<float, std::size_t(kSub) * kSubRow> owner;

    for (int row = 0; row < kFrameSize; ++row) {
        int col_lo = kFrameSize, col_hi = 0;
        for (const Disc& d : discs) {
            if (row < d.row_begin || row >= d.row_end) continue;
            col_lo = std::min(col_lo, d.col_begin);
            col_hi = std::max(col_hi, d.col_end);
        }
        if (col_lo >= col_hi) continue;

        const int sub_lo = col_lo * kSub;
        const int sub_hi = col_hi * kSub;
        for (int sy = 0; sy < kSub; ++sy)
            std::fill(owner.begin() + sy * kSubRow + sub_lo,
                      owner.begin() + sy * kSubRow + sub_hi,
                      kernels::ref::kOwnerNone);

        for (const Disc& d : discs) {
            if (row < d.row_begin || row >= d.row_end) continue;
            const int lo = d.col_begin * kSub;
            const int hi = d.col_end * kSub;
            for (int sy = 0; sy < kSub; ++sy) {
                const float y = xs[row * kSub + sy];
                claim(std::size_t(hi - lo), xs + lo, y, d.cx, d.cy, d.r2,
                      float(d.rank), owner.data() + sy * kSubRow + lo);
            }
        }

        for (int col = col_lo; col < col_hi; ++col) {
            int counts[6] = {0, 0, 0, 0, 0, 0};
            int claimed = 0;
            for (int sy = 0; sy < kSub; ++sy) {
                const float* slice = owner.data() + sy * kSubRow + col * kSub;
                for (int sx = 0; sx < kSub; ++sx) {
                    if (slice[sx] != kernels::ref::kOwnerNone) {
                        ++counts[int(slice[sx])];
                        ++claimed;
                    }
                }
            }
            if (claimed == 0) continue;
            const int total = kSub * kSub;
            const int bg_count = total - claimed;
            for (int ch = 0; ch < 3; ++ch) {
                int sum = bg_count * int(background.at(row, col, ch));
                for (std::size_t rank = 0; rank < palette.size(); ++rank) {
                    if (counts[rank] == 0) continue;
                    const Rgb& c = palette[rank];
                    const int v = ch == 0 ? c.r : (ch == 1 ? c.g : c.b);
                    sum += counts[rank] * v;
                }
                out.at(row, col, ch) =
                    std::uint8_t((sum + total / 2) / total);
            }
        }
    }
    return out;
}

}  // namespace vin::render

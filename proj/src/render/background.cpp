#include "vin/render/background.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

namespace vin::render {

Frame decode_cifar_record(const std::uint8_t* record) {
    Frame f;
    const std::uint8_t* planes = record + 1;  // skip label
    for (int ch = 0; ch < 3; ++ch)
        for (int px = 0; px < kFrameSize * kFrameSize; ++px)
            f.rgb[std::size_t(px) * 3 + ch] = planes[ch * 1024 + px];
    return f;
}

void encode_cifar_record(const Frame& frame, std::uint8_t label,
                         std::uint8_t* record) {
    record[0] = label;
    std::uint8_t* planes = record + 1;
    for (int ch = 0; ch < 3; ++ch)
        for (int px = 0; px < kFrameSize * kFrameSize; ++px)
            planes[ch * 1024 + px] = frame.rgb[std::size_t(px) * 3 + ch];
}

std::vector<Frame> load_cifar_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary | std::ios::ate);
    if (!is) throw std::runtime_error("cifar: cannot open " + path);
    const auto size = std::size_t(is.tellg());
    if (size == 0 || size % kCifarRecordBytes != 0)
        throw std::runtime_error("cifar: " + path + " has size " +
                                 std::to_string(size) +
                                 ", not a multiple of 3073");
    is.seekg(0);
    const std::size_t count = size / kCifarRecordBytes;
    std::vector<std::uint8_t> record(kCifarRecordBytes);
    std::vector<Frame> frames;
    frames.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        is.read(reinterpret_cast<char*>(record.data()),
                std::streamsize(record.size()));
        if (!is) throw std::runtime_error("cifar: short read from " + path);
        frames.push_back(decode_cifar_record(record.data()));
    }
    return frames;
}

Frame procedural_background(std::mt19937_64& rng) {
    // Coarse 5x5 random grid, bilinearly upsampled. Kept fairly dark so the
    // palette colors stay salient.
    constexpr int kGrid = 5;
    std::uniform_int_distribution<int> level(8, 150);
    int grid[kGrid][kGrid][3];
    for (int r = 0; r < kGrid; ++r)
        for (int c = 0; c < kGrid; ++c)
            for (int ch = 0; ch < 3; ++ch) grid[r][c][ch] = level(rng);

    Frame f;
    for (int r = 0; r < kFrameSize; ++r) {
        const double v = double(r) * (kGrid - 1) / (kFrameSize - 1);
        const int r0 = int(v) < kGrid - 1 ? int(v) : kGrid - 2;
        const double fv = v - r0;
        for (int c = 0; c < kFrameSize; ++c) {
            const double u = double(c) * (kGrid - 1) / (kFrameSize - 1);
            const int c0 = int(u) < kGrid - 1 ? int(u) : kGrid - 2;
            const double fu = u - c0;
            for (int ch = 0; ch < 3; ++ch) {
                const double top = grid[r0][c0][ch] * (1 - fu) +
                                   grid[r0][c0 + 1][ch] * fu;
                const double bot = grid[r0 + 1][c0][ch] * (1 - fu) +
                                   grid[r0 + 1][c0 + 1][ch] * fu;
                f.at(r, c, ch) = std::uint8_t(top * (1 - fv) + bot * fv + 0.5);
            }
        }
    }
    return f;
}

BackgroundSource BackgroundSource::cifar(const std::string& path) {
    BackgroundSource s;
    s.kind_ = Kind::kCifar;
    s.pool_ = load_cifar_file(path);
    return s;
}

BackgroundSource BackgroundSource::procedural() {
    BackgroundSource s;
    s.kind_ = Kind::kProcedural;
    return s;
}

BackgroundSource BackgroundSource::solid(Rgb color) {
    BackgroundSource s;
    s.kind_ = Kind::kSolid;
    s.color_ = color;
    return s;
}

BackgroundSource BackgroundSource::open(const phys::RenderSettings& settings,
                                        const std::string& split) {
    if (settings.background == "solid") return solid({0, 0, 0});
    if (settings.background == "cifar") {
        const std::string& path = split == "test" ? settings.cifar_test_path
                                                  : settings.cifar_train_path;
        if (!path.empty() && std::filesystem::exists(path)) return cifar(path);
        return procedural();  // configured fallback: keeps gen runnable
    }
    if (settings.background == "procedural") return procedural();
    throw std::invalid_argument("unknown background source '" +
                                settings.background + "'");
}

Frame BackgroundSource::sample(std::mt19937_64& rng) const {
    switch (kind_) {
        case Kind::kCifar: {
            std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
            return pool_[pick(rng)];
        }
        case Kind::kProcedural:
            return procedural_background(rng);
        case Kind::kSolid: {
            Frame f;
            for (int px = 0; px < kFrameSize * kFrameSize; ++px) {
                f.rgb[std::size_t(px) * 3 + 0] = color_.r;
                f.rgb[std::size_t(px) * 3 + 1] = color_.g;
                f.rgb[std::size_t(px) * 3 + 2] = color_.b;
            }
            return f;
        }
    }
    return {};
}

}  // namespace vin::render

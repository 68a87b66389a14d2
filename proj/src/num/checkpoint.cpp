#include "vin/num/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace vin::num {

namespace {

constexpr const char* kMagic = "VINLAB-CHECKPOINT v1";

void write_f32_le(std::ostream& os, const float* data, std::size_t n) {
    static_assert(sizeof(float) == 4);
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(data),
                 static_cast<std::streamsize>(n * 4));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            std::uint32_t u;
            std::memcpy(&u, &data[i], 4);
            char b[4] = {char(u), char(u >> 8), char(u >> 16), char(u >> 24)};
            os.write(b, 4);
        }
    }
}

void read_f32_le(std::istream& is, float* data, std::size_t n) {
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(data),
                static_cast<std::streamsize>(n * 4));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            unsigned char b[4];
            is.read(reinterpret_cast<char*>(b), 4);
            std::uint32_t u = std::uint32_t(b[0]) | std::uint32_t(b[1]) << 8 |
                              std::uint32_t(b[2]) << 16 |
                              std::uint32_t(b[3]) << 24;
            std::memcpy(&data[i], &u, 4);
        }
    }
    if (!is) throw std::runtime_error("checkpoint: truncated tensor data");
}

}  // namespace

const Tensor<float>* Checkpoint::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
    os << kMagic << "\n";
    for (const auto& [k, v] : ckpt.meta) os << "meta " << k << " " << v << "\n";
    for (const auto& [name, t] : ckpt.tensors) {
        os << "tensor " << name;
        for (int d : t.shape()) os << " " << d;
        os << "\n";
    }
    os << "data\n";
    for (const auto& [name, t] : ckpt.tensors)
        write_f32_le(os, t.data(), t.size());
    if (!os) throw std::runtime_error("checkpoint: short write to " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line != kMagic)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    Checkpoint ckpt;
    std::vector<std::pair<std::string, Shape>> manifest;
    while (std::getline(is, line)) {
        if (line == "data") break;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "meta") {
            std::string key;
            ls >> key;
            std::string value;
            std::getline(ls, value);
            if (!value.empty() && value[0] == ' ') value.erase(0, 1);
            ckpt.meta[key] = value;
        } else if (kind == "tensor") {
            std::string name;
            ls >> name;
            Shape shape;
            int d;
            while (ls >> d) shape.push_back(d);
            manifest.emplace_back(name, std::move(shape));
        } else {
            throw std::runtime_error("checkpoint: unexpected manifest line: " +
                                     line);
        }
    }
    for (auto& [name, shape] : manifest) {
        Tensor<float> t = Tensor<float>::zeros(shape);
        read_f32_le(is, t.data(), t.size());
        ckpt.tensors.emplace_back(name, std::move(t));
    }
    return ckpt;
}

}  // namespace vin::num

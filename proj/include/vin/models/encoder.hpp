#pragma once

// Visual encoder: a frame-pair CNN applied to consecutive pairs, a shared
// linear lift to per-object slots, and a slot-wise MLP that fuses the two
// pair codes of each frame triplet into a state code.

#include "vin/models/layers.hpp"

namespace vin::models {

constexpr int kFrameSize = 32;
constexpr int kPairCodeLen = 32;
constexpr int kSlotLen = 64;

template <class T>
Tensor<T> coordinate_channels() {
    // Constant x/y meshgrid, 0 at pixel 0 and 1 at pixel 31.
    Tensor<T> c = Tensor<T>::zeros({kFrameSize, kFrameSize, 2});
    for (int r = 0; r < kFrameSize; ++r)
        for (int col = 0; col < kFrameSize; ++col) {
            c.data()[(r * kFrameSize + col) * 2 + 0] =
                T(col) / T(kFrameSize - 1);
            c.data()[(r * kFrameSize + col) * 2 + 1] =
                T(r) / T(kFrameSize - 1);
        }
    return c;
}

template <class T>
struct FramePairEncoder {
    // Two parallel 2-layer stacks on the channel-stacked pair.
    ConvLayer<T> wide1, wide2;      // kernel 10, 4 channels
    ConvLayer<T> narrow1, narrow2;  // kernel 3, 16 channels
    // Fusion of the stacked branches.
    ConvLayer<T> fuse1, fuse2;  // kernel 3, 16 channels
    // Five conv+pool stages down to 1x1: channels 16,16,16,32,32.
    std::array<ConvLayer<T>, 5> pyramid;
    Tensor<T> coords;  // constant [32,32,2]

    static FramePairEncoder init(InitRng& rng) {
        FramePairEncoder e;
        e.wide1 = ConvLayer<T>::init(rng, 10, 6, 4);
        e.wide2 = ConvLayer<T>::init(rng, 10, 4, 4);
        e.narrow1 = ConvLayer<T>::init(rng, 3, 6, 16);
        e.narrow2 = ConvLayer<T>::init(rng, 3, 16, 16);
        e.fuse1 = ConvLayer<T>::init(rng, 3, 20, 16);
        e.fuse2 = ConvLayer<T>::init(rng, 3, 16, 16);
        const int pyramid_in[5] = {18, 16, 16, 16, 32};
        const int pyramid_out[5] = {16, 16, 16, 32, 32};
        for (int i = 0; i < 5; ++i)
            e.pyramid[std::size_t(i)] =
                ConvLayer<T>::init(rng, 3, pyramid_in[i], pyramid_out[i]);
        e.coords = coordinate_channels<T>();
        return e;
    }

    // pair: channel-stacked consecutive frames, [32 x 32 x 6].
    Tensor<T> encode(Tape<T>& tape, const Tensor<T>& pair) const {
        if (pair.shape() != Shape{kFrameSize, kFrameSize, 6})
            throw std::invalid_argument("frame pair encoder expects 32x32x6");
        Tensor<T> a = wide2.apply(tape, wide1.apply(tape, pair));
        Tensor<T> b = narrow2.apply(tape, narrow1.apply(tape, pair));
        Tensor<T> s = num::concat_channels(tape, {a, b});  // 20 channels
        s = fuse2.apply(tape, fuse1.apply(tape, s));       // 16 channels
        s = num::concat_channels(tape, {s, coords});       // 18 channels
        for (const ConvLayer<T>& conv : pyramid)
            s = num::maxpool2(tape, conv.apply(tape, s));
        return num::reshape(tape, s, {kPairCodeLen});
    }

    std::size_t count() const {
        std::size_t n = wide1.count() + wide2.count() + narrow1.count() +
                        narrow2.count() + fuse1.count() + fuse2.count();
        for (const auto& p : pyramid) n += p.count();
        return n;
    }

    template <class F>
    void visit(const std::string& prefix, F&& f) {
        wide1.visit(prefix + ".wide1", f);
        wide2.visit(prefix + ".wide2", f);
        narrow1.visit(prefix + ".narrow1", f);
        narrow2.visit(prefix + ".narrow2", f);
        fuse1.visit(prefix + ".fuse1", f);
        fuse2.visit(prefix + ".fuse2", f);
        for (std::size_t i = 0; i < pyramid.size(); ++i)
            pyramid[i].visit(prefix + ".pyramid" + std::to_string(i), f);
    }
};

template <class T>
struct VisualEncoder {
    FramePairEncoder<T> pair;
    LinearLayer<T> to_slots;  // 32 -> n_object * 64, shared across pairs
    Mlp<T> slot_mlp;          // 128 -> [64, 64], shared across slots
    int n_object = 0;

    static VisualEncoder init(InitRng& rng, int n_object) {
        VisualEncoder e;
        e.pair = FramePairEncoder<T>::init(rng);
        e.to_slots = LinearLayer<T>::init(rng, kPairCodeLen, n_object * kSlotLen);
        e.slot_mlp = Mlp<T>::init(rng, 2 * kSlotLen, {64, kSlotLen});
        e.n_object = n_object;
        return e;
    }

    // frames: >= 3 consecutive [32,32,3] frames in [0,1]. Returns one state
    // code per triplet; consecutive triplets share their pair encodings.
    std::vector<Tensor<T>> encode_window(
        Tape<T>& tape, const std::vector<Tensor<T>>& frames) const {
        if (frames.size() < 3)
            throw std::invalid_argument("encoder window needs >= 3 frames");
        std::vector<Tensor<T>> pair_slots;
        for (std::size_t i = 0; i + 1 < frames.size(); ++i) {
            Tensor<T> stacked =
                num::concat_channels(tape, {frames[i], frames[i + 1]});
            Tensor<T> code = pair.encode(tape, stacked);
            pair_slots.push_back(num::reshape(
                tape, to_slots.apply(tape, code), {n_object, kSlotLen}));
        }
        std::vector<Tensor<T>> codes;
        for (std::size_t i = 0; i + 1 < pair_slots.size(); ++i) {
            Tensor<T> cat = num::concat_cols(
                tape, {pair_slots[i], pair_slots[i + 1]});  // [n x 128]
            codes.push_back(slot_mlp.apply(tape, cat));
        }
        return codes;
    }

    Tensor<T> encode_triplet(Tape<T>& tape, const Tensor<T>& f1,
                             const Tensor<T>& f2, const Tensor<T>& f3) const {
        return encode_window(tape, {f1, f2, f3})[0];
    }

    std::size_t count() const {
        return pair.count() + to_slots.count() + slot_mlp.count();
    }

    template <class F>
    void visit(const std::string& prefix, F&& f) {
        pair.visit(prefix + ".pair", f);
        to_slots.visit(prefix + ".to_slots", f);
        slot_mlp.visit(prefix + ".slot_mlp", f);
    }
};

}  // namespace vin::models

#pragma once

// Dataset persistence and sampling. One directory per split:
//   manifest.txt  key = value (dataset fields plus the SimSpec snapshot)
//   frames.bin    bytes, [sim][frame][row][col][channel]
//   states.bin    float32 little-endian, [sim][frame][object][px,py,vx,vy]
// Round trips are bit-exact; counts are validated against file sizes.

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "vin/phys/types.hpp"
#include "vin/render/renderer.hpp"

namespace vin::data {

constexpr int kSampleFrames = 14;     // 6 observed + 8 prediction targets
constexpr int kObservedFrames = 6;
constexpr int kHorizon = 8;
constexpr int kStateDim = 4;          // px, py, vx, vy

struct DatasetManifest {
    int format_version = 1;
    std::string split;  // train | test
    int simulations = 0;
    phys::SimSpec spec;  // system tag, n_object, frames, seed, constants
};

// Streaming writer; refuses to overwrite an incompatible existing dataset.
class DatasetWriter {
public:
    DatasetWriter(const std::string& dir, const DatasetManifest& manifest);
    ~DatasetWriter();
    DatasetWriter(const DatasetWriter&) = delete;
    DatasetWriter& operator=(const DatasetWriter&) = delete;

    void append(const std::vector<render::Frame>& frames,
                const phys::Trajectory& states);
    void finish();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class Dataset {
public:
    static Dataset load(const std::string& dir, bool with_frames = true);

    const DatasetManifest& manifest() const { return manifest_; }
    int n_sims() const { return manifest_.simulations; }
    int n_frames() const { return manifest_.spec.frames; }
    int n_object() const { return manifest_.spec.n_object; }
    bool has_frames() const { return !frames_.empty(); }

    const render::Frame& frame(int sim, int t) const;
    // Pointer to n_object * 4 floats.
    const float* state(int sim, int t) const;

private:
    DatasetManifest manifest_;
    std::vector<render::Frame> frames_;
    std::vector<float> states_;
};

// One training window: 14 consecutive frames/states of one simulation.
struct TrainingSample {
    const Dataset* dataset = nullptr;
    int sim = 0;
    int offset = 0;  // window start; in [0, frames - 14]

    const render::Frame& frame(int k) const {
        return dataset->frame(sim, offset + k);
    }
    const float* state(int k) const { return dataset->state(sim, offset + k); }
};

std::vector<TrainingSample> sample_batch(const Dataset& dataset,
                                         int batch_size, std::mt19937_64& rng);

}  // namespace vin::data

#include "vin/data/dataset.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "vin/phys/config.hpp"

namespace fs = std::filesystem;

namespace vin::data {

namespace {

static_assert(std::endian::native == std::endian::little,
              "states.bin writer assumes a little-endian host");

phys::KeyValues manifest_to_kv(const DatasetManifest& m) {
    phys::KeyValues kv = phys::spec_to_kv(m.spec);
    kv["format_version"] = std::to_string(m.format_version);
    kv["split"] = m.split;
    kv["simulations"] = std::to_string(m.simulations);
    return kv;
}

DatasetManifest manifest_from_kv(const phys::KeyValues& kv) {
    DatasetManifest m;
    m.spec = phys::spec_from_kv(kv);
    m.format_version = std::stoi(kv.at("format_version"));
    if (m.format_version != 1)
        throw std::runtime_error("dataset: unsupported format version " +
                                 std::to_string(m.format_version));
    m.split = kv.at("split");
    m.simulations = std::stoi(kv.at("simulations"));
    return m;
}

}  // namespace

struct DatasetWriter::Impl {
    std::string dir;
    DatasetManifest manifest;
    std::ofstream frames;
    std::ofstream states;
    int written = 0;
    bool finished = false;
};

DatasetWriter::DatasetWriter(const std::string& dir,
                             const DatasetManifest& manifest)
    : impl_(std::make_unique<Impl>()) {
    impl_->dir = dir;
    impl_->manifest = manifest;
    fs::create_directories(dir);
    const std::string manifest_path = dir + "/manifest.txt";
    if (fs::exists(manifest_path)) {
        const phys::KeyValues existing = phys::load_kv_file(manifest_path);
        if (existing != manifest_to_kv(manifest))
            throw std::runtime_error(
                "dataset: " + dir +
                " already holds an incompatible dataset (manifest differs)");
    }
    phys::save_kv_file(manifest_to_kv(manifest), manifest_path);
    impl_->frames.open(dir + "/frames.bin", std::ios::binary | std::ios::trunc);
    impl_->states.open(dir + "/states.bin", std::ios::binary | std::ios::trunc);
    if (!impl_->frames || !impl_->states)
        throw std::runtime_error("dataset: cannot open payload files in " + dir);
}

DatasetWriter::~DatasetWriter() = default;

void DatasetWriter::append(const std::vector<render::Frame>& frames,
                           const phys::Trajectory& states) {
    Impl& im = *impl_;
    const phys::SimSpec& spec = im.manifest.spec;
    if (int(frames.size()) != spec.frames ||
        states.n_frames() != spec.frames || states.n_object() != spec.n_object)
        throw std::invalid_argument("dataset: record does not match manifest");
    for (const render::Frame& f : frames)
        im.frames.write(reinterpret_cast<const char*>(f.data()),
                        render::kFrameBytes);
    std::vector<float> buf;
    buf.reserve(std::size_t(spec.frames) * spec.n_object * kStateDim);
    for (const phys::SystemState& s : states.frames)
        for (const phys::ObjectState& o : s) {
            buf.push_back(float(o.pos.x));
            buf.push_back(float(o.pos.y));
            buf.push_back(float(o.vel.x));
            buf.push_back(float(o.vel.y));
        }
    im.states.write(reinterpret_cast<const char*>(buf.data()),
                    std::streamsize(buf.size() * sizeof(float)));
    if (!im.frames || !im.states)
        throw std::runtime_error("dataset: short write in " + im.dir);
    ++im.written;
}

void DatasetWriter::finish() {
    Impl& im = *impl_;
    if (im.finished) return;
    im.frames.flush();
    im.states.flush();
    if (!im.frames || !im.states)
        throw std::runtime_error("dataset: short write in " + im.dir);
    if (im.written != im.manifest.simulations)
        throw std::runtime_error(
            "dataset: wrote " + std::to_string(im.written) + " simulations, " +
            "manifest promises " + std::to_string(im.manifest.simulations));
    im.finished = true;
}

Dataset Dataset::load(const std::string& dir, bool with_frames) {
    Dataset d;
    d.manifest_ = manifest_from_kv(phys::load_kv_file(dir + "/manifest.txt"));
    const phys::SimSpec& spec = d.manifest_.spec;
    const std::size_t sims = std::size_t(d.manifest_.simulations);
    const std::size_t frames_expected =
        sims * std::size_t(spec.frames) * render::kFrameBytes;
    const std::size_t state_floats =
        sims * std::size_t(spec.frames) * std::size_t(spec.n_object) * kStateDim;

    {
        std::ifstream is(dir + "/states.bin", std::ios::binary | std::ios::ate);
        if (!is) throw std::runtime_error("dataset: missing states.bin in " + dir);
        if (std::size_t(is.tellg()) != state_floats * sizeof(float))
            throw std::runtime_error("dataset: states.bin size mismatch in " +
                                     dir);
        is.seekg(0);
        d.states_.resize(state_floats);
        is.read(reinterpret_cast<char*>(d.states_.data()),
                std::streamsize(state_floats * sizeof(float)));
        if (!is) throw std::runtime_error("dataset: short read of states.bin");
    }
    if (with_frames) {
        std::ifstream is(dir + "/frames.bin", std::ios::binary | std::ios::ate);
        if (!is) throw std::runtime_error("dataset: missing frames.bin in " + dir);
        if (std::size_t(is.tellg()) != frames_expected)
            throw std::runtime_error("dataset: frames.bin size mismatch in " +
                                     dir);
        is.seekg(0);
        d.frames_.resize(sims * std::size_t(spec.frames));
        is.read(reinterpret_cast<char*>(d.frames_.data()->data()),
                std::streamsize(frames_expected));
        if (!is) throw std::runtime_error("dataset: short read of frames.bin");
    }
    return d;
}

const render::Frame& Dataset::frame(int sim, int t) const {
    return frames_[std::size_t(sim) * std::size_t(n_frames()) + std::size_t(t)];
}

const float* Dataset::state(int sim, int t) const {
    const std::size_t per_frame = std::size_t(n_object()) * kStateDim;
    return states_.data() +
           (std::size_t(sim) * std::size_t(n_frames()) + std::size_t(t)) *
               per_frame;
}

std::vector<TrainingSample> sample_batch(const Dataset& dataset,
                                         int batch_size, std::mt19937_64& rng) {
    if (dataset.n_sims() < 1)
        throw std::invalid_argument("sample_batch: empty dataset");
    const int max_offset = dataset.n_frames() - kSampleFrames;
    if (max_offset < 0)
        throw std::invalid_argument("sample_batch: simulations shorter than 14");
    std::uniform_int_distribution<int> pick_sim(0, dataset.n_sims() - 1);
    std::uniform_int_distribution<int> pick_off(0, max_offset);
    std::vector<TrainingSample> batch;
    batch.reserve(std::size_t(batch_size));
    for (int i = 0; i < batch_size; ++i) {
        TrainingSample s;
        s.dataset = &dataset;
        s.sim = pick_sim(rng);
        s.offset = pick_off(rng);
        batch.push_back(s);
    }
    return batch;
}

}  // namespace vin::data

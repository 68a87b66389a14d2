#include "vin/data/generate.hpp"

#include <atomic>
#include <thread>

#include "vin/data/dataset.hpp"
#include "vin/phys/engine.hpp"
#include "vin/render/background.hpp"

namespace vin::data {

namespace {

struct SimRecord {
    std::vector<render::Frame> frames;
    phys::Trajectory states;
};

SimRecord make_record(const phys::SimSpec& base,
                      const render::BackgroundSource& background,
                      std::uint64_t sim_seed) {
    phys::SimSpec spec = base;
    spec.seed = sim_seed;
    SimRecord rec;
    rec.states = phys::simulate(spec);
    std::mt19937_64 bg_rng(mix_seed(sim_seed, 0xb6));
    const render::Frame bg = background.sample(bg_rng);
    rec.frames.reserve(std::size_t(spec.frames));
    for (const phys::SystemState& s : rec.states.frames)
        rec.frames.push_back(render::render_frame(s, bg));
    return rec;
}

}  // namespace

void generate_split(const phys::SimSpec& spec, const std::string& dir,
                    const std::string& split, int sims, int threads) {
    DatasetManifest manifest;
    manifest.split = split;
    manifest.simulations = sims;
    manifest.spec = spec;
    DatasetWriter writer(dir, manifest);

    const render::BackgroundSource background =
        render::BackgroundSource::open(spec.render, split);

    if (threads <= 0)
        threads = int(std::max(1u, std::thread::hardware_concurrency()));
    const int block = std::max(threads * 4, 8);
    std::vector<SimRecord> records{std::size_t(block)};
    for (int begin = 0; begin < sims; begin += block) {
        const int end = std::min(begin + block, sims);
        std::atomic<int> next{begin};
        auto worker = [&] {
            for (int i = next.fetch_add(1); i < end; i = next.fetch_add(1))
                records[std::size_t(i - begin)] =
                    make_record(spec, background, mix_seed(spec.seed, std::uint64_t(i)));
        };
        std::vector<std::thread> pool;
        for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
        worker();
        for (std::thread& t : pool) t.join();
        for (int i = begin; i < end; ++i) {
            SimRecord& rec = records[std::size_t(i - begin)];
            writer.append(rec.frames, rec.states);
            rec = SimRecord{};
        }
    }
    writer.finish();
}

void generate_dataset(const phys::SimSpec& spec, const std::string& out_dir,
                      const GenOptions& options) {
    phys::SimSpec train = spec;
    phys::SimSpec test = spec;
    // Disjoint seed streams per split.
    test.seed = mix_seed(spec.seed, 0x7e57);
    generate_split(train, out_dir + "/train", "train", options.train_sims,
                   options.threads);
    generate_split(test, out_dir + "/test", "test", options.test_sims,
                   options.threads);
}

}  // namespace vin::data

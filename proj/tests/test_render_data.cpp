#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "vin/data/dataset.hpp"
#include "vin/data/generate.hpp"
#include "vin/phys/config.hpp"
#include "vin/phys/engine.hpp"
#include "vin/render/background.hpp"

using namespace vin;
using render::Frame;

namespace {

std::string cfg(const std::string& name) {
    return std::string(VIN_CONFIG_DIR) + "/" + name;
}

phys::ObjectState disc(double x, double y, double r, int color) {
    phys::ObjectState o;
    o.pos = {x, y};
    o.radius = r;
    o.color_index = color;
    return o;
}

Frame black() { return Frame{}; }

double added_intensity(const Frame& f, int channel) {
    double sum = 0;
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c) sum += f.at(r, c, channel) / 255.0;
    return sum;
}

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("empty scene renders the background exactly") {
    std::mt19937_64 rng(31);
    Frame bg = render::procedural_background(rng);
    Frame out = render::render_frame({}, bg);
    CHECK(out == bg);
}

TEST_CASE("invisible objects leave no pixel trace") {
    std::mt19937_64 rng(32);
    Frame bg = render::procedural_background(rng);
    phys::SystemState with{disc(0.3, 0.4, 0.0625, 0), disc(0.7, 0.6, 0.0625, 1)};
    phys::SystemState without{with[0]};
    with[1].visible = false;
    CHECK(render::render_frame(with, bg) == render::render_frame(without, bg));
}

TEST_CASE("rendering is a pure function of its inputs") {
    std::mt19937_64 rng(33);
    Frame bg = render::procedural_background(rng);
    phys::SystemState s{disc(0.41371, 0.52791, 0.0625, 0),
                        disc(0.55, 0.5, 0.0625, 1)};
    CHECK(render::render_frame(s, bg) == render::render_frame(s, bg));
}

TEST_CASE("a subsample-sized displacement changes at least one pixel") {
    Frame bg = black();
    const double eps = 1.0 / (15.0 * 32.0);
    phys::SystemState a{disc(0.41371, 0.52791, 0.0625, 0)};
    phys::SystemState b{disc(0.41371 + eps, 0.52791, 0.0625, 0)};
    CHECK(render::render_frame(a, bg) != render::render_frame(b, bg));
}

TEST_CASE("disc coverage approximates its area within 2 percent") {
    Frame bg = black();
    // Red disc; intensity in the red channel, pixel-area units.
    const double r_px = 2.0;
    phys::SystemState s{disc(0.48731, 0.51193, r_px / 32.0, 0)};
    Frame out = render::render_frame(s, bg);
    const double area = M_PI * r_px * r_px;
    const double measured = added_intensity(out, 0) * 255.0 / 228.0;
    CHECK(std::abs(measured - area) / area < 0.02);
}

TEST_CASE("whole-pixel translation shifts the footprint exactly") {
    Frame bg = black();
    phys::SystemState a{disc(0.41371, 0.52791, 0.0625, 0)};
    phys::SystemState b{disc(0.41371 + 1.0 / 32.0, 0.52791, 0.0625, 0)};
    Frame fa = render::render_frame(a, bg);
    Frame fb = render::render_frame(b, bg);
    const std::uint8_t full = 228;  // palette red, fully covered
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 31; ++c)
            if (fa.at(r, c, 0) == full) CHECK(fb.at(r, c + 1, 0) == full);
}

TEST_CASE("occlusion follows the fixed palette order") {
    Frame bg = black();
    // Two coincident discs; the lower color index wins the overlap.
    phys::SystemState s{disc(0.5, 0.5, 0.0625, 1), disc(0.5, 0.5, 0.0625, 0)};
    Frame out = render::render_frame(s, bg);
    const auto& pal = render::default_palette();
    CHECK(out.at(16, 16, 0) == pal[0].r);
    CHECK(out.at(16, 16, 1) == pal[0].g);
}

TEST_CASE("cifar records decode and re-encode bit-exactly") {
    std::mt19937_64 rng(34);
    std::vector<std::uint8_t> record(render::kCifarRecordBytes);
    for (auto& b : record) b = std::uint8_t(rng());
    Frame f = render::decode_cifar_record(record.data());
    std::vector<std::uint8_t> back(render::kCifarRecordBytes);
    render::encode_cifar_record(f, record[0], back.data());
    CHECK(record == back);
}

TEST_CASE("cifar file loading counts records and rejects bad sizes") {
    TempDir dir("vin_cifar_test");
    const std::string path = dir.str() + "/batch.bin";
    {
        std::ofstream os(path, std::ios::binary);
        std::vector<char> record(render::kCifarRecordBytes, 7);
        for (int i = 0; i < 10; ++i)
            os.write(record.data(), std::streamsize(record.size()));
    }
    CHECK(render::load_cifar_file(path).size() == 10);
    {
        std::ofstream os(path, std::ios::binary | std::ios::app);
        os.write("x", 1);
    }
    CHECK_THROWS_AS((void)render::load_cifar_file(path), std::runtime_error);
}

TEST_CASE("missing cifar file falls back to procedural noise") {
    phys::RenderSettings settings;
    settings.background = "cifar";
    settings.cifar_train_path = "/nonexistent/cifar.bin";
    render::BackgroundSource src = render::BackgroundSource::open(settings, "train");
    CHECK(src.kind() == render::BackgroundSource::Kind::kProcedural);
    std::mt19937_64 a(5), b(5);
    CHECK(src.sample(a) == src.sample(b));  // seeded determinism
}

TEST_CASE("dataset write/read round trip is bit exact") {
    TempDir dir("vin_dataset_roundtrip");
    phys::SimSpec spec = phys::load_spec(cfg("drift3.cfg"));
    spec.frames = 16;
    spec.seed = 77;

    data::DatasetManifest manifest;
    manifest.split = "train";
    manifest.simulations = 2;
    manifest.spec = spec;

    std::vector<std::vector<Frame>> all_frames;
    std::vector<phys::Trajectory> all_states;
    {
        data::DatasetWriter writer(dir.str(), manifest);
        for (int sim = 0; sim < 2; ++sim) {
            phys::SimSpec s = spec;
            s.seed = spec.seed + std::uint64_t(sim);
            phys::Trajectory traj = phys::simulate(s);
            std::mt19937_64 rng(1000 + std::uint64_t(sim));
            Frame bg = render::procedural_background(rng);
            std::vector<Frame> frames;
            for (const phys::SystemState& st : traj.frames)
                frames.push_back(render::render_frame(st, bg));
            writer.append(frames, traj);
            all_frames.push_back(std::move(frames));
            all_states.push_back(std::move(traj));
        }
        writer.finish();
    }

    data::Dataset ds = data::Dataset::load(dir.str());
    CHECK(ds.n_sims() == 2);
    for (int sim = 0; sim < 2; ++sim)
        for (int t = 0; t < 16; ++t) {
            CHECK(ds.frame(sim, t) == all_frames[std::size_t(sim)][std::size_t(t)]);
            const float* got = ds.state(sim, t);
            const phys::SystemState& want =
                all_states[std::size_t(sim)].frames[std::size_t(t)];
            for (int i = 0; i < 3; ++i) {
                CHECK(got[i * 4 + 0] == float(want[std::size_t(i)].pos.x));
                CHECK(got[i * 4 + 3] == float(want[std::size_t(i)].vel.y));
            }
        }
}

TEST_CASE("frames.bin size follows the record arithmetic") {
    TempDir dir("vin_dataset_size");
    phys::SimSpec spec = phys::load_spec(cfg("drift3.cfg"));
    spec.seed = 5;
    data::GenOptions opts;
    opts.train_sims = 2;
    opts.test_sims = 1;
    data::generate_dataset(spec, dir.str(), opts);
    CHECK(std::filesystem::file_size(dir.path / "train" / "frames.bin") ==
          2u * 64u * 32u * 32u * 3u);  // 393,216 bytes
    CHECK(std::filesystem::file_size(dir.path / "test" / "frames.bin") ==
          1u * 64u * 32u * 32u * 3u);
}

TEST_CASE("generation is deterministic and splits never share seeds") {
    TempDir a("vin_gen_a"), b("vin_gen_b");
    phys::SimSpec spec = phys::load_spec(cfg("billiards3.cfg"));
    spec.frames = 16;
    data::GenOptions opts;
    opts.train_sims = 3;
    opts.test_sims = 2;
    data::generate_dataset(spec, a.str(), opts);
    data::generate_dataset(spec, b.str(), opts);

    auto bytes = [](const std::filesystem::path& p) {
        std::ifstream is(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is), {});
    };
    CHECK(bytes(a.path / "train" / "frames.bin") ==
          bytes(b.path / "train" / "frames.bin"));
    CHECK(bytes(a.path / "train" / "states.bin") ==
          bytes(b.path / "train" / "states.bin"));

    data::Dataset train = data::Dataset::load(a.str() + "/train", false);
    data::Dataset test = data::Dataset::load(a.str() + "/test", false);
    CHECK(train.manifest().spec.seed != test.manifest().spec.seed);
    CHECK(train.manifest().split == "train");
    CHECK(test.manifest().split == "test");
}

TEST_CASE("invisible objects keep their stored state targets") {
    TempDir dir("vin_gen_invis");
    phys::SimSpec spec = phys::load_spec(cfg("spring3_invisible.cfg"));
    spec.frames = 16;
    data::GenOptions opts;
    opts.train_sims = 2;
    opts.test_sims = 1;
    data::generate_dataset(spec, dir.str(), opts);
    data::Dataset ds = data::Dataset::load(dir.str() + "/train", false);
    // All three objects have finite, non-degenerate state rows.
    for (int t = 0; t < 8; ++t) {
        const float* s = ds.state(0, t);
        for (int i = 0; i < 3 * 4; ++i) CHECK(std::isfinite(s[i]));
    }
}

TEST_CASE("sample_batch respects the window bounds") {
    TempDir dir("vin_sample_batch");
    phys::SimSpec spec = phys::load_spec(cfg("drift3.cfg"));
    data::GenOptions opts;
    opts.train_sims = 2;
    opts.test_sims = 1;
    data::generate_dataset(spec, dir.str(), opts);
    data::Dataset ds = data::Dataset::load(dir.str() + "/train");

    std::mt19937_64 rng(9);
    auto batch = data::sample_batch(ds, 4, rng);
    CHECK(batch.size() == 4);
    for (const auto& s : batch) {
        CHECK(s.offset >= 0);
        CHECK(s.offset <= 50);
        (void)s.frame(13);
        (void)s.state(13);
    }
    std::mt19937_64 r1(42), r2(42);
    auto b1 = data::sample_batch(ds, 4, r1);
    auto b2 = data::sample_batch(ds, 4, r2);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(b1[i].sim == b2[i].sim);
        CHECK(b1[i].offset == b2[i].offset);
    }
}

TEST_CASE("writer rejects incompatible existing datasets") {
    TempDir dir("vin_writer_conflict");
    phys::SimSpec spec = phys::load_spec(cfg("drift3.cfg"));
    spec.frames = 16;
    data::DatasetManifest m;
    m.split = "train";
    m.simulations = 1;
    m.spec = spec;
    {
        data::DatasetWriter w(dir.str(), m);
        phys::Trajectory traj = phys::simulate(spec);
        std::vector<Frame> frames(16);
        w.append(frames, traj);
        w.finish();
    }
    data::DatasetManifest other = m;
    other.spec.seed = 999;
    CHECK_THROWS_AS(data::DatasetWriter(dir.str(), other), std::runtime_error);
}

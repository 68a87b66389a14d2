#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "vin/data/generate.hpp"
#include "vin/eval/metrics.hpp"
#include "vin/eval/report.hpp"
#include "vin/eval/rollout_render.hpp"
#include "vin/render/background.hpp"
#include "vin/phys/config.hpp"
#include "vin/phys/engine.hpp"
#include "vin/train/loss.hpp"
#include "vin/train/trainer.hpp"

using namespace vin;
using models::Model;
using models::ModelVariant;
using TF = num::Tensor<float>;

namespace {

std::string cfg(const std::string& name) {
    return std::string(VIN_CONFIG_DIR) + "/" + name;
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

// Small drift dataset reused across cases.
const data::Dataset& drift_dataset() {
    static TempDir dir("vin_train_eval_fixture");
    static bool built = false;
    if (!built) {
        phys::SimSpec spec = phys::load_spec(cfg("drift3.cfg"));
        spec.seed = 2024;
        data::GenOptions opts;
        opts.train_sims = 6;
        opts.test_sims = 4;
        data::generate_dataset(spec, dir.str(), opts);
        built = true;
    }
    static data::Dataset ds = data::Dataset::load(dir.str() + "/train");
    return ds;
}

std::string zero_state_dataset_dir() {
    static TempDir dir("vin_zero_state_fixture");
    static bool built = false;
    if (!built) {
        phys::SimSpec spec = phys::load_spec(cfg("drift3.cfg"));
        spec.seed = 1;
        data::DatasetManifest m;
        m.split = "train";
        m.simulations = 1;
        m.spec = spec;
        data::DatasetWriter w(dir.str(), m);
        phys::Trajectory traj;
        phys::SystemState all_zero(3);
        for (int f = 0; f < 64; ++f) traj.frames.push_back(all_zero);
        std::vector<render::Frame> frames(64);
        w.append(frames, traj);
        w.finish();
        built = true;
    }
    return dir.str();
}

}  // namespace

TEST_CASE("horizon weights at t=0 put all mass on the first step") {
    auto w = train::horizon_weights(0, 2.5e4);
    CHECK(w[0] == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 1; k < 8; ++k) CHECK(w[std::size_t(k)] == 0.0);
}

TEST_CASE("horizon weights converge to uniform 1/8") {
    auto w = train::horizon_weights(20 * 25000, 2.5e4);
    for (int k = 0; k < 8; ++k)
        CHECK(std::abs(w[std::size_t(k)] - 0.125) < 1e-6);
}

TEST_CASE("horizon weights at t=beta match the frozen oracle values") {
    // d = 1 - exp(-1); raw weights d^(k-1), normalized. Values computed
    // independently in 64-bit arithmetic.
    const double expected[8] = {0.3775026367509399,   0.23862717770225816,
                                0.15084114492083298,  0.09534978882169638,
                                0.06027256179415568,  0.03809952544335046,
                                0.024083493314353548, 0.015223671252412994};
    auto w = train::horizon_weights(25000, 2.5e4);
    for (int k = 0; k < 8; ++k)
        CHECK(w[std::size_t(k)] == doctest::Approx(expected[k]).epsilon(1e-12));
}

TEST_CASE("horizon weights sum to one and decrease monotonically") {
    for (long long t : {0LL, 100LL, 5000LL, 25000LL, 250000LL}) {
        auto w = train::horizon_weights(t, 2.5e4);
        double sum = 0;
        for (int k = 0; k < 8; ++k) {
            sum += w[std::size_t(k)];
            CHECK(w[std::size_t(k)] >= 0.0);
            if (k > 0) CHECK(w[std::size_t(k)] <= w[std::size_t(k - 1)] + 1e-15);
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("loss breakdown carries 8 horizon terms and matches the weights") {
    const data::Dataset& ds = drift_dataset();
    Model<float> m = Model<float>::make(ModelVariant::kInFromState, 3, 61);
    std::mt19937_64 rng(5);
    auto batch = data::sample_batch(ds, 1, rng);
    auto tensors = train::sample_to_tensors<float>(batch[0], false, 3);
    auto weights = train::horizon_weights(12345, 2.5e4);
    num::Tape<float> tape;
    auto parts = train::compute_sample_loss(tape, m, tensors, weights, 1.0);
    double manual = 0;
    for (int k = 0; k < 8; ++k) {
        CHECK(parts.per_step[std::size_t(k)] >= 0.0);
        manual += weights[std::size_t(k)] * parts.per_step[std::size_t(k)];
    }
    CHECK(double(parts.prediction.item()) ==
          doctest::Approx(manual).epsilon(1e-5));
    CHECK(double(parts.total.item()) ==
          doctest::Approx(double(parts.prediction.item())).epsilon(1e-12));
}

TEST_CASE("exact predictions give exactly zero prediction loss") {
    // All-zero states with a zero-weight from-state predictor: every
    // prediction equals its target bit-for-bit.
    data::Dataset ds = data::Dataset::load(zero_state_dataset_dir(), false);
    Model<float> m = Model<float>::make(ModelVariant::kInFromState, 3, 67);
    m.visit_params([](const std::string&, TF& t) {
        std::fill(t.data(), t.data() + t.size(), 0.0f);
    });
    data::TrainingSample s{&ds, 0, 0};
    auto tensors = train::sample_to_tensors<float>(s, false, 3);
    auto weights = train::horizon_weights(1000, 2.5e4);
    num::Tape<float> tape;
    auto parts = train::compute_sample_loss(tape, m, tensors, weights, 1.0);
    CHECK(parts.prediction.item() == 0.0f);
}

TEST_CASE("visual loss includes the auxiliary encoder term") {
    const data::Dataset& ds = drift_dataset();
    Model<float> m = Model<float>::make(ModelVariant::kVin, 3, 71);
    std::mt19937_64 rng(6);
    auto batch = data::sample_batch(ds, 1, rng);
    auto tensors = train::sample_to_tensors<float>(batch[0], true, 3);
    auto weights = train::horizon_weights(0, 2.5e4);
    num::Tape<float> tape;
    auto parts = train::compute_sample_loss(tape, m, tensors, weights, 0.5);
    REQUIRE(parts.aux.defined());
    CHECK(double(parts.total.item()) ==
          doctest::Approx(double(parts.prediction.item()) +
                          0.5 * double(parts.aux.item()))
              .epsilon(1e-5));
}

TEST_CASE("gtd variant trains on the current-step state only") {
    const data::Dataset& ds = drift_dataset();
    Model<float> m =
        Model<float>::make(ModelVariant::kVisionGroundTruthDynamics, 3, 73);
    std::mt19937_64 rng(7);
    auto batch = data::sample_batch(ds, 1, rng);
    auto tensors = train::sample_to_tensors<float>(batch[0], true, 3);
    auto weights = train::horizon_weights(0, 2.5e4);
    num::Tape<float> tape;
    auto parts = train::compute_sample_loss(tape, m, tensors, weights, 1.0);
    CHECK(parts.per_step[0] > 0.0);
    for (int k = 1; k < 8; ++k) CHECK(parts.per_step[std::size_t(k)] == 0.0);
}

TEST_CASE("two training runs with one seed produce identical logs") {
    const data::Dataset& ds = drift_dataset();
    auto run = [&](const std::string& out) {
        Model<float> m = Model<float>::make(ModelVariant::kInFromState, 3, 79);
        train::TrainConfig cfg;
        cfg.steps = 25;
        cfg.seed = 99;
        cfg.out_dir = out;
        cfg.checkpoint_every = 0;
        return train::train(m, ds, cfg);
    };
    TempDir a("vin_train_det_a"), b("vin_train_det_b");
    auto ra = run(a.str());
    auto rb = run(b.str());
    std::ifstream fa(ra.log_path), fb(rb.log_path);
    std::string sa((std::istreambuf_iterator<char>(fa)), {});
    std::string sb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(sa == sb);
    CHECK(!sa.empty());
}

TEST_CASE("training aborts on a non-finite loss naming the step") {
    const data::Dataset& ds = drift_dataset();
    Model<float> m = Model<float>::make(ModelVariant::kInFromState, 3, 83);
    auto params = m.named_params();
    params[0].second.data()[0] = std::numeric_limits<float>::quiet_NaN();
    train::TrainConfig cfg;
    cfg.steps = 3;
    TempDir out("vin_train_nan");
    cfg.out_dir = out.str();
    CHECK_THROWS_AS(train::train(m, ds, cfg), std::runtime_error);
}

TEST_CASE("inverse normalized loss identities") {
    CHECK(eval::inverse_normalized_loss(0.7, 0.7) == 1.0);
    CHECK(eval::inverse_normalized_loss(0.5, 1.0) == 0.5);
    CHECK_THROWS_AS(eval::inverse_normalized_loss(0.5, 0.0),
                    std::invalid_argument);
}

TEST_CASE("euclidean prediction error identities") {
    using eval::StateFrame;
    std::vector<StateFrame> truth{{0.5f, 0.5f, 0, 0}};
    std::vector<StateFrame> same = truth;
    CHECK(eval::euclidean_prediction_error(same, truth, 1)[0] == 0.0);

    std::vector<StateFrame> off{{0.53f, 0.54f, 0, 0}};
    CHECK(eval::euclidean_prediction_error(off, truth, 1)[0] ==
          doctest::Approx(0.05).epsilon(1e-6));

    std::vector<StateFrame> truth2{{0.5f, 0.5f, 0, 0, 0.2f, 0.2f, 0, 0}};
    std::vector<StateFrame> pred2{{0.55f, 0.5f, 0, 0, 0.2f, 0.35f, 0, 0}};
    CHECK(eval::euclidean_prediction_error(pred2, truth2, 2)[0] ==
          doctest::Approx(0.10).epsilon(1e-6));

    std::vector<StateFrame> shorter;
    CHECK_THROWS_AS(eval::euclidean_prediction_error(shorter, truth, 1),
                    std::invalid_argument);
}

TEST_CASE("euclidean error is invariant under joint rigid translation") {
    using eval::StateFrame;
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<StateFrame> pred(5), truth(5);
    for (int t = 0; t < 5; ++t)
        for (int i = 0; i < 2 * 4; ++i) {
            pred[std::size_t(t)].push_back(u(rng));
            truth[std::size_t(t)].push_back(u(rng));
        }
    auto base = eval::euclidean_prediction_error(pred, truth, 2);
    const float dx = 0.31f, dy = -0.17f;
    for (int t = 0; t < 5; ++t)
        for (int i = 0; i < 2; ++i) {
            pred[std::size_t(t)][std::size_t(i * 4)] += dx;
            pred[std::size_t(t)][std::size_t(i * 4 + 1)] += dy;
            truth[std::size_t(t)][std::size_t(i * 4)] += dx;
            truth[std::size_t(t)][std::size_t(i * 4 + 1)] += dy;
        }
    auto moved = eval::euclidean_prediction_error(pred, truth, 2);
    for (int t = 0; t < 5; ++t)
        CHECK(moved[std::size_t(t)] ==
              doctest::Approx(base[std::size_t(t)]).epsilon(1e-5));
}

TEST_CASE("ground-truth dynamics as the model yields near-zero error") {
    // The stored float32 states replayed through the engine must track the
    // stored trajectory to within storage precision for all 50 steps.
    const data::Dataset& ds = drift_dataset();
    const phys::SimSpec& spec = ds.manifest().spec;
    for (int sim = 0; sim < 2; ++sim) {
        phys::SystemState start(3);
        const float* s5 = ds.state(sim, 5);
        for (int i = 0; i < 3; ++i) {
            start[std::size_t(i)].pos = {s5[i * 4 + 0], s5[i * 4 + 1]};
            start[std::size_t(i)].vel = {s5[i * 4 + 2], s5[i * 4 + 3]};
            start[std::size_t(i)].radius = spec.radius;
            start[std::size_t(i)].mass =
                spec.density * spec.radius * spec.radius;
        }
        phys::Trajectory traj = phys::run_frames(spec, start, 51);
        std::vector<eval::StateFrame> pred, truth;
        for (int t = 1; t <= 50; ++t) {
            eval::StateFrame p;
            for (const phys::ObjectState& o : traj.frames[std::size_t(t)]) {
                p.push_back(float(o.pos.x));
                p.push_back(float(o.pos.y));
                p.push_back(float(o.vel.x));
                p.push_back(float(o.vel.y));
            }
            pred.push_back(p);
            const float* st = ds.state(sim, 5 + t);
            truth.emplace_back(st, st + 12);
        }
        auto err = eval::euclidean_prediction_error(pred, truth, 3);
        for (double e : err) CHECK(e < 1e-4);
    }
}

TEST_CASE("evaluate produces a well-formed report and self-INL of 1") {
    TempDir dir("vin_eval_ds");
    phys::SimSpec spec = phys::load_spec(cfg("drift3.cfg"));
    spec.seed = 31;
    data::GenOptions opts;
    opts.train_sims = 2;
    opts.test_sims = 3;
    data::generate_dataset(spec, dir.str(), opts);
    data::Dataset test = data::Dataset::load(dir.str() + "/test");

    Model<float> m =
        Model<float>::make(ModelVariant::kVisionGroundTruthDynamics, 3, 89);
    eval::EvalOptions eopts;
    eopts.horizon = 10;
    eopts.max_sequences = 3;
    eopts.bootstrap_samples = 100;
    eval::EvalReport report = eval::evaluate(m, test, eopts, &m);
    REQUIRE(report.inl.has_value());
    CHECK(*report.inl == 1.0);  // the bound model against itself, exactly
    CHECK(report.by_timestep.size() == 10);
    for (const auto& p : report.by_timestep) {
        CHECK(p.mean >= 0.0);
        CHECK(p.ci_lo <= p.mean + 1e-12);
        CHECK(p.ci_hi >= p.mean - 1e-12);
    }
    long long binned = 0;
    for (const auto& b : report.by_distance) binned += b.count;
    CHECK(binned == 3 * 3 * 10);  // sequences * objects * steps

    SUBCASE("report JSON round trip is lossless") {
        report.dataset_dir = dir.str() + "/test";
        const std::string path = dir.str() + "/report.json";
        eval::save_report(report, path);
        eval::EvalReport back = eval::load_report(path);
        CHECK(back.variant == report.variant);
        CHECK(back.test_loss == report.test_loss);
        CHECK(back.inl == report.inl);
        REQUIRE(back.by_timestep.size() == report.by_timestep.size());
        for (std::size_t i = 0; i < back.by_timestep.size(); ++i) {
            CHECK(back.by_timestep[i].mean == report.by_timestep[i].mean);
            CHECK(back.by_timestep[i].ci_lo == report.by_timestep[i].ci_lo);
        }
        REQUIRE(back.by_distance.size() == report.by_distance.size());
        for (std::size_t i = 0; i < back.by_distance.size(); ++i)
            CHECK(back.by_distance[i].mean == report.by_distance[i].mean);
    }
}

TEST_CASE("ppm files round trip") {
    std::mt19937_64 rng(9);
    render::Frame f = render::procedural_background(rng);
    TempDir dir("vin_ppm");
    const std::string path = dir.str() + "/f.ppm";
    eval::write_ppm(f, path);
    CHECK(eval::read_ppm(path) == f);
}

TEST_CASE("render_rollout writes observed frames and side-by-side panels") {
    TempDir dir("vin_rollout_render");
    phys::SimSpec spec = phys::load_spec(cfg("drift3.cfg"));
    spec.seed = 37;
    data::GenOptions opts;
    opts.train_sims = 1;
    opts.test_sims = 1;
    data::generate_dataset(spec, dir.str() + "/ds", opts);
    data::Dataset test = data::Dataset::load(dir.str() + "/ds/test");

    Model<float> m = Model<float>::make(ModelVariant::kInFromState, 3, 97);

    SUBCASE("horizon 0 re-renders only the observed window") {
        eval::RolloutRenderOptions ropts;
        ropts.horizon = 0;
        ropts.out_dir = dir.str() + "/h0";
        eval::render_rollout(m, test, 0, ropts);
        int count = 0;
        for (auto& e : std::filesystem::directory_iterator(ropts.out_dir)) {
            (void)e;
            ++count;
        }
        CHECK(count == 6);
    }

    SUBCASE("panels and trail files appear for positive horizons") {
        eval::RolloutRenderOptions ropts;
        ropts.horizon = 4;
        ropts.trail = true;
        ropts.mask_background = true;
        ropts.out_dir = dir.str() + "/h4";
        eval::render_rollout(m, test, 0, ropts);
        CHECK(std::filesystem::exists(ropts.out_dir + "/pred_003.ppm"));
        CHECK(std::filesystem::exists(ropts.out_dir + "/trail.ppm"));
    }
}

TEST_CASE("identical predictions render identical panels") {
    // Zero-state dataset + zero-weight from-state model: predictions match
    // the ground truth exactly, so the two panel halves must be identical.
    data::Dataset ds = data::Dataset::load(zero_state_dataset_dir());
    Model<float> m = Model<float>::make(ModelVariant::kInFromState, 3, 101);
    m.visit_params([](const std::string&, TF& t) {
        std::fill(t.data(), t.data() + t.size(), 0.0f);
    });
    TempDir dir("vin_identical_panels");
    eval::RolloutRenderOptions ropts;
    ropts.horizon = 2;
    ropts.mask_background = true;
    ropts.out_dir = dir.str();
    eval::render_rollout(m, ds, 0, ropts);
    std::ifstream is(dir.str() + "/pred_000.ppm", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), {});
    REQUIRE(!bytes.empty());
    // P6 67 32: compare the two 32-wide halves row by row.
    const std::size_t header = bytes.find("255\n") + 4;
    const int w = 67;
    for (int r = 0; r < 32; ++r)
        for (int c = 0; c < 32; ++c)
            for (int ch = 0; ch < 3; ++ch) {
                const std::size_t left = header + (std::size_t(r) * w + c) * 3 + ch;
                const std::size_t right =
                    header + (std::size_t(r) * w + c + 35) * 3 + ch;
                REQUIRE(bytes[left] == bytes[right]);
            }
}

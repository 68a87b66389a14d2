// Acceptance criteria 1-6, 9 and 10: gradient correctness, physics
// conservation, integrator fidelity, equivariance, architecture audit,
// loss schedule, rendering/dataset exactness, and the metric identities.
// The two desk-scale learning criteria (7, 8) live in their own binaries.

#include <cmath>
#include <cstdarg>
#include <filesystem>
#include <fstream>
#include <random>

#include "acceptance_util.hpp"
#include "vin/data/generate.hpp"
#include "vin/eval/metrics.hpp"
#include "vin/num/adam.hpp"
#include "vin/num/gradcheck.hpp"
#include "vin/phys/config.hpp"
#include "vin/phys/verify.hpp"
#include "vin/render/background.hpp"
#include "vin/train/loss.hpp"

using namespace vin;
using acceptance::fmt;
using acceptance::report;
using acceptance::Stopwatch;
using models::Model;
using models::ModelVariant;
using TF = num::Tensor<float>;

namespace {

std::string cfg(const std::string& name) {
    return std::string(VIN_CONFIG_DIR) + "/" + name;
}

TF random_code(std::mt19937_64& rng, int n, int d) {
    return TF::uniform(rng, {n, d}, -1.0f, 1.0f);
}

TF permute_rows(const TF& t, const std::vector<int>& perm) {
    TF out = TF::zeros(t.shape());
    const int d = t.dim(1);
    for (std::size_t i = 0; i < perm.size(); ++i)
        std::copy(t.data() + std::size_t(perm[i]) * d,
                  t.data() + std::size_t(perm[i] + 1) * d,
                  out.data() + i * d);
    return out;
}

double max_abs_diff(const TF& a, const TF& b) {
    double worst = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst,
                         std::abs(double(a.data()[i]) - double(b.data()[i])));
    return worst;
}

// ------------------------------------------------------------- criterion 1
void criterion_gradients() {
    Stopwatch timer;
    const auto results = num::run_gradcheck(20240513, 20);
    double worst = 0;
    bool pass = !results.empty();
    for (const auto& r : results) {
        pass = pass && r.pass && r.instances >= 20;
        worst = std::max(worst, r.max_rel_err / r.tolerance);
    }
    const double secs = timer.seconds();
    pass = pass && secs < 60.0;
    report(1, "gradient correctness",
           pass,
           fmt("%zu ops x 20 instances, worst err %.2g of tolerance, %.1fs",
               results.size(), worst, secs));
}

// ------------------------------------------------------------- criterion 2
void criterion_conservation() {
    Stopwatch timer;
    bool pass = true;
    std::string detail;

    phys::SimSpec billiards = phys::load_spec(cfg("billiards6.cfg"));
    phys::VerifyCheck energy = phys::check_energy_conservation(billiards, 1000);
    pass = pass && energy.pass;
    detail += fmt("billiards: %s, KE drift %.2g; ", energy.detail.c_str(),
                  energy.measured);

    double worst_momentum = 0;
    for (const char* name : {"spring3.cfg", "gravity3.cfg", "drift3.cfg"}) {
        phys::VerifyCheck m =
            phys::check_momentum_conservation(phys::load_spec(cfg(name)));
        pass = pass && m.pass;
        worst_momentum = std::max(worst_momentum, m.measured);
    }
    const double secs = timer.seconds();
    pass = pass && secs < 60.0;
    detail += fmt("momentum drift <= %.2g (tol 1e-9), %.1fs", worst_momentum,
                  secs);
    report(2, "physics conservation", pass, detail);
}

// ------------------------------------------------------------- criterion 3
void criterion_integrator() {
    Stopwatch timer;
    phys::VerifyCheck spring = phys::check_integrator_fidelity(
        phys::load_spec(cfg("spring3.cfg")), 300);
    phys::VerifyCheck gravity = phys::check_integrator_fidelity(
        phys::load_spec(cfg("gravity3.cfg")), 300);
    const double secs = timer.seconds();
    const bool pass = spring.pass && gravity.pass && secs < 60.0;
    report(3, "integrator fidelity vs RK4 over 300 frames", pass,
           fmt("spring %.4f, gravity %.4f < 1/32 framewidth, %.1fs",
               spring.measured, gravity.measured, secs));
}

// ------------------------------------------------------------- criterion 4
void criterion_equivariance() {
    std::mt19937_64 rng(404);
    bool pass = true;
    double worst = 0;
    for (int n : {1, 3, 6}) {
        models::InitRng irng(std::uint64_t(100 + n));
        auto core = models::InCore<float>::init(irng, 64, 64, true);
        auto pred = models::InPredictor<float>::init(irng, 64, 64, true);
        auto dec = models::LinearLayer<float>::init(irng, 64, 4);

        std::vector<int> perm(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) perm[std::size_t(i)] = i;
        std::shuffle(perm.begin(), perm.end(), rng);

        num::Tape<float> tape(num::Tape<float>::kNoGrad);
        TF code = random_code(rng, n, 64);
        worst = std::max(worst,
                         max_abs_diff(permute_rows(core.apply(tape, code), perm),
                                      core.apply(tape, permute_rows(code, perm))));
        std::vector<TF> hist;
        for (int k = 0; k < 4; ++k) hist.push_back(random_code(rng, n, 64));
        std::vector<TF> phist;
        for (const TF& h : hist) phist.push_back(permute_rows(h, perm));
        worst = std::max(worst,
                         max_abs_diff(permute_rows(pred.predict(tape, hist), perm),
                                      pred.predict(tape, phist)));
        worst = std::max(
            worst,
            max_abs_diff(
                permute_rows(num::linear(tape, code, dec.w, dec.b), perm),
                num::linear(tape, permute_rows(code, perm), dec.w, dec.b)));
    }
    pass = pass && worst < 1e-6;

    // Cross-slot predictor gradients must vanish exactly without relations.
    Model<float> norel = Model<float>::make(ModelVariant::kVinNoRelations, 3, 17);
    num::Tape<float> tape;
    std::vector<TF> hist;
    for (int k = 0; k < 4; ++k) {
        TF h = random_code(rng, 3, 64);
        h.set_requires_grad(true);
        hist.push_back(h);
    }
    TF out = norel.in_predictor->predict(tape, hist);
    TF slot = num::slice(tape, out, 1, 2);
    TF loss = num::sum(tape, slot);
    tape.backward(loss);
    double cross = 0;
    for (const TF& h : hist) {
        const auto& g = h.grad();
        for (int i = 0; i < 3; ++i) {
            if (i == 1) continue;
            for (int d = 0; d < 64; ++d)
                cross = std::max(cross, std::abs(double(g[std::size_t(i * 64 + d)])));
        }
    }
    pass = pass && cross == 0.0;
    report(4, "slot-permutation equivariance + locality ablation", pass,
           fmt("worst equivariance gap %.2g (tol 1e-6), cross-slot grad %.2g "
               "(must be exactly 0)",
               worst, cross));
}

// ------------------------------------------------------------- criterion 5
void criterion_architecture() {
    auto lin = [](int in, int out) { return in * out + out; };
    auto conv = [](int k, int cin, int cout) { return k * k * cin * cout + cout; };
    bool pass = true;
    std::string detail;
    for (int n : {3, 6}) {
        const int pair_convs = conv(10, 6, 4) + conv(10, 4, 4) + conv(3, 6, 16) +
                               conv(3, 16, 16) + conv(3, 20, 16) +
                               conv(3, 16, 16) + conv(3, 18, 16) +
                               conv(3, 16, 16) + conv(3, 16, 16) +
                               conv(3, 16, 32) + conv(3, 32, 32);
        const int encoder =
            pair_convs + lin(32, 64 * n) + lin(128, 64) + lin(64, 64);
        const int core = (lin(64, 64) + lin(64, 64)) +
                         (lin(128, 64) + lin(64, 64) + lin(64, 64)) +
                         3 * lin(64, 64) + (lin(128, 32) + lin(32, 64));
        const int expected =
            encoder + 3 * core + lin(192, 32) + lin(32, 64) + lin(64, 4);
        Model<float> vin = Model<float>::make(ModelVariant::kVin, n, 1);
        pass = pass && vin.parameter_count() == std::size_t(expected);
        if (n == 3) detail = fmt("vin(n=3) params %zu == %d", vin.parameter_count(), expected);
    }

    // Wiring: 3 frames -> n x 64; 6 frames -> exactly 4 codes; the
    // predictor consumes exactly 4 of them.
    Model<float> m = Model<float>::make(ModelVariant::kVin, 3, 5);
    std::mt19937_64 rng(5);
    num::Tape<float> tape(num::Tape<float>::kNoGrad);
    std::vector<TF> frames;
    for (int i = 0; i < 6; ++i)
        frames.push_back(TF::uniform(rng, {32, 32, 3}, 0.0f, 1.0f));
    TF one = m.encoder->encode_triplet(tape, frames[0], frames[1], frames[2]);
    pass = pass && one.shape() == num::Shape{3, 64};
    auto codes = m.encoder->encode_window(tape, frames);
    pass = pass && codes.size() == 4;
    bool rejected = false;
    try {
        std::vector<TF> three(codes.begin(), codes.begin() + 3);
        (void)m.in_predictor->predict(tape, three);
    } catch (const std::invalid_argument&) {
        rejected = true;
    }
    pass = pass && rejected;
    report(5, "architecture audit", pass,
           detail + fmt("; 6 frames -> %zu codes, 3-code history rejected: %s",
                        codes.size(), rejected ? "yes" : "no"));
}

// ------------------------------------------------------------- criterion 6
void criterion_schedule() {
    auto w0 = train::horizon_weights(0, 2.5e4);
    bool pass = w0[0] == 1.0;
    for (int k = 1; k < 8; ++k) pass = pass && w0[std::size_t(k)] == 0.0;

    auto winf = train::horizon_weights(20 * 25000, 2.5e4);
    double dev = 0;
    for (int k = 0; k < 8; ++k)
        dev = std::max(dev, std::abs(winf[std::size_t(k)] - 0.125));
    pass = pass && dev < 1e-6;

    num::Adam<float> opt;
    const double expected_lr = 5e-4 * std::exp(-1.0);
    pass = pass && opt.lr_at(150000) == expected_lr;
    report(6, "loss schedule", pass,
           fmt("w(0)=(1,0,...,0); |w(20b)-1/8| = %.2g < 1e-6; lr(1.5e5) = %.9g",
               dev, opt.lr_at(150000)));
}

// ------------------------------------------------------------- criterion 9
void criterion_rendering() {
    namespace fs = std::filesystem;
    bool pass = true;
    std::string detail;

    std::mt19937_64 rng(909);
    render::Frame bg = render::procedural_background(rng);
    pass = pass && render::render_frame({}, bg) == bg;

    phys::ObjectState disc;
    disc.pos = {0.41371, 0.52791};
    disc.radius = 0.0625;
    phys::SystemState a{disc};
    phys::SystemState b{disc};
    b[0].pos.x += 1.0 / (15.0 * 32.0);
    const bool subpixel = render::render_frame(a, render::Frame{}) !=
                          render::render_frame(b, render::Frame{});
    pass = pass && subpixel;

    const fs::path work = fs::path("acceptance_work") / "render";
    fs::remove_all(work);
    phys::SimSpec spec = phys::load_spec(cfg("billiards3.cfg"));
    spec.seed = 99;
    data::GenOptions opts;
    opts.train_sims = 2;
    opts.test_sims = 1;
    data::generate_dataset(spec, (work / "a").string(), opts);
    data::generate_dataset(spec, (work / "b").string(), opts);
    auto bytes = [](const fs::path& p) {
        std::ifstream is(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(is), {});
    };
    const bool reproducible =
        bytes(work / "a" / "train" / "frames.bin") ==
            bytes(work / "b" / "train" / "frames.bin") &&
        !bytes(work / "a" / "train" / "frames.bin").empty();
    pass = pass && reproducible;

    // Round trip: loaded payloads match the files bit for bit.
    data::Dataset ds = data::Dataset::load((work / "a" / "train").string());
    std::string raw = bytes(work / "a" / "train" / "frames.bin");
    bool roundtrip = raw.size() == std::size_t(2 * 64) * render::kFrameBytes;
    for (int sim = 0; roundtrip && sim < 2; ++sim)
        for (int t = 0; roundtrip && t < 64; ++t) {
            const render::Frame& f = ds.frame(sim, t);
            roundtrip = std::equal(
                f.rgb.begin(), f.rgb.end(),
                raw.begin() +
                    (std::size_t(sim) * 64 + std::size_t(t)) *
                        render::kFrameBytes,
                [](std::uint8_t x, char y) { return x == std::uint8_t(y); });
        }
    pass = pass && roundtrip;

    report(9, "rendering and dataset exactness", pass,
           fmt("background exact: yes; 1/480 shift visible: %s; "
               "regen byte-identical: %s; round trip: %s",
               subpixel ? "yes" : "no", reproducible ? "yes" : "no",
               roundtrip ? "yes" : "no"));
}

// ------------------------------------------------------------ criterion 10
void criterion_metrics() {
    namespace fs = std::filesystem;
    bool pass = true;

    pass = pass && eval::inverse_normalized_loss(0.7, 0.7) == 1.0;

    std::vector<eval::StateFrame> truth{{0.5f, 0.5f, 0, 0}};
    std::vector<eval::StateFrame> off{{0.53f, 0.54f, 0, 0}};
    const double e = eval::euclidean_prediction_error(off, truth, 1)[0];
    pass = pass && std::abs(e - 0.05) < 1e-6;

    // INL of the bound model against itself through the full evaluate path.
    const fs::path work = fs::path("acceptance_work") / "metrics";
    fs::remove_all(work);
    phys::SimSpec spec = phys::load_spec(cfg("drift3.cfg"));
    spec.seed = 1010;
    data::GenOptions opts;
    opts.train_sims = 1;
    opts.test_sims = 4;
    data::generate_dataset(spec, work.string(), opts);
    data::Dataset test = data::Dataset::load((work / "test").string());
    Model<float> gtd =
        Model<float>::make(ModelVariant::kVisionGroundTruthDynamics, 3, 10);
    eval::EvalOptions eopts;
    eopts.horizon = 8;
    eopts.max_sequences = 4;
    eopts.bootstrap_samples = 50;
    eval::EvalReport rep = eval::evaluate(gtd, test, eopts, &gtd);
    pass = pass && rep.inl.has_value() && *rep.inl == 1.0;

    // Ground truth replayed through the engine stays within storage
    // precision of the stored trajectory at every step of a 50-rollout.
    double worst = 0;
    for (int sim = 0; sim < test.n_sims(); ++sim) {
        phys::SystemState start(3);
        const float* s5 = test.state(sim, 5);
        for (int i = 0; i < 3; ++i) {
            start[std::size_t(i)].pos = {s5[i * 4 + 0], s5[i * 4 + 1]};
            start[std::size_t(i)].vel = {s5[i * 4 + 2], s5[i * 4 + 3]};
            start[std::size_t(i)].radius = spec.radius;
            start[std::size_t(i)].mass = spec.density * spec.radius * spec.radius;
        }
        phys::Trajectory traj = phys::run_frames(spec, start, 51);
        std::vector<eval::StateFrame> pred, gt;
        for (int t = 1; t <= 50; ++t) {
            eval::StateFrame p;
            for (const phys::ObjectState& o : traj.frames[std::size_t(t)]) {
                p.push_back(float(o.pos.x));
                p.push_back(float(o.pos.y));
                p.push_back(float(o.vel.x));
                p.push_back(float(o.vel.y));
            }
            pred.push_back(p);
            const float* st = test.state(sim, 5 + t);
            gt.emplace_back(st, st + 12);
        }
        for (double v : eval::euclidean_prediction_error(pred, gt, 3))
            worst = std::max(worst, v);
    }
    pass = pass && worst < 1e-4;

    report(10, "metric identities", pass,
           fmt("INL(self) = %.1f exactly; |(0.03,0.04)| -> %.6f; "
               "ground-truth-as-model error <= %.2g over 50 steps",
               rep.inl.value_or(0.0), e, worst));
}

}  // namespace

int main() {
    criterion_gradients();
    criterion_conservation();
    criterion_integrator();
    criterion_equivariance();
    criterion_architecture();
    criterion_schedule();
    criterion_rendering();
    criterion_metrics();
    if (acceptance::failures) {
        std::printf("%d criterion(s) FAILED\n", acceptance::failures);
        return 1;
    }
    std::printf("all fast acceptance criteria passed\n");
    return 0;
}

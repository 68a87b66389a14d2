#include "vin/eval/rollout_render.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "vin/data/generate.hpp"
#include "vin/render/background.hpp"

namespace vin::eval {

namespace {

constexpr int kPanelGap = 3;

void write_ppm_raw(int width, int height, const std::uint8_t* rgb,
                   const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("ppm: cannot write " + path);
    os << "P6\n" << width << " " << height << "\n255\n";
    os.write(reinterpret_cast<const char*>(rgb),
             std::streamsize(width) * height * 3);
    if (!os) throw std::runtime_error("ppm: short write to " + path);
}

// truth | white divider | prediction
std::vector<std::uint8_t> compose(const render::Frame& left,
                                  const render::Frame& right) {
    const int w = 2 * render::kFrameSize + kPanelGap;
    std::vector<std::uint8_t> out(std::size_t(w) * render::kFrameSize * 3, 255);
    for (int r = 0; r < render::kFrameSize; ++r) {
        std::uint8_t* row = out.data() + std::size_t(r) * w * 3;
        std::copy_n(left.data() + std::size_t(r) * render::kFrameSize * 3,
                    render::kFrameSize * 3, row);
        std::copy_n(right.data() + std::size_t(r) * render::kFrameSize * 3,
                    render::kFrameSize * 3,
                    row + (render::kFrameSize + kPanelGap) * 3);
    }
    return out;
}

phys::SystemState to_system_state(const float* s, const phys::SimSpec& spec) {
    phys::SystemState out(std::size_t(spec.n_object));
    for (int i = 0; i < spec.n_object; ++i) {
        phys::ObjectState& o = out[std::size_t(i)];
        o.pos = {double(s[i * 4 + 0]), double(s[i * 4 + 1])};
        o.vel = {double(s[i * 4 + 2]), double(s[i * 4 + 3])};
        o.radius = spec.radius;
        o.mass = spec.density * o.radius * o.radius;
        o.color_index = i;
    }
    return out;
}

std::string numbered(const std::string& dir, const char* stem, int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%03d.ppm", stem, i);
    return dir + "/" + buf;
}

}  // namespace

void write_ppm(const render::Frame& frame, const std::string& path) {
    write_ppm_raw(render::kFrameSize, render::kFrameSize, frame.data(), path);
}

render::Frame read_ppm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("ppm: cannot open " + path);
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    is >> magic >> w >> h >> maxv;
    if (magic != "P6" || w != render::kFrameSize || h != render::kFrameSize ||
        maxv != 255)
        throw std::runtime_error("ppm: unsupported header in " + path);
    is.get();  // single whitespace after the header
    render::Frame f;
    is.read(reinterpret_cast<char*>(f.data()), render::kFrameBytes);
    if (!is) throw std::runtime_error("ppm: short read from " + path);
    return f;
}

void render_rollout(models::Model<float>& model, const data::Dataset& dataset,
                    int sequence, const RolloutRenderOptions& options) {
    if (sequence < 0 || sequence >= dataset.n_sims())
        throw std::invalid_argument("render_rollout: sequence out of range");
    std::filesystem::create_directories(options.out_dir);

    const phys::SimSpec& spec = dataset.manifest().spec;
    render::Frame bg{};  // black when masked
    if (!options.mask_background) {
        // Rebuild the simulation's own background from the split seed.
        render::BackgroundSource src =
            render::BackgroundSource::open(spec.render, dataset.manifest().split);
        std::mt19937_64 bg_rng(data::mix_seed(
            data::mix_seed(spec.seed, std::uint64_t(sequence)), 0xb6));
        bg = src.sample(bg_rng);
    }

    for (int k = 0; k < data::kObservedFrames; ++k) {
        const phys::SystemState s =
            to_system_state(dataset.state(sequence, k), spec);
        write_ppm(render::render_frame(s, bg), numbered(options.out_dir, "obs", k));
    }
    if (options.horizon < 1) return;
    if (dataset.n_frames() < data::kObservedFrames + options.horizon)
        throw std::invalid_argument("render_rollout: horizon exceeds trajectory");

    num::Tape<float> tape(num::Tape<float>::kNoGrad);
    std::vector<models::Tensor<float>> frames;
    std::vector<models::Tensor<float>> states;
    if (model.has_encoder())
        for (int k = 0; k < data::kObservedFrames; ++k)
            frames.push_back(
                models::frame_to_tensor<float>(dataset.frame(sequence, k)));
    for (int k = data::kObservedFrames - models::kHistoryLen;
         k < data::kObservedFrames; ++k)
        states.push_back(models::state_to_tensor<float>(
            dataset.state(sequence, k), dataset.n_object()));
    auto decoded = models::rollout_states(model, tape, frames, states,
                                          options.horizon, &spec);

    render::Frame trail_truth{}, trail_pred{};
    for (int t = 0; t < options.horizon; ++t) {
        const phys::SystemState truth = to_system_state(
            dataset.state(sequence, data::kObservedFrames + t), spec);
        const phys::SystemState pred =
            to_system_state(decoded[std::size_t(t)].data(), spec);
        const render::Frame tf = render::render_frame(truth, bg);
        const render::Frame pf = render::render_frame(pred, bg);
        const auto panel = compose(tf, pf);
        write_ppm_raw(2 * render::kFrameSize + kPanelGap, render::kFrameSize,
                      panel.data(), numbered(options.out_dir, "pred", t));
        if (options.trail) {
            // Trails accumulate max-over-time per pixel on a masked background.
            const render::Frame tb = render::render_frame(truth, render::Frame{});
            const render::Frame pb = render::render_frame(pred, render::Frame{});
            for (std::size_t i = 0; i < trail_truth.rgb.size(); ++i) {
                trail_truth.rgb[i] = std::max(trail_truth.rgb[i], tb.rgb[i]);
                trail_pred.rgb[i] = std::max(trail_pred.rgb[i], pb.rgb[i]);
            }
        }
    }
    if (options.trail) {
        const auto panel = compose(trail_truth, trail_pred);
        write_ppm_raw(2 * render::kFrameSize + kPanelGap, render::kFrameSize,
                      panel.data(), options.out_dir + "/trail.ppm");
    }
}

}  // namespace vin::eval

#pragma once

// Training objective: a normalized discount-weighted sum of the 8 future
// prediction errors plus an auxiliary loss that supervises the decoded
// encoder outputs on the observed window.

#include <array>
#include <cmath>

#include "vin/data/dataset.hpp"
#include "vin/models/model.hpp"

namespace vin::train {

using data::kHorizon;
using data::kObservedFrames;
using data::kSampleFrames;
using models::Model;
using models::Tensor;
using num::Tape;

// Discount-derived horizon weights at training step t: raw weight of
// horizon step k (k = 1..8) is d^(k-1) with d = 1 - exp(-t/beta), 0^0 = 1,
// normalized to sum 1.
inline std::array<double, kHorizon> horizon_weights(long long t, double beta) {
    const double d = 1.0 - std::exp(-double(t) / beta);
    std::array<double, kHorizon> w{};
    double raw = 1.0;  // d^0
    double sum = 0.0;
    for (int k = 0; k < kHorizon; ++k) {
        w[std::size_t(k)] = raw;
        sum += raw;
        raw *= d;
    }
    for (double& x : w) x /= sum;
    return w;
}

// One training window converted to tensors. Frames are only materialized
// for variants with a visual encoder.
template <class T>
struct SampleTensors {
    std::vector<Tensor<T>> frames;  // 14 x [32,32,3], scaled to [0,1]
    std::vector<Tensor<T>> states;  // 14 x [n,4] targets
};

template <class T>
SampleTensors<T> sample_to_tensors(const data::TrainingSample& s,
                                   bool with_frames, int n_object) {
    SampleTensors<T> out;
    for (int k = 0; k < kSampleFrames; ++k) {
        if (with_frames)
            out.frames.push_back(models::frame_to_tensor<T>(s.frame(k)));
        out.states.push_back(models::state_to_tensor<T>(s.state(k), n_object));
    }
    return out;
}

template <class T>
struct LossParts {
    Tensor<T> total;
    Tensor<T> prediction;
    Tensor<T> aux;                           // undefined for from-state variants
    std::array<double, kHorizon> per_step{};  // unweighted per-step MSE values
};

template <class T>
LossParts<T> compute_sample_loss(Tape<T>& tape, Model<T>& model,
                                 const SampleTensors<T>& sample,
                                 const std::array<double, kHorizon>& weights,
                                 double aux_weight) {
    LossParts<T> parts;
    std::vector<Tensor<T>> observed_frames;
    if (model.has_encoder())
        observed_frames.assign(sample.frames.begin(),
                               sample.frames.begin() + kObservedFrames);
    std::vector<Tensor<T>> observed_states(
        sample.states.begin() + (kObservedFrames - models::kHistoryLen),
        sample.states.begin() + kObservedFrames);

    std::vector<Tensor<T>> codes;  // encoder outputs (visual variants)
    if (model.has_encoder())
        codes = model.encoder->encode_window(tape, observed_frames);

    if (model.variant == models::ModelVariant::kVisionGroundTruthDynamics) {
        // Static estimation: predict the state of the last observed frame.
        Tensor<T> est =
            model.decode(tape, model.gtd_core->apply(tape, codes.back()));
        parts.prediction =
            num::mse(tape, est, sample.states[kObservedFrames - 1]);
        parts.per_step[0] = double(parts.prediction.item());
    } else {
        std::vector<Tensor<T>> history =
            model.has_encoder() ? codes : observed_states;
        std::vector<Tensor<T>> predicted =
            models::rollout_codes(model, tape, std::move(history), kHorizon);
        for (int k = 0; k < kHorizon; ++k) {
            Tensor<T> step_mse =
                num::mse(tape, model.decode(tape, predicted[std::size_t(k)]),
                         sample.states[std::size_t(kObservedFrames + k)]);
            const double v = double(step_mse.item());
            if (!std::isfinite(v))
                throw std::runtime_error(
                    "non-finite prediction loss at horizon step " +
                    std::to_string(k + 1));
            parts.per_step[std::size_t(k)] = v;
            Tensor<T> weighted =
                num::scale(tape, step_mse, T(weights[std::size_t(k)]));
            parts.prediction = parts.prediction.defined()
                                   ? num::add(tape, parts.prediction, weighted)
                                   : weighted;
        }
    }

    if (model.has_encoder()) {
        // Auxiliary supervision of every encoded code in the window; the
        // code of triplet (F_k, F_k+1, F_k+2) targets the state at F_k+2.
        for (std::size_t k = 0; k < codes.size(); ++k) {
            Tensor<T> m = num::mse(tape, model.decode(tape, codes[k]),
                                   sample.states[k + 2]);
            parts.aux = parts.aux.defined() ? num::add(tape, parts.aux, m) : m;
        }
        parts.aux = num::scale(tape, parts.aux, T(1.0 / double(codes.size())));
        parts.total = num::add(tape, parts.prediction,
                               num::scale(tape, parts.aux, T(aux_weight)));
    } else {
        parts.total = parts.prediction;
    }
    return parts;
}

}  // namespace vin::train

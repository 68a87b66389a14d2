#pragma once

// Model variants behind one rollout interface. Code-based variants carry
// 64-wide slots and a shared linear 64->4 state decoder; the from-state
// variants consume and emit raw [n x 4] states directly (identity decode).
// Vision-with-ground-truth-dynamics estimates the current-step state with a
// single relation core and delegates rollouts to the physics engine.

#include <optional>

#include "vin/models/encoder.hpp"
#include "vin/models/predictor.hpp"
#include "vin/num/checkpoint.hpp"
#include "vin/phys/engine.hpp"
#include "vin/render/renderer.hpp"

namespace vin::models {

enum class ModelVariant {
    kVin,
    kVisualRnn,
    kVisualLstm,
    kVinNoRelations,
    kVisionGroundTruthDynamics,
    kInFromState,
    kLstmFromState,
};

inline const char* variant_name(ModelVariant v) {
    switch (v) {
        case ModelVariant::kVin: return "vin";
        case ModelVariant::kVisualRnn: return "visual-rnn";
        case ModelVariant::kVisualLstm: return "visual-lstm";
        case ModelVariant::kVinNoRelations: return "vin-no-relations";
        case ModelVariant::kVisionGroundTruthDynamics: return "vision-gtd";
        case ModelVariant::kInFromState: return "in-from-state";
        case ModelVariant::kLstmFromState: return "lstm-from-state";
    }
    return "?";
}

inline ModelVariant variant_from_name(const std::string& name) {
    for (ModelVariant v :
         {ModelVariant::kVin, ModelVariant::kVisualRnn, ModelVariant::kVisualLstm,
          ModelVariant::kVinNoRelations, ModelVariant::kVisionGroundTruthDynamics,
          ModelVariant::kInFromState, ModelVariant::kLstmFromState})
        if (name == variant_name(v)) return v;
    throw std::invalid_argument("unknown model variant '" + name + "'");
}

inline bool variant_has_encoder(ModelVariant v) {
    return v != ModelVariant::kInFromState && v != ModelVariant::kLstmFromState;
}

constexpr int kStateDim = 4;

template <class T>
Tensor<T> frame_to_tensor(const render::Frame& f) {
    Tensor<T> t = Tensor<T>::zeros({kFrameSize, kFrameSize, 3});
    for (std::size_t i = 0; i < f.rgb.size(); ++i)
        t.data()[i] = T(f.rgb[i]) / T(255);
    return t;
}

template <class T>
Tensor<T> state_to_tensor(const float* s, int n_object) {
    std::vector<T> v(std::size_t(n_object) * kStateDim);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = T(s[i]);
    return Tensor<T>::from({n_object, kStateDim}, std::move(v));
}

template <class T>
struct Model {
    ModelVariant variant = ModelVariant::kVin;
    int n_object = 0;
    int slot = kSlotLen;  // 4 for from-state variants

    std::optional<VisualEncoder<T>> encoder;
    std::optional<InPredictor<T>> in_predictor;
    std::optional<RnnPredictor<T>> rnn_predictor;
    std::optional<LstmPredictor<T>> lstm_predictor;
    std::optional<InCore<T>> gtd_core;       // current-step estimator
    std::optional<LinearLayer<T>> decoder;   // slot -> 4

    static Model make(ModelVariant variant, int n_object, std::uint64_t seed) {
        InitRng rng(seed);
        Model m;
        m.variant = variant;
        m.n_object = n_object;
        switch (variant) {
            case ModelVariant::kVin:
            case ModelVariant::kVinNoRelations:
                m.encoder = VisualEncoder<T>::init(rng, n_object);
                m.in_predictor = InPredictor<T>::init(
                    rng, kSlotLen, kSlotLen,
                    variant == ModelVariant::kVin);
                m.decoder = LinearLayer<T>::init(rng, kSlotLen, kStateDim);
                break;
            case ModelVariant::kVisualRnn:
                m.encoder = VisualEncoder<T>::init(rng, n_object);
                m.rnn_predictor = RnnPredictor<T>::init(rng, n_object, kSlotLen);
                m.decoder = LinearLayer<T>::init(rng, kSlotLen, kStateDim);
                break;
            case ModelVariant::kVisualLstm:
                m.encoder = VisualEncoder<T>::init(rng, n_object);
                m.lstm_predictor =
                    LstmPredictor<T>::init(rng, n_object, kSlotLen);
                m.decoder = LinearLayer<T>::init(rng, kSlotLen, kStateDim);
                break;
            case ModelVariant::kVisionGroundTruthDynamics:
                m.encoder = VisualEncoder<T>::init(rng, n_object);
                m.gtd_core = InCore<T>::init(rng, kSlotLen, kSlotLen, true);
                m.decoder = LinearLayer<T>::init(rng, kSlotLen, kStateDim);
                break;
            case ModelVariant::kInFromState:
                m.slot = kStateDim;
                m.in_predictor =
                    InPredictor<T>::init(rng, kStateDim, kStateDim, true);
                break;
            case ModelVariant::kLstmFromState:
                m.slot = kStateDim;
                m.lstm_predictor =
                    LstmPredictor<T>::init(rng, n_object, kStateDim);
                break;
        }
        return m;
    }

    bool has_encoder() const { return encoder.has_value(); }
    bool from_state() const { return !encoder.has_value(); }
    bool recurrent() const { return lstm_predictor.has_value(); }

    // Decoded state [n x 4] from a code; identity for from-state variants.
    Tensor<T> decode(Tape<T>& tape, const Tensor<T>& code) const {
        if (!decoder) return code;
        return decoder->apply(tape, code);
    }

    Tensor<T> predict_next(Tape<T>& tape, const std::vector<Tensor<T>>& history,
                           typename LstmPredictor<T>::State* lstm_state) const {
        if (in_predictor) return in_predictor->predict(tape, history);
        if (rnn_predictor) return rnn_predictor->predict(tape, history);
        if (lstm_predictor)
            return lstm_predictor->step(tape, history.back(), *lstm_state);
        throw std::logic_error("variant has no step predictor");
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        visit_params([&](const std::string&, Tensor<T>& t) { n += t.size(); });
        return n;
    }

    template <class F>
    void visit_params(F&& f) {
        if (encoder) encoder->visit("encoder", f);
        if (in_predictor) in_predictor->visit("predictor", f);
        if (rnn_predictor) rnn_predictor->visit("predictor", f);
        if (lstm_predictor) lstm_predictor->visit("predictor", f);
        if (gtd_core) gtd_core->visit("estimator", f);
        if (decoder) decoder->visit("decoder", f);
    }

    std::vector<std::pair<std::string, Tensor<T>>> named_params() {
        std::vector<std::pair<std::string, Tensor<T>>> params;
        visit_params([&](const std::string& name, Tensor<T>& t) {
            params.emplace_back(name, t);
        });
        return params;
    }
};

// The 4-code history the predictor consumes: a sliding-window encode of 6
// observed frames for visual variants, the 4 observed states otherwise.
template <class T>
std::vector<Tensor<T>> encode_history(Model<T>& model, Tape<T>& tape,
                                      const std::vector<Tensor<T>>& frames,
                                      const std::vector<Tensor<T>>& states) {
    if (model.has_encoder()) {
        std::vector<Tensor<T>> codes = model.encoder->encode_window(tape, frames);
        if (codes.size() != kHistoryLen)
            throw std::invalid_argument("rollout: need exactly 6 observed frames");
        return codes;
    }
    if (states.size() != kHistoryLen)
        throw std::invalid_argument("rollout: need exactly 4 observed states");
    return states;
}

// Iterated prediction from a 4-code history; returns the raw predicted
// codes (callers decode them). The LSTM variants warm their recurrent
// state on the history and feed each prediction back in.
template <class T>
std::vector<Tensor<T>> rollout_codes(Model<T>& model, Tape<T>& tape,
                                     std::vector<Tensor<T>> history,
                                     int horizon) {
    if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");
    typename LstmPredictor<T>::State lstm_state;
    if (model.recurrent()) {
        lstm_state = model.lstm_predictor->initial_state();
        for (std::size_t i = 0; i + 1 < history.size(); ++i)
            (void)model.lstm_predictor->step(tape, history[i], lstm_state);
    }
    std::vector<Tensor<T>> codes;
    codes.reserve(std::size_t(horizon));
    for (int t = 0; t < horizon; ++t) {
        Tensor<T> next = model.predict_next(tape, history, &lstm_state);
        codes.push_back(next);
        history.erase(history.begin());
        history.push_back(next);  // predicted code feeds the next step
    }
    return codes;
}

// Decoded [n x 4] states, horizon steps ahead. Vision-with-ground-truth-
// dynamics estimates the current-step state and delegates the rollout to
// the physics engine (needs the dataset's SimSpec).
template <class T>
std::vector<Tensor<T>> rollout_states(Model<T>& model, Tape<T>& tape,
                                      const std::vector<Tensor<T>>& frames,
                                      const std::vector<Tensor<T>>& states,
                                      int horizon,
                                      const phys::SimSpec* gtd_spec = nullptr) {
    if (horizon < 1) throw std::invalid_argument("rollout: horizon must be >= 1");

    if (model.variant == ModelVariant::kVisionGroundTruthDynamics) {
        if (!gtd_spec)
            throw std::invalid_argument(
                "rollout: vision-gtd needs the dataset SimSpec");
        std::vector<Tensor<T>> codes = model.encoder->encode_window(tape, frames);
        Tensor<T> est =
            model.decode(tape, model.gtd_core->apply(tape, codes.back()));
        // Hand the estimate to the ground-truth engine.
        phys::SystemState sys(std::size_t(model.n_object));
        for (int i = 0; i < model.n_object; ++i) {
            phys::ObjectState& o = sys[std::size_t(i)];
            const T* row = est.data() + std::size_t(i) * kStateDim;
            o.pos = {double(row[0]), double(row[1])};
            o.vel = {double(row[2]), double(row[3])};
            o.radius = gtd_spec->radius;
            o.mass = gtd_spec->density * o.radius * o.radius;
            o.charge = gtd_spec->charge;
            o.color_index = i;
        }
        phys::Trajectory traj =
            phys::run_frames(*gtd_spec, std::move(sys), horizon + 1);
        std::vector<Tensor<T>> out;
        for (int t = 1; t <= horizon; ++t) {
            std::vector<T> v;
            v.reserve(std::size_t(model.n_object) * kStateDim);
            for (const phys::ObjectState& o : traj.frames[std::size_t(t)]) {
                v.push_back(T(o.pos.x));
                v.push_back(T(o.pos.y));
                v.push_back(T(o.vel.x));
                v.push_back(T(o.vel.y));
            }
            out.push_back(Tensor<T>::from({model.n_object, kStateDim},
                                          std::move(v)));
        }
        return out;
    }

    std::vector<Tensor<T>> history = encode_history(model, tape, frames, states);
    std::vector<Tensor<T>> codes =
        rollout_codes(model, tape, std::move(history), horizon);
    std::vector<Tensor<T>> decoded;
    decoded.reserve(codes.size());
    for (const Tensor<T>& c : codes) decoded.push_back(model.decode(tape, c));
    return decoded;
}

inline void save_model(Model<float>& model, const std::string& path) {
    num::Checkpoint ckpt;
    ckpt.meta["variant"] = variant_name(model.variant);
    ckpt.meta["n_object"] = std::to_string(model.n_object);
    for (auto& [name, t] : model.named_params())
        ckpt.tensors.emplace_back(name, t);
    num::save_checkpoint(ckpt, path);
}

inline Model<float> load_model(const std::string& path) {
    num::Checkpoint ckpt = num::load_checkpoint(path);
    Model<float> model = Model<float>::make(
        variant_from_name(ckpt.meta.at("variant")),
        std::stoi(ckpt.meta.at("n_object")), 0);
    std::size_t used = 0;
    model.visit_params([&](const std::string& name, Tensor<float>& t) {
        const Tensor<float>* src = ckpt.find(name);
        if (!src)
            throw std::runtime_error("checkpoint misses parameter " + name);
        if (src->shape() != t.shape())
            throw std::runtime_error("checkpoint shape mismatch for " + name);
        std::copy(src->data(), src->data() + src->size(), t.data());
        ++used;
    });
    if (used != ckpt.tensors.size())
        throw std::runtime_error("checkpoint has extra tensors");
    return model;
}

}  // namespace vin::models

#pragma once

// Dynamics predictors. The interaction-net predictor keeps one core per
// temporal offset {1,2,4}: with a history [S1..S4] it applies C4 to S1,
// C2 to S3 and C1 to S4, then aggregates the three candidate codes with a
// shared slot-wise MLP. The RNN and LSTM baselines replace the cores.

#include "vin/models/layers.hpp"

namespace vin::models {

constexpr int kHistoryLen = 4;
inline constexpr std::array<int, 3> kTemporalOffsets = {1, 2, 4};

// One interaction-net core on a [n x slot] code.
template <class T>
struct InCore {
    Mlp<T> self_net;   // slot -> [64, 64]
    Mlp<T> relation;   // 2*slot -> [64, 64, 64]
    Mlp<T> affector;   // 64 -> [64, 64, 64]
    Mlp<T> out_net;    // slot + 64 -> [32, out]
    bool use_relations = true;

    static InCore init(InitRng& rng, int slot, int out, bool use_relations) {
        InCore c;
        c.self_net = Mlp<T>::init(rng, slot, {64, 64});
        c.relation = Mlp<T>::init(rng, 2 * slot, {64, 64, 64});
        c.affector = Mlp<T>::init(rng, 64, {64, 64, 64});
        c.out_net = Mlp<T>::init(rng, slot + 64, {32, out});
        c.use_relations = use_relations;
        return c;
    }

    Tensor<T> apply(Tape<T>& tape, const Tensor<T>& code) const {
        const int n = code.dim(0);
        Tensor<T> m_update = self_net.apply(tape, code);
        if (use_relations && n > 1) {
            Tensor<T> pairs = num::pair_concat(tape, code);
            Tensor<T> rel = relation.apply(tape, pairs);
            m_update = num::add(tape, m_update, num::pair_sum(tape, rel, n));
        }
        Tensor<T> m_affect = affector.apply(tape, m_update);
        return out_net.apply(tape, num::concat_cols(tape, {code, m_affect}));
    }

    std::size_t count() const {
        std::size_t n = self_net.count() + affector.count() + out_net.count();
        if (use_relations) n += relation.count();
        return n;
    }

    template <class F>
    void visit(const std::string& prefix, F&& f) {
        self_net.visit(prefix + ".self", f);
        if (use_relations) relation.visit(prefix + ".rel", f);
        affector.visit(prefix + ".affector", f);
        out_net.visit(prefix + ".out", f);
    }
};

template <class T>
struct InPredictor {
    InCore<T> core1, core2, core4;
    Mlp<T> aggregator;  // 3*out -> [32, out], slot-wise

    static InPredictor init(InitRng& rng, int slot, int out,
                            bool use_relations) {
        InPredictor p;
        p.core1 = InCore<T>::init(rng, slot, out, use_relations);
        p.core2 = InCore<T>::init(rng, slot, out, use_relations);
        p.core4 = InCore<T>::init(rng, slot, out, use_relations);
        p.aggregator = Mlp<T>::init(rng, 3 * out, {32, out});
        return p;
    }

    Tensor<T> predict(Tape<T>& tape,
                      const std::vector<Tensor<T>>& history) const {
        if (history.size() != kHistoryLen)
            throw std::invalid_argument("predictor needs exactly 4 codes");
        Tensor<T> c4 = core4.apply(tape, history[0]);
        Tensor<T> c2 = core2.apply(tape, history[2]);
        Tensor<T> c1 = core1.apply(tape, history[3]);
        return aggregator.apply(tape, num::concat_cols(tape, {c4, c2, c1}));
    }

    std::size_t count() const {
        return core1.count() + core2.count() + core4.count() +
               aggregator.count();
    }

    template <class F>
    void visit(const std::string& prefix, F&& f) {
        core1.visit(prefix + ".core1", f);
        core2.visit(prefix + ".core2", f);
        core4.visit(prefix + ".core4", f);
        aggregator.visit(prefix + ".aggregator", f);
    }
};

// Visual RNN: one MLP core shared across the temporal offsets, applied to
// the flattened state code, plus the usual slot-wise aggregator.
template <class T>
struct RnnPredictor {
    Mlp<T> core;        // n*slot -> [64,64,64,64, n*slot]
    Mlp<T> aggregator;  // 3*slot -> [32, slot]
    int n_object = 0;
    int slot = 0;

    static RnnPredictor init(InitRng& rng, int n_object, int slot) {
        RnnPredictor p;
        p.n_object = n_object;
        p.slot = slot;
        const int flat = n_object * slot;
        p.core = Mlp<T>::init(rng, flat, {64, 64, 64, 64, flat});
        p.aggregator = Mlp<T>::init(rng, 3 * slot, {32, slot});
        return p;
    }

    Tensor<T> predict(Tape<T>& tape,
                      const std::vector<Tensor<T>>& history) const {
        if (history.size() != kHistoryLen)
            throw std::invalid_argument("predictor needs exactly 4 codes");
        auto candidate = [&](const Tensor<T>& code) {
            Tensor<T> flat = num::reshape(tape, code, {n_object * slot});
            return num::reshape(tape, core.apply(tape, flat), {n_object, slot});
        };
        Tensor<T> c4 = candidate(history[0]);
        Tensor<T> c2 = candidate(history[2]);
        Tensor<T> c1 = candidate(history[3]);
        return aggregator.apply(tape, num::concat_cols(tape, {c4, c2, c1}));
    }

    std::size_t count() const { return core.count() + aggregator.count(); }

    template <class F>
    void visit(const std::string& prefix, F&& f) {
        core.visit(prefix + ".core", f);
        aggregator.visit(prefix + ".aggregator", f);
    }
};

// Visual LSTM: pre-MLP, a 128-unit recurrent cell and a post-MLP on the
// flattened code. No temporal-offset aggregation; the recurrent state
// integrates the history, and during rollouts the post-processor output is
// fed back into the pre-processor.
template <class T>
struct LstmPredictor {
    Mlp<T> pre;   // n*slot -> [64, 64]
    LstmLayer<T> cell;
    Mlp<T> post;  // hidden -> [32, n*slot]
    int n_object = 0;
    int slot = 0;

    static LstmPredictor init(InitRng& rng, int n_object, int slot,
                              int hidden = 128) {
        LstmPredictor p;
        p.n_object = n_object;
        p.slot = slot;
        const int flat = n_object * slot;
        p.pre = Mlp<T>::init(rng, flat, {64, 64});
        p.cell = LstmLayer<T>::init(rng, 64, hidden);
        p.post = Mlp<T>::init(rng, hidden, {32, flat});
        return p;
    }

    struct State {
        Tensor<T> h, c;
    };
    State initial_state() const {
        return {Tensor<T>::zeros({cell.hidden}), Tensor<T>::zeros({cell.hidden})};
    }

    Tensor<T> step(Tape<T>& tape, const Tensor<T>& code, State& state) const {
        Tensor<T> flat = num::reshape(tape, code, {n_object * slot});
        Tensor<T> x = pre.apply(tape, flat);
        auto [h2, c2] = num::lstm_cell(tape, x, state.h, state.c, cell.p);
        state.h = h2;
        state.c = c2;
        return num::reshape(tape, post.apply(tape, h2), {n_object, slot});
    }

    std::size_t count() const {
        return pre.count() + cell.count() + post.count();
    }

    template <class F>
    void visit(const std::string& prefix, F&& f) {
        pre.visit(prefix + ".pre", f);
        cell.visit(prefix + ".cell", f);
        post.visit(prefix + ".post", f);
    }
};

}  // namespace vin::models

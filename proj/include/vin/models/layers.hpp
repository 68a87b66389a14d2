#pragma once

// Building blocks shared by the encoder and the dynamics predictors.
// Weights are fan-in-scaled uniform, biases zero. Every MLP applies ReLU
// between layers and leaves its final layer linear.

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "vin/num/ops.hpp"

namespace vin::models {

using num::Shape;
using num::Tape;
using num::Tensor;

using InitRng = std::mt19937_64;

template <class T>
Tensor<T> fan_in_uniform(InitRng& rng, Shape shape, int fan_in) {
    const double limit = 1.0 / std::sqrt(double(fan_in));
    return Tensor<T>::uniform(rng, std::move(shape), T(-limit), T(limit), true);
}

template <class T>
struct LinearLayer {
    Tensor<T> w;  // [in x out]
    Tensor<T> b;  // [out]

    static LinearLayer init(InitRng& rng, int in, int out) {
        LinearLayer l;
        l.w = fan_in_uniform<T>(rng, {in, out}, in);
        l.b = Tensor<T>::zeros({out}, true);
        return l;
    }

    Tensor<T> apply(Tape<T>& tape, const Tensor<T>& x) const {
        return num::linear(tape, x, w, b);
    }

    std::size_t count() const { return w.size() + b.size(); }

    template <class F>
    void visit(const std::string& prefix, F&& f) {
        f(prefix + ".w", w);
        f(prefix + ".b", b);
    }
};

template <class T>
struct Mlp {
    std::vector<LinearLayer<T>> layers;

    static Mlp init(InitRng& rng, int in, const std::vector<int>& widths) {
        Mlp m;
        int d = in;
        for (int w : widths) {
            m.layers.push_back(LinearLayer<T>::init(rng, d, w));
            d = w;
        }
        return m;
    }

    Tensor<T> apply(Tape<T>& tape, const Tensor<T>& x) const {
        Tensor<T> h = x;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            h = layers[i].apply(tape, h);
            if (i + 1 < layers.size()) h = num::relu(tape, h);
        }
        return h;
    }

    std::size_t count() const {
        std::size_t n = 0;
        for (const auto& l : layers) n += l.count();
        return n;
    }

    template <class F>
    void visit(const std::string& prefix, F&& f) {
        for (std::size_t i = 0; i < layers.size(); ++i)
            layers[i].visit(prefix + "." + std::to_string(i), f);
    }
};

template <class T>
struct ConvLayer {
    Tensor<T> w;  // [k x k x cin x cout]
    Tensor<T> b;  // [cout]

    static ConvLayer init(InitRng& rng, int k, int cin, int cout) {
        ConvLayer l;
        l.w = fan_in_uniform<T>(rng, {k, k, cin, cout}, k * k * cin);
        l.b = Tensor<T>::zeros({cout}, true);
        return l;
    }

    // Size-preserving convolution followed by ReLU.
    Tensor<T> apply(Tape<T>& tape, const Tensor<T>& x) const {
        return num::relu(tape, num::conv2d(tape, x, w, b));
    }

    std::size_t count() const { return w.size() + b.size(); }

    template <class F>
    void visit(const std::string& prefix, F&& f) {
        f(prefix + ".w", w);
        f(prefix + ".b", b);
    }
};

template <class T>
struct LstmLayer {
    num::LstmParams<T> p;
    int hidden = 0;

    static LstmLayer init(InitRng& rng, int in, int hidden) {
        LstmLayer l;
        l.hidden = hidden;
        l.p.wx = fan_in_uniform<T>(rng, {in, 4 * hidden}, in);
        l.p.wh = fan_in_uniform<T>(rng, {hidden, 4 * hidden}, hidden);
        l.p.b = Tensor<T>::zeros({4 * hidden}, true);
        return l;
    }

    std::size_t count() const { return p.wx.size() + p.wh.size() + p.b.size(); }

    template <class F>
    void visit(const std::string& prefix, F&& f) {
        f(prefix + ".wx", p.wx);
        f(prefix + ".wh", p.wh);
        f(prefix + ".b", p.b);
    }
};

}  // namespace vin::models

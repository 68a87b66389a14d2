#pragma once

// Adam with bias correction and the exponential learning-rate decay
// lr(t) = base * exp(-t / alpha). Moments are kept per parameter node.

#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "vin/kernels/kernels.hpp"
#include "vin/num/tensor.hpp"

namespace vin::num {

struct AdamConfig {
    double base_lr = 5e-4;
    double alpha = 1.5e5;  // lr decay constant, in steps
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

template <class T>
class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}

    double lr_at(long long t) const {
        return cfg_.base_lr * std::exp(-double(t) / cfg_.alpha);
    }
    long long step_count() const { return t_; }
    const AdamConfig& config() const { return cfg_; }

    // Applies one update to every named parameter, consuming its gradient
    // buffer (which is left zeroed). Throws on a non-finite gradient,
    // naming the offending parameter.
    void step(std::vector<std::pair<std::string, Tensor<T>>>& params) {
        const T lr = T(lr_at(t_));
        const double b1t = std::pow(cfg_.beta1, double(t_ + 1));
        const double b2t = std::pow(cfg_.beta2, double(t_ + 1));
        const T bc1 = T(1.0 / (1.0 - b1t));
        const T bc2 = T(1.0 / (1.0 - b2t));
        for (auto& [name, p] : params) {
            const std::vector<T>& g = p.grad();
            for (T v : g)
                if (!std::isfinite(double(v)))
                    throw std::runtime_error("non-finite gradient in parameter '" +
                                             name + "' at step " +
                                             std::to_string(t_));
            Moments& mo = state_[p.node().get()];
            if (mo.m.empty()) {
                mo.m.assign(p.size(), T(0));
                mo.v.assign(p.size(), T(0));
            }
            kernels::adam_update(p.size(), p.data(), g.data(), mo.m.data(),
                                 mo.v.data(), lr, T(cfg_.beta1), T(cfg_.beta2),
                                 T(cfg_.eps), bc1, bc2);
            p.zero_grad();
        }
        ++t_;
    }

private:
    struct Moments {
        std::vector<T> m, v;
    };
    AdamConfig cfg_;
    long long t_ = 0;
    std::unordered_map<const TensorNode<T>*, Moments> state_;
};

}  // namespace vin::num

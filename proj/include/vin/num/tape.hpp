#pragma once

// Reverse-mode tape. Ops append themselves in execution order, which is a
// topological order of the forward graph, so backward() replays the list in
// reverse. One tape per forward/backward pass per thread; leaf tensors
// (parameters) may move between tapes, intermediate results may not.

#include <functional>
#include <stdexcept>
#include <vector>

#include "vin/num/tensor.hpp"

namespace vin::num {

template <class T>
class Tape {
public:
    enum Mode { kGrad, kNoGrad };

    explicit Tape(Mode mode = kGrad) : recording_(mode == kGrad) {}
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    bool recording() const { return recording_; }

    // Called by ops after computing the forward value. `backward` reads the
    // output node's grad and accumulates into the inputs' grads.
    void record(Tensor<T>& out, std::function<void()> backward) {
        out.node()->tape = this;
        out.node()->node_id = static_cast<int>(steps_.size());
        steps_.push_back(std::move(backward));
    }

    // Guard: an intermediate produced on another tape must not leak in.
    void check_input(const Tensor<T>& t) const {
        const auto& n = *t.node();
        if (n.tape != nullptr && n.tape != this)
            throw std::logic_error(
                "tensor produced on a different tape used as input");
    }

    void backward(Tensor<T>& loss) {
        if (loss.size() != 1)
            throw std::invalid_argument("backward() expects a scalar loss");
        if (!recording_)
            throw std::logic_error("backward() on a no-grad tape");
        loss.grad_data()[0] = T(1);
        for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
    }

    std::size_t num_steps() const { return steps_.size(); }

private:
    std::vector<std::function<void()>> steps_;
    bool recording_;
};

}  // namespace vin::num

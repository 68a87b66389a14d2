#pragma once

// Dense tensor handle with optional gradient participation. Value-semantic
// handle over shared storage; shapes are small (rank <= 3 in practice).
// Templated on the scalar type: production code uses float, the
// finite-difference oracles instantiate double.

#include <cstddef>
#include <memory>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vin::num {

using Shape = std::vector<int>;

inline std::size_t shape_numel(const Shape& s) {
    std::size_t n = 1;
    for (int d : s) {
        if (d < 0) throw std::invalid_argument("negative shape extent");
        n *= static_cast<std::size_t>(d);
    }
    return n;
}

inline std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
    os << "]";
    return os.str();
}

template <class T>
struct TensorNode {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;  // empty until backward touches it
    bool requires_grad = false;
    const void* tape = nullptr;  // tape that produced this node (non-leaf)
    int node_id = -1;

    void ensure_grad() {
        if (grad.empty()) grad.assign(value.size(), T(0));
    }
};

template <class T>
class Tensor {
public:
    Tensor() = default;

    static Tensor zeros(Shape shape, bool requires_grad = false) {
        Tensor t;
        t.n_ = std::make_shared<TensorNode<T>>();
        t.n_->shape = std::move(shape);
        t.n_->value.assign(shape_numel(t.n_->shape), T(0));
        t.n_->requires_grad = requires_grad;
        return t;
    }

    static Tensor full(Shape shape, T fill, bool requires_grad = false) {
        Tensor t = zeros(std::move(shape), requires_grad);
        for (T& v : t.n_->value) v = fill;
        return t;
    }

    static Tensor from(Shape shape, std::vector<T> data,
                       bool requires_grad = false) {
        if (shape_numel(shape) != data.size())
            throw std::invalid_argument("tensor data does not match shape " +
                                        shape_str(shape));
        Tensor t;
        t.n_ = std::make_shared<TensorNode<T>>();
        t.n_->shape = std::move(shape);
        t.n_->value = std::move(data);
        t.n_->requires_grad = requires_grad;
        return t;
    }

    template <class Rng>
    static Tensor uniform(Rng& rng, Shape shape, T lo, T hi,
                          bool requires_grad = false) {
        Tensor t = zeros(std::move(shape), requires_grad);
        std::uniform_real_distribution<double> dist{double(lo), double(hi)};
        for (T& v : t.n_->value) v = T(dist(rng));
        return t;
    }

    bool defined() const { return static_cast<bool>(n_); }
    const Shape& shape() const { return n_->shape; }
    int rank() const { return static_cast<int>(n_->shape.size()); }
    int dim(int i) const { return n_->shape[static_cast<std::size_t>(i)]; }
    std::size_t size() const { return n_->value.size(); }

    T* data() { return n_->value.data(); }
    const T* data() const { return n_->value.data(); }
    std::vector<T>& values() { return n_->value; }
    const std::vector<T>& values() const { return n_->value; }

    T item() const {
        if (size() != 1) throw std::logic_error("item() on non-scalar tensor");
        return n_->value[0];
    }

    bool requires_grad() const { return n_->requires_grad; }
    void set_requires_grad(bool rg) { n_->requires_grad = rg; }

    // Gradient buffer; materialized on demand with zeros.
    T* grad_data() {
        n_->ensure_grad();
        return n_->grad.data();
    }
    const std::vector<T>& grad() const {
        const_cast<TensorNode<T>*>(n_.get())->ensure_grad();
        return n_->grad;
    }
    void zero_grad() {
        for (T& g : n_->grad) g = T(0);
    }

    std::shared_ptr<TensorNode<T>> node() const { return n_; }

private:
    std::shared_ptr<TensorNode<T>> n_;
};

}  // namespace vin::num

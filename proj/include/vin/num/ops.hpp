#pragma once

// Differentiable tensor operations. Each op computes its forward value, then
// (when the tape is recording and any input wants gradients) registers a
// backward closure that accumulates into the inputs' grad buffers. Backward
// closures skip themselves when no gradient reached their output.
//
// Conventions:
//   images   [H x W x C], row-major, channel innermost
//   matrices [rows x cols]
//   kernels  [kh x kw x Cin x Cout]

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "vin/kernels/kernels.hpp"
#include "vin/num/tape.hpp"
#include "vin/num/tensor.hpp"

namespace vin::num {

namespace detail {

template <class T>
inline void check_same_shape(const char* op, const Tensor<T>& a,
                             const Tensor<T>& b) {
    if (a.shape() != b.shape())
        throw std::invalid_argument(std::string(op) + ": shape mismatch " +
                                    shape_str(a.shape()) + " vs " +
                                    shape_str(b.shape()));
}

template <class T>
inline bool grads_wanted(const Tape<T>& tape,
                         std::initializer_list<const Tensor<T>*> ins) {
    if (!tape.recording()) return false;
    for (const Tensor<T>* t : ins)
        if (t->defined() && t->requires_grad()) return true;
    return false;
}

// dst += src
template <class T>
inline void accumulate(std::vector<T>& dst, const std::vector<T>& src) {
    kernels::axpy(dst.size(), T(1), src.data(), dst.data());
}

template <class T>
void im2col(const T* x, int h, int w, int c, int k, int pt, int pl, T* out) {
    const int patch = k * k * c;
    for (int r = 0; r < h; ++r) {
        for (int col = 0; col < w; ++col) {
            T* row = out + static_cast<std::size_t>(r * w + col) * patch;
            int idx = 0;
            for (int kr = 0; kr < k; ++kr) {
                const int ir = r - pt + kr;
                if (ir < 0 || ir >= h) {
                    std::fill(row + idx, row + idx + k * c, T(0));
                    idx += k * c;
                    continue;
                }
                for (int kc = 0; kc < k; ++kc) {
                    const int ic = col - pl + kc;
                    if (ic < 0 || ic >= w) {
                        std::fill(row + idx, row + idx + c, T(0));
                    } else {
                        const T* src = x + static_cast<std::size_t>(ir * w + ic) * c;
                        std::copy(src, src + c, row + idx);
                    }
                    idx += c;
                }
            }
        }
    }
}

template <class T>
void col2im_acc(const T* cols, int h, int w, int c, int k, int pt, int pl,
                T* dx) {
    const int patch = k * k * c;
    for (int r = 0; r < h; ++r) {
        for (int col = 0; col < w; ++col) {
            const T* row = cols + static_cast<std::size_t>(r * w + col) * patch;
            int idx = 0;
            for (int kr = 0; kr < k; ++kr) {
                const int ir = r - pt + kr;
                if (ir < 0 || ir >= h) {
                    idx += k * c;
                    continue;
                }
                for (int kc = 0; kc < k; ++kc) {
                    const int ic = col - pl + kc;
                    if (ic >= 0 && ic < w) {
                        T* dst = dx + static_cast<std::size_t>(ir * w + ic) * c;
                        for (int ch = 0; ch < c; ++ch) dst[ch] += row[idx + ch];
                    }
                    idx += c;
                }
            }
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------- elementwise

template <class T>
Tensor<T> add(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape("add", a, b);
    tape.check_input(a);
    tape.check_input(b);
    Tensor<T> out = Tensor<T>::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.data()[i] = a.data()[i] + b.data()[i];
    if (detail::grads_wanted(tape, {&a, &b})) {
        out.set_requires_grad(true);
        auto an = a.node(), bn = b.node(), on = out.node();
        tape.record(out, [an, bn, on] {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                detail::accumulate(an->grad, on->grad);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                detail::accumulate(bn->grad, on->grad);
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> sub(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape("sub", a, b);
    tape.check_input(a);
    tape.check_input(b);
    Tensor<T> out = Tensor<T>::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.data()[i] = a.data()[i] - b.data()[i];
    if (detail::grads_wanted(tape, {&a, &b})) {
        out.set_requires_grad(true);
        auto an = a.node(), bn = b.node(), on = out.node();
        tape.record(out, [an, bn, on] {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                detail::accumulate(an->grad, on->grad);
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                kernels::axpy(bn->grad.size(), T(-1), on->grad.data(),
                              bn->grad.data());
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> mul(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape("mul", a, b);
    tape.check_input(a);
    tape.check_input(b);
    Tensor<T> out = Tensor<T>::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.data()[i] = a.data()[i] * b.data()[i];
    if (detail::grads_wanted(tape, {&a, &b})) {
        out.set_requires_grad(true);
        auto an = a.node(), bn = b.node(), on = out.node();
        tape.record(out, [an, bn, on] {
            if (on->grad.empty()) return;
            if (an->requires_grad) {
                an->ensure_grad();
                for (std::size_t i = 0; i < on->grad.size(); ++i)
                    an->grad[i] += on->grad[i] * bn->value[i];
            }
            if (bn->requires_grad) {
                bn->ensure_grad();
                for (std::size_t i = 0; i < on->grad.size(); ++i)
                    bn->grad[i] += on->grad[i] * an->value[i];
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> scale(Tape<T>& tape, const Tensor<T>& a, T factor) {
    tape.check_input(a);
    Tensor<T> out = Tensor<T>::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.data()[i] = a.data()[i] * factor;
    if (detail::grads_wanted(tape, {&a})) {
        out.set_requires_grad(true);
        auto an = a.node();
        auto on = out.node();
        tape.record(out, [an, on, factor] {
            if (on->grad.empty()) return;
            an->ensure_grad();
            kernels::axpy(an->grad.size(), factor, on->grad.data(),
                          an->grad.data());
        });
    }
    return out;
}

template <class T>
Tensor<T> relu(Tape<T>& tape, const Tensor<T>& a) {
    tape.check_input(a);
    Tensor<T> out = Tensor<T>::zeros(a.shape());
    kernels::relu_fwd(a.size(), a.data(), out.data());
    if (detail::grads_wanted(tape, {&a})) {
        out.set_requires_grad(true);
        auto an = a.node();
        auto on = out.node();
        tape.record(out, [an, on] {
            if (on->grad.empty()) return;
            an->ensure_grad();
            kernels::relu_bwd(an->grad.size(), an->value.data(),
                              on->grad.data(), an->grad.data());
        });
    }
    return out;
}

template <class T>
Tensor<T> sigmoid(Tape<T>& tape, const Tensor<T>& a) {
    tape.check_input(a);
    Tensor<T> out = Tensor<T>::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.data()[i] = T(1) / (T(1) + std::exp(-a.data()[i]));
    if (detail::grads_wanted(tape, {&a})) {
        out.set_requires_grad(true);
        auto an = a.node();
        auto on = out.node();
        tape.record(out, [an, on] {
            if (on->grad.empty()) return;
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) {
                const T y = on->value[i];
                an->grad[i] += on->grad[i] * y * (T(1) - y);
            }
        });
    }
    return out;
}

template <class T>
Tensor<T> tanh_op(Tape<T>& tape, const Tensor<T>& a) {
    tape.check_input(a);
    Tensor<T> out = Tensor<T>::zeros(a.shape());
    for (std::size_t i = 0; i < a.size(); ++i)
        out.data()[i] = std::tanh(a.data()[i]);
    if (detail::grads_wanted(tape, {&a})) {
        out.set_requires_grad(true);
        auto an = a.node();
        auto on = out.node();
        tape.record(out, [an, on] {
            if (on->grad.empty()) return;
            an->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i) {
                const T y = on->value[i];
                an->grad[i] += on->grad[i] * (T(1) - y * y);
            }
        });
    }
    return out;
}

// ------------------------------------------------------------------- linear

// x: [in] or [rows x in]; w: [in x out]; b: [out] or undefined.
template <class T>
Tensor<T> linear(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& w,
                 const Tensor<T>& b = Tensor<T>{}) {
    tape.check_input(x);
    tape.check_input(w);
    if (b.defined()) tape.check_input(b);
    if (w.rank() != 2) throw std::invalid_argument("linear: weights must be 2-d");
    const bool vec = x.rank() == 1;
    if (!vec && x.rank() != 2)
        throw std::invalid_argument("linear: input must be 1-d or 2-d");
    const int rows = vec ? 1 : x.dim(0);
    const int in = vec ? x.dim(0) : x.dim(1);
    const int out_dim = w.dim(1);
    if (in != w.dim(0))
        throw std::invalid_argument("linear: input size " + std::to_string(in) +
                                    " does not match weights " +
                                    shape_str(w.shape()));
    if (b.defined() && (b.rank() != 1 || b.dim(0) != out_dim))
        throw std::invalid_argument("linear: bias shape mismatch");

    Tensor<T> out = Tensor<T>::zeros(vec ? Shape{out_dim}
                                         : Shape{rows, out_dim});
    kernels::gemm_nn(rows, in, out_dim, x.data(), w.data(), out.data());
    if (b.defined()) {
        for (int r = 0; r < rows; ++r)
            for (int j = 0; j < out_dim; ++j)
                out.data()[static_cast<std::size_t>(r) * out_dim + j] +=
                    b.data()[j];
    }

    if (detail::grads_wanted(tape, {&x, &w, &b})) {
        out.set_requires_grad(true);
        auto xn = x.node(), wn = w.node(), on = out.node();
        auto bn = b.defined() ? b.node() : nullptr;
        tape.record(out, [xn, wn, bn, on, rows, in, out_dim] {
            if (on->grad.empty()) return;
            const T* dy = on->grad.data();
            if (xn->requires_grad) {
                xn->ensure_grad();
                kernels::gemm_nt(rows, in, out_dim, dy, wn->value.data(),
                                 xn->grad.data());
            }
            if (wn->requires_grad) {
                wn->ensure_grad();
                kernels::gemm_tn(rows, in, out_dim, xn->value.data(), dy,
                                 wn->grad.data());
            }
            if (bn && bn->requires_grad) {
                bn->ensure_grad();
                for (int r = 0; r < rows; ++r)
                    kernels::axpy(out_dim, T(1),
                                  dy + static_cast<std::size_t>(r) * out_dim,
                                  bn->grad.data());
            }
        });
    }
    return out;
}

// ------------------------------------------------------------------- conv2d

// Size-preserving cross-correlation. Even kernels pad one extra cell on the
// top/left (kernel 10: 5 top/left, 4 bottom/right).
template <class T>
Tensor<T> conv2d(Tape<T>& tape, const Tensor<T>& x, const Tensor<T>& k,
                 const Tensor<T>& b = Tensor<T>{}) {
    tape.check_input(x);
    tape.check_input(k);
    if (b.defined()) tape.check_input(b);
    if (x.rank() != 3) throw std::invalid_argument("conv2d: input must be HxWxC");
    if (k.rank() != 4 || k.dim(0) != k.dim(1))
        throw std::invalid_argument("conv2d: kernel must be kxkxCinxCout");
    const int h = x.dim(0), w = x.dim(1), cin = x.dim(2);
    const int ksz = k.dim(0), cout = k.dim(3);
    if (k.dim(2) != cin)
        throw std::invalid_argument(
            "conv2d: kernel expects " + std::to_string(k.dim(2)) +
            " input channels, image has " + std::to_string(cin));
    if (b.defined() && (b.rank() != 1 || b.dim(0) != cout))
        throw std::invalid_argument("conv2d: bias shape mismatch");
    const int pt = ksz / 2;
    const int pl = pt;

    const std::size_t patches = static_cast<std::size_t>(h) * w;
    const std::size_t patch_len = static_cast<std::size_t>(ksz) * ksz * cin;
    thread_local std::vector<T> cols;
    cols.assign(patches * patch_len, T(0));
    detail::im2col(x.data(), h, w, cin, ksz, pt, pl, cols.data());

    Tensor<T> out = Tensor<T>::zeros({h, w, cout});
    kernels::gemm_nn(patches, patch_len, cout, cols.data(), k.data(),
                     out.data());
    if (b.defined()) {
        for (std::size_t p = 0; p < patches; ++p)
            for (int ch = 0; ch < cout; ++ch)
                out.data()[p * cout + ch] += b.data()[ch];
    }

    if (detail::grads_wanted(tape, {&x, &k, &b})) {
        out.set_requires_grad(true);
        auto xn = x.node(), kn = k.node(), on = out.node();
        auto bn = b.defined() ? b.node() : nullptr;
        tape.record(out, [xn, kn, bn, on, h, w, cin, ksz, cout, pt, pl,
                          patches, patch_len] {
            if (on->grad.empty()) return;
            const T* dy = on->grad.data();
            if (kn->requires_grad || xn->requires_grad) {
                thread_local std::vector<T> cols_b;
                if (kn->requires_grad) {
                    cols_b.assign(patches * patch_len, T(0));
                    detail::im2col(xn->value.data(), h, w, cin, ksz, pt, pl,
                                   cols_b.data());
                    kn->ensure_grad();
                    kernels::gemm_tn(patches, patch_len, cout, cols_b.data(),
                                     dy, kn->grad.data());
                }
                if (xn->requires_grad) {
                    cols_b.assign(patches * patch_len, T(0));
                    kernels::gemm_nt(patches, patch_len, cout, dy,
                                     kn->value.data(), cols_b.data());
                    xn->ensure_grad();
                    detail::col2im_acc(cols_b.data(), h, w, cin, ksz, pt, pl,
                                       xn->grad.data());
                }
            }
            if (bn && bn->requires_grad) {
                bn->ensure_grad();
                for (std::size_t p = 0; p < patches; ++p)
                    kernels::axpy(std::size_t(cout), T(1), dy + p * cout,
                                  bn->grad.data());
            }
        });
    }
    return out;
}

// ----------------------------------------------------------------- maxpool2

// 2x2 max pooling; gradient routes to the argmax (ties: lowest linear index).
template <class T>
Tensor<T> maxpool2(Tape<T>& tape, const Tensor<T>& x) {
    tape.check_input(x);
    if (x.rank() != 3)
        throw std::invalid_argument("maxpool2: input must be HxWxC");
    const int h = x.dim(0), w = x.dim(1), c = x.dim(2);
    if (h % 2 != 0 || w % 2 != 0)
        throw std::invalid_argument("maxpool2: spatial extents must be even, got " +
                                    shape_str(x.shape()));
    const int oh = h / 2, ow = w / 2;
    Tensor<T> out = Tensor<T>::zeros({oh, ow, c});
    std::vector<int> argmax(out.size());
    const T* px = x.data();
    for (int r = 0; r < oh; ++r) {
        for (int col = 0; col < ow; ++col) {
            for (int ch = 0; ch < c; ++ch) {
                int best = ((2 * r) * w + 2 * col) * c + ch;
                T bv = px[best];
                const int cand[3] = {((2 * r) * w + 2 * col + 1) * c + ch,
                                     ((2 * r + 1) * w + 2 * col) * c + ch,
                                     ((2 * r + 1) * w + 2 * col + 1) * c + ch};
                for (int i = 0; i < 3; ++i) {
                    if (px[cand[i]] > bv) {
                        bv = px[cand[i]];
                        best = cand[i];
                    }
                }
                const std::size_t oi =
                    static_cast<std::size_t>((r * ow + col) * c + ch);
                out.data()[oi] = bv;
                argmax[oi] = best;
            }
        }
    }
    if (detail::grads_wanted(tape, {&x})) {
        out.set_requires_grad(true);
        auto xn = x.node();
        auto on = out.node();
        tape.record(out, [xn, on, argmax = std::move(argmax)] {
            if (on->grad.empty()) return;
            xn->ensure_grad();
            for (std::size_t i = 0; i < on->grad.size(); ++i)
                xn->grad[static_cast<std::size_t>(argmax[i])] += on->grad[i];
        });
    }
    return out;
}

// ---------------------------------------------------------- shape plumbing

template <class T>
Tensor<T> reshape(Tape<T>& tape, const Tensor<T>& x, Shape shape) {
    tape.check_input(x);
    if (shape_numel(shape) != x.size())
        throw std::invalid_argument("reshape: element count mismatch " +
                                    shape_str(x.shape()) + " -> " +
                                    shape_str(shape));
    Tensor<T> out = Tensor<T>::from(std::move(shape), x.values());
    if (detail::grads_wanted(tape, {&x})) {
        out.set_requires_grad(true);
        auto xn = x.node();
        auto on = out.node();
        tape.record(out, [xn, on] {
            if (on->grad.empty()) return;
            xn->ensure_grad();
            detail::accumulate(xn->grad, on->grad);
        });
    }
    return out;
}

// Rows [begin, end) of a 2-d tensor, or elements of a 1-d tensor.
template <class T>
Tensor<T> slice(Tape<T>& tape, const Tensor<T>& x, int begin, int end) {
    tape.check_input(x);
    if (x.rank() != 1 && x.rank() != 2)
        throw std::invalid_argument("slice: input must be 1-d or 2-d");
    if (begin < 0 || end > x.dim(0) || begin >= end)
        throw std::invalid_argument("slice: bad range");
    const int cols = x.rank() == 2 ? x.dim(1) : 1;
    const std::size_t off = static_cast<std::size_t>(begin) * cols;
    const std::size_t len = static_cast<std::size_t>(end - begin) * cols;
    Shape oshape = x.rank() == 2 ? Shape{end - begin, cols} : Shape{end - begin};
    Tensor<T> out = Tensor<T>::from(
        std::move(oshape),
        std::vector<T>(x.data() + off, x.data() + off + len));
    if (detail::grads_wanted(tape, {&x})) {
        out.set_requires_grad(true);
        auto xn = x.node();
        auto on = out.node();
        tape.record(out, [xn, on, off] {
            if (on->grad.empty()) return;
            xn->ensure_grad();
            kernels::axpy(on->grad.size(), T(1), on->grad.data(),
                          xn->grad.data() + off);
        });
    }
    return out;
}

// Concatenate [N x ci] matrices along columns.
template <class T>
Tensor<T> concat_cols(Tape<T>& tape, const std::vector<Tensor<T>>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: empty");
    const int rows = parts[0].dim(0);
    int total = 0;
    for (const auto& p : parts) {
        tape.check_input(p);
        if (p.rank() != 2 || p.dim(0) != rows)
            throw std::invalid_argument("concat_cols: row mismatch");
        total += p.dim(1);
    }
    Tensor<T> out = Tensor<T>::zeros({rows, total});
    int at = 0;
    for (const auto& p : parts) {
        const int c = p.dim(1);
        for (int r = 0; r < rows; ++r)
            std::copy(p.data() + static_cast<std::size_t>(r) * c,
                      p.data() + static_cast<std::size_t>(r + 1) * c,
                      out.data() + static_cast<std::size_t>(r) * total + at);
        at += c;
    }
    bool want = false;
    for (const auto& p : parts) want = want || p.requires_grad();
    if (tape.recording() && want) {
        out.set_requires_grad(true);
        std::vector<std::shared_ptr<TensorNode<T>>> nodes;
        nodes.reserve(parts.size());
        for (const auto& p : parts) nodes.push_back(p.node());
        auto on = out.node();
        tape.record(out, [nodes, on, rows, total] {
            if (on->grad.empty()) return;
            int at = 0;
            for (const auto& n : nodes) {
                const int c = n->shape[1];
                if (n->requires_grad) {
                    n->ensure_grad();
                    for (int r = 0; r < rows; ++r)
                        kernels::axpy(
                            std::size_t(c), T(1),
                            on->grad.data() +
                                static_cast<std::size_t>(r) * total + at,
                            n->grad.data() + static_cast<std::size_t>(r) * c);
                }
                at += c;
            }
        });
    }
    return out;
}

// Concatenate [H x W x ci] images along the channel dimension.
template <class T>
Tensor<T> concat_channels(Tape<T>& tape, const std::vector<Tensor<T>>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_channels: empty");
    const int h = parts[0].dim(0), w = parts[0].dim(1);
    int total = 0;
    for (const auto& p : parts) {
        tape.check_input(p);
        if (p.rank() != 3 || p.dim(0) != h || p.dim(1) != w)
            throw std::invalid_argument("concat_channels: spatial mismatch");
        total += p.dim(2);
    }
    const std::size_t pixels = static_cast<std::size_t>(h) * w;
    Tensor<T> out = Tensor<T>::zeros({h, w, total});
    int at = 0;
    for (const auto& p : parts) {
        const int c = p.dim(2);
        for (std::size_t px = 0; px < pixels; ++px)
            std::copy(p.data() + px * c, p.data() + (px + 1) * c,
                      out.data() + px * total + at);
        at += c;
    }
    bool want = false;
    for (const auto& p : parts) want = want || p.requires_grad();
    if (tape.recording() && want) {
        out.set_requires_grad(true);
        std::vector<std::shared_ptr<TensorNode<T>>> nodes;
        for (const auto& p : parts) nodes.push_back(p.node());
        auto on = out.node();
        tape.record(out, [nodes, on, pixels, total] {
            if (on->grad.empty()) return;
            int at = 0;
            for (const auto& n : nodes) {
                const int c = n->shape[2];
                if (n->requires_grad) {
                    n->ensure_grad();
                    for (std::size_t px = 0; px < pixels; ++px)
                        for (int ch = 0; ch < c; ++ch)
                            n->grad[px * c + ch] +=
                                on->grad[px * total + at + ch];
                }
                at += c;
            }
        });
    }
    return out;
}

// --------------------------------------------------------------- reductions

template <class T>
Tensor<T> sum(Tape<T>& tape, const Tensor<T>& x) {
    tape.check_input(x);
    T acc = T(0);
    for (std::size_t i = 0; i < x.size(); ++i) acc += x.data()[i];
    Tensor<T> out = Tensor<T>::from({1}, {acc});
    if (detail::grads_wanted(tape, {&x})) {
        out.set_requires_grad(true);
        auto xn = x.node();
        auto on = out.node();
        tape.record(out, [xn, on] {
            if (on->grad.empty()) return;
            xn->ensure_grad();
            const T g = on->grad[0];
            for (T& d : xn->grad) d += g;
        });
    }
    return out;
}

// Mean squared error over all elements.
template <class T>
Tensor<T> mse(Tape<T>& tape, const Tensor<T>& a, const Tensor<T>& b) {
    detail::check_same_shape("mse", a, b);
    Tensor<T> d = sub(tape, a, b);
    Tensor<T> sq = mul(tape, d, d);
    return scale(tape, sum(tape, sq), T(1) / T(a.size()));
}

// ------------------------------------------------------- slot-pair plumbing

// For a state code [N x d], emit every ordered pair of distinct slots as a
// concatenated row: output [N*(N-1) x 2d], enumerated i-major with j
// ascending and skipping j == i. N == 1 yields an empty [0 x 2d] tensor.
template <class T>
Tensor<T> pair_concat(Tape<T>& tape, const Tensor<T>& code) {
    tape.check_input(code);
    if (code.rank() != 2) throw std::invalid_argument("pair_concat: need [N x d]");
    const int n = code.dim(0), d = code.dim(1);
    const int pairs = n * (n - 1);
    Tensor<T> out = Tensor<T>::zeros({pairs, 2 * d});
    int p = 0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            std::copy(code.data() + static_cast<std::size_t>(i) * d,
                      code.data() + static_cast<std::size_t>(i + 1) * d,
                      out.data() + static_cast<std::size_t>(p) * 2 * d);
            std::copy(code.data() + static_cast<std::size_t>(j) * d,
                      code.data() + static_cast<std::size_t>(j + 1) * d,
                      out.data() + static_cast<std::size_t>(p) * 2 * d + d);
            ++p;
        }
    }
    if (detail::grads_wanted(tape, {&code})) {
        out.set_requires_grad(true);
        auto cn = code.node();
        auto on = out.node();
        tape.record(out, [cn, on, n, d] {
            if (on->grad.empty()) return;
            cn->ensure_grad();
            int p = 0;
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    if (j == i) continue;
                    const T* row =
                        on->grad.data() + static_cast<std::size_t>(p) * 2 * d;
                    kernels::axpy(std::size_t(d), T(1), row,
                                  cn->grad.data() +
                                      static_cast<std::size_t>(i) * d);
                    kernels::axpy(std::size_t(d), T(1), row + d,
                                  cn->grad.data() +
                                      static_cast<std::size_t>(j) * d);
                    ++p;
                }
            }
        });
    }
    return out;
}

// Inverse routing of pair_concat's first index: sums rows of rel [N*(N-1) x d]
// into slot i, in ascending j order. N == 1 yields zeros [1 x d].
template <class T>
Tensor<T> pair_sum(Tape<T>& tape, const Tensor<T>& rel, int n) {
    tape.check_input(rel);
    if (rel.rank() != 2 || rel.dim(0) != n * (n - 1))
        throw std::invalid_argument("pair_sum: row count must be N*(N-1)");
    const int d = rel.dim(1);
    Tensor<T> out = Tensor<T>::zeros({n, d});
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n - 1; ++j) {
            const std::size_t p = static_cast<std::size_t>(i) * (n - 1) + j;
            kernels::axpy(std::size_t(d), T(1), rel.data() + p * d,
                          out.data() + static_cast<std::size_t>(i) * d);
        }
    }
    if (detail::grads_wanted(tape, {&rel})) {
        out.set_requires_grad(true);
        auto rn = rel.node();
        auto on = out.node();
        tape.record(out, [rn, on, n, d] {
            if (on->grad.empty()) return;
            rn->ensure_grad();
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n - 1; ++j) {
                    const std::size_t p =
                        static_cast<std::size_t>(i) * (n - 1) + j;
                    kernels::axpy(std::size_t(d), T(1),
                                  on->grad.data() +
                                      static_cast<std::size_t>(i) * d,
                                  rn->grad.data() + p * d);
                }
        });
    }
    return out;
}

// ---------------------------------------------------------------- lstm cell

template <class T>
struct LstmParams {
    Tensor<T> wx;  // [in x 4H]
    Tensor<T> wh;  // [H x 4H]
    Tensor<T> b;   // [4H]
};

// Standard gated update, gate order (input, forget, candidate, output).
template <class T>
std::pair<Tensor<T>, Tensor<T>> lstm_cell(Tape<T>& tape, const Tensor<T>& x,
                                          const Tensor<T>& h,
                                          const Tensor<T>& c,
                                          const LstmParams<T>& p) {
    if (h.rank() != 1 || c.rank() != 1 || h.dim(0) != c.dim(0))
        throw std::invalid_argument("lstm_cell: hidden/cell must be equal-length vectors");
    const int hd = h.dim(0);
    if (p.wh.dim(0) != hd || p.wh.dim(1) != 4 * hd || p.wx.dim(1) != 4 * hd)
        throw std::invalid_argument("lstm_cell: parameter shape mismatch");
    Tensor<T> gates = add(tape, linear(tape, x, p.wx, p.b),
                          linear(tape, h, p.wh));
    Tensor<T> gi = sigmoid(tape, slice(tape, gates, 0, hd));
    Tensor<T> gf = sigmoid(tape, slice(tape, gates, hd, 2 * hd));
    Tensor<T> gg = tanh_op(tape, slice(tape, gates, 2 * hd, 3 * hd));
    Tensor<T> go = sigmoid(tape, slice(tape, gates, 3 * hd, 4 * hd));
    Tensor<T> c2 = add(tape, mul(tape, gf, c), mul(tape, gi, gg));
    Tensor<T> h2 = mul(tape, go, tanh_op(tape, c2));
    return {h2, c2};
}

}  // namespace vin::num

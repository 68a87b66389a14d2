#include "vin/num/gradcheck.hpp"

#include <cmath>
#include <functional>
#include <random>

#include "vin/num/ops.hpp"

namespace vin::num {

namespace {

using D = double;
using Rng = std::mt19937_64;
using Forward =
    std::function<Tensor<D>(Tape<D>&, std::vector<Tensor<D>>&)>;

struct Instance {
    std::vector<Tensor<D>> inputs;  // leaves, requires_grad set
    Forward forward;                // pure function of the inputs
};

Tensor<D> leaf(Rng& rng, Shape shape, double lo = -1.0, double hi = 1.0) {
    return Tensor<D>::uniform(rng, std::move(shape), lo, hi, true);
}

// Random projection to a scalar so the whole Jacobian is exercised.
Tensor<D> project(Tape<D>& tape, const Tensor<D>& t, const Tensor<D>& w) {
    return sum(tape, mul(tape, t, reshape(tape, w, t.shape())));
}

Tensor<D> proj_weights(Rng& rng, std::size_t n) {
    return Tensor<D>::uniform(rng, {int(n)}, -1.0, 1.0, false);
}

// Keep values away from the relu kink so finite differences stay valid.
void avoid_kink(Tensor<D>& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        double& v = t.data()[i];
        if (std::abs(v) < 5e-3) v += (v >= 0 ? 5e-3 : -5e-3);
    }
}

// Keep every 2x2 pooling window's top-two gap wide enough that the argmax
// cannot flip under the FD step.
void separate_pool_windows(Tensor<D>& t, Rng& rng) {
    const int h = t.dim(0), w = t.dim(1), c = t.dim(2);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int r = 0; r < h; r += 2)
        for (int col = 0; col < w; col += 2)
            for (int ch = 0; ch < c; ++ch) {
                double* v[4] = {
                    &t.data()[(std::size_t(r) * w + col) * c + ch],
                    &t.data()[(std::size_t(r) * w + col + 1) * c + ch],
                    &t.data()[(std::size_t(r + 1) * w + col) * c + ch],
                    &t.data()[(std::size_t(r + 1) * w + col + 1) * c + ch]};
                for (int tries = 0; tries < 100; ++tries) {
                    double best = -2, second = -2;
                    for (int i = 0; i < 4; ++i) {
                        if (*v[i] > best) {
                            second = best;
                            best = *v[i];
                        } else if (*v[i] > second) {
                            second = *v[i];
                        }
                    }
                    if (best - second > 1e-3) break;
                    for (int i = 0; i < 4; ++i) *v[i] = dist(rng);
                }
            }
}

double relative_error(double fd, double an) {
    const double mag = std::max(std::abs(fd), std::abs(an));
    if (mag < 1e-7) return 0.0;  // both effectively zero
    return std::abs(fd - an) / mag;
}

double check_instance(Instance inst, double h = 1e-5) {
    Tape<D> tape;
    Tensor<D> loss = inst.forward(tape, inst.inputs);
    tape.backward(loss);

    double max_rel = 0.0;
    for (Tensor<D>& input : inst.inputs) {
        const std::vector<D> analytic = input.grad();
        for (std::size_t i = 0; i < input.size(); ++i) {
            const double orig = input.data()[i];
            input.data()[i] = orig + h;
            Tape<D> tp(Tape<D>::kNoGrad);
            const double lp = inst.forward(tp, inst.inputs).item();
            input.data()[i] = orig - h;
            Tape<D> tm(Tape<D>::kNoGrad);
            const double lm = inst.forward(tm, inst.inputs).item();
            input.data()[i] = orig;
            const double fd = (lp - lm) / (2 * h);
            max_rel = std::max(max_rel, relative_error(fd, analytic[i]));
        }
    }
    return max_rel;
}

struct OpCase {
    std::string name;
    std::function<Instance(Rng&)> make;
    double tolerance = 1e-4;
};

std::vector<OpCase> op_cases() {
    std::vector<OpCase> cases;

    cases.push_back({"add", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {3, 5}), leaf(rng, {3, 5})};
        auto w = proj_weights(rng, 15);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, add(t, in[0], in[1]), w);
        };
        return inst;
    }});

    cases.push_back({"sub", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {7}), leaf(rng, {7})};
        auto w = proj_weights(rng, 7);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, sub(t, in[0], in[1]), w);
        };
        return inst;
    }});

    cases.push_back({"mul", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {4, 3}), leaf(rng, {4, 3})};
        auto w = proj_weights(rng, 12);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, mul(t, in[0], in[1]), w);
        };
        return inst;
    }});

    cases.push_back({"scale", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {9})};
        std::uniform_real_distribution<double> d(-2.0, 2.0);
        const double factor = d(rng);
        auto w = proj_weights(rng, 9);
        inst.forward = [w, factor](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, scale(t, in[0], factor), w);
        };
        return inst;
    }});

    cases.push_back({"relu", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {6, 4})};
        avoid_kink(inst.inputs[0]);
        auto w = proj_weights(rng, 24);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, relu(t, in[0]), w);
        };
        return inst;
    }});

    cases.push_back({"sigmoid", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {11}, -3.0, 3.0)};
        auto w = proj_weights(rng, 11);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, sigmoid(t, in[0]), w);
        };
        return inst;
    }});

    cases.push_back({"tanh", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {11}, -3.0, 3.0)};
        auto w = proj_weights(rng, 11);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, tanh_op(t, in[0]), w);
        };
        return inst;
    }});

    cases.push_back({"linear_vec", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {6}), leaf(rng, {6, 4}), leaf(rng, {4})};
        auto w = proj_weights(rng, 4);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, linear(t, in[0], in[1], in[2]), w);
        };
        return inst;
    }});

    cases.push_back({"linear_mat", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {3, 6}), leaf(rng, {6, 5}), leaf(rng, {5})};
        auto w = proj_weights(rng, 15);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, linear(t, in[0], in[1], in[2]), w);
        };
        return inst;
    }});

    cases.push_back({"conv2d_k3", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {5, 5, 2}), leaf(rng, {3, 3, 2, 3}),
                       leaf(rng, {3})};
        auto w = proj_weights(rng, 75);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, conv2d(t, in[0], in[1], in[2]), w);
        };
        return inst;
    }});

    cases.push_back({"conv2d_k4_even", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {6, 6, 2}), leaf(rng, {4, 4, 2, 2}),
                       leaf(rng, {2})};
        auto w = proj_weights(rng, 72);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, conv2d(t, in[0], in[1], in[2]), w);
        };
        return inst;
    }});

    cases.push_back({"maxpool2", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {6, 6, 2})};
        separate_pool_windows(inst.inputs[0], rng);
        auto w = proj_weights(rng, 18);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, maxpool2(t, in[0]), w);
        };
        return inst;
    }});

    cases.push_back({"reshape", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {4, 6})};
        auto w = proj_weights(rng, 24);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, reshape(t, in[0], {2, 12}), w);
        };
        return inst;
    }});

    cases.push_back({"slice", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {8, 3})};
        auto w = proj_weights(rng, 9);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, slice(t, in[0], 2, 5), w);
        };
        return inst;
    }});

    cases.push_back({"concat_cols", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {3, 2}), leaf(rng, {3, 4}), leaf(rng, {3, 1})};
        auto w = proj_weights(rng, 21);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, concat_cols(t, {in[0], in[1], in[2]}), w);
        };
        return inst;
    }});

    cases.push_back({"concat_channels", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {4, 4, 2}), leaf(rng, {4, 4, 3})};
        auto w = proj_weights(rng, 80);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, concat_channels(t, {in[0], in[1]}), w);
        };
        return inst;
    }});

    cases.push_back({"sum", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {5, 3})};
        inst.forward = [](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return sum(t, in[0]);
        };
        return inst;
    }});

    cases.push_back({"mse", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {6, 4}), leaf(rng, {6, 4})};
        inst.forward = [](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return mse(t, in[0], in[1]);
        };
        return inst;
    }});

    cases.push_back({"pair_concat", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {4, 3})};
        auto w = proj_weights(rng, 4 * 3 * 6);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, pair_concat(t, in[0]), w);
        };
        return inst;
    }});

    cases.push_back({"pair_sum", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {12, 5})};  // N=4 -> 12 pair rows
        auto w = proj_weights(rng, 20);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            return project(t, pair_sum(t, in[0], 4), w);
        };
        return inst;
    }});

    cases.push_back({"lstm_cell", [](Rng& rng) {
        Instance inst;
        const int in_d = 5, hd = 4;
        inst.inputs = {leaf(rng, {in_d}),          leaf(rng, {hd}),
                       leaf(rng, {hd}),            leaf(rng, {in_d, 4 * hd}),
                       leaf(rng, {hd, 4 * hd}),    leaf(rng, {4 * hd})};
        auto wh = proj_weights(rng, hd);
        auto wc = proj_weights(rng, hd);
        inst.forward = [wh, wc](Tape<D>& t, std::vector<Tensor<D>>& in) {
            LstmParams<D> p{in[3], in[4], in[5]};
            auto [h2, c2] = lstm_cell(t, in[0], in[1], in[2], p);
            return add(t, project(t, h2, wh), project(t, c2, wc));
        };
        return inst;
    }});

    // Three unrolled steps: gradient through time.
    cases.push_back({"lstm_cell_unrolled3", [](Rng& rng) {
        Instance inst;
        const int in_d = 3, hd = 4;
        inst.inputs = {leaf(rng, {in_d}), leaf(rng, {in_d}), leaf(rng, {in_d}),
                       leaf(rng, {in_d, 4 * hd}), leaf(rng, {hd, 4 * hd}),
                       leaf(rng, {4 * hd})};
        auto w = proj_weights(rng, hd);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            LstmParams<D> p{in[3], in[4], in[5]};
            Tensor<D> h = Tensor<D>::zeros({4});
            Tensor<D> c = Tensor<D>::zeros({4});
            for (int s = 0; s < 3; ++s) {
                auto [h2, c2] = lstm_cell(t, in[std::size_t(s)], h, c, p);
                h = h2;
                c = c2;
            }
            return project(t, h, w);
        };
        return inst;
    }, 1e-3});

    // Composed graph: conv -> relu -> pool -> flatten -> linear, checked
    // end to end so the chained Jacobian actions are exercised together.
    cases.push_back({"composed_chain", [](Rng& rng) {
        Instance inst;
        inst.inputs = {leaf(rng, {4, 4, 2}), leaf(rng, {3, 3, 2, 3}),
                       leaf(rng, {12, 4}), leaf(rng, {4})};
        avoid_kink(inst.inputs[0]);
        auto w = proj_weights(rng, 4);
        inst.forward = [w](Tape<D>& t, std::vector<Tensor<D>>& in) {
            auto y = maxpool2(t, relu(t, conv2d(t, in[0], in[1])));
            auto flat = reshape(t, y, {12});
            return project(t, linear(t, flat, in[2], in[3]), w);
        };
        return inst;
    }});

    return cases;
}

}  // namespace

std::vector<GradCheckResult> run_gradcheck(std::uint64_t seed,
                                           int instances_per_op) {
    std::vector<GradCheckResult> results;
    for (const OpCase& c : op_cases()) {
        Rng rng(seed ^ std::hash<std::string>{}(c.name));
        GradCheckResult r;
        r.op = c.name;
        r.tolerance = c.tolerance;
        for (int i = 0; i < instances_per_op; ++i) {
            r.max_rel_err = std::max(r.max_rel_err, check_instance(c.make(rng)));
            ++r.instances;
        }
        r.pass = r.max_rel_err <= r.tolerance;
        results.push_back(std::move(r));
    }
    return results;
}

bool all_pass(const std::vector<GradCheckResult>& results) {
    for (const auto& r : results)
        if (!r.pass) return false;
    return !results.empty();
}

}  // namespace vin::num

#include "vin/train/trainer.hpp"

#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <thread>

#include "vin/num/adam.hpp"
#include "vin/train/loss.hpp"

namespace vin::train {

namespace {

double window_mean(const std::deque<double>& w) {
    if (w.empty()) return 0.0;
    return std::accumulate(w.begin(), w.end(), 0.0) / double(w.size());
}

struct StepValues {
    double total = 0.0, prediction = 0.0, aux = 0.0;
};

// One worker's share of a batch: forward + backward on its own tape and
// its own parameter copies. Gradients stay in the worker's tensors until
// the main thread reduces them in a fixed order.
StepValues run_sub_batch(models::Model<float>& model,
                         const data::Dataset& dataset,
                         const std::vector<data::TrainingSample>& batch,
                         std::size_t begin, std::size_t stride,
                         const std::array<double, kHorizon>& weights,
                         double aux_weight) {
    (void)dataset;
    StepValues values;
    num::Tape<float> tape;
    num::Tensor<float> total;
    for (std::size_t i = begin; i < batch.size(); i += stride) {
        auto tensors = sample_to_tensors<float>(batch[i], model.has_encoder(),
                                                model.n_object);
        auto parts =
            compute_sample_loss(tape, model, tensors, weights, aux_weight);
        values.prediction += double(parts.prediction.item());
        if (parts.aux.defined()) values.aux += double(parts.aux.item());
        values.total += double(parts.total.item());
        total = total.defined() ? num::add(tape, total, parts.total)
                                : parts.total;
    }
    if (total.defined()) tape.backward(total);
    return values;
}

}  // namespace

TrainResult train(models::Model<float>& model, const data::Dataset& dataset,
                  const TrainConfig& config) {
    if (dataset.n_object() != model.n_object)
        throw std::invalid_argument("train: dataset and model disagree on n_object");
    if (model.has_encoder() && !dataset.has_frames())
        throw std::invalid_argument("train: visual variant needs frames loaded");

    std::filesystem::create_directories(config.out_dir);
    const std::string log_path = config.out_dir + "/loss_log.csv";
    std::ofstream log(log_path, std::ios::trunc);
    if (!log) throw std::runtime_error("train: cannot open " + log_path);
    log << "step,total,prediction,auxiliary,lr,discount\n";

    num::AdamConfig adam_cfg;
    adam_cfg.base_lr = config.base_lr;
    adam_cfg.alpha = config.lr_alpha;
    num::Adam<float> opt(adam_cfg);
    auto params = model.named_params();

    // Worker copies for batch parallelism. Gradients are reduced in worker
    // order, so a run is deterministic for a fixed (seed, threads) pair.
    const int workers =
        std::max(1, std::min(config.threads, config.batch_size));
    std::vector<models::Model<float>> worker_models;
    std::vector<std::vector<std::pair<std::string, num::Tensor<float>>>>
        worker_params;
    for (int w = 1; w < workers; ++w) {
        worker_models.push_back(
            models::Model<float>::make(model.variant, model.n_object, 0));
        worker_params.push_back(worker_models.back().named_params());
    }

    std::mt19937_64 rng(config.seed);
    std::deque<double> head_window, tail_window;
    TrainResult result;
    result.log_path = log_path;

    for (long long t = 0; t < config.steps; ++t) {
        const auto weights = horizon_weights(t, config.beta);
        const auto batch = data::sample_batch(dataset, config.batch_size, rng);

        std::vector<StepValues> values{std::size_t(workers)};
        if (workers == 1) {
            values[0] = run_sub_batch(model, dataset, batch, 0, 1, weights,
                                      config.aux_weight);
        } else {
            for (int w = 1; w < workers; ++w) {
                auto& wp = worker_params[std::size_t(w - 1)];
                for (std::size_t p = 0; p < params.size(); ++p) {
                    std::copy(params[p].second.data(),
                              params[p].second.data() + params[p].second.size(),
                              wp[p].second.data());
                    wp[p].second.zero_grad();
                }
            }
            std::vector<std::thread> pool;
            for (int w = 1; w < workers; ++w)
                pool.emplace_back([&, w] {
                    values[std::size_t(w)] = run_sub_batch(
                        worker_models[std::size_t(w - 1)], dataset, batch,
                        std::size_t(w), std::size_t(workers), weights,
                        config.aux_weight);
                });
            values[0] = run_sub_batch(model, dataset, batch, 0,
                                      std::size_t(workers), weights,
                                      config.aux_weight);
            for (std::thread& th : pool) th.join();
            for (int w = 1; w < workers; ++w) {
                auto& wp = worker_params[std::size_t(w - 1)];
                for (std::size_t p = 0; p < params.size(); ++p) {
                    const auto& g = wp[p].second.grad();
                    kernels::axpy(g.size(), 1.0f, g.data(),
                                  params[p].second.grad_data());
                }
            }
        }

        StepValues step{};
        for (const StepValues& v : values) {
            step.total += v.total;
            step.prediction += v.prediction;
            step.aux += v.aux;
        }
        const double inv_b = 1.0 / double(config.batch_size);
        step.total *= inv_b;
        step.prediction *= inv_b;
        step.aux *= inv_b;
        if (!std::isfinite(step.total))
            throw std::runtime_error("train: non-finite loss at step " +
                                     std::to_string(t));
        // Backward ran on per-sample sums; rescale gradients to the mean.
        for (auto& [name, p] : params) {
            float* g = p.grad_data();
            for (std::size_t i = 0; i < p.size(); ++i) g[i] *= float(inv_b);
        }
        opt.step(params);

        if (t % config.log_every == 0 || t + 1 == config.steps) {
            char line[192];
            std::snprintf(line, sizeof(line), "%lld,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                          t, step.total, step.prediction, step.aux,
                          opt.lr_at(t),
                          1.0 - std::exp(-double(t) / config.beta));
            log << line;
        }
        if (config.checkpoint_every > 0 && t > 0 &&
            t % config.checkpoint_every == 0) {
            models::save_model(model, config.out_dir + "/ckpt_" +
                                          std::to_string(t) + ".ckpt");
        }

        if (head_window.size() < 100) head_window.push_back(step.total);
        tail_window.push_back(step.total);
        if (tail_window.size() > 100) tail_window.pop_front();

        if (config.probe && config.probe_every > 0 && (t + 1) % config.probe_every == 0 &&
            config.probe(t + 1, model))
            break;
    }

    result.initial_smoothed_loss = window_mean(head_window);
    result.final_smoothed_loss = window_mean(tail_window);
    result.checkpoint_path = config.out_dir + "/model.ckpt";
    models::save_model(model, result.checkpoint_path);
    log.flush();
    return result;
}

}  // namespace vin::train

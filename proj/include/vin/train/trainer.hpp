#pragma once

// Training loop: streamed batches, discounted horizon loss, Adam with the
// exponential lr decay, append-only loss log and periodic checkpoints.
// Fully deterministic under the config seed.

#include <cstdint>
#include <functional>
#include <string>

#include "vin/data/dataset.hpp"
#include "vin/models/model.hpp"

namespace vin::train {

struct TrainConfig {
    long long steps = 500000;  // paper-parity default
    int batch_size = 4;
    double base_lr = 5e-4;
    double lr_alpha = 1.5e5;   // lr(t) = base * exp(-t/alpha)
    double beta = 2.5e4;       // discount constant
    double aux_weight = 1.0;
    std::uint64_t seed = 1;
    long long checkpoint_every = 10000;
    long long log_every = 1;
    int threads = 1;  // batch workers; a run is deterministic per (seed, threads)
    std::string out_dir = "train_out";

    // Optional periodic hook (e.g. held-out evaluation); returning true
    // stops training early. Called every `probe_every` steps when set.
    long long probe_every = 0;
    std::function<bool(long long step, models::Model<float>&)> probe;
};

struct TrainResult {
    std::string checkpoint_path;  // final model
    std::string log_path;
    double initial_smoothed_loss = 0.0;  // window-100 mean at the start
    double final_smoothed_loss = 0.0;    // window-100 mean at the end
};

TrainResult train(models::Model<float>& model, const data::Dataset& dataset,
                  const TrainConfig& config);

}  // namespace vin::train

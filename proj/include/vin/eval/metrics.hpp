#pragma once

// Rollout metrics: Inverse Normalized Loss and the Euclidean prediction
// error, aggregated by timestep (bootstrap 95% CIs) and re-binned by
// ground-truth distance traveled.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vin/data/dataset.hpp"
#include "vin/models/model.hpp"

namespace vin::eval {

// L_bound / L_model; both must be positive.
double inverse_normalized_loss(double l_bound, double l_model);

// One rollout frame: n_object * 4 floats (px, py, vx, vy per object).
using StateFrame = std::vector<float>;

// Per-timestep mean over objects of |p_hat - p|, framewidth units.
std::vector<double> euclidean_prediction_error(
    const std::vector<StateFrame>& pred, const std::vector<StateFrame>& truth,
    int n_object);

struct CurvePoint {
    int timestep = 0;
    double mean = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
};

struct DistanceBin {
    double lo = 0.0, hi = 0.0;
    double mean = 0.0;
    long long count = 0;
};

struct EvalReport {
    std::string variant;
    std::string dataset_dir;
    int horizon = 0;
    int sequences = 0;
    double test_loss = 0.0;  // 8-step uniform-weight MSE
    std::optional<double> inl;
    std::vector<CurvePoint> by_timestep;
    std::vector<DistanceBin> by_distance;
};

struct EvalOptions {
    int horizon = 50;
    int max_sequences = 64;
    int bootstrap_samples = 1000;
    int distance_bins = 20;
    double distance_max = 1.0;
    std::uint64_t seed = 1;
};

// Rolls the model out from each test sequence's observed window and
// aggregates both metrics; `bound_model` (the vision-with-ground-truth-
// dynamics variant) supplies L_bound for the INL when given.
EvalReport evaluate(models::Model<float>& model, const data::Dataset& dataset,
                    const EvalOptions& options,
                    models::Model<float>* bound_model = nullptr);

}  // namespace vin::eval

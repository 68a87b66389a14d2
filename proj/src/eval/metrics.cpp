#include "vin/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace vin::eval {

double inverse_normalized_loss(double l_bound, double l_model) {
    if (!(l_bound > 0.0))
        throw std::invalid_argument("inverse_normalized_loss: bound loss must be > 0");
    if (!(l_model > 0.0))
        throw std::invalid_argument(
            "inverse_normalized_loss: model loss must be > 0 (degenerate)");
    return l_bound / l_model;
}

std::vector<double> euclidean_prediction_error(
    const std::vector<StateFrame>& pred, const std::vector<StateFrame>& truth,
    int n_object) {
    if (pred.size() != truth.size())
        throw std::invalid_argument("euclidean_prediction_error: length mismatch");
    std::vector<double> errors;
    errors.reserve(pred.size());
    for (std::size_t t = 0; t < pred.size(); ++t) {
        if (int(pred[t].size()) != n_object * 4 ||
            int(truth[t].size()) != n_object * 4)
            throw std::invalid_argument(
                "euclidean_prediction_error: object count mismatch");
        double sum = 0.0;
        for (int i = 0; i < n_object; ++i) {
            const double dx = double(pred[t][std::size_t(i * 4)]) -
                              double(truth[t][std::size_t(i * 4)]);
            const double dy = double(pred[t][std::size_t(i * 4 + 1)]) -
                              double(truth[t][std::size_t(i * 4 + 1)]);
            sum += std::sqrt(dx * dx + dy * dy);
        }
        errors.push_back(sum / n_object);
    }
    return errors;
}

namespace {

StateFrame tensor_to_state_frame(const models::Tensor<float>& t) {
    return StateFrame(t.data(), t.data() + t.size());
}

StateFrame dataset_state_frame(const data::Dataset& ds, int sim, int t) {
    const float* s = ds.state(sim, t);
    return StateFrame(s, s + std::size_t(ds.n_object()) * 4);
}

// 8-step uniform-weight MSE over full state vectors; the per-variant test
// loss the INL compares.
double rollout_test_loss(const std::vector<StateFrame>& pred,
                         const std::vector<StateFrame>& truth) {
    double total = 0.0;
    const std::size_t steps = std::min<std::size_t>(pred.size(), 8);
    for (std::size_t t = 0; t < steps; ++t) {
        double mse = 0.0;
        for (std::size_t i = 0; i < pred[t].size(); ++i) {
            const double d = double(pred[t][i]) - double(truth[t][i]);
            mse += d * d;
        }
        total += mse / double(pred[t].size());
    }
    return total / double(steps);
}

struct SequenceRollout {
    std::vector<StateFrame> pred;
    std::vector<StateFrame> truth;
    double test_loss = 0.0;
};

SequenceRollout roll_sequence(models::Model<float>& model,
                              const data::Dataset& dataset, int sim,
                              int horizon) {
    num::Tape<float> tape(num::Tape<float>::kNoGrad);
    std::vector<models::Tensor<float>> frames;
    std::vector<models::Tensor<float>> states;
    if (model.has_encoder()) {
        for (int k = 0; k < data::kObservedFrames; ++k)
            frames.push_back(models::frame_to_tensor<float>(dataset.frame(sim, k)));
    }
    for (int k = data::kObservedFrames - models::kHistoryLen;
         k < data::kObservedFrames; ++k)
        states.push_back(
            models::state_to_tensor<float>(dataset.state(sim, k),
                                           dataset.n_object()));
    const phys::SimSpec& spec = dataset.manifest().spec;
    auto decoded =
        models::rollout_states(model, tape, frames, states, horizon, &spec);

    SequenceRollout out;
    for (int t = 0; t < horizon; ++t) {
        out.pred.push_back(tensor_to_state_frame(decoded[std::size_t(t)]));
        out.truth.push_back(
            dataset_state_frame(dataset, sim, data::kObservedFrames + t));
    }
    out.test_loss = rollout_test_loss(out.pred, out.truth);
    return out;
}

}  // namespace

EvalReport evaluate(models::Model<float>& model, const data::Dataset& dataset,
                    const EvalOptions& options,
                    models::Model<float>* bound_model) {
    const int horizon = options.horizon;
    if (dataset.n_frames() < data::kObservedFrames + horizon)
        throw std::invalid_argument("evaluate: horizon exceeds trajectory length");
    const int sequences = std::min(options.max_sequences, dataset.n_sims());
    if (sequences < 1) throw std::invalid_argument("evaluate: empty dataset");

    EvalReport report;
    report.variant = models::variant_name(model.variant);
    report.horizon = horizon;
    report.sequences = sequences;

    // errors[seq][t]
    std::vector<std::vector<double>> errors;
    double model_loss = 0.0, bound_loss = 0.0;
    std::vector<DistanceBin> bins(std::size_t(options.distance_bins));
    const double bin_w = options.distance_max / options.distance_bins;
    for (int b = 0; b < options.distance_bins; ++b) {
        bins[std::size_t(b)].lo = b * bin_w;
        bins[std::size_t(b)].hi = (b + 1) * bin_w;
    }
    std::vector<double> bin_sums(std::size_t(options.distance_bins), 0.0);

    for (int seq = 0; seq < sequences; ++seq) {
        SequenceRollout r = roll_sequence(model, dataset, seq, horizon);
        errors.push_back(
            euclidean_prediction_error(r.pred, r.truth, dataset.n_object()));
        model_loss += r.test_loss;
        if (bound_model) {
            SequenceRollout rb = roll_sequence(*bound_model, dataset, seq, horizon);
            bound_loss += rb.test_loss;
        }

        // Distance-traveled binning, per object, cumulative ground-truth
        // path length measured from the last observed frame.
        for (int i = 0; i < dataset.n_object(); ++i) {
            double dist = 0.0;
            const float* prev =
                dataset.state(seq, data::kObservedFrames - 1) + i * 4;
            double px = prev[0], py = prev[1];
            for (int t = 0; t < horizon; ++t) {
                const double tx = double(r.truth[std::size_t(t)][std::size_t(i * 4)]);
                const double ty =
                    double(r.truth[std::size_t(t)][std::size_t(i * 4 + 1)]);
                dist += std::hypot(tx - px, ty - py);
                px = tx;
                py = ty;
                const double ex =
                    double(r.pred[std::size_t(t)][std::size_t(i * 4)]) - tx;
                const double ey =
                    double(r.pred[std::size_t(t)][std::size_t(i * 4 + 1)]) - ty;
                const int b = std::min(int(dist / bin_w), options.distance_bins - 1);
                bins[std::size_t(b)].count++;
                bin_sums[std::size_t(b)] += std::hypot(ex, ey);
            }
        }
    }
    model_loss /= sequences;
    report.test_loss = model_loss;
    if (bound_model) {
        bound_loss /= sequences;
        report.inl = inverse_normalized_loss(bound_loss, model_loss);
    }

    for (int b = 0; b < options.distance_bins; ++b)
        if (bins[std::size_t(b)].count > 0)
            bins[std::size_t(b)].mean =
                bin_sums[std::size_t(b)] / double(bins[std::size_t(b)].count);
    report.by_distance = std::move(bins);

    // Per-timestep mean with a bootstrap 95% CI over sequences.
    std::mt19937_64 rng(options.seed);
    std::uniform_int_distribution<int> pick(0, sequences - 1);
    for (int t = 0; t < horizon; ++t) {
        CurvePoint p;
        p.timestep = t + 1;
        double mean = 0.0;
        for (int s = 0; s < sequences; ++s) mean += errors[std::size_t(s)][std::size_t(t)];
        p.mean = mean / sequences;
        std::vector<double> resampled(std::size_t(options.bootstrap_samples));
        for (int b = 0; b < options.bootstrap_samples; ++b) {
            double m = 0.0;
            for (int s = 0; s < sequences; ++s)
                m += errors[std::size_t(pick(rng))][std::size_t(t)];
            resampled[std::size_t(b)] = m / sequences;
        }
        std::sort(resampled.begin(), resampled.end());
        p.ci_lo = resampled[std::size_t(0.025 * (options.bootstrap_samples - 1))];
        p.ci_hi = resampled[std::size_t(0.975 * (options.bootstrap_samples - 1))];
        report.by_timestep.push_back(p);
    }
    return report;
}

}  // namespace vin::eval

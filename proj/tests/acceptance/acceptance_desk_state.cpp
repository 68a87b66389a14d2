// Acceptance criterion 7: desk-scale learning from states. An interaction-
// net predictor trained on >= 1e3 drift simulations for >= 2e4 steps must
// cut the smoothed training loss at least 10x and beat the untrained
// checkpoint's 50-step Euclidean error at every timestep.

#include <cstdarg>
#include <filesystem>

#include "acceptance_util.hpp"
#include "vin/data/generate.hpp"
#include "vin/eval/metrics.hpp"
#include "vin/phys/config.hpp"
#include "vin/train/trainer.hpp"

using namespace vin;
using acceptance::fmt;
using acceptance::report;
using acceptance::Stopwatch;

int main() {
    namespace fs = std::filesystem;
    Stopwatch timer;

    const fs::path work = fs::path("acceptance_work") / "desk_state";
    fs::remove_all(work);
    phys::SimSpec spec =
        phys::load_spec(std::string(VIN_CONFIG_DIR) + "/drift3.cfg");
    spec.seed = 7001;
    data::GenOptions gen;
    gen.train_sims = 1000;
    gen.test_sims = 128;
    data::generate_dataset(spec, work.string(), gen);

    data::Dataset train_ds = data::Dataset::load((work / "train").string(), false);
    data::Dataset test_ds = data::Dataset::load((work / "test").string(), false);

    models::Model<float> model = models::Model<float>::make(
        models::ModelVariant::kInFromState, 3, 7);
    models::Model<float> untrained = models::Model<float>::make(
        models::ModelVariant::kInFromState, 3, 7);

    train::TrainConfig cfg;
    cfg.steps = 20000;
    cfg.seed = 7;
    cfg.threads = 2;
    cfg.checkpoint_every = 0;
    cfg.log_every = 100;
    cfg.out_dir = (work / "run").string();
    train::TrainResult result = train::train(model, train_ds, cfg);

    const double reduction =
        result.initial_smoothed_loss / std::max(result.final_smoothed_loss, 1e-300);
    const bool loss_ok = reduction >= 10.0;

    eval::EvalOptions eopts;
    eopts.horizon = 50;
    eopts.max_sequences = 64;
    eopts.bootstrap_samples = 100;
    eval::EvalReport trained_rep = eval::evaluate(model, test_ds, eopts);
    eval::EvalReport untrained_rep = eval::evaluate(untrained, test_ds, eopts);
    int beaten = 0;
    for (int t = 0; t < 50; ++t)
        if (trained_rep.by_timestep[std::size_t(t)].mean <
            untrained_rep.by_timestep[std::size_t(t)].mean)
            ++beaten;

    const double secs = timer.seconds();
    const bool pass = loss_ok && beaten == 50 && secs < 1800.0;
    report(7, "desk-scale learning from states (drift)", pass,
           fmt("smoothed loss %.3g -> %.3g (%.0fx >= 10x); beats untrained at "
               "%d/50 steps (t=50: %.4f vs %.4f); %.0fs (< 30 min)",
               result.initial_smoothed_loss, result.final_smoothed_loss,
               reduction, beaten, trained_rep.by_timestep[49].mean,
               untrained_rep.by_timestep[49].mean, secs));
    return acceptance::failures ? 1 : 0;
}

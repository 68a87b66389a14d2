// vinlab: generate multi-body physics video datasets, train the interaction
// network and its baselines on them, and evaluate long-horizon rollouts.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "vin/data/generate.hpp"
#include "vin/eval/metrics.hpp"
#include "vin/eval/report.hpp"
#include "vin/eval/rollout_render.hpp"
#include "vin/num/gradcheck.hpp"
#include "vin/phys/calibrate.hpp"
#include "vin/phys/config.hpp"
#include "vin/phys/verify.hpp"
#include "vin/train/trainer.hpp"

namespace {

struct Profile {
    long long train_steps;
    int train_sims;
    int test_sims;
};

Profile profile_by_name(const std::string& name) {
    if (name == "desk") return {20000, 1000, 128};
    if (name == "paper") return {500000, 250000, 25000};
    throw CLI::ValidationError("--profile", "must be 'desk' or 'paper'");
}

int run(int argc, char** argv) {
    CLI::App app{"vinlab: multi-body physics video prediction laboratory"};
    app.require_subcommand(1);

    std::string config_path, dataset_dir, checkpoint_path, out_path;
    std::string bound_checkpoint, report_path, variant_name = "vin";
    std::string profile_name = "desk";
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_flag_callback("--version", [] {
        std::puts("vinlab 1.0");
        std::exit(0);
    });

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "RNG seed override")
            ->each([&](const std::string&) { seed_set = true; });
    };

    // ------------------------------------------------------------------ gen
    auto* gen = app.add_subcommand("gen", "Generate a train/test dataset");
    gen->add_option("--config", config_path, "SimSpec config file")->required();
    gen->add_option("--out", out_path, "output dataset directory")->required();
    gen->add_option("--profile", profile_name, "desk|paper (sets sim counts)");
    int train_sims = -1, test_sims = -1, threads = 0;
    gen->add_option("--train-sims", train_sims, "training simulations");
    gen->add_option("--test-sims", test_sims, "test simulations");
    gen->add_option("--threads", threads, "worker threads (0 = all cores)");
    add_seed(gen);

    // ---------------------------------------------------------------- train
    auto* train_cmd = app.add_subcommand("train", "Train a model variant");
    train_cmd->add_option("--dataset-dir", dataset_dir,
                          "dataset root (containing train/)")->required();
    train_cmd->add_option("--variant", variant_name,
                          "vin | visual-rnn | visual-lstm | vin-no-relations | "
                          "vision-gtd | in-from-state | lstm-from-state");
    train_cmd->add_option("--out", out_path, "output directory")->required();
    train_cmd->add_option("--profile", profile_name, "desk|paper (sets steps)");
    long long steps = -1, checkpoint_every = 10000, log_every = 1;
    double aux_weight = 1.0;
    train_cmd->add_option("--steps", steps, "training steps");
    train_cmd->add_option("--aux-weight", aux_weight, "auxiliary loss weight");
    train_cmd->add_option("--checkpoint-every", checkpoint_every,
                          "checkpoint cadence (0 = final only)");
    train_cmd->add_option("--log-every", log_every, "loss log cadence");
    int train_threads = 1;
    train_cmd->add_option("--threads", train_threads,
                          "batch worker threads (determinism is per seed+threads)");
    add_seed(train_cmd);

    // ----------------------------------------------------------------- eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate rollout metrics");
    eval_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")
        ->required();
    eval_cmd->add_option("--dataset-dir", dataset_dir,
                         "dataset root (containing test/)")->required();
    eval_cmd
        ->add_option("--bound-checkpoint", bound_checkpoint,
                     "vision-gtd checkpoint supplying L_bound for the INL")
        ->default_val("");
    int horizon = 50, sequences = 64;
    eval_cmd->add_option("--horizon", horizon, "rollout length");
    eval_cmd->add_option("--sequences", sequences, "test sequences to use");
    eval_cmd->add_option("--report", report_path, "write the report JSON here");
    add_seed(eval_cmd);

    // -------------------------------------------------------------- rollout
    auto* roll = app.add_subcommand("rollout", "Render rollout predictions");
    roll->add_option("--checkpoint", checkpoint_path, "model checkpoint")
        ->required();
    roll->add_option("--dataset-dir", dataset_dir,
                     "dataset root (containing test/)")->required();
    roll->add_option("--out-dir", out_path, "image output directory")->required();
    int sequence = 0, roll_horizon = 50;
    bool trail = false, mask_background = false;
    roll->add_option("--sequence", sequence, "test sequence index");
    roll->add_option("--horizon", roll_horizon, "rollout length (0: observed only)");
    roll->add_flag("--trail", trail, "also write trajectory-trail images");
    roll->add_flag("--mask-background", mask_background,
                   "render on black instead of the simulation background");

    // ------------------------------------------------------------ gradcheck
    auto* gc = app.add_subcommand("gradcheck",
                                  "Finite-difference check of every tensor op");
    int instances = 20;
    gc->add_option("--instances", instances, "random instances per op");
    add_seed(gc);

    // ------------------------------------------------------------ calibrate
    auto* cal = app.add_subcommand(
        "calibrate", "Tune force constants toward a target displacement");
    cal->add_option("--config", config_path, "SimSpec config file")->required();
    double target = 0.01;
    cal->add_option("--target", target, "mean per-frame displacement target");
    cal->add_option("--out", out_path, "write the tuned config here");
    add_seed(cal);

    // --------------------------------------------------------------- verify
    auto* ver = app.add_subcommand("verify",
                                   "Physics invariants and the RK4 oracle");
    ver->add_option("--config", config_path, "SimSpec config file")->required();
    add_seed(ver);

    CLI11_PARSE(app, argc, argv);
    const Profile profile = profile_by_name(profile_name);

    if (gen->parsed()) {
        vin::phys::SimSpec spec = vin::phys::load_spec(config_path);
        if (seed_set) spec.seed = seed;
        vin::data::GenOptions opts;
        opts.train_sims = train_sims > 0 ? train_sims : profile.train_sims;
        opts.test_sims = test_sims > 0 ? test_sims : profile.test_sims;
        opts.threads = threads;
        vin::data::generate_dataset(spec, out_path, opts);
        std::printf("wrote %d train + %d test simulations under %s\n",
                    opts.train_sims, opts.test_sims, out_path.c_str());
        return 0;
    }

    if (train_cmd->parsed()) {
        const auto variant = vin::models::variant_from_name(variant_name);
        const bool frames = vin::models::variant_has_encoder(variant);
        vin::data::Dataset ds =
            vin::data::Dataset::load(dataset_dir + "/train", frames);
        vin::train::TrainConfig cfg;
        cfg.steps = steps > 0 ? steps : profile.train_steps;
        cfg.seed = seed_set ? seed : 1;
        cfg.aux_weight = aux_weight;
        cfg.checkpoint_every = checkpoint_every;
        cfg.log_every = log_every;
        cfg.threads = train_threads;
        cfg.out_dir = out_path;
        vin::models::Model<float> model = vin::models::Model<float>::make(
            variant, ds.n_object(), cfg.seed);
        vin::train::TrainResult result = vin::train::train(model, ds, cfg);
        std::printf("trained %lld steps; smoothed loss %.6g -> %.6g\n",
                    cfg.steps, result.initial_smoothed_loss,
                    result.final_smoothed_loss);
        std::printf("checkpoint: %s\nloss log:   %s\n",
                    result.checkpoint_path.c_str(), result.log_path.c_str());
        return 0;
    }

    if (eval_cmd->parsed()) {
        vin::models::Model<float> model = vin::models::load_model(checkpoint_path);
        vin::data::Dataset ds = vin::data::Dataset::load(
            dataset_dir + "/test", model.has_encoder());
        vin::eval::EvalOptions opts;
        opts.horizon = horizon;
        opts.max_sequences = sequences;
        opts.seed = seed_set ? seed : 1;
        std::optional<vin::models::Model<float>> bound;
        if (!bound_checkpoint.empty())
            bound = vin::models::load_model(bound_checkpoint);
        vin::eval::EvalReport report = vin::eval::evaluate(
            model, ds, opts, bound ? &*bound : nullptr);
        report.dataset_dir = dataset_dir;
        std::printf("variant: %s\nsequences: %d  horizon: %d\n",
                    report.variant.c_str(), report.sequences, report.horizon);
        std::printf("test loss (8-step): %.6g\n", report.test_loss);
        if (report.inl)
            std::printf("inverse normalized loss: %.4f\n", *report.inl);
        std::printf("euclidean error by timestep (mean [95%% CI]):\n");
        for (const auto& p : report.by_timestep)
            if (p.timestep == 1 || p.timestep % 10 == 0 ||
                p.timestep == report.horizon)
                std::printf("  t=%3d  %.5f  [%.5f, %.5f]\n", p.timestep, p.mean,
                            p.ci_lo, p.ci_hi);
        if (!report_path.empty()) {
            vin::eval::save_report(report, report_path);
            std::printf("report: %s\n", report_path.c_str());
        }
        return 0;
    }

    if (roll->parsed()) {
        vin::models::Model<float> model = vin::models::load_model(checkpoint_path);
        vin::data::Dataset ds = vin::data::Dataset::load(
            dataset_dir + "/test", model.has_encoder());
        vin::eval::RolloutRenderOptions opts;
        opts.horizon = roll_horizon;
        opts.trail = trail;
        opts.mask_background = mask_background;
        opts.out_dir = out_path;
        vin::eval::render_rollout(model, ds, sequence, opts);
        std::printf("rollout images under %s\n", out_path.c_str());
        return 0;
    }

    if (gc->parsed()) {
        const auto results =
            vin::num::run_gradcheck(seed_set ? seed : 20240513, instances);
        bool ok = true;
        for (const auto& r : results) {
            std::printf("[%s] %-18s %2d instances  max rel err %.3g (tol %g)\n",
                        r.pass ? "PASS" : "FAIL", r.op.c_str(), r.instances,
                        r.max_rel_err, r.tolerance);
            ok = ok && r.pass;
        }
        return ok ? 0 : 1;
    }

    if (cal->parsed()) {
        vin::phys::SimSpec spec = vin::phys::load_spec(config_path);
        if (seed_set) spec.seed = seed;
        vin::phys::CalibrationReport rep =
            vin::phys::calibrate_spec(spec, target);
        std::printf("mean per-frame displacement: %.5f -> %.5f (target %.5f)\n",
                    rep.before, rep.after, rep.target);
        std::printf("kappa=%g gravity_g=%g coulomb_k=%g v_init=%g\n",
                    rep.tuned.kappa, rep.tuned.gravity_g, rep.tuned.coulomb_k,
                    rep.tuned.v_init);
        if (!out_path.empty()) {
            vin::phys::save_spec(rep.tuned, out_path);
            std::printf("tuned config: %s\n", out_path.c_str());
        }
        return 0;
    }

    if (ver->parsed()) {
        vin::phys::SimSpec spec = vin::phys::load_spec(config_path);
        if (seed_set) spec.seed = seed;
        bool ok = true;
        for (const auto& c : vin::phys::verify_physics(spec)) {
            if (!c.applicable) {
                std::printf("[SKIP] %-22s %s\n", c.name.c_str(), c.detail.c_str());
                continue;
            }
            std::printf("[%s] %-22s measured %.3g (threshold %.3g) %s\n",
                        c.pass ? "PASS" : "FAIL", c.name.c_str(), c.measured,
                        c.threshold, c.detail.c_str());
            ok = ok && c.pass;
        }
        return ok ? 0 : 1;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

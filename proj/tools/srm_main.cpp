#include <omp.h>

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "srm/errors.hpp"
#include "srm/experiments.hpp"

using namespace srm;

namespace {

struct GlobalArgs {
    std::string config_path;
    std::string out_dir;
    int jobs = 0;
    bool seedless = false;  // reserved; every algorithm is deterministic
};

int dispatch(const std::string& verb, const GlobalArgs& args)
{
    if (args.jobs > 0) {
        omp_set_num_threads(args.jobs);
        set_default_exec(args.jobs == 1 ? Exec::serial : Exec::parallel);
    }
    ExperimentConfig config = load_experiment_config(args.config_path);
    if (!args.out_dir.empty()) config.output_dir = args.out_dir;
    TorqueGainModel model = load_motor_config(config.motor_model_path);

    if (verb == "synth") {
        SynthOutput out = run_synth(config, model, config.output_dir);
        std::printf("synth: wrote table.csv, table_neg.csv, gp_model.txt, report.txt "
                    "to %s (%.2f s)\n",
                    config.output_dir.c_str(), out.wall_seconds);
    } else if (verb == "sweep-velocity") {
        run_sweep_velocity(config, model, config.output_dir);
        std::printf("sweep-velocity: wrote sweep_velocity.csv to %s\n",
                    config.output_dir.c_str());
    } else if (verb == "sweep-beta") {
        run_sweep_beta(config, model, config.output_dir);
        std::printf("sweep-beta: wrote sweep_beta.csv to %s\n",
                    config.output_dir.c_str());
    } else if (verb == "ripple") {
        run_ripple(config, model, config.output_dir);
        std::printf("ripple: wrote ripple.csv to %s\n", config.output_dir.c_str());
    } else if (verb == "simulate") {
        run_simulate(config, model, config.output_dir);
        std::printf("simulate: wrote sim_%s.csv and metrics to %s\n",
                    config.simulate_method.c_str(), config.output_dir.c_str());
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Commutation synthesis and sampled-data simulation for "
                 "switched reluctance motors"};
    app.require_subcommand(1);

    GlobalArgs args;
    const char* verbs[] = {"synth", "sweep-velocity", "sweep-beta", "ripple",
                           "simulate"};
    const char* descriptions[] = {
        "solve the commutation program and fit the GP commutation function",
        "closed-loop RMS error and energy over velocities and methods",
        "synthesize and compare against the sine baseline per beta",
        "open-loop ripple traces, baseline vs optimal table",
        "one closed-loop run of the configured method"};
    for (int i = 0; i < 5; ++i) {
        CLI::App* sub = app.add_subcommand(verbs[i], descriptions[i]);
        sub->add_option("--config", args.config_path, "experiment config (JSON)")
            ->required();
        sub->add_option("--out", args.out_dir, "output directory override");
        sub->add_option("--jobs", args.jobs, "worker thread count (0 = default)");
        sub->add_flag("--seedless", args.seedless,
                      "reserved; all algorithms are deterministic");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return dispatch(app.get_subcommands().front()->get_name(), args);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}

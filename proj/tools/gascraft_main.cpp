// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "gascraft/harness.hpp"

namespace {

gascraft::RunConfig configure(const std::string& config_path, const std::string& evaluator) {
    gascraft::RunConfig config = gascraft::load_run_config(config_path);
    if (!evaluator.empty()) {
        if (evaluator != "builtin" && evaluator != "external")
            gascraft::raise(gascraft::ErrorCode::ConfigError,
                            "evaluator must be builtin or external, got " + evaluator);
        config.evaluator = evaluator;
    }
    return config;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Assembles gas-efficient settlement contracts from derivative term sheets"};
    app.require_subcommand(1);

    std::string config_path;
    std::string evaluator;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* cmd, bool with_evaluator) {
        cmd->add_option("--config", config_path, "run configuration JSON")->required();
        cmd->add_option("--seed", seed, "base seed (default 0)");
        if (with_evaluator)
            cmd->add_option("--evaluator", evaluator,
                            "builtin or external (overrides the config)");
    };

    CLI::App* gen = app.add_subcommand("gen-data", "generate train and test instances");
    add_common(gen, false);

    CLI::App* train = app.add_subcommand("train", "run the two-phase curriculum");
    add_common(train, true);
    std::string resume;
    train->add_option("--resume", resume, "checkpoint to continue from");

    CLI::App* eval = app.add_subcommand("eval", "greedy baseline-vs-final comparison");
    add_common(eval, true);
    std::string baseline;
    std::string checkpoint;
    std::string emit_dir;
    eval->add_option("--baseline", baseline,
                     "checkpoint to evaluate as baseline (default phase1.ckpt)");
    eval->add_option("--checkpoint", checkpoint, "checkpoint to evaluate as final");
    eval->add_option("--emit-dir", emit_dir, "also write the final model's contracts here");

    CLI::App* brute = app.add_subcommand("brute-force",
                                         "exhaustive selection search over test instances");
    add_common(brute, false);
    int max_instances = 0;
    brute->add_option("--max-instances", max_instances,
                      "limit the number of instances (0: all)");

    CLI::App* report = app.add_subcommand("report", "smoothed training curves");
    add_common(report, false);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return gascraft::cmd_gen_data(configure(config_path, ""), seed);
        if (train->parsed())
            return gascraft::cmd_train(configure(config_path, evaluator), seed, resume);
        if (eval->parsed())
            return gascraft::cmd_eval(configure(config_path, evaluator), baseline, checkpoint,
                                      emit_dir);
        if (brute->parsed())
            return gascraft::cmd_brute_force(configure(config_path, ""), max_instances);
        if (report->parsed()) return gascraft::cmd_report(configure(config_path, ""));
    } catch (const gascraft::GascraftError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

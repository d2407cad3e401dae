// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "gascraft/env.hpp"
#include "gascraft/forge.hpp"
#include "gascraft/ppo.hpp"

namespace gascraft {

struct DatasetParams {
    int train_per_type = 200;
    int test_per_type = 50;
};

struct TrainParams {
    int batch_size = 256;
    int hidden = 64;
    std::int64_t phase1_max_steps = 60000;
    std::int64_t phase2_steps = 20000;
    double phase_gate = 0.95;   // trailing success rate that ends phase 1
    int phase_window = 500;     // episodes in the trailing window
    int log_every = 500;        // environment steps between metrics rows
    std::int64_t checkpoint_every = 5000;
    double reward_div = 100.0;  // reward scale divisor for value targets
};

struct RunConfig {
    std::string library_path;
    std::string blueprint_path;
    std::string schema_dir;
    std::string dataset_dir;
    std::string out_dir;
    std::string evaluator = "builtin";
    ForgeConfig forge;
    DatasetParams dataset;
    EnvConfig env;
    PpoConfig ppo;
    TrainParams train;
    std::string config_hash; // over the resolved settings

    std::string metrics_path() const { return out_dir + "/metrics.csv"; }
    std::string checkpoint_dir() const { return out_dir + "/checkpoints"; }
};

// Reads a JSON run config; relative paths resolve against the file's
// directory. Unknown keys raise ConfigError.
RunConfig load_run_config(const std::string& path);

// Loaded assets for one run: the library, blueprints, schemas, the evaluator
// named by the config, and the contract types the blueprint file covers.
struct World {
    SnippetLibrary lib;
    BlueprintSet bps;
    SchemaSet schemas;
    std::unique_ptr<ContractEvaluator> evaluator;
    std::vector<ContractType> types;
};

World load_world(const RunConfig& config);

// Instances of one split, ordered by type then id.
std::vector<CdmInstance> load_dataset(const RunConfig& config, const World& world,
                                      const std::string& split);

int cmd_gen_data(const RunConfig& config, std::uint64_t seed);

struct MetricsRow {
    std::int64_t step = 0;
    int phase = 1;
    double reward = 0.0;
    double compile_success = 0.0;
    double norm_gas = 0.0;
    double entropy_coef = 0.0;
};

std::string format_metrics_row(const MetricsRow& row);

struct TrainResult {
    std::int64_t steps = 0;
    std::int64_t phase_flip_step = -1;
    double phase_flip_trailing_reward = 0.0; // trailing window mean at the flip
    double final_trailing_reward = 0.0;      // trailing window mean at the last step
    std::vector<MetricsRow> rows;
    std::string metrics_path;
    std::string baseline_checkpoint;
    std::string final_checkpoint;
};

TrainResult train_loop(const RunConfig& config, std::uint64_t seed,
                       const std::string& resume_path = {});
int cmd_train(const RunConfig& config, std::uint64_t seed, const std::string& resume_path);

struct EvalRow {
    std::string type;
    std::string model; // "baseline" (phase 1 agent) or "final"
    int instances = 0;
    int compiled = 0;
    double compile_rate = 0.0;
    double mean_norm_gas = 0.0;      // over compiled instances, lower is better
    double mean_deploy_gas = 0.0;    // over compiled instances
    double mean_function_gas = 0.0;  // over compiled instances
    double mean_reward = 0.0;        // phase 2 reward over all instances
    double delta_pct = 0.0;          // final rows: gas reduction vs baseline, percent
};

struct EvalResult {
    std::vector<EvalRow> rows;
    std::string csv_path;
    std::string svg_path;
};

// Greedy generation over the test split for two checkpoints: the phase 1
// agent (baseline) and the final agent. Empty overrides select
// checkpoints/phase1.ckpt and checkpoints/final.ckpt.
EvalResult eval_run(const RunConfig& config, const std::string& baseline_override,
                    const std::string& final_override, const std::string& emit_dir);
int cmd_eval(const RunConfig& config, const std::string& baseline_override,
             const std::string& final_override, const std::string& emit_dir);

// Exhaustive search over the blueprint selections of each test instance,
// builtin gas model only. Raises SpaceTooLarge above max_selections.
nlohmann::json brute_force_run(const RunConfig& config, int max_instances,
                               std::int64_t max_selections = 65536);
int cmd_brute_force(const RunConfig& config, int max_instances);

int cmd_report(const RunConfig& config);

} // namespace gascraft

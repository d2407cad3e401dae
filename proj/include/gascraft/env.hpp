// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <vector>

#include "gascraft/evaluate.hpp"

namespace gascraft {

struct EnvConfig {
    // Phase 1: structural shaping.
    double success_bonus = 200.0;
    double failure_base = -100.0;
    double per_error_penalty = -10.0;
    int max_counted_errors = 10;

    // Phase 2: gas shaping.
    double compile_fail_penalty = -200.0;
    double reward_scale = 1500.0;
    double deploy_weight = 0.35;
    double function_weight = 0.65;
    double deploy_gas_budget = 1200000.0;
    double function_gas_budget = 90000.0;
};

double reward_phase1(const EvaluationReport& report, const EnvConfig& config);
double reward_phase2(const EvaluationReport& report, const EnvConfig& config);

// Weighted budget-relative gas fraction in [0,1], lower is better. Failed
// functions are charged the full per-function budget, so score + reward /
// reward_scale == 1 for any compiling contract. Raises ScoreUndefined when
// the contract does not compile.
double normalized_gas_score(const EvaluationReport& report, const EnvConfig& config);

struct StepResult {
    double reward = 0.0;
    bool done = true; // selections are single-step episodes
    double norm_gas = 1.0; // gas fraction, lower is better; 1 on compile failure
    EvaluationReport report;
    AssembledContract contract;
};

// Single-step episode environment. Observation layout:
//   [ contract type one-hot | per-function feedback | instance features ]
// The feedback block carries (passed, 1 - min(gas/budget, 1)) for every
// function in the library's universal set, taken from the previous episode's
// evaluation; it reads zero on the first episode and after any episode whose
// contract failed to compile.
class AssemblyEnv {
  public:
    AssemblyEnv(const SnippetLibrary& lib, const BlueprintSet& blueprints,
                const SchemaSet& schemas, ContractEvaluator& evaluator,
                EnvConfig config = {});

    int observation_width() const;
    std::vector<int> action_shape() const;
    const std::vector<int>& universal_functions() const { return functions_; }

    // True while structural rewards are active; flipped once by the trainer.
    void set_phase(int phase);
    int phase() const { return phase_; }

    std::vector<double> reset(const CdmInstance& instance);
    StepResult step(const std::vector<int>& action);

    // Drops carried feedback; evaluation passes start every instance cold.
    void clear_feedback() { std::fill(feedback_.begin(), feedback_.end(), 0.0); }

    // Mask of library symbols active in the current instance's blueprint.
    const std::vector<std::uint8_t>& active_symbols() const { return active_; }
    const Blueprint& blueprint() const;
    const VariableBindings& bindings() const { return bindings_; }

  private:
    const SnippetLibrary& lib_;
    const BlueprintSet& blueprints_;
    const SchemaSet& schemas_;
    ContractEvaluator& evaluator_;
    EnvConfig config_;
    int phase_ = 1;

    std::vector<int> functions_; // universal function set, global indices
    std::vector<double> feedback_;
    std::vector<std::uint8_t> active_;
    bool has_instance_ = false;
    CdmInstance instance_;
    VariableBindings bindings_;
};

} // namespace gascraft

// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "gascraft/env.hpp"

#include <algorithm>

#include "gascraft/synthesize.hpp"

namespace gascraft {

namespace {

double clamp01(double x) { return std::min(std::max(x, 0.0), 1.0); }

struct GasFractions {
    double deploy = 0.0;
    double function = 0.0;
};

// Budget-relative gas fractions with failed functions charged the full
// per-function budget.
GasFractions budget_fractions(const EvaluationReport& report, const EnvConfig& config) {
    GasFractions f;
    f.deploy = clamp01(report.deploy_gas / config.deploy_gas_budget);
    double func_sum = 0.0;
    for (const FunctionReport& fn : report.functions)
        func_sum += fn.passed ? fn.gas : config.function_gas_budget;
    double func_avg =
        report.functions.empty() ? 0.0
                                 : func_sum / static_cast<double>(report.functions.size());
    f.function = clamp01(func_avg / config.function_gas_budget);
    return f;
}

} // namespace

double reward_phase1(const EvaluationReport& report, const EnvConfig& config) {
    if (report.compile_ok) return config.success_bonus;
    int counted = std::clamp(report.distinct_errors, 1, config.max_counted_errors);
    return config.failure_base + counted * config.per_error_penalty;
}

double reward_phase2(const EvaluationReport& report, const EnvConfig& config) {
    if (!report.compile_ok) return config.compile_fail_penalty;
    GasFractions f = budget_fractions(report, config);
    return config.reward_scale * (config.deploy_weight * (1.0 - f.deploy) +
                                  config.function_weight * (1.0 - f.function));
}

double normalized_gas_score(const EvaluationReport& report, const EnvConfig& config) {
    if (!report.compile_ok)
        raise(ErrorCode::ScoreUndefined, "normalized gas score requires a compiling contract");
    GasFractions f = budget_fractions(report, config);
    return config.deploy_weight * f.deploy + config.function_weight * f.function;
}

AssemblyEnv::AssemblyEnv(const SnippetLibrary& lib, const BlueprintSet& blueprints,
                         const SchemaSet& schemas, ContractEvaluator& evaluator,
                         EnvConfig config)
    : lib_(lib),
      blueprints_(blueprints),
      schemas_(schemas),
      evaluator_(evaluator),
      config_(config),
      functions_(universal_function_set(lib, blueprints)),
      feedback_(2 * functions_.size(), 0.0),
      active_(static_cast<std::size_t>(lib.symbol_count()), 0) {}

int AssemblyEnv::observation_width() const {
    return kContractTypeCount + 2 * static_cast<int>(functions_.size()) + kFeatureWidth;
}

std::vector<int> AssemblyEnv::action_shape() const { return action_space_shape(lib_); }

void AssemblyEnv::set_phase(int phase) {
    if (phase != 1 && phase != 2)
        raise(ErrorCode::ConfigError, "phase must be 1 or 2, got " + std::to_string(phase));
    phase_ = phase;
}

const Blueprint& AssemblyEnv::blueprint() const {
    if (!has_instance_) raise(ErrorCode::ConfigError, "blueprint() before reset()");
    return blueprints_.of(instance_.type);
}

std::vector<double> AssemblyEnv::reset(const CdmInstance& instance) {
    const Blueprint& bp = blueprints_.of(instance.type); // raises on absent type
    instance_ = instance;
    bindings_ = apply_mapping(instance_, schemas_);
    has_instance_ = true;

    std::fill(active_.begin(), active_.end(), std::uint8_t{0});
    for (int idx : bp.required) active_[static_cast<std::size_t>(idx)] = 1;

    std::vector<double> obs(static_cast<std::size_t>(observation_width()), 0.0);
    obs[static_cast<std::size_t>(static_cast<int>(instance_.type))] = 1.0;
    std::copy(feedback_.begin(), feedback_.end(), obs.begin() + kContractTypeCount);
    FeatureVector features = extract_features(bindings_, schemas_.of(instance_.type));
    std::copy(features.begin(), features.end(),
              obs.begin() + kContractTypeCount + static_cast<long>(feedback_.size()));
    return obs;
}

StepResult AssemblyEnv::step(const std::vector<int>& action) {
    if (!has_instance_) raise(ErrorCode::ConfigError, "step() before reset()");
    if (static_cast<int>(action.size()) != lib_.symbol_count())
        raise(ErrorCode::ActionOutOfRange,
              "action has " + std::to_string(action.size()) + " entries, library has " +
                  std::to_string(lib_.symbol_count()) + " symbols");
    const Blueprint& bp = blueprints_.of(instance_.type);
    for (int idx : bp.required) {
        int v = action[static_cast<std::size_t>(idx)];
        int limit = static_cast<int>(lib_.variants(idx).size());
        if (v < 0 || v >= limit)
            raise(ErrorCode::ActionOutOfRange,
                  "variant " + std::to_string(v) + " for symbol " + lib_.symbol(idx).name +
                      " outside [0," + std::to_string(limit) + ")");
    }

    SnippetSelection selection;
    selection.variant = action;

    StepResult result;
    result.contract = assemble(lib_, bp, instance_.id, bindings_, selection);
    result.report = evaluator_.run(result.contract, bp.function_rules);
    result.reward = phase_ == 1 ? reward_phase1(result.report, config_)
                                : reward_phase2(result.report, config_);
    result.norm_gas =
        result.report.compile_ok ? normalized_gas_score(result.report, config_) : 1.0;
    result.done = true;

    std::fill(feedback_.begin(), feedback_.end(), 0.0);
    if (result.report.compile_ok) {
        for (const FunctionReport& fn : result.report.functions) {
            int global = lib_.index_of(fn.name);
            auto it = std::find(functions_.begin(), functions_.end(), global);
            if (it == functions_.end()) continue;
            std::size_t slot = static_cast<std::size_t>(it - functions_.begin());
            feedback_[2 * slot] = fn.passed ? 1.0 : 0.0;
            feedback_[2 * slot + 1] = 1.0 - clamp01(fn.gas / config_.function_gas_budget);
        }
    }
    return result;
}

} // namespace gascraft

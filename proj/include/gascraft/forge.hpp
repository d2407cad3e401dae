// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <memory>
#include <string>

#include "gascraft/evaluate.hpp"

namespace gascraft {

struct ForgeConfig {
    std::string forge_binary = "forge";
    std::string workspace_dir = "forge-workspace";
    int timeout_seconds = 120;
};

// Probes `forge --version`; raises ToolchainUnavailable when the binary is
// missing or does not answer. Called once at startup so a misconfigured
// external evaluator fails before any training step runs.
std::string check_toolchain(const std::string& forge_binary);

// Writes foundry.toml, src/Contract.sol, and test/Contract.t.sol under dir.
// The generated test file calls each settlement function once from a fresh
// deployment and asserts the oracle balance deltas.
void emit_workspace(const std::string& dir, const AssembledContract& contract,
                    const std::map<std::string, std::string>& function_rules);

// Parsed view of one `forge test --gas-report` run.
struct ForgeRunResult {
    bool compile_ok = false;
    int compiler_errors = 0;
    long long deploy_gas = 0;
    std::map<std::string, long long> function_gas;  // settlement name -> gas
    std::map<std::string, bool> test_passed;        // settlement name -> pass
};

// Extracts deployment cost, per-function gas, and per-test outcomes from the
// combined stdout of a forge run. Raises UnparsableOutput when the expected
// markers are absent.
ForgeRunResult parse_forge_output(const std::string& output);

class ForgeEvaluator final : public ContractEvaluator {
  public:
    explicit ForgeEvaluator(ForgeConfig config);

    EvaluationReport run(const AssembledContract& contract,
                         const std::map<std::string, std::string>& function_rules) override;

    std::string version() const override { return version_; }

  private:
    ForgeConfig config_;
    std::string version_;
};

// Factory for the --evaluator flag: "builtin" or "external".
std::unique_ptr<ContractEvaluator> make_evaluator(const std::string& name,
                                                  const GasModel& model,
                                                  const ForgeConfig& forge_config);

} // namespace gascraft

// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gascraft/synthesize.hpp"

namespace gascraft {

enum class ErrorClass {
    TypeMismatch,
    UndeclaredIdentifier,
    WidthConflict,
    DuplicateDeclaration,
    MalformedFragment,
};

std::string_view error_class_name(ErrorClass c);

struct StaticError {
    ErrorClass cls = ErrorClass::TypeMismatch;
    std::string symbol; // fragment where the error was detected
    std::string detail;
};

std::vector<StaticError> static_check(const AssembledContract& contract);

// Distinct (error class, fragment symbol) pairs; the unit that scales the
// assembly-phase penalty.
int distinct_error_count(const std::vector<StaticError>& errors);

// Pinned deterministic cost model. Constants never change silently: bump the
// version string with any adjustment so cached results are invalidated.
struct GasModel {
    long long storage_write_init = 20000;
    long long storage_write_update = 5000;
    long long storage_read = 2100;
    long long memory_op = 3;
    long long arith_op = 5;
    long long compare_op = 3;
    long long branch_op = 10;

    long long base_deploy = 32000;
    long long per_storage_slot = 22100;
    long long per_code_byte = 200;
    long long per_constructor_param = 500;

    std::string version = "builtin-gas-v1";

    long long unit(const std::string& op_class) const;
    std::uint64_t hash() const;
};

// Exact expected balance deltas for one settlement function, derived from the
// bound values alone. Missing entries mean zero.
using BalanceDeltas = std::map<std::string, i128>;

BalanceDeltas oracle_expected_state(const std::string& rule_id,
                                    const VariableBindings& values);

bool deltas_equal(const BalanceDeltas& a, const BalanceDeltas& b);

struct FunctionReport {
    std::string name;
    bool passed = false;
    bool reverted = false;
    bool overflowed = false; // revert caused by an arithmetic width violation
    std::string revert_reason;
    long long gas = 0; // consumed gas, kept on revert
    BalanceDeltas expected;
    BalanceDeltas actual;
};

// Executes one settlement function on fresh zeroed balances, charging the
// cost model per operation actually performed. Arithmetic is exact in 128-bit
// integers; results are range checked against the declared operand width for
// 32 and 64 bit operations (bound values keep wider ops below 2^127).
FunctionReport simulate_function(const AssembledFunction& fn,
                                 const AssembledContract& contract,
                                 const GasModel& model);

// Storage slots the contract occupies: state variables packed sequentially in
// declaration order into 256-bit slots, plus one dedicated slot per string
// and one for the balances mapping.
int storage_slot_count(const AssembledContract& contract);

long long gas_deploy(const AssembledContract& contract, const GasModel& model);

struct EvaluationReport {
    bool compile_ok = false;
    std::vector<StaticError> static_errors;
    int distinct_errors = 0;
    long long deploy_gas = 0;
    std::vector<FunctionReport> functions;
    int functions_passed = 0;
    std::string model_version;
};

// Full pipeline: static check, then per-function simulation against the
// settlement oracle. Functions are not simulated when the static check fails.
EvaluationReport evaluate(const AssembledContract& contract,
                          const std::map<std::string, std::string>& function_rules,
                          const GasModel& model);

// Evaluator selected at startup: the deterministic builtin pipeline above or
// an external toolchain adapter.
class ContractEvaluator {
  public:
    virtual ~ContractEvaluator() = default;
    virtual EvaluationReport run(const AssembledContract& contract,
                                 const std::map<std::string, std::string>& function_rules) = 0;
    virtual std::string version() const = 0;
};

class BuiltinEvaluator final : public ContractEvaluator {
  public:
    explicit BuiltinEvaluator(GasModel model = {}) : model_(std::move(model)) {}

    EvaluationReport run(const AssembledContract& contract,
                         const std::map<std::string, std::string>& function_rules) override {
        return evaluate(contract, function_rules, model_);
    }

    std::string version() const override { return model_.version; }
    const GasModel& model() const { return model_; }

  private:
    GasModel model_;
};

} // namespace gascraft

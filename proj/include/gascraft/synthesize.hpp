// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "gascraft/cdm.hpp"
#include "gascraft/fragment.hpp"
#include "gascraft/library.hpp"

namespace gascraft {

// One variant choice per library symbol, indexed by global symbol index.
// Entries for symbols outside the active blueprint are ignored.
struct SnippetSelection {
    std::vector<int> variant;

    int at(int symbol_index) const { return variant.at(static_cast<std::size_t>(symbol_index)); }
};

struct StateVariable {
    int symbol_index = -1;
    std::string name;
    SolType type = SolType::U256;
    InitMode init_mode = InitMode::InlineLiteral;
    TypedValue value;
    int extra_slots = 0; // dedicated slots for non-packable types (string)
    std::string source;
};

struct AssembledFunction {
    int symbol_index = -1;
    std::string name;
    FunctionFragment fragment;
    std::map<std::string, int> static_op_costs;
    std::string source;
    bool parse_ok = true;        // false feeds the MalformedFragment error class
    std::string parse_message;
};

struct ConstructorParam {
    std::string name;
    SolType type = SolType::U256;
    TypedValue value;
};

struct AssembledContract {
    std::string contract_name;
    std::string source;
    std::vector<StateVariable> variables;
    std::vector<AssembledFunction> functions;
    std::vector<ConstructorParam> constructor_params;
};

// Renders a bound value as a Solidity literal for the declared type.
// Raises LiteralOverflow when a numeric value does not fit the type and
// ValueTypeMismatch when the value kind cannot inhabit the type at all.
std::string format_value(const TypedValue& value, SolType type);

std::string sanitize_contract_name(const std::string& instance_id);

// Deterministically renders the contract for one selection: state variables
// in blueprint order, the balances mapping, a constructor when any selected
// variant takes its value as a deploy parameter, then settlement functions.
AssembledContract assemble(const SnippetLibrary& lib, const Blueprint& blueprint,
                           const std::string& instance_id, const VariableBindings& bindings,
                           const SnippetSelection& selection);

} // namespace gascraft

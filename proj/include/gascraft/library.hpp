// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gascraft/fragment.hpp"
#include "gascraft/types.hpp"

namespace gascraft {

enum class SymbolKind { Variable, Function };

enum class InitMode { InlineLiteral, ConstructorParam };

struct Symbol {
    std::string name;
    SymbolKind kind = SymbolKind::Variable;
    int global_index = 0;
};

struct Snippet {
    std::string symbol;
    SymbolKind kind = SymbolKind::Variable;
    int variant = 0;
    std::string template_text;
    SolType declared_type = SolType::U256;          // variables only
    InitMode init_mode = InitMode::InlineLiteral;   // variables only
    int storage_slots = 0;                          // dedicated full slots (string: 1)
    std::map<std::string, int> static_op_costs;     // opcode class -> count
    std::vector<std::string> uses;                  // variable symbols read by a function body
};

struct SnippetLibrary {
    std::string name;
    std::vector<Symbol> symbols;                 // global index order
    std::vector<std::vector<Snippet>> options;   // per symbol, ordered by variant
    std::uint64_t content_hash = 0;

    int index_of(std::string_view symbol_name) const;  // -1 when absent
    const Symbol& symbol(int index) const { return symbols[static_cast<std::size_t>(index)]; }
    const std::vector<Snippet>& variants(int index) const {
        return options[static_cast<std::size_t>(index)];
    }
    int symbol_count() const { return static_cast<int>(symbols.size()); }
};

struct Blueprint {
    ContractType type = ContractType::InterestRateSwap;
    std::vector<int> required;                            // symbol indices, declaration order
    std::map<std::string, std::string> function_rules;    // function symbol -> settlement rule

    bool requires_symbol(int index) const;
};

// Blueprint files may cover a subset of types (the miniature test library
// ships EquitySwap only); looking up an absent type raises
// UnknownContractType.
struct BlueprintSet {
    std::array<Blueprint, kContractTypeCount> by_type;
    std::array<bool, kContractTypeCount> present{};

    bool has(ContractType t) const { return present[static_cast<std::size_t>(static_cast<int>(t))]; }
    const Blueprint& of(ContractType t) const {
        if (!has(t))
            raise(ErrorCode::UnknownContractType,
                  "no blueprint for " + std::string(contract_type_name(t)));
        return by_type[static_cast<std::size_t>(static_cast<int>(t))];
    }
};

SnippetLibrary parse_library(const std::string& json_text, const std::string& name);
SnippetLibrary load_library(const std::string& path);

BlueprintSet parse_blueprints(const std::string& json_text, const SnippetLibrary& lib);
BlueprintSet load_blueprints(const std::string& path, const SnippetLibrary& lib);

// Per-symbol option counts over the full universal symbol set, in global
// index order: the MultiDiscrete action space shape.
std::vector<int> action_space_shape(const SnippetLibrary& lib);

// Function symbols consumed by any blueprint, in global index order. Their
// count fixes the feedback width of the observation vector.
std::vector<int> universal_function_set(const SnippetLibrary& lib, const BlueprintSet& bps);

} // namespace gascraft

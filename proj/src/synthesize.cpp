// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "gascraft/synthesize.hpp"

#include <cctype>
#include <sstream>

namespace gascraft {

namespace {

bool numeric_fits(i128 value, SolType type) {
    const int width = sol_type_width(type);
    if (sol_type_is_signed(type)) {
        if (width >= 128) return true;
        const i128 bound = i128(1) << (width - 1);
        return value >= -bound && value < bound;
    }
    if (value < 0) return false;
    if (width >= 128) return true;
    return value < (i128(1) << width);
}

std::string indent_block(const std::string& text, const std::string& prefix) {
    std::ostringstream out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = text.find('\n', start);
        const std::string line = text.substr(
            start, end == std::string::npos ? std::string::npos : end - start);
        if (!line.empty()) out << prefix << line;
        if (end == std::string::npos) break;
        out << '\n';
        start = end + 1;
    }
    return out.str();
}

std::string replace_all(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

} // namespace

std::string format_value(const TypedValue& value, SolType type) {
    switch (value.kind) {
    case ValueKind::PartyAddress:
        if (type != SolType::Address)
            raise(ErrorCode::ValueTypeMismatch, "address value bound to " +
                  std::string(sol_type_name(type)));
        return value.text;
    case ValueKind::CurrencyCode:
        if (type != SolType::String)
            raise(ErrorCode::ValueTypeMismatch, "currency value bound to " +
                  std::string(sol_type_name(type)));
        return "\"" + value.text + "\"";
    default:
        break;
    }
    if (!sol_type_is_numeric(type))
        raise(ErrorCode::ValueTypeMismatch, "numeric value bound to " +
              std::string(sol_type_name(type)));
    if (!numeric_fits(value.num, type))
        raise(ErrorCode::LiteralOverflow, i128_to_string(value.num) +
              " does not fit " + std::string(sol_type_name(type)));
    return i128_to_string(value.num);
}

std::string sanitize_contract_name(const std::string& instance_id) {
    std::string name;
    name.reserve(instance_id.size() + 2);
    for (const char c : instance_id)
        name.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    if (name.empty() || std::isdigit(static_cast<unsigned char>(name.front())))
        name.insert(name.begin(), 'C');
    return name;
}

AssembledContract assemble(const SnippetLibrary& lib, const Blueprint& blueprint,
                           const std::string& instance_id, const VariableBindings& bindings,
                           const SnippetSelection& selection) {
    if (selection.variant.size() != static_cast<std::size_t>(lib.symbol_count()))
        raise(ErrorCode::MissingSelection,
              "selection covers " + std::to_string(selection.variant.size()) +
              " of " + std::to_string(lib.symbol_count()) + " symbols");

    AssembledContract contract;
    contract.contract_name = sanitize_contract_name(instance_id);

    for (const int symbol_index : blueprint.required) {
        const Symbol& symbol = lib.symbol(symbol_index);
        const auto& options = lib.variants(symbol_index);
        const int choice = selection.at(symbol_index);
        if (choice < 0 || choice >= static_cast<int>(options.size()))
            raise(ErrorCode::ActionOutOfRange,
                  symbol.name + " variant " + std::to_string(choice) + " of " +
                  std::to_string(options.size()));
        const Snippet& snippet = options[static_cast<std::size_t>(choice)];

        if (symbol.kind == SymbolKind::Variable) {
            const TypedValue* value = bindings.find(symbol.name);
            if (value == nullptr)
                raise(ErrorCode::UnknownSymbol, "no bound value for " + symbol.name);

            StateVariable var;
            var.symbol_index = symbol_index;
            var.name = symbol.name;
            var.type = snippet.declared_type;
            var.init_mode = snippet.init_mode;
            var.value = *value;
            var.extra_slots = snippet.storage_slots;
            const std::string literal = format_value(*value, snippet.declared_type);
            var.source = snippet.init_mode == InitMode::InlineLiteral
                             ? replace_all(snippet.template_text,
                                           "<" + symbol.name + "_VALUE>", literal)
                             : snippet.template_text;
            if (snippet.init_mode == InitMode::ConstructorParam)
                contract.constructor_params.push_back({symbol.name, snippet.declared_type, *value});
            contract.variables.push_back(std::move(var));
        } else {
            AssembledFunction fn;
            fn.symbol_index = symbol_index;
            fn.name = symbol.name;
            fn.static_op_costs = snippet.static_op_costs;
            fn.source = snippet.template_text;
            FunctionFragment fragment;
            const ParseResult parsed = parse_function(snippet.template_text, false, fragment);
            fn.parse_ok = parsed.ok;
            fn.parse_message = parsed.message;
            if (parsed.ok) fn.fragment = std::move(fragment);
            contract.functions.push_back(std::move(fn));
        }
    }

    std::ostringstream out;
    out << "// SPDX-License-Identifier: UNLICENSED\n";
    out << "pragma solidity ^0.8.19;\n\n";
    out << "contract " << contract.contract_name << " {\n";
    for (const StateVariable& var : contract.variables)
        out << "    " << var.source << "\n";
    out << "\n    mapping(address => int256) public balances;\n";

    if (!contract.constructor_params.empty()) {
        out << "\n    constructor(";
        for (std::size_t i = 0; i < contract.constructor_params.size(); ++i) {
            const ConstructorParam& p = contract.constructor_params[i];
            if (i > 0) out << ", ";
            out << sol_type_name(p.type);
            if (p.type == SolType::String) out << " memory";
            out << " " << p.name << "_";
        }
        out << ") {\n";
        for (const ConstructorParam& p : contract.constructor_params)
            out << "        " << p.name << " = " << p.name << "_;\n";
        out << "    }\n";
    }

    for (const AssembledFunction& fn : contract.functions)
        out << "\n" << indent_block(fn.source, "    ") << "\n";
    out << "}\n";
    contract.source = out.str();
    return contract;
}

} // namespace gascraft

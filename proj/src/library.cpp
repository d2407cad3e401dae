// Copyright 2026 The Gascraft Authors
// SPDX-License-Identifier: Apache-2.0

#include "gascraft/library.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gascraft/rng.hpp"

namespace gascraft {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

SymbolKind kind_from_name(const std::string& s) {
    if (s == "variable") return SymbolKind::Variable;
    if (s == "function") return SymbolKind::Function;
    raise(ErrorCode::MalformedDocument, "unknown symbol kind: " + s);
}

InitMode init_from_name(const std::string& s) {
    if (s == "inline_literal") return InitMode::InlineLiteral;
    if (s == "constructor_param") return InitMode::ConstructorParam;
    raise(ErrorCode::MalformedDocument, "unknown init mode: " + s);
}

Snippet parse_snippet(const json& record) {
    Snippet s;
    s.symbol = record.at("symbol").get<std::string>();
    s.kind = kind_from_name(record.at("kind").get<std::string>());
    s.variant = record.at("variant").get<int>();
    s.template_text = record.at("template").get<std::string>();
    if (s.kind == SymbolKind::Variable) {
        const auto type = sol_type_from_name(record.at("type").get<std::string>());
        if (!type)
            raise(ErrorCode::MalformedDocument, "unknown solidity type for " + s.symbol);
        s.declared_type = *type;
        s.init_mode = init_from_name(record.at("init").get<std::string>());
    }
    s.storage_slots = record.value("slots", 0);
    if (s.storage_slots < 0)
        raise(ErrorCode::MalformedDocument, "negative storage_slots for " + s.symbol);
    if (record.contains("ops"))
        for (const auto& [key, count] : record["ops"].items())
            s.static_op_costs[key] = count.get<int>();
    if (record.contains("uses"))
        for (const auto& u : record["uses"]) s.uses.push_back(u.get<std::string>());
    return s;
}

// Load-time checks for one variable snippet: the template must declare
// exactly the symbol's canonical name with the declared type, and inline
// variants must carry the symbol's own value placeholder.
void check_variable_snippet(const Snippet& s) {
    VarDeclFragment decl;
    const ParseResult r = parse_var_decl(s.template_text, true, decl);
    if (!r.ok)
        raise(ErrorCode::MalformedDocument,
              "unparsable template for " + s.symbol + ": " + r.message);
    if (decl.name != s.symbol)
        raise(ErrorCode::MalformedDocument,
              "template declares '" + decl.name + "' for symbol " + s.symbol);
    if (decl.type != s.declared_type)
        raise(ErrorCode::MalformedDocument,
              "declared_solidity_type disagrees with template for " + s.symbol);
    if (s.init_mode == InitMode::InlineLiteral) {
        if (!decl.has_init || !decl.init_is_placeholder || decl.placeholder != s.symbol)
            raise(ErrorCode::MalformedDocument,
                  "inline variant of " + s.symbol + " must initialize <" + s.symbol +
                      "_VALUE>");
    } else if (decl.has_init) {
        raise(ErrorCode::MalformedDocument,
              "constructor variant of " + s.symbol + " must not carry an initializer");
    }
}

void check_function_snippet(const Snippet& s, const std::set<std::string>& variable_names) {
    FunctionFragment fn;
    const ParseResult r = parse_function(s.template_text, true, fn);
    if (!r.ok)
        raise(ErrorCode::MalformedDocument,
              "unparsable template for " + s.symbol + ": " + r.message);
    if (fn.name != s.symbol)
        raise(ErrorCode::MalformedDocument,
              "template defines '" + fn.name + "' for symbol " + s.symbol);

    // uses must list exactly the non-local identifiers of the body, and each
    // must name a known variable symbol somewhere in the library.
    std::set<std::string> locals;
    std::vector<std::string> referenced;
    collect_identifiers(fn, referenced);
    std::vector<const std::vector<Stmt>*> blocks{&fn.body};
    while (!blocks.empty()) {
        const auto* block = blocks.back();
        blocks.pop_back();
        for (const Stmt& st : *block) {
            if (st.kind == Stmt::Kind::LocalDecl) locals.insert(st.name);
            if (!st.then_body.empty()) blocks.push_back(&st.then_body);
            if (!st.else_body.empty()) blocks.push_back(&st.else_body);
        }
    }

    std::set<std::string> external;
    for (const auto& name : referenced)
        if (!locals.count(name)) external.insert(name);

    const std::set<std::string> declared_uses(s.uses.begin(), s.uses.end());
    for (const auto& name : external) {
        if (!variable_names.count(name))
            raise(ErrorCode::DanglingVariableReference, s.symbol + " references " + name);
        if (!declared_uses.count(name))
            raise(ErrorCode::MalformedDocument,
                  s.symbol + " template reads " + name + " but uses does not declare it");
    }
    for (const auto& name : declared_uses)
        if (!external.count(name))
            raise(ErrorCode::MalformedDocument,
                  s.symbol + " declares unused variable " + name + " in uses");
}

} // namespace

int SnippetLibrary::index_of(std::string_view symbol_name) const {
    for (const Symbol& s : symbols)
        if (s.name == symbol_name) return s.global_index;
    return -1;
}

bool Blueprint::requires_symbol(int index) const {
    return std::find(required.begin(), required.end(), index) != required.end();
}

SnippetLibrary parse_library(const std::string& json_text, const std::string& name) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(ErrorCode::MalformedDocument, std::string("library parse: ") + e.what());
    }

    SnippetLibrary lib;
    lib.name = name;
    lib.content_hash = fnv1a(doc.dump());

    std::vector<json> records;
    if (doc.is_array()) {
        for (const auto& r : doc) records.push_back(r);
    } else if (doc.is_object() && doc.contains("snippets")) {
        if (doc.contains("name")) lib.name = doc["name"].get<std::string>();
        if (doc.contains("symbols")) {
            for (const auto& s : doc["symbols"]) {
                Symbol sym;
                sym.name = s.at("name").get<std::string>();
                sym.kind = kind_from_name(s.at("kind").get<std::string>());
                sym.global_index = static_cast<int>(lib.symbols.size());
                if (lib.index_of(sym.name) >= 0)
                    raise(ErrorCode::MalformedDocument, "duplicate symbol " + sym.name);
                lib.symbols.push_back(std::move(sym));
            }
        }
        for (const auto& r : doc["snippets"]) records.push_back(r);
    } else {
        raise(ErrorCode::MalformedDocument, "library must be an array or carry snippets");
    }

    // Symbols not declared up front are derived in order of first appearance.
    for (const auto& record : records) {
        const auto symbol_name = record.at("symbol").get<std::string>();
        if (lib.index_of(symbol_name) < 0) {
            Symbol sym;
            sym.name = symbol_name;
            sym.kind = kind_from_name(record.at("kind").get<std::string>());
            sym.global_index = static_cast<int>(lib.symbols.size());
            lib.symbols.push_back(std::move(sym));
        }
    }
    lib.options.resize(lib.symbols.size());

    std::set<std::string> variable_names;
    for (const Symbol& s : lib.symbols)
        if (s.kind == SymbolKind::Variable) variable_names.insert(s.name);

    for (const auto& record : records) {
        Snippet snippet = parse_snippet(record);
        const int index = lib.index_of(snippet.symbol);
        const Symbol& sym = lib.symbol(index);
        if (sym.kind != snippet.kind)
            raise(ErrorCode::MalformedDocument, "kind mismatch for " + snippet.symbol);
        auto& bucket = lib.options[static_cast<std::size_t>(index)];
        for (const Snippet& existing : bucket)
            if (existing.variant == snippet.variant)
                raise(ErrorCode::DuplicateVariant,
                      snippet.symbol + " variant " + std::to_string(snippet.variant));
        bucket.push_back(std::move(snippet));
    }

    for (std::size_t i = 0; i < lib.symbols.size(); ++i) {
        auto& bucket = lib.options[i];
        if (bucket.empty())
            raise(ErrorCode::EmptyOptionSet, lib.symbols[i].name);
        std::sort(bucket.begin(), bucket.end(),
                  [](const Snippet& a, const Snippet& b) { return a.variant < b.variant; });
        for (std::size_t v = 0; v < bucket.size(); ++v)
            if (bucket[v].variant != static_cast<int>(v))
                raise(ErrorCode::MalformedDocument,
                      "variant indices of " + lib.symbols[i].name +
                          " must be contiguous from 0");
    }

    for (const auto& bucket : lib.options)
        for (const Snippet& s : bucket) {
            if (s.kind == SymbolKind::Variable)
                check_variable_snippet(s);
            else
                check_function_snippet(s, variable_names);
        }
    return lib;
}

SnippetLibrary load_library(const std::string& path) {
    return parse_library(read_file(path), std::filesystem::path(path).stem().string());
}

BlueprintSet parse_blueprints(const std::string& json_text, const SnippetLibrary& lib) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        raise(ErrorCode::MalformedDocument, std::string("blueprint parse: ") + e.what());
    }
    if (!doc.is_object())
        raise(ErrorCode::MalformedDocument, "blueprint file must map type names to blueprints");

    BlueprintSet set;
    for (const auto& [type_name, body] : doc.items()) {
        const ContractType type = contract_type_from_name(type_name);
        Blueprint bp;
        bp.type = type;
        std::set<int> dedupe;
        for (const auto& entry : body.at("symbols")) {
            const auto symbol_name = entry.get<std::string>();
            const int index = lib.index_of(symbol_name);
            if (index < 0)
                raise(ErrorCode::EmptyOptionSet,
                      type_name + " requires unknown symbol " + symbol_name);
            if (!dedupe.insert(index).second)
                raise(ErrorCode::MalformedDocument,
                      type_name + " lists " + symbol_name + " twice");
            bp.required.push_back(index);
        }
        if (body.contains("functions"))
            for (const auto& [fn, rule] : body["functions"].items()) {
                if (lib.index_of(fn) < 0 ||
                    lib.symbol(lib.index_of(fn)).kind != SymbolKind::Function)
                    raise(ErrorCode::MalformedDocument,
                          type_name + " maps rule for unknown function " + fn);
                bp.function_rules[fn] = rule.get<std::string>();
            }
        for (const int index : bp.required) {
            const Symbol& sym = lib.symbol(index);
            if (sym.kind == SymbolKind::Function && !bp.function_rules.count(sym.name))
                raise(ErrorCode::MalformedDocument,
                      type_name + " is missing a settlement rule for " + sym.name);
        }
        set.by_type[static_cast<std::size_t>(static_cast<int>(type))] = std::move(bp);
        set.present[static_cast<std::size_t>(static_cast<int>(type))] = true;
    }
    return set;
}

BlueprintSet load_blueprints(const std::string& path, const SnippetLibrary& lib) {
    return parse_blueprints(read_file(path), lib);
}

std::vector<int> action_space_shape(const SnippetLibrary& lib) {
    std::vector<int> shape;
    shape.reserve(lib.options.size());
    for (const auto& bucket : lib.options) shape.push_back(static_cast<int>(bucket.size()));
    return shape;
}

std::vector<int> universal_function_set(const SnippetLibrary& lib, const BlueprintSet& bps) {
    std::set<int> used;
    for (const auto& bp : bps.by_type)
        for (const int index : bp.required)
            if (lib.symbol(index).kind == SymbolKind::Function) used.insert(index);
    return {used.begin(), used.end()};
}

} // namespace gascraft
